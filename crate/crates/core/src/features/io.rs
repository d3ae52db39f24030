//! Text serialization of vertex feature matrices and feature indices.
//!
//! Vertex features: a header line `graph_id m`, then one line per vertex,
//! `vertex_id column:count column:count ...`, columns ascending.
//!
//! Index manifest: `kind <kind>`, `dimension <m>`, then `column key` lines.

use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::features::{FeatureIndex, FeatureKey, FeatureKind, VertexFeatureMatrix};

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Integrity {
        line: Some(line),
        message: msg.to_string(),
    }
}

pub fn write_vertex_features<W: Write>(mut out: W, vfm: &VertexFeatureMatrix) -> std::io::Result<()> {
    writeln!(out, "{} {}", vfm.graph_id, vfm.dimension)?;
    for (v, row) in vfm.rows.iter().enumerate() {
        write!(out, "{v}")?;
        for (c, n) in row {
            write!(out, " {c}:{n}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_vertex_features<R: BufRead>(input: R) -> Result<VertexFeatureMatrix> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty feature file"))?;
    let header = header.map_err(|e| parse_err(1, e))?;
    let mut parts = header.split_whitespace();
    let (Some(graph_id), Some(dimension), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(parse_err(1, "expected header \"graph_id m\""));
    };
    let graph_id: usize = graph_id.parse().map_err(|_| parse_err(1, "bad graph id"))?;
    let dimension: usize = dimension.parse().map_err(|_| parse_err(1, "bad dimension"))?;

    let mut rows = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| parse_err(lineno, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let v: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(lineno, "bad vertex id"))?;
        if v != rows.len() {
            return Err(parse_err(lineno, format!("expected vertex {}, got {v}", rows.len())));
        }
        let mut row = Vec::new();
        for token in tokens {
            let (c, n) = token
                .split_once(':')
                .and_then(|(c, n)| Some((c.parse::<usize>().ok()?, n.parse::<u64>().ok()?)))
                .ok_or_else(|| parse_err(lineno, format!("bad entry {token:?}")))?;
            if c >= dimension {
                return Err(parse_err(lineno, format!("column {c} >= dimension {dimension}")));
            }
            row.push((c, n));
        }
        rows.push(row);
    }
    Ok(VertexFeatureMatrix {
        graph_id,
        dimension,
        rows,
    })
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut tokens = s.split_whitespace();
        let kind = tokens.next().unwrap_or_default();
        let mut param = |name: &str| -> Result<u64> {
            let token = tokens
                .next()
                .ok_or_else(|| Error::argument(format!("missing {name} in {s:?}")))?;
            token
                .strip_prefix(name)
                .and_then(|t| t.strip_prefix('='))
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::argument(format!("bad {name} in {s:?}")))
        };
        let parsed = match kind {
            "sp" => FeatureKind::ShortestPath,
            "wl" => FeatureKind::WlSubtree {
                iterations: param("h")? as usize,
            },
            "gk" => FeatureKind::Graphlet {
                size: param("k")? as usize,
                samples: param("q")? as usize,
                seed: param("seed")?,
            },
            other => return Err(Error::argument(format!("unknown feature kind {other:?}"))),
        };
        parsed.validate()?;
        Ok(parsed)
    }
}

pub fn write_index<W: Write>(mut out: W, index: &FeatureIndex) -> std::io::Result<()> {
    writeln!(out, "kind {}", index.kind())?;
    writeln!(out, "dimension {}", index.dimension())?;
    for (c, key) in index.keys().iter().enumerate() {
        writeln!(out, "{c} {key}")?;
    }
    Ok(())
}

pub fn read_index<R: BufRead>(input: R) -> Result<FeatureIndex> {
    let lines: Vec<String> = input
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| parse_err(0, e))?;
    let kind = lines
        .first()
        .and_then(|l| l.strip_prefix("kind "))
        .ok_or_else(|| parse_err(1, "expected \"kind ...\""))?
        .parse::<FeatureKind>()?;
    let dimension: usize = lines
        .get(1)
        .and_then(|l| l.strip_prefix("dimension "))
        .and_then(|d| d.trim().parse().ok())
        .ok_or_else(|| parse_err(2, "expected \"dimension m\""))?;
    let mut keys = Vec::with_capacity(dimension);
    for (i, line) in lines.iter().enumerate().skip(2) {
        if line.trim().is_empty() {
            continue;
        }
        let (c, key) = line
            .split_once(' ')
            .ok_or_else(|| parse_err(i + 1, "expected \"column key\""))?;
        if c.parse::<usize>().ok() != Some(keys.len()) {
            return Err(parse_err(i + 1, "columns out of order"));
        }
        keys.push(key.parse::<FeatureKey>()?);
    }
    if keys.len() != dimension {
        return Err(parse_err(0, format!("{} keys for dimension {dimension}", keys.len())));
    }
    if keys.windows(2).any(|w| w[0] >= w[1]) {
        return Err(parse_err(0, "keys are not in canonical order"));
    }
    Ok(FeatureIndex::from_keys(kind, keys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::featurize_dataset;
    use crate::fixtures;
    use std::io::Cursor;

    #[test]
    fn vertex_features_format() {
        let vfm = VertexFeatureMatrix {
            graph_id: 3,
            dimension: 5,
            rows: vec![vec![(0, 2), (4, 1)], vec![]],
        };
        let mut buf = Vec::new();
        write_vertex_features(&mut buf, &vfm).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "3 5\n0 0:2 4:1\n1\n");
        assert_eq!(read_vertex_features(Cursor::new(buf)).unwrap(), vfm);
    }

    #[test]
    fn rejects_out_of_range_column() {
        let err = read_vertex_features(Cursor::new("0 2\n0 5:1\n")).unwrap_err();
        assert!(matches!(err, Error::Integrity { line: Some(2), .. }), "{err}");
    }

    #[test]
    fn index_round_trip() {
        for kind in [
            FeatureKind::WlSubtree { iterations: 2 },
            FeatureKind::ShortestPath,
            FeatureKind::Graphlet { size: 4, samples: 7, seed: 3 },
        ] {
            let (index, _) = featurize_dataset(&fixtures::wl_dataset(), kind).unwrap();
            let mut buf = Vec::new();
            write_index(&mut buf, &index).unwrap();
            assert_eq!(read_index(Cursor::new(buf)).unwrap(), index);
        }
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("wl h=3".parse::<FeatureKind>().unwrap(), FeatureKind::WlSubtree { iterations: 3 });
        assert!("gk k=7 q=1 seed=0".parse::<FeatureKind>().is_err());
        assert!("wl".parse::<FeatureKind>().is_err());
        assert!("nope".parse::<FeatureKind>().is_err());
    }
}
