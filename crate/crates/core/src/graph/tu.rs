//! Reader and writer for the TU Dortmund benchmark text format.
//!
//! A dataset `NAME` is spread over `NAME_A.txt` (1-based `i, j` edge pairs
//! over the global vertex numbering), `NAME_graph_indicator.txt` (graph id
//! per vertex), `NAME_graph_labels.txt` (class per graph) and optionally
//! `NAME_node_labels.txt`.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphDataset};

/// Counters collected while reading a dataset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TuStats {
    pub self_loops_dropped: usize,
    pub duplicate_edges: usize,
    /// Amount added to every node label so that the smallest becomes 1.
    pub label_shift: i64,
}

fn tu_path(dir: &Path, name: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{name}_{suffix}.txt"))
}

fn read_file(path: &Path, mandatory: bool) -> Result<Option<String>> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(Some(text)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound && !mandatory => Ok(None),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::Format {
            file: path.to_path_buf(),
            message: "mandatory file is missing".into(),
        }),
        Err(e) => Err(Error::io(path, e)),
    }
}

/// Non-empty lines with their 1-based line numbers. Handles CRLF.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_ints(path: &Path, text: &str) -> Result<Vec<i64>> {
    lines(text)
        .map(|(line, l)| {
            l.parse::<i64>().map_err(|_| Error::Format {
                file: path.to_path_buf(),
                message: format!("line {line}: expected an integer, got {l:?}"),
            })
        })
        .collect()
}

pub fn read_tu_dataset(dir: impl AsRef<Path>, name: &str) -> Result<GraphDataset> {
    let (dataset, stats) = read_tu_dataset_with_stats(dir, name)?;
    if stats.self_loops_dropped > 0 {
        log::warn!("{name}: dropped {} self-loop edge lines", stats.self_loops_dropped);
    }
    Ok(dataset)
}

pub fn read_tu_dataset_with_stats(
    dir: impl AsRef<Path>,
    name: &str,
) -> Result<(GraphDataset, TuStats)> {
    let dir = dir.as_ref();
    let edge_path = tu_path(dir, name, "A");
    let indicator_path = tu_path(dir, name, "graph_indicator");
    let graph_label_path = tu_path(dir, name, "graph_labels");
    let node_label_path = tu_path(dir, name, "node_labels");

    let indicator_text = read_file(&indicator_path, true)?.unwrap_or_default();
    let edge_text = read_file(&edge_path, true)?.unwrap_or_default();
    let graph_label_text = read_file(&graph_label_path, true)?.unwrap_or_default();
    let node_label_text = read_file(&node_label_path, false)?;

    let indicator = parse_ints(&indicator_path, &indicator_text)?;
    let raw_classes = parse_ints(&graph_label_path, &graph_label_text)?;
    let num_graphs = raw_classes.len();
    if num_graphs == 0 {
        return Err(Error::Format {
            file: graph_label_path,
            message: "no graph labels".into(),
        });
    }

    // Vertices of graph g occupy one contiguous block of the global numbering.
    let mut offsets = vec![usize::MAX; num_graphs + 1];
    let mut previous = 0i64;
    for (v, &g) in indicator.iter().enumerate() {
        if g < 1 || g as usize > num_graphs {
            return Err(Error::Integrity {
                line: Some(v + 1),
                message: format!("graph id {g} outside 1..={num_graphs} in {}", indicator_path.display()),
            });
        }
        if g < previous {
            return Err(Error::Integrity {
                line: Some(v + 1),
                message: "graph indicator is not sorted by graph id".into(),
            });
        }
        if g != previous {
            for slot in (previous as usize)..(g as usize) {
                offsets[slot] = v;
            }
            previous = g;
        }
    }
    for slot in offsets.iter_mut().skip(previous as usize) {
        *slot = indicator.len();
    }
    let graph_of = |v: usize| indicator[v] as usize - 1;

    let mut stats = TuStats::default();
    let mut edges_per_graph: Vec<BTreeSet<(usize, usize)>> = vec![BTreeSet::new(); num_graphs];
    for (line, l) in lines(&edge_text) {
        let mut parts = l.split(',').map(str::trim);
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Format {
                file: edge_path.clone(),
                message: format!("line {line}: expected \"i, j\", got {l:?}"),
            });
        };
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Format {
                file: edge_path.clone(),
                message: format!("line {line}: bad vertex id {s:?}"),
            })
        };
        let (a, b) = (parse(a)?, parse(b)?);
        if a == 0 || b == 0 || a > indicator.len() || b > indicator.len() {
            return Err(Error::Integrity {
                line: Some(line),
                message: format!(
                    "edge ({a}, {b}) references a vertex outside 1..={}",
                    indicator.len()
                ),
            });
        }
        let (u, v) = (a - 1, b - 1);
        let g = graph_of(u);
        if graph_of(v) != g {
            return Err(Error::Integrity {
                line: Some(line),
                message: format!("edge ({a}, {b}) crosses graphs {} and {}", g + 1, graph_of(v) + 1),
            });
        }
        if u == v {
            stats.self_loops_dropped += 1;
            continue;
        }
        let key = (u.min(v) - offsets[g], u.max(v) - offsets[g]);
        if !edges_per_graph[g].insert(key) {
            stats.duplicate_edges += 1;
        }
    }

    let node_labels = match &node_label_text {
        Some(text) => {
            let labels = parse_ints(&node_label_path, text)?;
            if labels.len() != indicator.len() {
                return Err(Error::Integrity {
                    line: None,
                    message: format!(
                        "{} node labels for {} vertices",
                        labels.len(),
                        indicator.len()
                    ),
                });
            }
            let min = labels.iter().copied().min().unwrap_or(1);
            stats.label_shift = if min < 1 { 1 - min } else { 0 };
            Some(labels.into_iter().map(|l| (l + stats.label_shift) as u32).collect::<Vec<_>>())
        }
        None => None,
    };

    let mut graphs = Vec::with_capacity(num_graphs);
    for (g, edges) in edges_per_graph.iter().enumerate() {
        let (start, end) = (offsets[g], offsets[g + 1]);
        let edges: Vec<_> = edges.iter().copied().collect();
        let graph = match &node_labels {
            Some(labels) => Graph::from_edges(labels[start..end].to_vec(), &edges)?,
            None => Graph::from_edges_degree_labeled(end - start, &edges)?,
        };
        graphs.push(graph);
    }

    let distinct: BTreeSet<i64> = raw_classes.iter().copied().collect();
    let distinct: Vec<i64> = distinct.into_iter().collect();
    let classes = raw_classes
        .iter()
        .map(|c| distinct.binary_search(c).expect("present"))
        .collect();

    let dataset = GraphDataset::new(name, graphs, classes, distinct.len())?;
    Ok((dataset, stats))
}

/// Writes the dataset in TU format, node labels included. Class indices are
/// written as-is, so reading the files back yields an identical dataset.
pub fn write_tu_dataset(dataset: &GraphDataset, dir: impl AsRef<Path>, name: &str) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let write = |suffix: &str, body: &dyn Fn(&mut dyn Write) -> std::io::Result<()>| -> Result<()> {
        let path = tu_path(dir, name, suffix);
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = BufWriter::new(file);
        body(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(&path, e))
    };

    write("A", &|out| {
        let mut offset = 0;
        for g in dataset.graphs() {
            for (u, v) in g.edges() {
                writeln!(out, "{}, {}", u + offset + 1, v + offset + 1)?;
                writeln!(out, "{}, {}", v + offset + 1, u + offset + 1)?;
            }
            offset += g.num_vertices();
        }
        Ok(())
    })?;
    write("graph_indicator", &|out| {
        for (i, g) in dataset.graphs().iter().enumerate() {
            for _ in 0..g.num_vertices() {
                writeln!(out, "{}", i + 1)?;
            }
        }
        Ok(())
    })?;
    write("graph_labels", &|out| {
        for c in dataset.class_labels() {
            writeln!(out, "{c}")?;
        }
        Ok(())
    })?;
    write("node_labels", &|out| {
        for g in dataset.graphs() {
            for l in g.labels() {
                writeln!(out, "{l}")?;
            }
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    fn write_files(dir: &Path, name: &str, files: &[(&str, &str)]) {
        for (suffix, body) in files {
            fs::write(tu_path(dir, name, suffix), body).unwrap();
        }
    }

    #[test]
    fn two_triangles() {
        let tmp = TempDir::new().unwrap();
        write_files(
            tmp.path(),
            "T",
            &[
                ("A", "1, 2\n2, 3\n3, 1\n4, 5\n5, 6\n6, 4\n"),
                ("graph_indicator", "1\n1\n1\n2\n2\n2\n"),
                ("graph_labels", "1\n2\n"),
            ],
        );
        let ds = read_tu_dataset(tmp.path(), "T").unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.class_count(), 2);
        assert_eq!(ds.class_labels(), &[0, 1]);
        for g in ds.graphs() {
            assert_eq!(g.num_vertices(), 3);
            assert_eq!(g.num_edges(), 3);
            g.check_invariants().unwrap();
        }
    }

    #[test]
    fn reversed_duplicate_is_one_edge() {
        let tmp = TempDir::new().unwrap();
        write_files(
            tmp.path(),
            "D",
            &[("A", "1, 2\r\n2, 1\r\n"), ("graph_indicator", "1\r\n1\r\n"), ("graph_labels", "-1\r\n")],
        );
        let (ds, stats) = read_tu_dataset_with_stats(tmp.path(), "D").unwrap();
        assert_eq!(ds.graph(0).num_edges(), 1);
        assert_eq!(stats.duplicate_edges, 1);
        assert_eq!(ds.class_labels(), &[0]);
    }

    #[test]
    fn missing_node_labels_fall_back_to_degree() {
        let tmp = TempDir::new().unwrap();
        write_files(
            tmp.path(),
            "P",
            &[("A", "1, 2\n2, 3\n"), ("graph_indicator", "1\n1\n1\n"), ("graph_labels", "0\n")],
        );
        let ds = read_tu_dataset(tmp.path(), "P").unwrap();
        assert_eq!(ds.graph(0).labels(), &[2, 3, 2]);
    }

    #[test]
    fn zero_based_node_labels_are_shifted() {
        let tmp = TempDir::new().unwrap();
        write_files(
            tmp.path(),
            "Z",
            &[
                ("A", "1, 2\n"),
                ("graph_indicator", "1\n1\n"),
                ("graph_labels", "3\n"),
                ("node_labels", "0\n4\n"),
            ],
        );
        let (ds, stats) = read_tu_dataset_with_stats(tmp.path(), "Z").unwrap();
        assert_eq!(stats.label_shift, 1);
        assert_eq!(ds.graph(0).labels(), &[1, 5]);
    }

    #[test]
    fn missing_mandatory_file_is_named() {
        let tmp = TempDir::new().unwrap();
        write_files(tmp.path(), "M", &[("A", "1, 2\n"), ("graph_labels", "1\n")]);
        let err = read_tu_dataset(tmp.path(), "M").unwrap_err();
        assert!(matches!(err, Error::Format { .. }));
        assert!(err.to_string().contains("M_graph_indicator.txt"), "{err}");
    }

    #[test]
    fn out_of_range_vertex_reports_line() {
        let tmp = TempDir::new().unwrap();
        write_files(
            tmp.path(),
            "R",
            &[("A", "1, 2\n2, 9\n"), ("graph_indicator", "1\n1\n"), ("graph_labels", "1\n")],
        );
        match read_tu_dataset(tmp.path(), "R").unwrap_err() {
            Error::Integrity { line, .. } => assert_eq!(line, Some(2)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn cross_graph_edge_is_integrity_error() {
        let tmp = TempDir::new().unwrap();
        write_files(
            tmp.path(),
            "X",
            &[("A", "1, 3\n"), ("graph_indicator", "1\n1\n2\n"), ("graph_labels", "1\n2\n")],
        );
        assert!(matches!(
            read_tu_dataset(tmp.path(), "X").unwrap_err(),
            Error::Integrity { line: Some(1), .. }
        ));
    }

    #[test]
    fn self_loops_are_counted_and_dropped() {
        let tmp = TempDir::new().unwrap();
        write_files(
            tmp.path(),
            "S",
            &[("A", "1, 1\n1, 2\n"), ("graph_indicator", "1\n1\n"), ("graph_labels", "1\n")],
        );
        let (ds, stats) = read_tu_dataset_with_stats(tmp.path(), "S").unwrap();
        assert_eq!(stats.self_loops_dropped, 1);
        assert_eq!(ds.graph(0).num_edges(), 1);
    }

    #[test]
    fn write_then_read_round_trips() {
        let tmp = TempDir::new().unwrap();
        let ds = crate::fixtures::wl_dataset();
        write_tu_dataset(&ds, tmp.path(), "wl_example").unwrap();
        let back = read_tu_dataset(tmp.path(), "wl_example").unwrap();
        assert_eq!(back, ds);
    }
}
