//! Golden checks on the worked example graphs.
//!
//! Fixture files, one record per line, `#` comments allowed:
//! - `centrality.txt`: `graph vertex score` (scores are compared at 2 decimals)
//! - `fields.txt`: `graph center member...`
//! - `wl.txt`: `graph label...` (round-1 WL labels in vertex order)
//!
//! `graph` is `G1` or `G2`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use deepmap_core::alignment::receptive_field;
use deepmap_core::centrality::eigenvector_centrality_default;
use deepmap_core::features::wl_refine;
use deepmap_core::fixtures::{self, vertex_of};
use deepmap_core::nn::grad_check;
use deepmap_core::{Graph, ModelConfig};

use crate::exit::{CliError, CliResult};

pub const CHECKS: [&str; 4] = ["centrality", "fields", "wl", "grad"];
const CENTRALITY_TOLERANCE: f64 = 0.005 + 1e-9;
const GRAD_TOLERANCE: f64 = 1e-6;

pub struct Fixtures {
    pub centrality: String,
    pub fields: String,
    pub wl: String,
}

impl Fixtures {
    pub fn builtin() -> Self {
        let mut centrality = String::new();
        for (g, names, scores) in [
            ("G1", fixtures::CENTRALITY_G1_NAMES, fixtures::CENTRALITY_G1_SCORES),
            ("G2", fixtures::CENTRALITY_G2_NAMES, fixtures::CENTRALITY_G2_SCORES),
        ] {
            for (n, s) in names.iter().zip(scores) {
                let _ = writeln!(centrality, "{g} {n} {s:.2}");
            }
        }
        let mut fields = String::new();
        for (g, table) in [("G1", fixtures::FIELDS_G1), ("G2", fixtures::FIELDS_G2)] {
            for (center, members) in table {
                let m: Vec<String> = members.iter().map(char::to_string).collect();
                let _ = writeln!(fields, "{g} {center} {}", m.join(" "));
            }
        }
        let mut wl = String::new();
        for (g, labels) in [("G1", fixtures::WL_G1_ROUND1), ("G2", fixtures::WL_G2_ROUND1)] {
            let l: Vec<String> = labels.iter().map(u32::to_string).collect();
            let _ = writeln!(wl, "{g} {}", l.join(" "));
        }
        Fixtures { centrality, fields, wl }
    }

    pub fn load(dir: &Path) -> CliResult<Self> {
        let read = |name: &str| {
            let p = dir.join(name);
            fs::read_to_string(&p).map_err(|e| CliError::from_io(&p, e))
        };
        Ok(Fixtures {
            centrality: read("centrality.txt")?,
            fields: read("fields.txt")?,
            wl: read("wl.txt")?,
        })
    }

    pub fn dump(&self, dir: &Path) -> CliResult<()> {
        fs::create_dir_all(dir).map_err(|e| CliError::from_io(dir, e))?;
        for (name, text) in [("centrality.txt", &self.centrality), ("fields.txt", &self.fields), ("wl.txt", &self.wl)] {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| CliError::from_io(&p, e))?;
        }
        Ok(())
    }
}

fn records(text: &str) -> impl Iterator<Item = Vec<&str>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").split_whitespace().collect::<Vec<_>>())
        .filter(|t| !t.is_empty())
}

fn centrality_graph(tag: &str) -> Result<(Graph, &'static [char]), String> {
    let (g1, g2) = fixtures::centrality_pair();
    match tag {
        "G1" => Ok((g1, fixtures::CENTRALITY_G1_NAMES)),
        "G2" => Ok((g2, fixtures::CENTRALITY_G2_NAMES)),
        _ => Err(format!("unknown graph {tag:?}")),
    }
}

fn vertex(names: &[char], token: &str) -> Result<usize, String> {
    let mut chars = token.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if names.contains(&c) => Ok(vertex_of(names, c)),
        _ => Err(format!("unknown vertex {token:?}")),
    }
}

fn check_centrality(text: &str) -> Result<String, String> {
    let mut count = 0;
    for rec in records(text) {
        let [g, v, s] = rec[..] else {
            return Err(format!("malformed record {rec:?}"));
        };
        let (graph, names) = centrality_graph(g)?;
        let want: f64 = s.parse().map_err(|_| format!("bad score {s:?}"))?;
        let got = eigenvector_centrality_default(&graph).scores[vertex(names, v)?];
        if (got - want).abs() > CENTRALITY_TOLERANCE {
            return Err(format!("{g} vertex {v}: computed {got:.4}, expected {want}"));
        }
        count += 1;
    }
    Ok(format!("{count} scores match"))
}

fn check_fields(text: &str) -> Result<String, String> {
    let mut count = 0;
    for rec in records(text) {
        if rec.len() < 3 {
            return Err(format!("malformed record {rec:?}"));
        }
        let (graph, names) = centrality_graph(rec[0])?;
        let c = eigenvector_centrality_default(&graph);
        let center = vertex(names, rec[1])?;
        let field = receptive_field(&graph, center, &c, rec.len() - 2).map_err(|e| e.to_string())?;
        let got: Vec<String> = field
            .members
            .iter()
            .map(|m| m.map_or("-".to_string(), |v| names[v].to_string()))
            .collect();
        if got != rec[2..] {
            return Err(format!("{} center {}: computed {got:?}, expected {:?}", rec[0], rec[1], &rec[2..]));
        }
        count += 1;
    }
    Ok(format!("{count} fields match"))
}

fn check_wl(text: &str) -> Result<String, String> {
    let refinement = wl_refine(&fixtures::wl_dataset(), 1);
    let mut count = 0;
    for rec in records(text) {
        let id = match rec[0] {
            "G1" => 0,
            "G2" => 1,
            other => return Err(format!("unknown graph {other:?}")),
        };
        let want: Vec<u32> = rec[1..]
            .iter()
            .map(|t| t.parse().map_err(|_| format!("bad label {t:?}")))
            .collect::<Result<_, _>>()?;
        let got = refinement.labels(id, 1);
        if got != want.as_slice() {
            return Err(format!("{}: computed {got:?}, expected {want:?}", rec[0]));
        }
        count += 1;
    }
    Ok(format!("{count} graphs match"))
}

fn check_grad() -> Result<String, String> {
    let report = grad_check(&ModelConfig::new(2, 2, 3, 3), 7, GRAD_TOLERANCE).map_err(|e| e.to_string())?;
    if report.passed() {
        Ok(format!("max relative error {:.2e}", report.max_error()))
    } else {
        Err(format!("groups {:?} exceed {GRAD_TOLERANCE:e}", report.failing()))
    }
}

/// Runs the selected checks, printing one line each; fails naming every
/// failing check.
pub fn run(only: &[String], fixtures: &Fixtures) -> CliResult<()> {
    for name in only {
        if !CHECKS.contains(&name.as_str()) {
            return Err(CliError::Argument(format!("unknown check {name:?}; expected one of {CHECKS:?}")));
        }
    }
    let mut failed = Vec::new();
    for name in CHECKS {
        if !only.is_empty() && !only.iter().any(|o| o == name) {
            continue;
        }
        let outcome = match name {
            "centrality" => check_centrality(&fixtures.centrality),
            "fields" => check_fields(&fixtures.fields),
            "wl" => check_wl(&fixtures.wl),
            _ => check_grad(),
        };
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                println!("FAIL {name}: {detail}");
                failed.push(name);
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_fixtures_pass() {
        let f = Fixtures::builtin();
        check_centrality(&f.centrality).unwrap();
        check_fields(&f.fields).unwrap();
        check_wl(&f.wl).unwrap();
    }

    #[test]
    fn corrupted_records_fail() {
        assert!(check_centrality("G1 e 0.70\n").is_err());
        assert!(check_fields("G2 z u x y\n").is_err());
        assert!(check_wl("G1 8 10 11 7 7 10\n").is_err());
        assert!(check_wl("G3 1\n").is_err());
        assert!(check_centrality("G1 e\n").is_err());
    }
}
