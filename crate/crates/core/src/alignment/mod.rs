//! Fixed-shape network inputs from variable-size graphs.
//!
//! Vertices are ordered by descending eigenvector centrality and padded with
//! dummies to the largest graph size `w`. Every sequence slot expands into a
//! receptive field of `r` vertices found by breadth-first search, so each
//! graph becomes `w * r` feature rows. Dummy slots and dummy field members
//! contribute zero rows.

mod io;

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::centrality::CentralityVector;
use crate::error::{Error, Result};
use crate::features::VertexFeatureMatrix;
use crate::graph::{Graph, GraphDataset};

pub use io::{read_tensor, write_tensor, TENSOR_HEADER_BYTES};

/// Centrality-sorted vertices of one graph, `None` marking dummy padding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexSequence {
    pub order: Vec<Option<usize>>,
}

impl VertexSequence {
    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.order.iter().flatten().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceptiveField {
    pub center: usize,
    /// Exactly `r` entries, highest centrality first, dummies (`None`) last.
    pub members: Vec<Option<usize>>,
}

fn check_centrality(g: &Graph, c: &CentralityVector) -> Result<()> {
    if c.len() != g.num_vertices() {
        return Err(Error::argument(format!(
            "centrality has {} scores for {} vertices",
            c.len(),
            g.num_vertices()
        )));
    }
    Ok(())
}

pub fn vertex_sequence(g: &Graph, c: &CentralityVector, w: usize) -> Result<VertexSequence> {
    check_centrality(g, c)?;
    if w < g.num_vertices() {
        return Err(Error::argument(format!(
            "sequence length {w} shorter than graph size {}",
            g.num_vertices()
        )));
    }
    let mut order: Vec<Option<usize>> = c.ranking().into_iter().map(Some).collect();
    order.resize(w, None);
    Ok(VertexSequence { order })
}

/// The center plus `r - 1` companions chosen ring by ring outward from it:
/// whole BFS rings are taken while they fit, the first ring that does not
/// fit contributes its highest-centrality vertices. Missing members (small
/// components) are dummies.
pub fn receptive_field(
    g: &Graph,
    center: usize,
    c: &CentralityVector,
    r: usize,
) -> Result<ReceptiveField> {
    check_centrality(g, c)?;
    if center >= g.num_vertices() {
        return Err(Error::argument(format!("center {center} out of range")));
    }
    if r == 0 {
        return Err(Error::argument("receptive field size must be >= 1"));
    }
    let needed = r - 1;
    let mut chosen: Vec<usize> = Vec::with_capacity(r);
    let mut seen = vec![false; g.num_vertices()];
    seen[center] = true;
    let mut ring = vec![center];
    while chosen.len() < needed && !ring.is_empty() {
        let mut next = Vec::new();
        for &u in &ring {
            for &v in g.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    next.push(v);
                }
            }
        }
        let room = needed - chosen.len();
        if next.len() > room {
            let mut overflow = next.clone();
            overflow.sort_by(|&a, &b| c.compare(a, b));
            chosen.extend_from_slice(&overflow[..room]);
        } else {
            chosen.extend_from_slice(&next);
        }
        ring = next;
    }
    chosen.push(center);
    chosen.sort_by(|&a, &b| c.compare(a, b));
    let mut members: Vec<Option<usize>> = chosen.into_iter().map(Some).collect();
    members.resize(r, None);
    Ok(ReceptiveField { center, members })
}

/// Sparse row of an aligned input: `(column, value)`, columns ascending.
pub type InputRow = Vec<(u32, f64)>;

/// Dataset-level network input of logical shape `n x (w * r) x m`. Rows of
/// graph `i` are grouped into `w` blocks of `r`, one block per sequence slot.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedTensor {
    pub w: usize,
    pub r: usize,
    pub m: usize,
    graphs: Vec<Vec<InputRow>>,
}

impl AlignedTensor {
    pub fn new(w: usize, r: usize, m: usize, graphs: Vec<Vec<InputRow>>) -> Result<Self> {
        for (i, rows) in graphs.iter().enumerate() {
            if rows.len() != w * r {
                return Err(Error::integrity(format!(
                    "graph {i} has {} rows, expected {}",
                    rows.len(),
                    w * r
                )));
            }
            if rows.iter().flatten().any(|&(c, _)| c as usize >= m) {
                return Err(Error::integrity(format!("graph {i} has a column >= {m}")));
            }
        }
        Ok(AlignedTensor { w, r, m, graphs })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn rows(&self, graph: usize) -> &[InputRow] {
        &self.graphs[graph]
    }

    /// The `r` rows of one sequence slot.
    pub fn block(&self, graph: usize, slot: usize) -> &[InputRow] {
        &self.graphs[graph][slot * self.r..(slot + 1) * self.r]
    }

    pub fn get(&self, graph: usize, row: usize, column: usize) -> f64 {
        let row = &self.graphs[graph][row];
        row.binary_search_by_key(&(column as u32), |&(c, _)| c)
            .map_or(0.0, |i| row[i].1)
    }

    /// Dense `(w * r) x m` slice of one graph, row-major.
    pub fn dense_slice(&self, graph: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.w * self.r * self.m];
        for (i, row) in self.graphs[graph].iter().enumerate() {
            for &(c, v) in row {
                out[i * self.m + c as usize] = v;
            }
        }
        out
    }

    pub fn select(&self, ids: &[usize]) -> AlignedTensor {
        AlignedTensor {
            w: self.w,
            r: self.r,
            m: self.m,
            graphs: ids.iter().map(|&i| self.graphs[i].clone()).collect(),
        }
    }
}

fn to_input_row(row: &[(usize, u64)]) -> InputRow {
    row.iter().map(|&(c, n)| (c as u32, n as f64)).collect()
}

/// Rows of one graph: for each sequence slot, its field members' feature
/// rows in field order; dummies give zero rows.
pub fn align_graph(
    g: &Graph,
    features: &VertexFeatureMatrix,
    c: &CentralityVector,
    w: usize,
    r: usize,
) -> Result<Vec<InputRow>> {
    if features.num_vertices() != g.num_vertices() {
        return Err(Error::integrity(format!(
            "graph {} has {} vertices but {} feature rows",
            features.graph_id,
            g.num_vertices(),
            features.num_vertices()
        )));
    }
    let sequence = vertex_sequence(g, c, w)?;
    let mut rows = Vec::with_capacity(w * r);
    for slot in &sequence.order {
        match slot {
            Some(v) => {
                let field = receptive_field(g, *v, c, r)?;
                for member in field.members {
                    rows.push(member.map_or_else(Vec::new, |u| to_input_row(features.row(u))));
                }
            }
            None => rows.extend(std::iter::repeat_with(Vec::new).take(r)),
        }
    }
    Ok(rows)
}

/// Assembles the whole dataset with `w` = largest graph size.
pub fn assemble_input(
    dataset: &GraphDataset,
    features: &[VertexFeatureMatrix],
    centralities: &[CentralityVector],
    r: usize,
) -> Result<AlignedTensor> {
    assemble_input_with_width(dataset, features, centralities, r, dataset.max_vertices())
}

/// As [`assemble_input`] with an explicit sequence length `w`, which must
/// be at least the largest graph size.
pub fn assemble_input_with_width(
    dataset: &GraphDataset,
    features: &[VertexFeatureMatrix],
    centralities: &[CentralityVector],
    r: usize,
    w: usize,
) -> Result<AlignedTensor> {
    if features.len() != dataset.len() || centralities.len() != dataset.len() {
        return Err(Error::integrity(format!(
            "{} graphs, {} feature matrices, {} centrality vectors",
            dataset.len(),
            features.len(),
            centralities.len()
        )));
    }
    if r == 0 {
        return Err(Error::argument("receptive field size must be >= 1"));
    }
    let m = features.first().map_or(0, |f| f.dimension);
    if let Some(bad) = features.iter().find(|f| f.dimension != m) {
        return Err(Error::integrity(format!(
            "feature dimension {} of graph {} differs from {m}",
            bad.dimension, bad.graph_id
        )));
    }
    let graphs = dataset
        .graphs()
        .par_iter()
        .zip(features)
        .zip(centralities)
        .map(|((g, f), c)| align_graph(g, f, c, w, r))
        .collect::<Result<Vec<_>>>()?;
    AlignedTensor::new(w, r, m, graphs)
}

/// Centrality of every graph with the default tolerance and iteration cap.
pub fn dataset_centralities(dataset: &GraphDataset) -> Vec<CentralityVector> {
    dataset
        .graphs()
        .par_iter()
        .map(crate::centrality::eigenvector_centrality_default)
        .collect()
}

/// Smallest gap between any two centrality scores of a graph.
pub fn min_centrality_gap(c: &CentralityVector) -> f64 {
    let mut s = c.scores.clone();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    s.windows(2).map(|p| p[0] - p[1]).fold(f64::INFINITY, f64::min)
}
