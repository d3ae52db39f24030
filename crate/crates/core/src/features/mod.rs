//! Vertex feature maps: per-vertex counts of the substructures that contain
//! the vertex, over a column space shared by every graph of a dataset.
//!
//! Summing the rows of a [`VertexFeatureMatrix`] yields the usual graph-level
//! feature map of the corresponding R-convolution kernel.

mod graphlet;
mod io;
mod shortest_path;
mod wl;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphDataset};

pub use graphlet::{
    canonical_code, canonical_key_count, gk_raw_features, gk_vertex_features, graphlet_canonical_class,
    induced_code,
};
pub use io::{read_index, read_vertex_features, write_index, write_vertex_features};
pub use shortest_path::{sp_raw_features, sp_vertex_features};
pub use wl::{wl_refine, wl_vertex_features, WlRefinement, WlRefiner};

/// Sparse row: `(column, count)` pairs sorted by column, counts nonzero.
pub type SparseRow = Vec<(usize, u64)>;

/// Per-vertex substructure counts keyed by the substructure itself, before a
/// column index is applied. Each row is sorted by key.
pub type RawFeatures = Vec<Vec<(FeatureKey, u64)>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    /// `samples` random size-`size` graphlets per vertex.
    Graphlet { size: usize, samples: usize, seed: u64 },
    ShortestPath,
    /// WL subtree patterns from refinement rounds `0..=iterations`.
    WlSubtree { iterations: usize },
}

impl FeatureKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FeatureKind::Graphlet { size, samples, .. } => {
                if !(3..=5).contains(&size) {
                    return Err(Error::argument(format!("graphlet size {size} not in 3..=5")));
                }
                if samples == 0 {
                    return Err(Error::argument("graphlet sample count must be >= 1"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FeatureKind::Graphlet { .. } => "gk",
            FeatureKind::ShortestPath => "sp",
            FeatureKind::WlSubtree { .. } => "wl",
        }
    }

    /// Deterministic kinds give isomorphic graphs identical vertex maps.
    pub fn is_deterministic(&self) -> bool {
        !matches!(self, FeatureKind::Graphlet { .. })
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureKind::Graphlet { size, samples, seed } => {
                write!(f, "gk k={size} q={samples} seed={seed}")
            }
            FeatureKind::ShortestPath => write!(f, "sp"),
            FeatureKind::WlSubtree { iterations } => write!(f, "wl h={iterations}"),
        }
    }
}

/// Canonical identity of one atomic substructure. The derived order is the
/// column order of a [`FeatureIndex`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureKey {
    /// Isomorphism class of an unlabeled graphlet: minimal adjacency bit
    /// string over all vertex orders.
    Graphlet { size: u8, code: u16 },
    /// `(label(source), label(target), hop length)`.
    ShortestPath { source: u32, target: u32, length: u32 },
    /// Compressed WL label at one refinement round.
    Subtree { iteration: u32, label: u32 },
}

impl fmt::Display for FeatureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureKey::Graphlet { size, code } => write!(f, "gk:{size}:{code}"),
            FeatureKey::ShortestPath { source, target, length } => {
                write!(f, "sp:{source}:{target}:{length}")
            }
            FeatureKey::Subtree { iteration, label } => write!(f, "wl:{iteration}:{label}"),
        }
    }
}

impl std::str::FromStr for FeatureKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<u32> {
            parts
                .get(i)
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| Error::argument(format!("bad feature key {s:?}")))
        };
        match (parts.first().copied(), parts.len()) {
            (Some("gk"), 3) => Ok(FeatureKey::Graphlet {
                size: num(1)? as u8,
                code: num(2)? as u16,
            }),
            (Some("sp"), 4) => Ok(FeatureKey::ShortestPath {
                source: num(1)?,
                target: num(2)?,
                length: num(3)?,
            }),
            (Some("wl"), 3) => Ok(FeatureKey::Subtree {
                iteration: num(1)?,
                label: num(2)?,
            }),
            _ => Err(Error::argument(format!("bad feature key {s:?}"))),
        }
    }
}

/// Dense column ids for every substructure key seen while fitting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureIndex {
    kind: FeatureKind,
    keys: Vec<FeatureKey>,
    column_of: BTreeMap<FeatureKey, usize>,
}

impl FeatureIndex {
    /// Assigns columns to the given keys in ascending key order.
    pub fn from_keys(kind: FeatureKind, keys: impl IntoIterator<Item = FeatureKey>) -> Self {
        let keys: Vec<FeatureKey> = keys.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let column_of = keys.iter().enumerate().map(|(i, &k)| (k, i)).collect();
        FeatureIndex { kind, keys, column_of }
    }

    pub fn from_raw<'a>(kind: FeatureKind, raw: impl IntoIterator<Item = &'a RawFeatures>) -> Self {
        let keys = raw
            .into_iter()
            .flat_map(|rows| rows.iter().flat_map(|row| row.iter().map(|&(k, _)| k)));
        FeatureIndex::from_keys(kind, keys)
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.keys.len()
    }

    pub fn keys(&self) -> &[FeatureKey] {
        &self.keys
    }

    pub fn column(&self, key: &FeatureKey) -> Option<usize> {
        self.column_of.get(key).copied()
    }

    /// Maps raw keyed counts onto columns. Keys absent from the index are
    /// dropped.
    pub fn project(&self, graph_id: usize, raw: &RawFeatures) -> VertexFeatureMatrix {
        let rows = raw
            .iter()
            .map(|row| {
                let mut out: SparseRow = row
                    .iter()
                    .filter_map(|(key, count)| self.column(key).map(|c| (c, *count)))
                    .collect();
                out.sort_unstable_by_key(|&(c, _)| c);
                out
            })
            .collect();
        VertexFeatureMatrix {
            graph_id,
            dimension: self.dimension(),
            rows,
        }
    }
}

/// One sparse count row per vertex of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexFeatureMatrix {
    pub graph_id: usize,
    pub dimension: usize,
    pub rows: Vec<SparseRow>,
}

impl VertexFeatureMatrix {
    pub fn num_vertices(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, v: usize) -> &SparseRow {
        &self.rows[v]
    }
}

/// Column sums of the vertex rows: the graph-level feature map.
pub fn graph_feature_map(vfm: &VertexFeatureMatrix) -> Vec<u64> {
    let mut out = vec![0u64; vfm.dimension];
    for row in &vfm.rows {
        for &(c, count) in row {
            out[c] += count;
        }
    }
    out
}

/// Sparse form of [`graph_feature_map`].
pub fn graph_feature_map_sparse(vfm: &VertexFeatureMatrix) -> SparseRow {
    let mut acc: BTreeMap<usize, u64> = BTreeMap::new();
    for row in &vfm.rows {
        for &(c, count) in row {
            *acc.entry(c).or_default() += count;
        }
    }
    acc.into_iter().collect()
}

pub(crate) fn collect_row<I: IntoIterator<Item = FeatureKey>>(keys: I) -> Vec<(FeatureKey, u64)> {
    let mut acc: BTreeMap<FeatureKey, u64> = BTreeMap::new();
    for k in keys {
        *acc.entry(k).or_default() += 1;
    }
    acc.into_iter().collect()
}

/// Feature extraction fitted on a set of training graphs.
///
/// The WL alphabet and the column index come from the training graphs only;
/// substructures first seen in other graphs map to no column.
#[derive(Debug, Clone)]
pub struct Featurizer {
    kind: FeatureKind,
    wl: Option<WlRefiner>,
    index: FeatureIndex,
}

impl Featurizer {
    pub fn fit(dataset: &GraphDataset, kind: FeatureKind, train_ids: &[usize]) -> Result<Self> {
        kind.validate()?;
        if let Some(&bad) = train_ids.iter().find(|&&i| i >= dataset.len()) {
            return Err(Error::argument(format!("graph id {bad} out of range")));
        }
        let wl = match kind {
            FeatureKind::WlSubtree { iterations } => Some(WlRefiner::fit(
                train_ids.iter().map(|&i| dataset.graph(i)),
                iterations,
            )),
            _ => None,
        };
        let mut featurizer = Featurizer {
            kind,
            wl,
            index: FeatureIndex::from_keys(kind, []),
        };
        let raw: Vec<RawFeatures> = train_ids
            .par_iter()
            .map(|&i| featurizer.raw(i, dataset.graph(i)))
            .collect();
        featurizer.index = FeatureIndex::from_raw(kind, &raw);
        Ok(featurizer)
    }

    pub fn fit_all(dataset: &GraphDataset, kind: FeatureKind) -> Result<Self> {
        let ids: Vec<usize> = (0..dataset.len()).collect();
        Featurizer::fit(dataset, kind, &ids)
    }

    pub fn index(&self) -> &FeatureIndex {
        &self.index
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    /// Keyed substructure counts for one graph, before indexing.
    pub fn raw(&self, graph_id: usize, g: &Graph) -> RawFeatures {
        match self.kind {
            FeatureKind::ShortestPath => sp_raw_features(g),
            FeatureKind::Graphlet { size, samples, seed } => {
                gk_raw_features(g, graph_id, size, samples, seed)
            }
            FeatureKind::WlSubtree { .. } => {
                let labels = self.wl.as_ref().expect("fitted").transform(g);
                wl::raw_from_labels(&labels)
            }
        }
    }

    pub fn transform(&self, graph_id: usize, g: &Graph) -> VertexFeatureMatrix {
        self.index.project(graph_id, &self.raw(graph_id, g))
    }

    /// Vertex feature matrices of every graph, in dataset order.
    pub fn transform_dataset(&self, dataset: &GraphDataset) -> Vec<VertexFeatureMatrix> {
        dataset
            .graphs()
            .par_iter()
            .enumerate()
            .map(|(i, g)| self.transform(i, g))
            .collect()
    }
}

/// Index over every substructure observed anywhere in the dataset.
pub fn build_feature_index(dataset: &GraphDataset, kind: FeatureKind) -> Result<FeatureIndex> {
    Ok(Featurizer::fit_all(dataset, kind)?.index)
}

/// Fits on the whole dataset and featurizes every graph.
pub fn featurize_dataset(
    dataset: &GraphDataset,
    kind: FeatureKind,
) -> Result<(FeatureIndex, Vec<VertexFeatureMatrix>)> {
    let featurizer = Featurizer::fit_all(dataset, kind)?;
    let matrices = featurizer.transform_dataset(dataset);
    Ok((featurizer.index, matrices))
}
