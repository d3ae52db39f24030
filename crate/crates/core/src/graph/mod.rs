//! Undirected vertex-labeled graphs and the elementary algorithms shared by
//! the rest of the pipeline.

mod synth;
mod tu;

use std::collections::VecDeque;

use crate::error::{Error, Result};

pub use synth::{generate_er_dataset, SynthConfig};
pub use tu::{read_tu_dataset, read_tu_dataset_with_stats, write_tu_dataset, TuStats};

/// Hop distance returned by [`bfs_distances`]. Unreachable vertices are
/// [`Distance::Unreachable`], never a large finite number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distance {
    Hops(u32),
    Unreachable,
}

impl Distance {
    pub fn hops(self) -> Option<u32> {
        match self {
            Distance::Hops(h) => Some(h),
            Distance::Unreachable => None,
        }
    }
}

/// Undirected graph with sorted adjacency lists and positive integer labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    labels: Vec<u32>,
}

impl Graph {
    /// Builds a graph from an edge list. Duplicate and reversed edges collapse
    /// into one undirected edge. Self-loops, out-of-range endpoints and zero
    /// labels are rejected.
    pub fn from_edges(labels: Vec<u32>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = labels.len();
        if let Some(v) = labels.iter().position(|&l| l == 0) {
            return Err(Error::argument(format!("vertex {v} has label 0; labels must be >= 1")));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::argument(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::argument(format!("self-loop on vertex {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Graph { adjacency, labels })
    }

    /// Same as [`Graph::from_edges`] with every label set to `degree + 1`.
    pub fn from_edges_degree_labeled(num_vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::from_edges(vec![1; num_vertices], edges)?;
        g.relabel_by_degree();
        Ok(g)
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn label(&self, v: usize) -> u32 {
        self.labels[v]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().copied().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    /// Replaces every label with `degree + 1`.
    pub fn relabel_by_degree(&mut self) {
        for (v, label) in self.labels.iter_mut().enumerate() {
            *label = self.adjacency[v].len() as u32 + 1;
        }
    }

    /// Full scan of the structural invariants: symmetric, sorted, no loops,
    /// no duplicates, labels >= 1.
    pub fn check_invariants(&self) -> Result<()> {
        for (v, list) in self.adjacency.iter().enumerate() {
            if list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::integrity(format!("adjacency of {v} not strictly sorted")));
            }
            for &u in list {
                if u == v {
                    return Err(Error::integrity(format!("self-loop on {v}")));
                }
                if u >= self.labels.len() || !self.has_edge(u, v) {
                    return Err(Error::integrity(format!("edge {v}->{u} has no reverse")));
                }
            }
            if self.labels[v] == 0 {
                return Err(Error::integrity(format!("vertex {v} has label 0")));
            }
        }
        Ok(())
    }
}

/// A set of graphs with dense class indices in `[0, class_count)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphDataset {
    pub name: String,
    graphs: Vec<Graph>,
    class_labels: Vec<usize>,
    class_count: usize,
}

impl GraphDataset {
    pub fn new(
        name: impl Into<String>,
        graphs: Vec<Graph>,
        class_labels: Vec<usize>,
        class_count: usize,
    ) -> Result<Self> {
        if graphs.is_empty() {
            return Err(Error::argument("dataset has no graphs"));
        }
        if graphs.len() != class_labels.len() {
            return Err(Error::argument(format!(
                "{} graphs but {} class labels",
                graphs.len(),
                class_labels.len()
            )));
        }
        if let Some(&bad) = class_labels.iter().find(|&&c| c >= class_count) {
            return Err(Error::argument(format!(
                "class index {bad} not below class count {class_count}"
            )));
        }
        Ok(GraphDataset {
            name: name.into(),
            graphs,
            class_labels,
            class_count,
        })
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn graph(&self, id: usize) -> &Graph {
        &self.graphs[id]
    }

    pub fn class_labels(&self) -> &[usize] {
        &self.class_labels
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn max_vertices(&self) -> usize {
        self.graphs.iter().map(Graph::num_vertices).max().unwrap_or(0)
    }

    /// Sub-dataset with the given graph ids, in the given order.
    pub fn subset(&self, ids: &[usize]) -> Result<Self> {
        GraphDataset::new(
            self.name.clone(),
            ids.iter().map(|&i| self.graphs[i].clone()).collect(),
            ids.iter().map(|&i| self.class_labels[i]).collect(),
            self.class_count,
        )
    }
}

/// Vertex bijection: vertex `v` of the source graph becomes `mapping[v]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; mapping.len()];
        for &target in &mapping {
            if target >= mapping.len() || std::mem::replace(&mut seen[target], true) {
                return Err(Error::argument("mapping is not a bijection"));
            }
        }
        Ok(Permutation { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            mapping: (0..n).collect(),
        }
    }

    pub fn random<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        use rand::seq::SliceRandom;
        let mut mapping: Vec<usize> = (0..n).collect();
        mapping.shuffle(rng);
        Permutation { mapping }
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn apply(&self, v: usize) -> usize {
        self.mapping[v]
    }

    pub fn inverse(&self) -> Self {
        let mut mapping = vec![0; self.mapping.len()];
        for (v, &target) in self.mapping.iter().enumerate() {
            mapping[target] = v;
        }
        Permutation { mapping }
    }

    /// Reorders per-vertex values so that `out[p(v)] = values[v]`.
    pub fn permute_values<T: Clone>(&self, values: &[T]) -> Vec<T> {
        let mut out = values.to_vec();
        for (v, value) in values.iter().enumerate() {
            out[self.mapping[v]] = value.clone();
        }
        out
    }
}

/// Hop distances from `source`.
pub fn bfs_distances(g: &Graph, source: usize) -> Vec<Distance> {
    assert!(source < g.num_vertices(), "source {source} out of range");
    let mut dist = vec![Distance::Unreachable; g.num_vertices()];
    dist[source] = Distance::Hops(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let next = match dist[u] {
            Distance::Hops(d) => Distance::Hops(d + 1),
            Distance::Unreachable => unreachable!(),
        };
        for &v in g.neighbors(u) {
            if dist[v] == Distance::Unreachable {
                dist[v] = next;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Relabels vertices through `p`: edge `uv` becomes `p(u)p(v)` and
/// `label'(p(v)) = label(v)`.
pub fn permute_graph(g: &Graph, p: &Permutation) -> Result<Graph> {
    if p.len() != g.num_vertices() {
        return Err(Error::argument(format!(
            "permutation of size {} applied to graph with {} vertices",
            p.len(),
            g.num_vertices()
        )));
    }
    let edges: Vec<_> = g.edges().map(|(u, v)| (p.apply(u), p.apply(v))).collect();
    Graph::from_edges(p.permute_values(g.labels()), &edges)
}
