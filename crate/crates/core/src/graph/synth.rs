//! Seeded synthetic dataset of perturbed ER skeletons with planted triangles.
//!
//! Two base Erdős–Rényi graphs are drawn once per dataset. Every graph is a
//! chain of perturbed copies of one base (the "skeleton"): the first half of
//! the classes use the first base, the rest the second. Class `k` also
//! receives `k + 1` planted triangles hanging off the skeleton, which is
//! what separates classes sharing a base.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphDataset};

const BASE_SIZE: usize = 10;
/// Chance that a base edge is dropped from one copy.
const EDGE_DROP: f64 = 0.05;
/// Chance that a non-edge inside one copy is added.
const EDGE_ADD: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub num_graphs: usize,
    pub classes: usize,
    pub min_size: usize,
    pub max_size: usize,
    pub edge_prob: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_graphs: 400,
            classes: 4,
            min_size: 20,
            max_size: 60,
            edge_prob: 0.2,
            seed: 7,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.classes < 2 {
            return Err(Error::argument("need at least 2 classes"));
        }
        if !(self.edge_prob > 0.0 && self.edge_prob < 1.0) {
            return Err(Error::argument(format!(
                "edge probability {} not in (0, 1)",
                self.edge_prob
            )));
        }
        if self.min_size < 3 {
            return Err(Error::argument("minimum graph size must be >= 3"));
        }
        if self.min_size > self.max_size {
            return Err(Error::argument(format!(
                "size range [{}, {}] is inverted",
                self.min_size, self.max_size
            )));
        }
        if self.num_graphs < self.classes {
            return Err(Error::argument("fewer graphs than classes"));
        }
        Ok(())
    }
}

fn connected_er(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    loop {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.gen_bool(p) {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::from_edges(vec![1; n], &edges).expect("valid edges");
        if crate::graph::bfs_distances(&g, 0).iter().all(|d| d.hops().is_some()) {
            return edges;
        }
    }
}

/// Generates `num_graphs` graphs split evenly over `classes` (the first
/// `num_graphs % classes` classes get one extra graph). Vertex labels are
/// `degree + 1`.
pub fn generate_er_dataset(config: &SynthConfig) -> Result<GraphDataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let bases = [
        connected_er(BASE_SIZE, config.edge_prob, &mut rng),
        connected_er(BASE_SIZE, config.edge_prob, &mut rng),
    ];

    let mut graphs = Vec::with_capacity(config.num_graphs);
    let mut classes = Vec::with_capacity(config.num_graphs);
    for i in 0..config.num_graphs {
        let class = i % config.classes;
        let base = &bases[usize::from(2 * class >= config.classes)];
        let motif_vertices = 3 * (class + 1);
        let target = rng.gen_range(config.min_size..=config.max_size).max(motif_vertices + 3);
        let skeleton_size = target - motif_vertices;

        let mut edges = Vec::new();
        let mut copies = Vec::new();
        let mut start = 0;
        while start < skeleton_size {
            let len = BASE_SIZE.min(skeleton_size - start);
            for u in 0..len {
                for v in (u + 1)..len {
                    let present = base.contains(&(u, v));
                    let keep = if present {
                        !rng.gen_bool(EDGE_DROP)
                    } else {
                        rng.gen_bool(EDGE_ADD)
                    };
                    if keep {
                        edges.push((start + u, start + v));
                    }
                }
            }
            copies.push((start, len));
            start += len;
        }
        // Chain consecutive copies with a single random bridge.
        for pair in copies.windows(2) {
            let (a, alen) = pair[0];
            let (b, blen) = pair[1];
            edges.push((a + rng.gen_range(0..alen), b + rng.gen_range(0..blen)));
        }
        for t in 0..=class {
            let first = skeleton_size + 3 * t;
            edges.extend([(first, first + 1), (first + 1, first + 2), (first, first + 2)]);
            let anchor = rng.gen_range(0..skeleton_size);
            let corner = first + sample(&mut rng, 3, 1).index(0);
            edges.push((anchor, corner));
        }
        graphs.push(Graph::from_edges_degree_labeled(target, &edges)?);
        classes.push(class);
    }

    GraphDataset::new(
        format!("synth_er_{}", config.seed),
        graphs,
        classes,
        config.classes,
    )
}
