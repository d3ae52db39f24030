//! Weisfeiler-Lehman relabeling with a dataset-global, order-preserving
//! compression: all distinct `own, sorted neighbours` signatures of a round
//! are sorted and numbered consecutively after the largest label in use.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::features::{FeatureIndex, FeatureKey, RawFeatures, VertexFeatureMatrix};
use crate::graph::{Graph, GraphDataset};

/// Label given to a vertex whose signature never occurred while fitting.
/// Real labels are always >= 1.
pub const UNSEEN: u32 = 0;

/// Fitted compression dictionaries, one per refinement round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WlRefiner {
    iterations: usize,
    dictionaries: Vec<HashMap<Vec<u32>, u32>>,
    base_alphabet: usize,
}

fn signature(g: &Graph, labels: &[u32], v: usize) -> Vec<u32> {
    let mut sig = Vec::with_capacity(g.degree(v) + 1);
    sig.push(labels[v]);
    let start = sig.len();
    sig.extend(g.neighbors(v).iter().map(|&u| labels[u]));
    sig[start..].sort_unstable();
    sig
}

impl WlRefiner {
    pub fn fit<'a>(graphs: impl IntoIterator<Item = &'a Graph>, iterations: usize) -> Self {
        let graphs: Vec<&Graph> = graphs.into_iter().collect();
        let mut labels: Vec<Vec<u32>> = graphs.iter().map(|g| g.labels().to_vec()).collect();
        let base: BTreeSet<u32> = labels.iter().flatten().copied().collect();
        let mut max_label = base.iter().next_back().copied().unwrap_or(0);
        let mut dictionaries = Vec::with_capacity(iterations);

        for _ in 0..iterations {
            let signatures: Vec<Vec<Vec<u32>>> = graphs
                .iter()
                .zip(&labels)
                .map(|(g, l)| (0..g.num_vertices()).map(|v| signature(g, l, v)).collect())
                .collect();
            let distinct: BTreeSet<&Vec<u32>> = signatures.iter().flatten().collect();
            let dictionary: HashMap<Vec<u32>, u32> = distinct
                .into_iter()
                .enumerate()
                .map(|(i, sig)| (sig.clone(), max_label + 1 + i as u32))
                .collect();
            max_label += dictionary.len() as u32;
            for (graph_labels, sigs) in labels.iter_mut().zip(&signatures) {
                for (label, sig) in graph_labels.iter_mut().zip(sigs) {
                    *label = dictionary[sig];
                }
            }
            dictionaries.push(dictionary);
        }
        WlRefiner {
            iterations,
            dictionaries,
            base_alphabet: base.len(),
        }
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Number of distinct labels at each round `0..=iterations`.
    pub fn alphabet_sizes(&self) -> Vec<usize> {
        std::iter::once(self.base_alphabet)
            .chain(self.dictionaries.iter().map(HashMap::len))
            .collect()
    }

    /// Labels of `g` at rounds `0..=iterations`, indexed `[round][vertex]`.
    /// Signatures not seen while fitting become [`UNSEEN`].
    pub fn transform(&self, g: &Graph) -> Vec<Vec<u32>> {
        let mut rounds = vec![g.labels().to_vec()];
        for dictionary in &self.dictionaries {
            let current = rounds.last().expect("round 0 present");
            let next = (0..g.num_vertices())
                .map(|v| {
                    let sig = signature(g, current, v);
                    dictionary.get(&sig).copied().unwrap_or(UNSEEN)
                })
                .collect();
            rounds.push(next);
        }
        rounds
    }
}

/// Refinement of every graph of a dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WlRefinement {
    /// Indexed `[graph][round][vertex]`.
    pub labels_per_iteration: Vec<Vec<Vec<u32>>>,
    pub alphabet_sizes: Vec<usize>,
}

impl WlRefinement {
    pub fn iterations(&self) -> usize {
        self.alphabet_sizes.len() - 1
    }

    pub fn labels(&self, graph_id: usize, round: usize) -> &[u32] {
        &self.labels_per_iteration[graph_id][round]
    }
}

pub fn wl_refine(dataset: &GraphDataset, iterations: usize) -> WlRefinement {
    let refiner = WlRefiner::fit(dataset.graphs(), iterations);
    WlRefinement {
        labels_per_iteration: dataset.graphs().iter().map(|g| refiner.transform(g)).collect(),
        alphabet_sizes: refiner.alphabet_sizes(),
    }
}

pub(crate) fn raw_from_labels(rounds: &[Vec<u32>]) -> RawFeatures {
    let n = rounds.first().map_or(0, Vec::len);
    (0..n)
        .map(|v| {
            rounds
                .iter()
                .enumerate()
                .filter(|(_, labels)| labels[v] != UNSEEN)
                .map(|(t, labels)| {
                    (
                        FeatureKey::Subtree {
                            iteration: t as u32,
                            label: labels[v],
                        },
                        1,
                    )
                })
                .collect()
        })
        .collect()
}

/// One-hot indicator of the vertex's label at each round, concatenated.
pub fn wl_vertex_features(
    refinement: &WlRefinement,
    graph_id: usize,
    index: &FeatureIndex,
) -> Result<VertexFeatureMatrix> {
    let rounds = refinement
        .labels_per_iteration
        .get(graph_id)
        .ok_or_else(|| Error::argument(format!("unknown graph id {graph_id}")))?;
    Ok(index.project(graph_id, &raw_from_labels(rounds)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{graph_feature_map, FeatureKind};
    use crate::fixtures;

    #[test]
    fn example_pair_one_round() {
        let ds = fixtures::wl_dataset();
        let r = wl_refine(&ds, 1);
        assert_eq!(r.labels(0, 0), fixtures::WL_G1_LABELS);
        assert_eq!(r.labels(0, 1), fixtures::WL_G1_ROUND1);
        assert_eq!(r.labels(1, 1), fixtures::WL_G2_ROUND1);
        assert_eq!(r.alphabet_sizes, vec![4, 8]);
    }

    #[test]
    fn zero_rounds_keep_original_labels() {
        let ds = fixtures::wl_dataset();
        let r = wl_refine(&ds, 0);
        assert_eq!(r.iterations(), 0);
        assert_eq!(r.labels_per_iteration[0], vec![fixtures::WL_G1_LABELS.to_vec()]);
    }

    #[test]
    fn single_vertex_counts_up() {
        let g = Graph::from_edges(vec![3], &[]).unwrap();
        let ds = GraphDataset::new("one", vec![g], vec![0], 1).unwrap();
        let r = wl_refine(&ds, 2);
        assert_eq!(r.labels_per_iteration[0], vec![vec![3], vec![4], vec![5]]);
    }

    #[test]
    fn rounds_use_disjoint_labels() {
        let ds = crate::graph::generate_er_dataset(&crate::graph::SynthConfig {
            num_graphs: 20,
            ..Default::default()
        })
        .unwrap();
        let r = wl_refine(&ds, 3);
        let per_round: Vec<BTreeSet<u32>> = (0..=3)
            .map(|t| r.labels_per_iteration.iter().flat_map(|g| g[t].iter().copied()).collect())
            .collect();
        for a in 0..=3 {
            assert_eq!(per_round[a].len(), r.alphabet_sizes[a]);
            for b in (a + 1)..=3 {
                assert!(per_round[a].is_disjoint(&per_round[b]));
                assert!(per_round[a].iter().max() < per_round[b].iter().min());
            }
        }
    }

    #[test]
    fn example_vertex_features() {
        let ds = fixtures::wl_dataset();
        let r = wl_refine(&ds, 1);
        let index = crate::features::build_feature_index(&ds, FeatureKind::WlSubtree { iterations: 1 })
            .unwrap();
        let vfm = wl_vertex_features(&r, 0, &index).unwrap();
        for row in &vfm.rows {
            assert_eq!(row.len(), 2);
            assert!(row.iter().all(|&(_, c)| c == 1));
        }
        let map = graph_feature_map(&vfm);
        let count = |label: u32| {
            let key = FeatureKey::Subtree { iteration: 1, label };
            map[index.column(&key).unwrap()]
        };
        assert_eq!(
            (count(7), count(8), count(9), count(10), count(11), count(12)),
            (2, 1, 1, 1, 1, 0)
        );
        assert!(wl_vertex_features(&r, 5, &index).is_err());
    }

    #[test]
    fn unseen_signatures_map_to_sentinel() {
        let (g1, g2) = fixtures::wl_pair();
        let refiner = WlRefiner::fit([&g1], 1);
        let rounds = refiner.transform(&g2);
        // Fitted on the first graph alone: "1,4" -> 5, "2,3" -> 6, "3,2,3,4" -> 7,
        // "3,3,4" -> 8, "4,1,1,3,3" -> 9.
        assert_eq!(rounds[1], vec![7, 6, UNSEEN, UNSEEN, UNSEEN, 8]);
    }
}
