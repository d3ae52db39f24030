//! Unlabeled graphlets of size 3 to 5, canonicalized by brute force.
//!
//! An adjacency matrix on `k` vertices is encoded as a bit string over the
//! vertex pairs `(0,1), (0,2), .., (k-2,k-1)`, first pair in the most
//! significant bit, so integer order equals lexicographic order of the bit
//! string. The canonical code is the minimum over all `k!` vertex orders.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::{collect_row, FeatureIndex, FeatureKey, RawFeatures, VertexFeatureMatrix};
use crate::graph::Graph;

const MIN_SIZE: usize = 3;
const MAX_SIZE: usize = 5;

fn pair_count(k: usize) -> usize {
    k * (k - 1) / 2
}

/// Bit position of pair `(i, j)`, `i < j`.
fn pair_bit(k: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    let rank = i * (2 * k - i - 1) / 2 + (j - i - 1);
    pair_count(k) - 1 - rank
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

fn build_table(k: usize) -> Vec<u16> {
    let perms = permutations(k);
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| ((i + 1)..k).map(move |j| (i, j)))
        .collect();
    (0..(1u32 << pair_count(k)))
        .map(|code| {
            perms
                .iter()
                .map(|p| {
                    pairs
                        .iter()
                        .filter(|&&(i, j)| code >> pair_bit(k, i, j) & 1 == 1)
                        .fold(0u16, |acc, &(i, j)| acc | 1 << pair_bit(k, p[i], p[j]))
                })
                .min()
                .expect("at least one permutation")
        })
        .collect()
}

fn table(k: usize) -> &'static [u16] {
    static TABLES: OnceLock<Vec<Vec<u16>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| (MIN_SIZE..=MAX_SIZE).map(build_table).collect());
    &tables[k - MIN_SIZE]
}

fn check_size(k: usize) -> Result<()> {
    if (MIN_SIZE..=MAX_SIZE).contains(&k) {
        Ok(())
    } else {
        Err(Error::argument(format!("graphlet size {k} not in {MIN_SIZE}..={MAX_SIZE}")))
    }
}

/// Canonical code of an encoded adjacency bit string on `k` vertices.
pub fn canonical_code(k: usize, code: u16) -> Result<u16> {
    check_size(k)?;
    table(k)
        .get(code as usize)
        .copied()
        .ok_or_else(|| Error::argument(format!("code {code} too wide for k = {k}")))
}

/// Number of isomorphism classes of graphs on `k` vertices.
pub fn canonical_key_count(k: usize) -> Result<usize> {
    check_size(k)?;
    Ok(table(k).iter().collect::<BTreeSet<_>>().len())
}

/// Canonical class key of a symmetric, zero-diagonal `k x k` adjacency matrix.
pub fn graphlet_canonical_class(matrix: &[Vec<bool>]) -> Result<FeatureKey> {
    let k = matrix.len();
    check_size(k)?;
    let mut code = 0u16;
    for i in 0..k {
        if matrix[i].len() != k {
            return Err(Error::argument("adjacency matrix is not square"));
        }
        if matrix[i][i] {
            return Err(Error::argument("adjacency matrix has a nonzero diagonal"));
        }
        for j in (i + 1)..k {
            if matrix[i][j] != matrix[j][i] {
                return Err(Error::argument("adjacency matrix is not symmetric"));
            }
            if matrix[i][j] {
                code |= 1 << pair_bit(k, i, j);
            }
        }
    }
    Ok(FeatureKey::Graphlet {
        size: k as u8,
        code: table(k)[code as usize],
    })
}

/// Code of the subgraph induced by `members`; `None` is an isolated dummy.
pub fn induced_code(g: &Graph, members: &[Option<usize>]) -> u16 {
    let k = members.len();
    let mut code = 0u16;
    for i in 0..k {
        for j in (i + 1)..k {
            if let (Some(a), Some(b)) = (members[i], members[j]) {
                if g.has_edge(a, b) {
                    code |= 1 << pair_bit(k, i, j);
                }
            }
        }
    }
    code
}

pub(crate) fn vertex_rng(seed: u64, graph_id: usize, vertex: usize) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&(graph_id as u64).to_le_bytes());
    bytes[16..24].copy_from_slice(&(vertex as u64).to_le_bytes());
    ChaCha8Rng::from_seed(bytes)
}

/// `samples` graphlets per vertex: the vertex plus `size - 1` companions drawn
/// uniformly without replacement from the other vertices. Graphs with fewer
/// than `size` vertices are padded with isolated dummies. The random stream
/// depends only on `(seed, graph_id, vertex)`.
pub fn gk_raw_features(g: &Graph, graph_id: usize, size: usize, samples: usize, seed: u64) -> RawFeatures {
    let k = size;
    let lookup = table(k);
    let n = g.num_vertices();
    (0..n)
        .map(|v| {
            let mut rng = vertex_rng(seed, graph_id, v);
            let mut members: Vec<Option<usize>> = Vec::with_capacity(k);
            collect_row((0..samples).map(|_| {
                members.clear();
                members.push(Some(v));
                if n >= k {
                    members.extend(
                        sample(&mut rng, n - 1, k - 1)
                            .iter()
                            .map(|i| Some(if i >= v { i + 1 } else { i })),
                    );
                } else {
                    members.extend((0..n).filter(|&u| u != v).map(Some));
                    members.resize(k, None);
                }
                FeatureKey::Graphlet {
                    size: k as u8,
                    code: lookup[induced_code(g, &members) as usize],
                }
            }))
        })
        .collect()
}

pub fn gk_vertex_features(
    g: &Graph,
    graph_id: usize,
    size: usize,
    samples: usize,
    seed: u64,
    index: &FeatureIndex,
) -> Result<VertexFeatureMatrix> {
    check_size(size)?;
    if samples == 0 {
        return Err(Error::argument("graphlet sample count must be >= 1"));
    }
    Ok(index.project(graph_id, &gk_raw_features(g, graph_id, size, samples, seed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureKind;
    use proptest::prelude::*;
    use rand::Rng;
    use std::collections::BTreeMap;

    fn matrix_from_code(k: usize, code: u16) -> Vec<Vec<bool>> {
        let mut m = vec![vec![false; k]; k];
        for i in 0..k {
            for j in (i + 1)..k {
                let bit = code >> pair_bit(k, i, j) & 1 == 1;
                m[i][j] = bit;
                m[j][i] = bit;
            }
        }
        m
    }

    #[test]
    fn pair_bits_cover_range() {
        for k in 3..=5 {
            let bits: BTreeSet<usize> = (0..k)
                .flat_map(|i| ((i + 1)..k).map(move |j| pair_bit(k, i, j)))
                .collect();
            assert_eq!(bits, (0..pair_count(k)).collect());
            assert_eq!(pair_bit(k, 0, 1), pair_count(k) - 1);
        }
    }

    #[test]
    fn size_three_has_four_classes() {
        assert_eq!(canonical_key_count(3).unwrap(), 4);
    }

    #[test]
    fn class_counts_match_exhaustive_isomorphism_oracle() {
        // Oracle: group all labeled graphs by "some permutation maps one onto
        // the other", checked pairwise on the raw matrices.
        for (k, expected) in [(3, 4), (4, 11)] {
            let perms = permutations(k);
            let all: Vec<Vec<Vec<bool>>> =
                (0..(1u16 << pair_count(k))).map(|c| matrix_from_code(k, c)).collect();
            let mut reps: Vec<&Vec<Vec<bool>>> = Vec::new();
            for m in &all {
                let iso = |r: &Vec<Vec<bool>>| {
                    perms.iter().any(|p| (0..k).all(|i| (0..k).all(|j| m[i][j] == r[p[i]][p[j]])))
                };
                if !reps.iter().any(|r| iso(r)) {
                    reps.push(m);
                }
            }
            assert_eq!(reps.len(), expected);
            assert_eq!(canonical_key_count(k).unwrap(), expected);
        }
        assert_eq!(canonical_key_count(5).unwrap(), 34);
    }

    #[test]
    fn empty_graphlet_is_order_independent() {
        let key = graphlet_canonical_class(&vec![vec![false; 4]; 4]).unwrap();
        assert_eq!(key, FeatureKey::Graphlet { size: 4, code: 0 });
    }

    #[test]
    fn rejects_invalid_matrices() {
        assert!(graphlet_canonical_class(&vec![vec![false; 2]; 2]).is_err());
        assert!(graphlet_canonical_class(&vec![vec![false; 6]; 6]).is_err());
        let mut asym = vec![vec![false; 3]; 3];
        asym[0][1] = true;
        assert!(graphlet_canonical_class(&asym).is_err());
        let mut diag = vec![vec![false; 3]; 3];
        diag[1][1] = true;
        assert!(graphlet_canonical_class(&diag).is_err());
        assert!(canonical_code(6, 0).is_err());
    }

    #[test]
    fn triangle_samples_are_all_complete() {
        let g = Graph::from_edges(vec![1; 3], &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let raw = gk_raw_features(&g, 0, 3, 17, 99);
        let full = FeatureKey::Graphlet { size: 3, code: 0b111 };
        for row in raw {
            assert_eq!(row, vec![(full, 17)]);
        }
    }

    #[test]
    fn edgeless_graph_only_has_empty_graphlets() {
        let g = Graph::from_edges(vec![1; 5], &[]).unwrap();
        let empty = FeatureKey::Graphlet { size: 3, code: 0 };
        for row in gk_raw_features(&g, 0, 3, 20, 1) {
            assert_eq!(row, vec![(empty, 20)]);
        }
    }

    #[test]
    fn small_graph_is_padded_with_isolated_dummies() {
        let g = Graph::from_edges(vec![1; 2], &[(0, 1)]).unwrap();
        let raw = gk_raw_features(&g, 0, 4, 3, 1);
        let one_edge = canonical_code(4, 1).unwrap();
        for row in raw {
            assert_eq!(row, vec![(FeatureKey::Graphlet { size: 4, code: one_edge }, 3)]);
        }
    }

    #[test]
    fn sampling_matches_exact_conditional_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 6;
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.gen_bool(0.45) {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::from_edges(vec![1; n], &edges).unwrap();
        let q = 500u64;
        let raw = gk_raw_features(&g, 3, 3, q as usize, 21);
        for v in 0..n {
            // Exact: all C(5, 2) companion pairs are equally likely.
            let others: Vec<usize> = (0..n).filter(|&u| u != v).collect();
            let mut exact: BTreeMap<FeatureKey, f64> = BTreeMap::new();
            let mut pairs = 0.0;
            for (i, &a) in others.iter().enumerate() {
                for &b in &others[i + 1..] {
                    let m = vec![
                        vec![false, g.has_edge(v, a), g.has_edge(v, b)],
                        vec![g.has_edge(a, v), false, g.has_edge(a, b)],
                        vec![g.has_edge(b, v), g.has_edge(b, a), false],
                    ];
                    *exact.entry(graphlet_canonical_class(&m).unwrap()).or_default() += 1.0;
                    pairs += 1.0;
                }
            }
            let observed: BTreeMap<FeatureKey, u64> = raw[v].iter().copied().collect();
            for key in exact.keys().chain(observed.keys()) {
                let p = exact.get(key).copied().unwrap_or(0.0) / pairs;
                let got = observed.get(key).copied().unwrap_or(0) as f64;
                let sigma = (q as f64 * p * (1.0 - p)).sqrt();
                assert!(
                    (got - q as f64 * p).abs() <= 3.0 * sigma,
                    "vertex {v} {key}: got {got}, expected {}",
                    q as f64 * p
                );
            }
        }
    }

    #[test]
    fn reproducible_and_keyed_by_graph_id() {
        let g = Graph::from_edges(vec![1; 7], &[(0, 1), (1, 2), (2, 3), (4, 5)]).unwrap();
        assert_eq!(gk_raw_features(&g, 2, 4, 10, 8), gk_raw_features(&g, 2, 4, 10, 8));
        assert_ne!(gk_raw_features(&g, 2, 4, 50, 8), gk_raw_features(&g, 3, 4, 50, 8));
    }

    #[test]
    fn vertex_features_validate_arguments() {
        let g = Graph::from_edges(vec![1; 3], &[(0, 1)]).unwrap();
        let index = FeatureIndex::from_keys(FeatureKind::ShortestPath, []);
        assert!(gk_vertex_features(&g, 0, 2, 1, 0, &index).is_err());
        assert!(gk_vertex_features(&g, 0, 3, 0, 0, &index).is_err());
    }

    proptest! {
        #[test]
        fn rows_sum_to_sample_count(n in 1usize..10, k in 3usize..=5, q in 1usize..30, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen_bool(0.4) {
                        edges.push((u, v));
                    }
                }
            }
            let g = Graph::from_edges(vec![1; n], &edges).unwrap();
            for row in gk_raw_features(&g, 0, k, q, seed) {
                prop_assert_eq!(row.iter().map(|x| x.1).sum::<u64>(), q as u64);
            }
        }

        #[test]
        fn canonical_code_is_permutation_invariant(code in 0u16..1024, perm_seed in any::<u64>()) {
            let k = 5;
            let m = matrix_from_code(k, code);
            let mut rng = ChaCha8Rng::seed_from_u64(perm_seed);
            let p = crate::graph::Permutation::random(k, &mut rng);
            let mut pm = vec![vec![false; k]; k];
            for i in 0..k {
                for j in 0..k {
                    pm[p.apply(i)][p.apply(j)] = m[i][j];
                }
            }
            prop_assert_eq!(graphlet_canonical_class(&m).unwrap(), graphlet_canonical_class(&pm).unwrap());
        }
    }
}
