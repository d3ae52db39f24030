use crate::features::{collect_row, FeatureIndex, FeatureKey, RawFeatures, VertexFeatureMatrix};
use crate::graph::{bfs_distances, Distance, Graph};

/// For every vertex `v`, counts `(label(v), label(t), d(v, t))` over all
/// reachable `t != v`. Each shortest path is attributed to its source, so the
/// rows sum to the ordered-pair shortest-path feature map.
pub fn sp_raw_features(g: &Graph) -> RawFeatures {
    (0..g.num_vertices())
        .map(|v| {
            let dist = bfs_distances(g, v);
            collect_row(dist.iter().enumerate().filter_map(|(t, d)| match *d {
                Distance::Hops(len) if t != v => Some(FeatureKey::ShortestPath {
                    source: g.label(v),
                    target: g.label(t),
                    length: len,
                }),
                _ => None,
            }))
        })
        .collect()
}

pub fn sp_vertex_features(g: &Graph, graph_id: usize, index: &FeatureIndex) -> VertexFeatureMatrix {
    index.project(graph_id, &sp_raw_features(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{graph_feature_map, FeatureKind};
    use crate::fixtures;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn count(raw: &RawFeatures, v: usize, key: FeatureKey) -> u64 {
        raw[v].iter().find(|(k, _)| *k == key).map_or(0, |x| x.1)
    }

    #[test]
    fn label2_vertex_sees_label4_at_distance_two() {
        let (_, g2) = fixtures::wl_pair();
        let raw = sp_raw_features(&g2);
        let v = g2.labels().iter().position(|&l| l == 2).unwrap();
        let key = FeatureKey::ShortestPath { source: 2, target: 4, length: 2 };
        assert_eq!(count(&raw, v, key), 1);
    }

    #[test]
    fn triangle() {
        let g = Graph::from_edges(vec![1; 3], &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let raw = sp_raw_features(&g);
        let key = FeatureKey::ShortestPath { source: 1, target: 1, length: 1 };
        for row in &raw {
            assert_eq!(row, &vec![(key, 2)]);
        }
        let index = FeatureIndex::from_raw(FeatureKind::ShortestPath, [&raw]);
        assert_eq!(graph_feature_map(&index.project(0, &raw)), vec![6]);
    }

    #[test]
    fn disconnected_pairs_contribute_nothing() {
        let g = Graph::from_edges(vec![1; 4], &[(0, 1), (2, 3)]).unwrap();
        let key = FeatureKey::ShortestPath { source: 1, target: 1, length: 1 };
        for row in sp_raw_features(&g) {
            assert_eq!(row, vec![(key, 1)]);
        }
    }

    #[test]
    fn rows_match_floyd_warshall_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = 8;
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen_bool(0.3) {
                        edges.push((u, v));
                    }
                }
            }
            let labels: Vec<u32> = (0..n).map(|_| rng.gen_range(1..4)).collect();
            let g = Graph::from_edges(labels.clone(), &edges).unwrap();

            const INF: u32 = u32::MAX / 2;
            let mut d = vec![vec![INF; n]; n];
            for v in 0..n {
                d[v][v] = 0;
            }
            for &(u, v) in &edges {
                d[u][v] = 1;
                d[v][u] = 1;
            }
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
                    }
                }
            }
            let raw = sp_raw_features(&g);
            for v in 0..n {
                let mut oracle: BTreeMap<FeatureKey, u64> = BTreeMap::new();
                for t in (0..n).filter(|&t| t != v && d[v][t] < INF) {
                    *oracle
                        .entry(FeatureKey::ShortestPath {
                            source: labels[v],
                            target: labels[t],
                            length: d[v][t],
                        })
                        .or_default() += 1;
                }
                assert_eq!(raw[v], oracle.into_iter().collect::<Vec<_>>());
            }
        }
    }
}
