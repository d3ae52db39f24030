//! Small hand-built graphs with known answers, used by the verification
//! suite and the tests.

use crate::graph::{Graph, GraphDataset};

/// Labels of the first WL example graph, one per vertex.
pub const WL_G1_LABELS: &[u32] = &[2, 3, 4, 1, 1, 3];
pub const WL_G1_EDGES: &[(usize, usize)] = &[(1, 2), (2, 3), (4, 2), (5, 1), (2, 5), (0, 5)];
pub const WL_G2_LABELS: &[u32] = &[3, 2, 4, 1, 1, 3];
pub const WL_G2_EDGES: &[(usize, usize)] = &[(0, 1), (2, 3), (4, 3), (2, 0), (2, 5), (0, 5)];

/// Compressed labels after one refinement round, vertex by vertex.
pub const WL_G1_ROUND1: &[u32] = &[8, 10, 11, 7, 7, 9];
pub const WL_G2_ROUND1: &[u32] = &[9, 8, 12, 6, 5, 10];

/// Vertices `a..f` are indices `0..6`.
pub const CENTRALITY_G1_NAMES: &[char] = &['a', 'b', 'c', 'd', 'e', 'f'];
pub const CENTRALITY_G1_EDGES: &[(usize, usize)] = &[(5, 4), (4, 3), (2, 4), (1, 5), (4, 1), (0, 1)];
pub const CENTRALITY_G1_SCORES: &[f64] = &[0.21, 0.52, 0.24, 0.24, 0.60, 0.46];

/// Vertices `x, y, z, u` are indices `0..4`.
pub const CENTRALITY_G2_NAMES: &[char] = &['x', 'y', 'z', 'u'];
pub const CENTRALITY_G2_EDGES: &[(usize, usize)] = &[(3, 2), (3, 0), (3, 1), (0, 1)];
pub const CENTRALITY_G2_SCORES: &[f64] = &[0.52, 0.52, 0.28, 0.61];

/// Expected size-3 receptive fields as `(center, members)` in vertex names.
/// Center `a` of the first graph is omitted: its published triple disagrees
/// with the top-centrality selection rule.
pub const FIELDS_G1: &[(char, [char; 3])] = &[
    ('e', ['e', 'b', 'f']),
    ('b', ['e', 'b', 'f']),
    ('f', ['e', 'b', 'f']),
    ('c', ['e', 'b', 'c']),
    ('d', ['e', 'b', 'd']),
];
pub const FIELDS_G2: &[(char, [char; 3])] = &[
    ('u', ['u', 'x', 'y']),
    ('x', ['u', 'x', 'y']),
    ('y', ['u', 'x', 'y']),
    ('z', ['u', 'x', 'z']),
];

pub const SEQUENCE_G1: &[char] = &['e', 'b', 'f', 'c', 'd', 'a'];
pub const SEQUENCE_G2: &[char] = &['u', 'x', 'y', 'z'];

pub fn wl_pair() -> (Graph, Graph) {
    (
        Graph::from_edges(WL_G1_LABELS.to_vec(), WL_G1_EDGES).expect("valid fixture"),
        Graph::from_edges(WL_G2_LABELS.to_vec(), WL_G2_EDGES).expect("valid fixture"),
    )
}

pub fn wl_dataset() -> GraphDataset {
    let (g1, g2) = wl_pair();
    GraphDataset::new("wl_example", vec![g1, g2], vec![0, 1], 2).expect("valid fixture")
}

/// The two centrality example graphs, labeled by degree.
pub fn centrality_pair() -> (Graph, Graph) {
    (
        Graph::from_edges_degree_labeled(6, CENTRALITY_G1_EDGES).expect("valid fixture"),
        Graph::from_edges_degree_labeled(4, CENTRALITY_G2_EDGES).expect("valid fixture"),
    )
}

pub fn centrality_dataset() -> GraphDataset {
    let (g1, g2) = centrality_pair();
    GraphDataset::new("centrality_example", vec![g1, g2], vec![0, 1], 2).expect("valid fixture")
}

pub fn vertex_of(names: &[char], name: char) -> usize {
    names
        .iter()
        .position(|&c| c == name)
        .unwrap_or_else(|| panic!("unknown vertex {name}"))
}
