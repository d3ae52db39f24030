//! Shared inputs for the pipeline benchmarks.

use deepmap_core::alignment::dataset_centralities;
use deepmap_core::features::featurize_dataset;
use deepmap_core::graph::{generate_er_dataset, SynthConfig};
use deepmap_core::{assemble_input, AlignedTensor, FeatureKind, GraphDataset};

/// A synthetic dataset of `graphs` graphs with the default generator
/// parameters.
pub fn dataset(graphs: usize) -> GraphDataset {
    let config = SynthConfig {
        num_graphs: graphs,
        ..SynthConfig::default()
    };
    generate_er_dataset(&config).expect("default generator config is valid")
}

pub fn tensor(ds: &GraphDataset, kind: FeatureKind, r: usize) -> AlignedTensor {
    let (_, vfms) = featurize_dataset(ds, kind).expect("featurize");
    assemble_input(ds, &vfms, &dataset_centralities(ds), r).expect("assemble")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_shapes() {
        let ds = dataset(8);
        let t = tensor(&ds, FeatureKind::WlSubtree { iterations: 1 }, 3);
        assert_eq!(t.len(), 8);
        assert_eq!(t.w, ds.max_vertices());
    }
}
