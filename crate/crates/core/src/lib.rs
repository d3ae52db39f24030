//! Graph classification with deep vertex feature maps.
//!
//! Pipeline: substructure counts per vertex ([`features`]), vertex ordering by
//! eigenvector centrality ([`centrality`]), fixed-shape inputs built from
//! breadth-first receptive fields ([`alignment`]), and a small 1D
//! convolutional network with a summation readout ([`nn`]). [`eval`] holds the
//! kernel baselines and the cross-validation harness.

pub mod alignment;
pub mod centrality;
pub mod error;
pub mod eval;
pub mod features;
pub mod fixtures;
pub mod graph;
pub mod nn;

pub use alignment::{assemble_input, AlignedTensor, ReceptiveField, VertexSequence};
pub use centrality::{eigenvector_centrality, CentralityVector};
pub use error::{Error, Result};
pub use features::{FeatureIndex, FeatureKey, FeatureKind, Featurizer, VertexFeatureMatrix};
pub use eval::{cross_validate, gram_matrix, min_eigenvalue, stratified_kfold, FoldPipeline, GramMatrix};
pub use graph::{Graph, GraphDataset, Permutation};
pub use nn::{Model, ModelConfig, TrainConfig};
