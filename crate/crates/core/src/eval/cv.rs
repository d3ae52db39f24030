//! Stratified k-fold cross-validation.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{logreg_predict, logreg_train, normalize_sparse, LogRegConfig, SparseVec};
use crate::alignment::{assemble_input, dataset_centralities};
use crate::error::{Error, Result};
use crate::features::{graph_feature_map_sparse, FeatureKind, Featurizer};
use crate::graph::GraphDataset;
use crate::nn::{train_with, Model, ModelConfig, TrainConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    /// Test indices of each fold, ascending.
    pub folds: Vec<Vec<usize>>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    pub fn test_ids(&self, fold: usize) -> &[usize] {
        &self.folds[fold]
    }

    pub fn train_ids(&self, fold: usize) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .folds
            .iter()
            .enumerate()
            .filter(|&(f, _)| f != fold)
            .flat_map(|(_, ids)| ids.iter().copied())
            .collect();
        ids.sort_unstable();
        ids
    }
}

/// Shuffles each class with a seeded RNG, then deals its members round-robin
/// to the folds. The dealing position carries over from one class to the
/// next so fold sizes stay balanced too.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::argument(format!("need at least 2 folds, got {k}")));
    }
    if k > labels.len() {
        return Err(Error::argument(format!("{k} folds for {} samples", labels.len())));
    }
    let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut by_class = vec![Vec::new(); classes];
    for (i, &y) in labels.iter().enumerate() {
        by_class[y].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(FoldPlan { folds, seed })
}

/// A trainable classifier evaluated fold by fold.
pub trait FoldPipeline: Sync {
    fn name(&self) -> &'static str;
    fn kind(&self) -> FeatureKind;
    /// Parameters worth echoing in reports.
    fn params(&self) -> Vec<(String, String)>;
    /// Test accuracy after each training epoch (a single entry for
    /// classifiers without epochs).
    fn run_fold(&self, dataset: &GraphDataset, train: &[usize], test: &[usize], fold: usize) -> Result<Vec<f64>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    /// Accuracy of every fold at the selected epoch.
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation of `fold_accuracies`.
    pub std: f64,
    /// Epoch with the best mean accuracy across folds (earliest on ties).
    pub best_epoch: usize,
    pub epoch_means: Vec<f64>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn cross_validate(
    pipeline: &dyn FoldPipeline,
    dataset: &GraphDataset,
    k: usize,
    seed: u64,
) -> Result<(FoldPlan, CvResult)> {
    let plan = stratified_kfold(dataset.class_labels(), k, seed)?;
    let curves = (0..k)
        .into_par_iter()
        .map(|f| pipeline.run_fold(dataset, &plan.train_ids(f), plan.test_ids(f), f))
        .collect::<Result<Vec<_>>>()?;
    let epochs = curves.iter().map(Vec::len).min().unwrap_or(0);
    if epochs == 0 {
        return Err(Error::Training("a fold produced no accuracies".into()));
    }
    let epoch_means: Vec<f64> = (0..epochs)
        .map(|e| curves.iter().map(|c| c[e]).sum::<f64>() / k as f64)
        .collect();
    let mut best_epoch = 0;
    for (e, &m) in epoch_means.iter().enumerate() {
        if m > epoch_means[best_epoch] {
            best_epoch = e;
        }
    }
    let fold_accuracies: Vec<f64> = curves.iter().map(|c| c[best_epoch]).collect();
    let (mean, std) = mean_std(&fold_accuracies);
    Ok((
        plan,
        CvResult {
            fold_accuracies,
            mean,
            std,
            best_epoch,
            epoch_means,
        },
    ))
}

fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len().max(1) as f64
}

/// Explicit feature maps, L2-normalized, one-vs-rest logistic regression.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPipeline {
    pub kind: FeatureKind,
    pub classifier: LogRegConfig,
}

impl FoldPipeline for KernelPipeline {
    fn name(&self) -> &'static str {
        "kernel"
    }

    fn kind(&self) -> FeatureKind {
        self.kind
    }

    fn params(&self) -> Vec<(String, String)> {
        let c = &self.classifier;
        vec![
            ("l2".into(), c.l2_strength.to_string()),
            ("epochs".into(), c.epochs.to_string()),
            ("lr".into(), c.lr.to_string()),
        ]
    }

    fn run_fold(&self, dataset: &GraphDataset, train: &[usize], test: &[usize], fold: usize) -> Result<Vec<f64>> {
        let featurizer = Featurizer::fit(dataset, self.kind, train)?;
        let vector = |i: usize| -> SparseVec {
            normalize_sparse(&graph_feature_map_sparse(&featurizer.transform(i, dataset.graph(i))))
        };
        let xs: Vec<SparseVec> = train.iter().map(|&i| vector(i)).collect();
        let ys: Vec<usize> = train.iter().map(|&i| dataset.class_labels()[i]).collect();
        let config = LogRegConfig {
            seed: self.classifier.seed.wrapping_add(fold as u64),
            ..self.classifier.clone()
        };
        let model = logreg_train(&xs, &ys, featurizer.index().dimension(), dataset.class_count(), &config)?;
        let test_x: Vec<SparseVec> = test.iter().map(|&i| vector(i)).collect();
        let truth: Vec<usize> = test.iter().map(|&i| dataset.class_labels()[i]).collect();
        Ok(vec![accuracy(&logreg_predict(&model, &test_x), &truth)])
    }
}

/// Vertex features, centrality alignment and the convolutional network.
#[derive(Debug, Clone, PartialEq)]
pub struct DeepMapPipeline {
    pub kind: FeatureKind,
    pub field_size: usize,
    pub train: TrainConfig,
}

impl FoldPipeline for DeepMapPipeline {
    fn name(&self) -> &'static str {
        "deepmap"
    }

    fn kind(&self) -> FeatureKind {
        self.kind
    }

    fn params(&self) -> Vec<(String, String)> {
        let t = &self.train;
        vec![
            ("r".into(), self.field_size.to_string()),
            ("lr".into(), t.learning_rate.to_string()),
            ("decay".into(), t.decay_factor.to_string()),
            ("patience".into(), t.patience.to_string()),
            ("batch".into(), t.batch_size.to_string()),
            ("epochs".into(), t.max_epochs.to_string()),
        ]
    }

    fn run_fold(&self, dataset: &GraphDataset, train: &[usize], test: &[usize], fold: usize) -> Result<Vec<f64>> {
        let featurizer = Featurizer::fit(dataset, self.kind, train)?;
        let vfms = featurizer.transform_dataset(dataset);
        let tensor = assemble_input(dataset, &vfms, &dataset_centralities(dataset), self.field_size)?;
        let train_t = tensor.select(train);
        let test_t = tensor.select(test);
        let labels = dataset.class_labels();
        let train_y: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
        let test_y: Vec<usize> = test.iter().map(|&i| labels[i]).collect();
        let seed = self.train.seed.wrapping_add(fold as u64);
        let mut model = Model::new(ModelConfig::for_tensor(&tensor, dataset.class_count()), seed)?;
        let config = TrainConfig {
            seed,
            ..self.train.clone()
        };
        let mut curve = Vec::with_capacity(config.max_epochs);
        train_with(&mut model, &train_t, &train_y, &config, |_, m| {
            curve.push(m.predict(&test_t)?.accuracy(&test_y));
            Ok(true)
        })?;
        Ok(curve)
    }
}

/// Deterministic text summary of a CV run; wall time is kept out so that
/// reruns give identical bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub pipeline: String,
    pub kind: FeatureKind,
    pub params: Vec<(String, String)>,
    pub seed: u64,
    pub result: CvResult,
    pub extra: Vec<(String, String)>,
}

impl CvReport {
    pub fn new(pipeline: &dyn FoldPipeline, seed: u64, result: CvResult) -> Self {
        CvReport {
            pipeline: pipeline.name().into(),
            kind: pipeline.kind(),
            params: pipeline.params(),
            seed,
            result,
            extra: Vec::new(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let r = &self.result;
        let _ = writeln!(s, "pipeline = {}", self.pipeline);
        let _ = writeln!(s, "kind = {}", self.kind);
        for (k, v) in &self.params {
            let _ = writeln!(s, "{k} = {v}");
        }
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "folds = {}", r.fold_accuracies.len());
        for (f, a) in r.fold_accuracies.iter().enumerate() {
            let _ = writeln!(s, "fold_{f} = {a:.6}");
        }
        let _ = writeln!(s, "best_epoch = {}", r.best_epoch);
        let _ = writeln!(s, "mean = {:.6}", r.mean);
        let _ = writeln!(s, "std = {:.6}", r.std);
        for (k, v) in &self.extra {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub const ROW_HEADER: &'static str = "pipeline\tkind\tparams\tfold_accuracies\tmean\tstd\twall_seconds";

    /// One tab-separated line matching [`CvReport::ROW_HEADER`].
    pub fn machine_row(&self, wall_seconds: f64) -> String {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let folds: Vec<String> = self.result.fold_accuracies.iter().map(|a| format!("{a:.6}")).collect();
        format!(
            "{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{:.3}",
            self.pipeline,
            self.kind,
            params.join(","),
            folds.join(","),
            self.result.mean,
            self.result.std,
            wall_seconds
        )
    }
}
