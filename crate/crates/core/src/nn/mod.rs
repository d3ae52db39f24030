//! Convolutional classifier over aligned receptive-field inputs.
//!
//! conv1 has kernel length and stride `r`, so each sequence slot (one
//! receptive field) becomes one position with 32 channels. conv2 and conv3
//! are kernel-length-1 maps to 16 and 8 channels, every conv is followed by
//! ReLU, and positions are summed into an 8-dim graph vector. Then a dense
//! ReLU layer, inverted dropout, and a dense layer to class logits.
//!
//! A slot whose whole block of `r` rows is zero (a dummy) is masked: it does
//! not contribute to the sum. Padding with dummies therefore leaves logits
//! bit-for-bit unchanged.

mod checkpoint;
mod gradcheck;
mod optim;
mod train;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::alignment::{AlignedTensor, InputRow};
use crate::error::{Error, Result};

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use gradcheck::{grad_check, grad_check_with, GradCheckOptions, GradCheckReport};
pub use optim::{PlateauScheduler, RmsProp};
pub use train::{train, train_with, EpochRecord, History, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub input_dim: usize,
    pub field_size: usize,
    pub sequence_len: usize,
    pub conv_channels: [usize; 3],
    pub dense_units: usize,
    pub dropout_rate: f64,
    pub class_count: usize,
}

impl ModelConfig {
    /// Default architecture: channels 32/16/8, 128 dense units, dropout 0.5.
    pub fn new(input_dim: usize, field_size: usize, sequence_len: usize, class_count: usize) -> Self {
        ModelConfig {
            input_dim,
            field_size,
            sequence_len,
            conv_channels: [32, 16, 8],
            dense_units: 128,
            dropout_rate: 0.5,
            class_count,
        }
    }

    pub fn for_tensor(t: &AlignedTensor, class_count: usize) -> Self {
        Self::new(t.m, t.r, t.w, class_count)
    }

    pub fn validate(&self) -> Result<()> {
        if self.conv_channels.contains(&0) || self.dense_units == 0 {
            return Err(Error::argument("layer widths must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::argument(format!(
                "dropout rate {} outside [0, 1)",
                self.dropout_rate
            )));
        }
        if self.field_size == 0 || self.class_count == 0 {
            return Err(Error::argument("field size and class count must be >= 1"));
        }
        Ok(())
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_shapes().iter().map(|&(i, o)| i * o + o).sum()
    }

    fn layer_shapes(&self) -> [(usize, usize); 5] {
        let [c1, c2, c3] = self.conv_channels;
        [
            (self.field_size * self.input_dim, c1),
            (c1, c2),
            (c2, c3),
            (c3, self.dense_units),
            (self.dense_units, self.class_count),
        ]
    }
}

/// Affine map, weights row-major `fan_in x fan_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Layer {
            fan_in,
            fan_out,
            weight: vec![0.0; fan_in * fan_out],
            bias: vec![0.0; fan_out],
        }
    }

    fn xavier(fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> Self {
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let mut layer = Layer::zeros(fan_in, fan_out);
        for w in &mut layer.weight {
            *w = rng.gen_range(-bound..=bound);
        }
        layer
    }

    /// `out = bias + W^T input`
    fn apply(&self, input: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.bias);
        for (i, &x) in input.iter().enumerate() {
            if x != 0.0 {
                let row = &self.weight[i * self.fan_out..(i + 1) * self.fan_out];
                for (o, &w) in out.iter_mut().zip(row) {
                    *o += w * x;
                }
            }
        }
    }

    /// Accumulates parameter gradients into `grad`; writes `d input` if asked.
    fn backward(&self, input: &[f64], dout: &[f64], grad: &mut Layer, din: Option<&mut [f64]>) {
        for (gb, &d) in grad.bias.iter_mut().zip(dout) {
            *gb += d;
        }
        for (i, &x) in input.iter().enumerate() {
            if x != 0.0 {
                let row = &mut grad.weight[i * self.fan_out..(i + 1) * self.fan_out];
                for (g, &d) in row.iter_mut().zip(dout) {
                    *g += x * d;
                }
            }
        }
        if let Some(din) = din {
            for (i, di) in din.iter_mut().enumerate() {
                let row = &self.weight[i * self.fan_out..(i + 1) * self.fan_out];
                *di = row.iter().zip(dout).map(|(w, d)| w * d).sum();
            }
        }
    }
}

pub const GROUP_NAMES: [&str; 5] = ["conv1", "conv2", "conv3", "dense1", "dense2"];

/// All trainable tensors; also used for gradients and optimizer state.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub layers: [Layer; 5],
}

impl Params {
    pub fn zeros(config: &ModelConfig) -> Self {
        Params {
            layers: config.layer_shapes().map(|(i, o)| Layer::zeros(i, o)),
        }
    }

    /// `(name, values)` per tensor, e.g. `("conv2.weight", ..)`, in
    /// declaration order.
    pub fn groups(&self) -> Vec<(String, &[f64])> {
        let mut out = Vec::with_capacity(10);
        for (name, layer) in GROUP_NAMES.iter().zip(&self.layers) {
            out.push((format!("{name}.weight"), layer.weight.as_slice()));
            out.push((format!("{name}.bias"), layer.bias.as_slice()));
        }
        out
    }

    pub fn tensors_mut(&mut self) -> impl Iterator<Item = &mut Vec<f64>> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weight, &mut l.bias])
    }

    pub fn tensors(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.layers.iter().flat_map(|l| [&l.weight, &l.bias])
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().flatten().all(|x| x.is_finite())
    }
}

/// Intermediate values of one sample, kept for backpropagation.
#[derive(Debug, Clone)]
pub struct SampleCache {
    /// Slots with at least one nonzero input value, ascending.
    pub active: Vec<usize>,
    z1: Vec<f64>,
    z2: Vec<f64>,
    z3: Vec<f64>,
    pub readout: Vec<f64>,
    z4: Vec<f64>,
    /// Per-unit dropout multiplier (0 or 1/(1-rate)), all ones in eval mode.
    pub mask: Vec<f64>,
    dropped: Vec<f64>,
    pub logits: Vec<f64>,
}

fn relu(z: &[f64]) -> Vec<f64> {
    z.iter().map(|&x| x.max(0.0)).collect()
}

fn relu_grad(z: &[f64], d: &mut [f64]) {
    for (d, &z) in d.iter_mut().zip(z) {
        if z <= 0.0 {
            *d = 0.0;
        }
    }
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

fn cross_entropy(logits: &[f64], target: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&l| (l - max).exp()).sum::<f64>().ln();
    lse - logits[target]
}

#[derive(Debug, Clone)]
pub struct Model {
    pub config: ModelConfig,
    pub params: Params,
    rng: ChaCha8Rng,
}

impl Model {
    /// Xavier-uniform weights, zero biases, dropout stream derived from `seed`.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = Params {
            layers: config.layer_shapes().map(|(i, o)| Layer::xavier(i, o, &mut rng)),
        };
        Ok(Model::from_params(config, params, seed))
    }

    pub fn from_params(config: ModelConfig, params: Params, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        Model { config, params, rng }
    }

    /// Same weights, different sequence length.
    pub fn with_sequence_len(&self, w: usize) -> Model {
        let mut m = self.clone();
        m.config.sequence_len = w;
        m
    }

    fn check_sample(&self, x: &[InputRow]) -> Result<()> {
        let c = &self.config;
        if x.len() != c.sequence_len * c.field_size {
            return Err(Error::argument(format!(
                "sample has {} rows, model expects {} x {}",
                x.len(),
                c.sequence_len,
                c.field_size
            )));
        }
        if x.iter().flatten().any(|&(col, _)| col as usize >= c.input_dim) {
            return Err(Error::argument(format!(
                "input column beyond model dimension {}",
                c.input_dim
            )));
        }
        Ok(())
    }

    pub fn check_tensor(&self, t: &AlignedTensor) -> Result<()> {
        let c = &self.config;
        if (t.w, t.r, t.m) != (c.sequence_len, c.field_size, c.input_dim) {
            return Err(Error::argument(format!(
                "tensor shape (w={}, r={}, m={}) does not match model (w={}, r={}, m={})",
                t.w, t.r, t.m, c.sequence_len, c.field_size, c.input_dim
            )));
        }
        Ok(())
    }

    fn draw_mask(&mut self) -> Vec<f64> {
        let p = self.config.dropout_rate;
        let keep = 1.0 / (1.0 - p);
        (0..self.config.dense_units)
            .map(|_| if p > 0.0 && self.rng.gen::<f64>() < p { 0.0 } else { keep })
            .collect()
    }

    /// Forward pass for one sample. `mask = None` means eval mode.
    pub fn forward_sample(&self, x: &[InputRow], mask: Option<Vec<f64>>) -> Result<SampleCache> {
        self.check_sample(x)?;
        let c = &self.config;
        let [c1, c2, c3] = c.conv_channels;
        let r = c.field_size;
        let m = c.input_dim;
        let [l1, l2, l3, l4, l5] = &self.params.layers;

        let active: Vec<usize> = (0..c.sequence_len)
            .filter(|&s| {
                x[s * r..(s + 1) * r]
                    .iter()
                    .flatten()
                    .any(|&(_, v)| v != 0.0)
            })
            .collect();
        let k = active.len();
        let mut z1 = vec![0.0; k * c1];
        let mut z2 = vec![0.0; k * c2];
        let mut z3 = vec![0.0; k * c3];
        let mut readout = vec![0.0; c3];
        for (a, &s) in active.iter().enumerate() {
            let z = &mut z1[a * c1..(a + 1) * c1];
            z.copy_from_slice(&l1.bias);
            for (j, row) in x[s * r..(s + 1) * r].iter().enumerate() {
                for &(col, v) in row {
                    let base = (j * m + col as usize) * c1;
                    for (zo, &w) in z.iter_mut().zip(&l1.weight[base..base + c1]) {
                        *zo += w * v;
                    }
                }
            }
            let a1 = relu(z);
            l2.apply(&a1, &mut z2[a * c2..(a + 1) * c2]);
            let a2 = relu(&z2[a * c2..(a + 1) * c2]);
            l3.apply(&a2, &mut z3[a * c3..(a + 1) * c3]);
            for (s_o, &z) in readout.iter_mut().zip(&z3[a * c3..(a + 1) * c3]) {
                *s_o += z.max(0.0);
            }
        }
        let mut z4 = vec![0.0; c.dense_units];
        l4.apply(&readout, &mut z4);
        let mask = mask.unwrap_or_else(|| vec![1.0; c.dense_units]);
        let dropped: Vec<f64> = z4.iter().zip(&mask).map(|(&z, &m)| z.max(0.0) * m).collect();
        let mut logits = vec![0.0; c.class_count];
        l5.apply(&dropped, &mut logits);
        Ok(SampleCache {
            active,
            z1,
            z2,
            z3,
            readout,
            z4,
            mask,
            dropped,
            logits,
        })
    }

    /// Batch forward. In train mode a fresh dropout mask is drawn per sample.
    pub fn forward(&mut self, batch: &[&[InputRow]], train_mode: bool) -> Result<Vec<SampleCache>> {
        batch
            .iter()
            .map(|x| {
                let mask = train_mode.then(|| self.draw_mask());
                self.forward_sample(x, mask)
            })
            .collect()
    }

    /// 8-dim post-summation graph vector.
    pub fn readout(&self, x: &[InputRow]) -> Result<Vec<f64>> {
        Ok(self.forward_sample(x, None)?.readout)
    }

    fn backward_sample(&self, x: &[InputRow], cache: &SampleCache, dlogits: &[f64], grads: &mut Params) {
        let c = &self.config;
        let [c1, c2, c3] = c.conv_channels;
        let r = c.field_size;
        let m = c.input_dim;
        let [_, l2, l3, l4, l5] = &self.params.layers;
        let [g1, g2, g3, g4, g5] = &mut grads.layers;

        let mut d_dropped = vec![0.0; c.dense_units];
        l5.backward(&cache.dropped, dlogits, g5, Some(&mut d_dropped));
        let mut dz4: Vec<f64> = d_dropped.iter().zip(&cache.mask).map(|(d, m)| d * m).collect();
        relu_grad(&cache.z4, &mut dz4);
        let mut d_readout = vec![0.0; c3];
        l4.backward(&cache.readout, &dz4, g4, Some(&mut d_readout));

        let mut da2 = vec![0.0; c2];
        let mut da1 = vec![0.0; c1];
        for (a, &s) in cache.active.iter().enumerate() {
            let z1 = &cache.z1[a * c1..(a + 1) * c1];
            let z2 = &cache.z2[a * c2..(a + 1) * c2];
            let z3 = &cache.z3[a * c3..(a + 1) * c3];
            // the summation broadcasts its gradient to every active position
            let mut dz3 = d_readout.clone();
            relu_grad(z3, &mut dz3);
            l3.backward(&relu(z2), &dz3, g3, Some(&mut da2));
            relu_grad(z2, &mut da2);
            l2.backward(&relu(z1), &da2, g2, Some(&mut da1));
            relu_grad(z1, &mut da1);
            for (gb, &d) in g1.bias.iter_mut().zip(&da1) {
                *gb += d;
            }
            for (j, row) in x[s * r..(s + 1) * r].iter().enumerate() {
                for &(col, v) in row {
                    let base = (j * m + col as usize) * c1;
                    for (g, &d) in g1.weight[base..base + c1].iter_mut().zip(&da1) {
                        *g += v * d;
                    }
                }
            }
        }
    }

    /// Mean cross-entropy of the batch and its gradient w.r.t. every
    /// parameter. Dropout masks drawn in the forward pass are reused.
    pub fn loss_and_gradients(
        &mut self,
        batch: &[&[InputRow]],
        targets: &[usize],
        train_mode: bool,
    ) -> Result<(f64, Params)> {
        let masks = if train_mode {
            Some((0..batch.len()).map(|_| self.draw_mask()).collect::<Vec<_>>())
        } else {
            None
        };
        self.loss_and_gradients_with_masks(batch, targets, masks)
    }

    /// As [`Model::loss_and_gradients`] with explicit dropout multipliers.
    pub fn loss_and_gradients_with_masks(
        &self,
        batch: &[&[InputRow]],
        targets: &[usize],
        masks: Option<Vec<Vec<f64>>>,
    ) -> Result<(f64, Params)> {
        if batch.len() != targets.len() || batch.is_empty() {
            return Err(Error::argument(format!(
                "{} samples with {} targets",
                batch.len(),
                targets.len()
            )));
        }
        if let Some(&t) = targets.iter().find(|&&t| t >= self.config.class_count) {
            return Err(Error::argument(format!("target {t} out of range")));
        }
        let b = batch.len() as f64;
        let mut grads = Params::zeros(&self.config);
        let mut loss = 0.0;
        let mut masks = masks.map(Vec::into_iter);
        for (x, &t) in batch.iter().zip(targets) {
            let mask = masks.as_mut().and_then(Iterator::next);
            let cache = self.forward_sample(x, mask)?;
            loss += cross_entropy(&cache.logits, t);
            let mut dlogits = softmax(&cache.logits);
            dlogits[t] -= 1.0;
            for d in &mut dlogits {
                *d /= b;
            }
            self.backward_sample(x, &cache, &dlogits, &mut grads);
        }
        Ok((loss / b, grads))
    }

    /// Sign pattern of every ReLU pre-activation over the batch, eval mode.
    pub(crate) fn activation_signs(&self, batch: &[&[InputRow]]) -> Result<Vec<bool>> {
        let mut out = Vec::new();
        for x in batch {
            let c = self.forward_sample(x, None)?;
            for z in [&c.z1, &c.z2, &c.z3, &c.z4] {
                out.extend(z.iter().map(|&v| v > 0.0));
            }
        }
        Ok(out)
    }

    /// Mean eval-mode loss.
    pub fn loss(&self, batch: &[&[InputRow]], targets: &[usize]) -> Result<f64> {
        let mut total = 0.0;
        for (x, &t) in batch.iter().zip(targets) {
            total += cross_entropy(&self.forward_sample(x, None)?.logits, t);
        }
        Ok(total / batch.len() as f64)
    }

    /// Argmax classes and softmax rows, dropout off.
    pub fn predict(&self, t: &AlignedTensor) -> Result<Prediction> {
        self.check_tensor(t)?;
        let probabilities = (0..t.len())
            .into_par_iter()
            .map(|i| Ok(softmax(&self.forward_sample(t.rows(i), None)?.logits)))
            .collect::<Result<Vec<_>>>()?;
        let classes = probabilities.iter().map(|p| argmax(p)).collect();
        Ok(Prediction {
            classes,
            probabilities,
        })
    }
}

fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub classes: Vec<usize>,
    pub probabilities: Vec<Vec<f64>>,
}

impl Prediction {
    pub fn accuracy(&self, labels: &[usize]) -> f64 {
        if labels.is_empty() {
            return 0.0;
        }
        let hits = self.classes.iter().zip(labels).filter(|(a, b)| a == b).count();
        hits as f64 / labels.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::{assemble_input, assemble_input_with_width, dataset_centralities, min_centrality_gap};
    use crate::centrality::eigenvector_centrality_default;
    use crate::features::{featurize_dataset, FeatureKind};
    use crate::fixtures;
    use crate::graph::{permute_graph, Graph, GraphDataset, Permutation};

    fn random_sample(w: usize, r: usize, m: usize, rng: &mut ChaCha8Rng) -> Vec<InputRow> {
        (0..w * r)
            .map(|_| {
                let mut row = Vec::new();
                for c in 0..m as u32 {
                    if rng.gen_bool(0.6) {
                        row.push((c, rng.gen_range(-1.0..1.0)));
                    }
                }
                row
            })
            .collect()
    }

    #[test]
    fn shapes_follow_the_architecture() {
        let config = ModelConfig::new(4, 3, 6, 5);
        let model = Model::new(config, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = random_sample(6, 3, 4, &mut rng);
        let cache = model.forward_sample(&x, None).unwrap();
        let k = cache.active.len();
        assert_eq!(k, 6);
        assert_eq!((cache.z1.len(), cache.z2.len(), cache.z3.len()), (k * 32, k * 16, k * 8));
        assert_eq!((cache.readout.len(), cache.z4.len(), cache.logits.len()), (8, 128, 5));
        assert_eq!(config_params(&model.config), model.config.parameter_count());
    }

    fn config_params(c: &ModelConfig) -> usize {
        Params::zeros(c).tensors().map(Vec::len).sum()
    }

    #[test]
    fn wrong_shape_is_argument_error() {
        let model = Model::new(ModelConfig::new(4, 3, 6, 2), 1).unwrap();
        let short = vec![Vec::new(); 17];
        assert!(matches!(model.forward_sample(&short, None), Err(Error::Argument(_))));
        let mut wide = vec![Vec::new(); 18];
        wide[0] = vec![(4, 1.0)];
        assert!(model.forward_sample(&wide, None).is_err());
    }

    #[test]
    fn identity_kernel_one_conv_is_passthrough() {
        let mut layer = Layer::zeros(3, 3);
        for i in 0..3 {
            layer.weight[i * 3 + i] = 1.0;
        }
        let mut out = vec![0.0; 3];
        layer.apply(&[0.5, -2.0, 3.0], &mut out);
        assert_eq!(out, vec![0.5, -2.0, 3.0]);
    }

    #[test]
    fn zero_input_reaches_logits_through_biases_only() {
        let config = ModelConfig::new(2, 2, 3, 3);
        let mut model = Model::new(config.clone(), 2).unwrap();
        for (i, b) in model.params.layers[3].bias.iter_mut().enumerate() {
            *b = if i % 2 == 0 { 0.5 } else { -0.5 };
        }
        model.params.layers[4].bias = vec![0.1, 0.2, 0.3];
        let cache = model.forward_sample(&vec![Vec::new(); 6], None).unwrap();
        assert!(cache.readout.iter().all(|&s| s == 0.0));
        // hand oracle: logits = b5 + W5^T relu(b4)
        let l5 = &model.params.layers[4];
        let mut expected = l5.bias.clone();
        for (i, b) in model.params.layers[3].bias.iter().enumerate() {
            for (o, e) in expected.iter_mut().enumerate() {
                *e += b.max(0.0) * l5.weight[i * 3 + o];
            }
        }
        for (a, b) in cache.logits.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_and_confident_losses() {
        assert!((cross_entropy(&[0.0; 4], 2) - 4f64.ln()).abs() < 1e-12);
        assert!(cross_entropy(&[20.0, 0.0, 0.0], 0) < 1e-4);
        assert_eq!(softmax(&[0.0, 0.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn train_mode_gradient_uses_the_forward_mask() {
        let config = ModelConfig::new(2, 2, 3, 3);
        let mut model = Model::new(config, 3).unwrap();
        for t in model.params.tensors_mut() {
            for (i, x) in t.iter_mut().enumerate() {
                *x += 0.01 * ((i % 7) as f64 - 3.0);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_sample(3, 2, 2, &mut rng);
        let mask = model.draw_mask();
        assert!(mask.iter().any(|&m| m == 0.0) && mask.iter().any(|&m| m == 2.0));
        let (_, grads) = model
            .loss_and_gradients_with_masks(&[&x], &[1], Some(vec![mask.clone()]))
            .unwrap();
        // finite difference on a dense1 bias unit that survived dropout
        let unit = mask.iter().position(|&m| m > 0.0).unwrap();
        let h = 1e-6;
        let eval = |delta: f64| {
            let mut m2 = model.clone();
            m2.params.layers[3].bias[unit] += delta;
            let cache = m2.forward_sample(&x, Some(mask.clone())).unwrap();
            cross_entropy(&cache.logits, 1)
        };
        let numeric = (eval(h) - eval(-h)) / (2.0 * h);
        assert!((numeric - grads.layers[3].bias[unit]).abs() < 1e-7);
        let dead = mask.iter().position(|&m| m == 0.0).unwrap();
        assert_eq!(grads.layers[3].bias[dead], 0.0);
    }

    #[test]
    fn probabilities_normalize() {
        let ds = fixtures::centrality_dataset();
        let (_, vfms) = featurize_dataset(&ds, FeatureKind::ShortestPath).unwrap();
        let t = assemble_input(&ds, &vfms, &dataset_centralities(&ds), 3).unwrap();
        let model = Model::new(ModelConfig::for_tensor(&t, 3), 4).unwrap();
        let pred = model.predict(&t).unwrap();
        for row in &pred.probabilities {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
        let other = Model::new(ModelConfig::new(t.m + 1, 3, t.w, 3), 4).unwrap();
        assert!(other.predict(&t).is_err());
    }

    #[test]
    fn padding_with_dummies_keeps_logits_bitwise() {
        let ds = fixtures::centrality_dataset();
        let (_, vfms) = featurize_dataset(&ds, FeatureKind::WlSubtree { iterations: 1 }).unwrap();
        let cs = dataset_centralities(&ds);
        let t = assemble_input(&ds, &vfms, &cs, 3).unwrap();
        let padded = assemble_input_with_width(&ds, &vfms, &cs, 3, t.w + 5).unwrap();
        let mut model = Model::new(ModelConfig::for_tensor(&t, 2), 8).unwrap();
        for t in model.params.tensors_mut() {
            for (i, x) in t.iter_mut().enumerate() {
                *x += 0.05 * ((i % 5) as f64 - 2.0);
            }
        }
        let wide = model.with_sequence_len(t.w + 5);
        for i in 0..t.len() {
            let a = model.forward_sample(t.rows(i), None).unwrap().logits;
            let b = wide.forward_sample(padded.rows(i), None).unwrap().logits;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn isomorphic_graphs_share_readout() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut checked = 0;
        while checked < 10 {
            let n = rng.gen_range(5..12);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen_bool(0.3) {
                        edges.push((u, v));
                    }
                }
            }
            let labels = (0..n).map(|_| rng.gen_range(1..4)).collect();
            let g = Graph::from_edges(labels, &edges).unwrap();
            if min_centrality_gap(&eigenvector_centrality_default(&g)) < 1e-4 {
                continue;
            }
            let p = Permutation::random(n, &mut rng);
            let h = permute_graph(&g, &p).unwrap();
            let ds = GraphDataset::new("iso", vec![g, h], vec![0, 0], 1).unwrap();
            for kind in [FeatureKind::ShortestPath, FeatureKind::WlSubtree { iterations: 2 }] {
                let (_, vfms) = featurize_dataset(&ds, kind).unwrap();
                let t = assemble_input(&ds, &vfms, &dataset_centralities(&ds), 3).unwrap();
                let model = Model::new(ModelConfig::for_tensor(&t, 2), checked).unwrap();
                assert_eq!(model.readout(t.rows(0)).unwrap(), model.readout(t.rows(1)).unwrap());
            }
            checked += 1;
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let mut c = ModelConfig::new(2, 2, 2, 2);
        c.dropout_rate = 1.0;
        assert!(Model::new(c.clone(), 0).is_err());
        c.dropout_rate = 0.5;
        c.conv_channels = [32, 0, 8];
        assert!(Model::new(c, 0).is_err());
    }
}
