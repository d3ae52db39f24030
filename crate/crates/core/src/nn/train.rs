use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Model, PlateauScheduler, RmsProp};
use crate::alignment::{AlignedTensor, InputRow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub decay_factor: f64,
    pub patience: usize,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub rmsprop_rho: f64,
    pub rmsprop_eps: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            decay_factor: 0.5,
            patience: 5,
            batch_size: 32,
            max_epochs: 100,
            rmsprop_rho: 0.9,
            rmsprop_eps: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::argument("batch size must be >= 1"));
        }
        if self.patience == 0 {
            return Err(Error::argument("patience must be >= 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::argument("learning rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean of the epoch's mini-batch losses (train mode).
    pub loss: f64,
    /// Accuracy on the training set after the epoch, dropout off.
    pub accuracy: f64,
    /// Rate used during this epoch.
    pub lr: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub epochs: Vec<EpochRecord>,
}

impl History {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "epoch,loss,accuracy,lr")?;
        for e in &self.epochs {
            writeln!(out, "{},{},{},{}", e.epoch, e.loss, e.accuracy, e.lr)?;
        }
        Ok(())
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.epochs.last()
    }
}

pub fn train(model: &mut Model, tensor: &AlignedTensor, labels: &[usize], config: &TrainConfig) -> Result<History> {
    train_with(model, tensor, labels, config, |_, _| Ok(true))
}

/// Trains for up to `max_epochs`. After each epoch `on_epoch` sees the record
/// and the model; returning `false` stops training early.
pub fn train_with(
    model: &mut Model,
    tensor: &AlignedTensor,
    labels: &[usize],
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord, &Model) -> Result<bool>,
) -> Result<History> {
    config.validate()?;
    if tensor.is_empty() {
        return Err(Error::argument("cannot train on an empty dataset"));
    }
    if labels.len() != tensor.len() {
        return Err(Error::argument(format!(
            "{} labels for {} graphs",
            labels.len(),
            tensor.len()
        )));
    }
    if let Some(&l) = labels.iter().find(|&&l| l >= model.config.class_count) {
        return Err(Error::argument(format!("label {l} out of range")));
    }
    model.check_tensor(tensor)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut optimizer = RmsProp::new(model, config.rmsprop_rho, config.rmsprop_eps);
    let mut scheduler = PlateauScheduler::new(config.learning_rate, config.decay_factor, config.patience)?;
    let mut order: Vec<usize> = (0..tensor.len()).collect();
    let mut history = History::default();

    for epoch in 0..config.max_epochs {
        order.shuffle(&mut rng);
        let lr = scheduler.lr;
        let mut losses = Vec::new();
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&[InputRow]> = chunk.iter().map(|&i| tensor.rows(i)).collect();
            let targets: Vec<usize> = chunk.iter().map(|&i| labels[i]).collect();
            let (loss, grads) = model.loss_and_gradients(&batch, &targets, true)?;
            optimizer.step(model, &grads, lr)?;
            losses.push(loss);
        }
        let loss = losses.iter().sum::<f64>() / losses.len() as f64;
        if !loss.is_finite() {
            return Err(Error::Training(format!("loss became {loss} in epoch {epoch}")));
        }
        let accuracy = model.predict(tensor)?.accuracy(labels);
        let record = EpochRecord {
            epoch,
            loss,
            accuracy,
            lr,
        };
        history.epochs.push(record);
        scheduler.observe(loss);
        log::debug!("epoch {epoch}: loss {loss:.5} acc {accuracy:.4} lr {lr}");
        if !on_epoch(&record, model)? {
            break;
        }
    }
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::ModelConfig;
    use rand::Rng;

    /// 8 samples, 2 classes, class signal in which columns are active.
    fn toy() -> (AlignedTensor, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (w, r, m) = (4, 2, 6);
        let mut graphs = Vec::new();
        let mut labels = Vec::new();
        for i in 0..8 {
            let class = i % 2;
            let rows = (0..w * r)
                .map(|_| {
                    let c = (3 * class + rng.gen_range(0..3)) as u32;
                    vec![(c, rng.gen_range(1..4) as f64)]
                })
                .collect();
            graphs.push(rows);
            labels.push(class);
        }
        (AlignedTensor::new(w, r, m, graphs).unwrap(), labels)
    }

    fn toy_config(epochs: usize) -> TrainConfig {
        TrainConfig {
            batch_size: 4,
            max_epochs: epochs,
            seed: 3,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn same_seed_same_history() {
        let (t, y) = toy();
        let run = || {
            let mut m = Model::new(ModelConfig::for_tensor(&t, 2), 5).unwrap();
            train(&mut m, &t, &y, &toy_config(10)).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a, b);
        assert_eq!(a.epochs.len(), 10);
    }

    #[test]
    fn toy_set_is_memorized() {
        let (t, y) = toy();
        let mut m = Model::new(ModelConfig::for_tensor(&t, 2), 5).unwrap();
        let h = train(&mut m, &t, &y, &toy_config(150)).unwrap();
        assert_eq!(h.last().unwrap().accuracy, 1.0);
        // accuracy recomputed from predictions matches the history
        assert_eq!(m.predict(&t).unwrap().accuracy(&y), h.last().unwrap().accuracy);
        assert!(m.params.all_finite());
    }

    #[test]
    fn small_rate_first_epoch_does_not_increase_loss() {
        let (t, y) = toy();
        let mut m = Model::new(ModelConfig::for_tensor(&t, 2), 5).unwrap();
        m.config.dropout_rate = 0.0;
        let batch: Vec<&[InputRow]> = (0..t.len()).map(|i| t.rows(i)).collect();
        let before = m.loss(&batch, &y).unwrap();
        let config = TrainConfig {
            learning_rate: 1e-4,
            batch_size: 8,
            max_epochs: 1,
            ..TrainConfig::default()
        };
        train(&mut m, &t, &y, &config).unwrap();
        assert!(m.loss(&batch, &y).unwrap() <= before);
    }

    #[test]
    fn rejects_empty_and_mismatched() {
        let (t, y) = toy();
        let mut m = Model::new(ModelConfig::for_tensor(&t, 2), 5).unwrap();
        let empty = t.select(&[]);
        assert!(matches!(train(&mut m, &empty, &[], &toy_config(1)), Err(Error::Argument(_))));
        assert!(train(&mut m, &t, &y[..3], &toy_config(1)).is_err());
        let bad = TrainConfig { batch_size: 0, ..toy_config(1) };
        assert!(train(&mut m, &t, &y, &bad).is_err());
    }

    #[test]
    fn callback_can_stop_early_and_csv_has_header() {
        let (t, y) = toy();
        let mut m = Model::new(ModelConfig::for_tensor(&t, 2), 5).unwrap();
        let h = train_with(&mut m, &t, &y, &toy_config(10), |r, _| Ok(r.epoch < 2)).unwrap();
        assert_eq!(h.epochs.len(), 3);
        let mut buf = Vec::new();
        h.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("epoch,loss,accuracy,lr\n0,"));
        assert_eq!(text.lines().count(), 4);
    }
}
