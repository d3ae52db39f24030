//! Analytic gradients against central finite differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Model, ModelConfig, Params};
use crate::alignment::InputRow;
use crate::error::{Error, Result};

/// Denominator floor of the relative error, so entries whose true gradient
/// is ~0 are judged on absolute error instead of amplified round-off.
pub const RELATIVE_FLOOR: f64 = 1e-4;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(RELATIVE_FLOOR)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckOptions {
    pub seed: u64,
    pub step: f64,
    pub tolerance: f64,
    pub batch_size: usize,
    /// Feed an all-zero batch, so every slot is masked.
    pub zero_input: bool,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        GradCheckOptions {
            seed: 0,
            step: 1e-5,
            tolerance: 1e-6,
            batch_size: 3,
            zero_input: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    /// Max relative error per parameter tensor, e.g. `("conv2.weight", 3e-9)`.
    pub groups: Vec<(String, f64)>,
    pub tolerance: f64,
    /// Entries left out because the finite-difference step crossed a ReLU
    /// kink, where the central difference is not a valid oracle.
    pub skipped: usize,
}

impl GradCheckReport {
    pub fn max_error(&self) -> f64 {
        self.groups.iter().map(|g| g.1).fold(0.0, f64::max)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.groups
            .iter()
            .filter(|(_, e)| !(*e < self.tolerance))
            .map(|(n, _)| n.as_str())
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.failing().is_empty()
    }
}

pub fn grad_check(config: &ModelConfig, seed: u64, tolerance: f64) -> Result<GradCheckReport> {
    let opts = GradCheckOptions {
        seed,
        tolerance,
        ..GradCheckOptions::default()
    };
    grad_check_with(config, &opts, |_| {})
}

/// Runs the check; `corrupt` may tamper with the analytic gradients first
/// (negative control).
pub fn grad_check_with(
    config: &ModelConfig,
    opts: &GradCheckOptions,
    corrupt: impl Fn(&mut Params),
) -> Result<GradCheckReport> {
    if config.parameter_count() > 5000 {
        return Err(Error::argument(format!(
            "gradient check wants <= 5000 parameters, config has {}",
            config.parameter_count()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut config = config.clone();
    config.dropout_rate = 0.0;
    let mut model = Model::new(config.clone(), opts.seed)?;
    // nonzero biases keep pre-activations away from the ReLU kink
    for layer in &mut model.params.layers {
        for b in &mut layer.bias {
            *b = rng.gen_range(0.05..0.5) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        }
    }

    let (w, r, m) = (config.sequence_len, config.field_size, config.input_dim);
    let samples: Vec<Vec<InputRow>> = (0..opts.batch_size)
        .map(|b| {
            (0..w * r)
                .map(|row| {
                    // last slot of the first sample stays empty (masked)
                    if opts.zero_input || (b == 0 && w > 1 && row >= (w - 1) * r) {
                        return Vec::new();
                    }
                    (0..m as u32)
                        .map(|c| (c, rng.gen_range(0.1..1.0)))
                        .collect()
                })
                .collect()
        })
        .collect();
    let batch: Vec<&[InputRow]> = samples.iter().map(Vec::as_slice).collect();
    let targets: Vec<usize> = (0..opts.batch_size)
        .map(|_| rng.gen_range(0..config.class_count))
        .collect();

    let (_, mut analytic) = model.loss_and_gradients(&batch, &targets, false)?;
    corrupt(&mut analytic);

    let h = opts.step;
    let base_signs = model.activation_signs(&batch)?;
    let mut skipped = 0;
    let mut groups = Vec::new();
    let names: Vec<String> = analytic.groups().into_iter().map(|g| g.0).collect();
    for (t, name) in names.into_iter().enumerate() {
        let len = analytic.tensors().nth(t).map_or(0, Vec::len);
        let mut worst = 0.0f64;
        for i in 0..len {
            let original = model.params.tensors().nth(t).unwrap()[i];
            let mut at = |value: f64| -> Result<(f64, bool)> {
                model.params.tensors_mut().nth(t).unwrap()[i] = value;
                let kink = model.activation_signs(&batch)? != base_signs;
                Ok((model.loss(&batch, &targets)?, kink))
            };
            let (plus, kink_plus) = at(original + h)?;
            let (minus, kink_minus) = at(original - h)?;
            at(original)?;
            if kink_plus || kink_minus {
                skipped += 1;
                continue;
            }
            let numeric = (plus - minus) / (2.0 * h);
            let a = analytic.tensors().nth(t).unwrap()[i];
            worst = worst.max(relative_error(a, numeric));
        }
        groups.push((name, worst));
    }
    Ok(GradCheckReport {
        groups,
        tolerance: opts.tolerance,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> ModelConfig {
        ModelConfig::new(2, 2, 3, 3)
    }

    #[test]
    fn tiny_model_passes() {
        let report = grad_check(&tiny(), 1, 1e-6).unwrap();
        assert_eq!(report.groups.len(), 10);
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn coarse_step_within_looser_bound() {
        let opts = GradCheckOptions {
            step: 1e-3,
            tolerance: 1e-4,
            seed: 2,
            ..GradCheckOptions::default()
        };
        let report = grad_check_with(&tiny(), &opts, |_| {}).unwrap();
        assert!(report.passed(), "{report:?}");
        assert!(report.skipped < 20, "{report:?}");
    }

    #[test]
    fn zero_input_batch_passes() {
        let opts = GradCheckOptions {
            zero_input: true,
            seed: 3,
            ..GradCheckOptions::default()
        };
        let report = grad_check_with(&tiny(), &opts, |_| {}).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn corrupted_conv2_is_flagged() {
        let report = grad_check_with(&tiny(), &GradCheckOptions::default(), |g| {
            for x in &mut g.layers[1].weight {
                *x *= 1.5;
            }
        })
        .unwrap();
        assert_eq!(report.failing(), vec!["conv2.weight"]);
    }

    #[test]
    fn large_config_rejected() {
        assert!(grad_check(&ModelConfig::new(50, 5, 3, 2), 0, 1e-6).is_err());
    }
}
