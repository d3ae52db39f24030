use super::{Model, Params};
use crate::error::{Error, Result};

/// RMSprop: `a <- rho a + (1 - rho) g^2`, `p <- p - lr g / (sqrt(a) + eps)`.
#[derive(Debug, Clone)]
pub struct RmsProp {
    pub rho: f64,
    pub eps: f64,
    pub accumulator: Params,
}

impl RmsProp {
    pub fn new(model: &Model, rho: f64, eps: f64) -> Self {
        RmsProp {
            rho,
            eps,
            accumulator: Params::zeros(&model.config),
        }
    }

    /// Applies one update. A non-finite gradient aborts before anything is
    /// modified.
    pub fn step(&mut self, model: &mut Model, grads: &Params, lr: f64) -> Result<()> {
        if self.accumulator.layers.iter().map(|l| (l.fan_in, l.fan_out)).ne(grads
            .layers
            .iter()
            .map(|l| (l.fan_in, l.fan_out)))
        {
            return Err(Error::argument("gradient shapes do not match optimizer state"));
        }
        if let Some((name, _)) = grads
            .groups()
            .into_iter()
            .find(|(_, g)| g.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::Training(format!("non-finite gradient in {name}")));
        }
        let (rho, eps) = (self.rho, self.eps);
        for ((p, a), g) in model
            .params
            .tensors_mut()
            .zip(self.accumulator.tensors_mut())
            .zip(grads.tensors())
        {
            for ((p, a), &g) in p.iter_mut().zip(a.iter_mut()).zip(g) {
                if g == 0.0 && *a == 0.0 {
                    continue;
                }
                *a = rho * *a + (1.0 - rho) * g * g;
                *p -= lr * g / (a.sqrt() + eps);
            }
        }
        if !model.params.all_finite() {
            return Err(Error::Training("parameters became non-finite".into()));
        }
        Ok(())
    }
}

/// Multiplies the learning rate by `factor` once the monitored loss has not
/// improved on its best value for `patience` consecutive epochs.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateauScheduler {
    pub lr: f64,
    pub factor: f64,
    pub patience: usize,
    best: f64,
    wait: usize,
}

impl PlateauScheduler {
    pub fn new(lr: f64, factor: f64, patience: usize) -> Result<Self> {
        if patience == 0 {
            return Err(Error::argument("patience must be >= 1"));
        }
        Ok(PlateauScheduler {
            lr,
            factor,
            patience,
            best: f64::INFINITY,
            wait: 0,
        })
    }

    /// Records an epoch's loss; returns true if the rate was just decayed.
    pub fn observe(&mut self, loss: f64) -> bool {
        if loss < self.best {
            self.best = loss;
            self.wait = 0;
            return false;
        }
        self.wait += 1;
        if self.wait >= self.patience {
            self.lr *= self.factor;
            self.wait = 0;
            return true;
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::ModelConfig;

    fn scalar_setup() -> (Model, RmsProp, Params) {
        let model = Model::new(ModelConfig::new(1, 1, 1, 1), 0).unwrap();
        let opt = RmsProp::new(&model, 0.9, 1e-8);
        let grads = Params::zeros(&model.config);
        (model, opt, grads)
    }

    #[test]
    fn zero_gradient_changes_nothing() {
        let (mut model, mut opt, grads) = scalar_setup();
        let before = model.params.clone();
        opt.step(&mut model, &grads, 0.01).unwrap();
        assert_eq!(model.params, before);
    }

    #[test]
    fn single_scalar_step() {
        let (mut model, mut opt, mut grads) = scalar_setup();
        grads.layers[0].bias[0] = 1.0;
        let p0 = model.params.layers[0].bias[0];
        opt.step(&mut model, &grads, 0.01).unwrap();
        let delta = model.params.layers[0].bias[0] - p0;
        assert!((opt.accumulator.layers[0].bias[0] - 0.1).abs() < 1e-15);
        assert!((delta + 0.031623).abs() < 1e-6, "{delta}");
    }

    #[test]
    fn constant_gradient_steps_shrink() {
        let (mut model, mut opt, mut grads) = scalar_setup();
        grads.layers[0].bias[0] = 1.0;
        let mut p = model.params.layers[0].bias[0];
        let mut deltas = Vec::new();
        let mut acc = Vec::new();
        for _ in 0..5 {
            opt.step(&mut model, &grads, 0.01).unwrap();
            let q = model.params.layers[0].bias[0];
            deltas.push((q - p).abs());
            p = q;
            acc.push(opt.accumulator.layers[0].bias[0]);
        }
        assert!(deltas[1] < deltas[0] * 1.01);
        assert!(acc.windows(2).all(|w| w[0] < w[1] && w[1] <= 1.0));
    }

    #[test]
    fn non_finite_gradient_aborts_step() {
        let (mut model, mut opt, mut grads) = scalar_setup();
        grads.layers[0].bias[0] = 1.0;
        grads.layers[2].weight[3] = f64::NAN;
        let before = model.params.clone();
        let err = opt.step(&mut model, &grads, 0.01).unwrap_err();
        assert!(matches!(err, Error::Training(ref m) if m.contains("conv3.weight")));
        assert_eq!(model.params, before);
    }

    #[test]
    fn flat_loss_halves_every_patience_epochs() {
        let mut s = PlateauScheduler::new(0.01, 0.5, 5).unwrap();
        let decays: Vec<usize> = (0..16).filter(|_| s.observe(1.0)).collect();
        assert_eq!(decays, vec![5, 10, 15]);
        assert!((s.lr - 0.01 / 8.0).abs() < 1e-15);
        assert!(PlateauScheduler::new(0.01, 0.5, 0).is_err());
    }

    #[test]
    fn improvement_resets_wait() {
        let mut s = PlateauScheduler::new(1.0, 0.5, 2).unwrap();
        assert!(!s.observe(3.0));
        assert!(!s.observe(3.0));
        assert!(!s.observe(2.0));
        assert!(!s.observe(2.5));
        assert!(s.observe(2.5));
        assert_eq!(s.lr, 0.5);
    }
}
