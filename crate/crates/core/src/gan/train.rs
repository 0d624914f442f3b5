//! Adversarial training loop and collapse detection.

use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::Adam;
use super::mlp::{sigmoid, softplus, Activation, MlpParams};
use super::model::GanModel;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::windowing::WindowSet;

/// Thresholds for declaring a training run collapsed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseThresholds<S> {
    /// Discriminator loss below this for `patience` consecutive epochs is a collapse.
    pub loss_floor: S,
    /// Mean per-coordinate standard deviation of a scaled probe batch below this is a collapse.
    pub min_sample_std: S,
    pub patience: usize,
}

impl<S: Scalar> Default for CollapseThresholds<S> {
    fn default() -> Self {
        Self {
            loss_floor: S::lit(0.05),
            min_sample_std: S::lit(1e-4),
            patience: 20,
        }
    }
}

/// Hyperparameters of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct GanConfig<S> {
    pub noise_dim: usize,
    pub window_len: usize,
    pub generator_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_generator: S,
    pub lr_discriminator: S,
    pub beta1: S,
    pub beta2: S,
    pub adam_eps: S,
    pub seed: u64,
    /// Normalization constant; `None` uses the largest price in the training set.
    pub scale: Option<S>,
    pub collapse: CollapseThresholds<S>,
    /// Target for real samples in the discriminator loss (one-sided label smoothing).
    pub real_label: S,
    /// Number of generated windows inspected after every epoch.
    pub probe_size: usize,
}

impl<S: Scalar> GanConfig<S> {
    pub fn new(window_len: usize) -> Self {
        Self {
            noise_dim: 32,
            window_len,
            generator_hidden: vec![128, 256],
            discriminator_hidden: vec![256, 64],
            epochs: 200,
            batch_size: 64,
            lr_generator: S::lit(2e-4),
            lr_discriminator: S::lit(2e-4),
            beta1: S::lit(0.5),
            beta2: S::lit(0.999),
            adam_eps: S::lit(1e-8),
            seed: 0,
            scale: None,
            collapse: CollapseThresholds::default(),
            real_label: S::lit(0.9),
            probe_size: 64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: usize| {
            if v == 0 {
                Err(Error::InvalidConfig(format!("{name} must be positive")))
            } else {
                Ok(())
            }
        };
        positive("noise_dim", self.noise_dim)?;
        positive("window_len", self.window_len)?;
        positive("epochs", self.epochs)?;
        positive("batch_size", self.batch_size)?;
        positive("collapse patience", self.collapse.patience)?;
        if self.probe_size < 2 {
            return Err(Error::InvalidConfig("probe_size must be at least 2".into()));
        }
        if self.generator_hidden.iter().chain(&self.discriminator_hidden).any(|&w| w == 0) {
            return Err(Error::InvalidConfig("hidden widths must be positive".into()));
        }
        for (name, v) in [
            ("lr_generator", self.lr_generator),
            ("lr_discriminator", self.lr_discriminator),
            ("adam_eps", self.adam_eps),
            ("loss floor", self.collapse.loss_floor),
            ("min sample std", self.collapse.min_sample_std),
        ] {
            if !(v.is_finite() && v > S::zero()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("beta1", self.beta1), ("beta2", self.beta2), ("real_label", self.real_label)] {
            if !(v > S::zero() && v < S::one() || name == "real_label" && v == S::one()) {
                return Err(Error::InvalidConfig(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if let Some(s) = self.scale {
            if !(s.is_finite() && s > S::zero()) {
                return Err(Error::InvalidConfig(format!("scale must be positive, got {s}")));
            }
        }
        Ok(())
    }

    /// Fresh generator (`noise → hidden… → T`, ReLU hidden, sigmoid output) and
    /// discriminator (`T → hidden… → 1`, ReLU hidden, sigmoid output).
    pub fn init_networks(&self, rng: &mut ChaCha8Rng) -> Result<(MlpParams<S>, MlpParams<S>)> {
        let build = |input: usize, hidden: &[usize], output: usize, rng: &mut ChaCha8Rng| {
            let dims: Vec<usize> = std::iter::once(input)
                .chain(hidden.iter().copied())
                .chain(std::iter::once(output))
                .collect();
            let mut acts = vec![Activation::Relu; hidden.len()];
            acts.push(Activation::Sigmoid);
            MlpParams::init(&dims, &acts, rng)
        };
        let g = build(self.noise_dim, &self.generator_hidden, self.window_len, rng)?;
        let d = build(self.window_len, &self.discriminator_hidden, 1, rng)?;
        Ok((g, d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollapseReason {
    NonFiniteLoss,
    DiscriminatorDominates,
    LowSampleSpread,
}

impl std::fmt::Display for CollapseReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CollapseReason::NonFiniteLoss => "non-finite loss",
            CollapseReason::DiscriminatorDominates => "discriminator loss stayed below the floor",
            CollapseReason::LowSampleSpread => "generated samples have (near) zero spread",
        })
    }
}

/// Per-epoch losses and the collapse verdict of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport<S> {
    pub generator_loss: Vec<S>,
    /// Unsmoothed adversarial loss `-(log D(x) + log(1 - D(G(z))))`, averaged per epoch.
    pub discriminator_loss: Vec<S>,
    pub collapsed: bool,
    pub collapse_reason: Option<CollapseReason>,
    pub epochs_run: usize,
    /// Stride of the training windows.
    pub stride: usize,
}

/// Collapse iff any loss is non-finite, the discriminator loss has been below the floor
/// for the last `patience` epochs, or the probe batch (one generated window per row,
/// in scaled units) has mean per-coordinate standard deviation below the threshold.
pub fn detect_collapse<S: Scalar>(
    discriminator_loss: &[S],
    generator_loss: &[S],
    probe: ArrayView2<S>,
    thresholds: &CollapseThresholds<S>,
) -> Option<CollapseReason> {
    if discriminator_loss.iter().chain(generator_loss).any(|v| !v.is_finite()) {
        return Some(CollapseReason::NonFiniteLoss);
    }
    let k = thresholds.patience;
    if k > 0
        && discriminator_loss.len() >= k
        && discriminator_loss[discriminator_loss.len() - k..]
            .iter()
            .all(|&l| l < thresholds.loss_floor)
    {
        return Some(CollapseReason::DiscriminatorDominates);
    }
    if probe.iter().any(|v| !v.is_finite()) {
        return Some(CollapseReason::NonFiniteLoss);
    }
    if probe_spread(probe) < thresholds.min_sample_std {
        return Some(CollapseReason::LowSampleSpread);
    }
    None
}

/// Mean over coordinates of the population standard deviation across rows.
pub fn probe_spread<S: Scalar>(probe: ArrayView2<S>) -> S {
    if probe.nrows() < 2 || probe.ncols() == 0 {
        return S::zero();
    }
    let std = probe.std_axis(Axis(0), S::zero());
    std.mean().unwrap_or_else(S::zero)
}

/// Trains a GAN on `ws` with the standard adversarial objective.
///
/// Windows are divided by the scale before training. Each step updates the
/// discriminator on one real and one generated batch, then the generator with the
/// non-saturating loss `-log D(G(z))`. Training stops early on collapse; a
/// collapsed run still returns its model and report.
pub fn train<S: Scalar>(ws: &WindowSet<S>, cfg: &GanConfig<S>) -> Result<(GanModel<S>, TrainReport<S>)> {
    cfg.validate()?;
    if ws.window_len() != cfg.window_len {
        return Err(Error::DimensionMismatch {
            context: "training window length",
            expected: cfg.window_len,
            found: ws.window_len(),
        });
    }
    if ws.len() < cfg.batch_size {
        return Err(Error::InvalidConfig(format!(
            "batch size {} exceeds training-set size {}",
            cfg.batch_size,
            ws.len()
        )));
    }
    let scale = match cfg.scale {
        Some(s) => s,
        None => ws.max_value(),
    };
    let t = cfg.window_len;
    let mut data = Array2::zeros((ws.len(), t));
    for (mut row, w) in data.axis_iter_mut(Axis(0)).zip(ws.windows()) {
        row.iter_mut().zip(w).for_each(|(r, &v)| *r = v / scale);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (g, d) = cfg.init_networks(&mut rng)?;
    let mut model = GanModel::new(g, d, scale)?;
    let probe_noise = normal_batch(cfg.probe_size, cfg.noise_dim, &mut rng);

    let (g_net, d_net) = model.parts_mut();
    let mut g_opt = Adam::new(g_net, cfg.lr_generator, cfg.beta1, cfg.beta2, cfg.adam_eps);
    let mut d_opt = Adam::new(d_net, cfg.lr_discriminator, cfg.beta1, cfg.beta2, cfg.adam_eps);

    let batch = cfg.batch_size;
    let steps = ws.len() / batch;
    let inv_batch = S::one() / S::from_usize_lossy(batch);
    let mut order: Vec<usize> = (0..ws.len()).collect();

    let mut report = TrainReport {
        generator_loss: Vec::with_capacity(cfg.epochs),
        discriminator_loss: Vec::with_capacity(cfg.epochs),
        collapsed: false,
        collapse_reason: None,
        epochs_run: 0,
        stride: ws.stride(),
    };

    for _epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut d_total = S::zero();
        let mut g_total = S::zero();
        for step in 0..steps {
            let idx = &order[step * batch..(step + 1) * batch];
            let real = data.select(Axis(0), idx);

            // discriminator step
            let (g_net, d_net) = model.parts_mut();
            let fake = g_net.forward_batch(normal_batch(batch, cfg.noise_dim, &mut rng).view())?;
            let real_cache = d_net.forward_cached(real)?;
            let fake_cache = d_net.forward_cached(fake)?;
            let mut d_loss = S::zero();
            let real_delta = real_cache.logits().mapv(|z| {
                d_loss += softplus(-z);
                (sigmoid(z) - cfg.real_label) * inv_batch
            });
            let fake_delta = fake_cache.logits().mapv(|z| {
                d_loss += softplus(z);
                sigmoid(z) * inv_batch
            });
            let (mut d_grads, _) = d_net.backward_from_logits(&real_cache, real_delta)?;
            let (fake_grads, _) = d_net.backward_from_logits(&fake_cache, fake_delta)?;
            for (a, b) in d_grads.weights.iter_mut().zip(&fake_grads.weights) {
                *a += b;
            }
            for (a, b) in d_grads.biases.iter_mut().zip(&fake_grads.biases) {
                *a += b;
            }
            d_opt.step(d_net, &d_grads);
            d_total += d_loss * inv_batch;

            // generator step
            let g_cache = g_net.forward_cached(normal_batch(batch, cfg.noise_dim, &mut rng))?;
            let d_cache = d_net.forward_cached(g_cache.output().clone())?;
            let mut g_loss = S::zero();
            let g_delta = d_cache.logits().mapv(|z| {
                g_loss += softplus(-z);
                (sigmoid(z) - S::one()) * inv_batch
            });
            let (_, upstream) = d_net.backward_from_logits(&d_cache, g_delta)?;
            let (g_grads, _) = g_net.backward_batch(&g_cache, upstream.view())?;
            g_opt.step(g_net, &g_grads);
            g_total += g_loss * inv_batch;
        }
        let steps_s = S::from_usize_lossy(steps);
        report.discriminator_loss.push(d_total / steps_s);
        report.generator_loss.push(g_total / steps_s);
        report.epochs_run += 1;

        let probe = model.generator().forward_batch(probe_noise.view())?;
        if let Some(reason) = detect_collapse(
            &report.discriminator_loss,
            &report.generator_loss,
            probe.view(),
            &cfg.collapse,
        ) {
            log::info!("training collapsed after {} epochs: {reason}", report.epochs_run);
            report.collapsed = true;
            report.collapse_reason = Some(reason);
            break;
        }
    }
    Ok((model, report))
}

fn normal_batch<S: Scalar>(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<S> {
    Array2::from_shape_simple_fn((rows, cols), || S::standard_normal(rng))
}
