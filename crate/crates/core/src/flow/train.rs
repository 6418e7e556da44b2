use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::model::Denoiser;
use super::{forward_diffuse, target, Objective, Schedule, SyntheticDataset};
use crate::tensor::Tensor;
use crate::wavelet::{dwt_haar, idwt_haar, wlf_loss, Band, BandWeights, Reduction};
use crate::{Error, Result};

/// Per-timestep loss multiplier `w_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum WeightMode {
    #[default]
    Constant,
    /// `w_t = sigma(t)^2`.
    SigmaSquared,
}

/// How the loss is evaluated. `Plain` skips the transform and requires unit
/// band weights; it exists as an independent check of the wavelet path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LossPath {
    #[default]
    Wavelet,
    Plain,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub objective: Objective,
    pub schedule: Schedule,
    pub band_weights: BandWeights,
    pub weight_mode: WeightMode,
    pub reduction: Reduction,
    pub loss_path: LossPath,
    pub steps: usize,
    pub batch: usize,
    pub lr: f64,
    pub seed: u64,
    pub hidden: usize,
    /// Evaluate the fixed held-out batch every this many steps.
    pub eval_every: usize,
    pub eval_batch: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            objective: Objective::Velocity,
            schedule: Schedule::RectifiedFlow,
            band_weights: BandWeights::UNIT,
            weight_mode: WeightMode::Constant,
            reduction: Reduction::Mean,
            loss_path: LossPath::Wavelet,
            steps: 500,
            batch: 8,
            lr: 1e-2,
            seed: 0,
            hidden: 16,
            eval_every: 10,
            eval_batch: 32,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::contract("learning rate must be positive and finite"));
        }
        if self.steps == 0 || self.batch == 0 || self.hidden == 0 || self.eval_every == 0 || self.eval_batch == 0 {
            return Err(Error::contract(
                "steps, batch, hidden, eval_every and eval_batch must be >= 1",
            ));
        }
        BandWeights::new(
            self.band_weights.ll,
            self.band_weights.lh,
            self.band_weights.hl,
            self.band_weights.hh,
        )?;
        if self.loss_path == LossPath::Plain && !self.band_weights.is_unit() {
            return Err(Error::contract("the plain loss path only supports unit band weights"));
        }
        Ok(())
    }

    fn w_t(&self, t: f64) -> f64 {
        match self.weight_mode {
            WeightMode::Constant => 1.0,
            WeightMode::SigmaSquared => {
                let s = self.schedule.sigma(t);
                s * s
            }
        }
    }
}

/// Clean samples, noise and timesteps for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub x0: Vec<Tensor<f64>>,
    pub eps: Vec<Tensor<f64>>,
    pub t: Vec<f64>,
}

impl Batch {
    /// `x0` from the dataset, `eps ~ N(0, 1)`, `t ~ U[0, 1]`.
    pub fn sample<R: Rng + ?Sized>(dataset: &SyntheticDataset, n: usize, rng: &mut R) -> Self {
        let mut b = Batch {
            x0: Vec::with_capacity(n),
            eps: Vec::with_capacity(n),
            t: Vec::with_capacity(n),
        };
        for _ in 0..n {
            b.x0.push(dataset.sample(rng));
            b.eps
                .push(Tensor::from_fn(dataset.shape(), |_, _, _| rng.sample(StandardNormal)));
            b.t.push(rng.random_range(0.0..=1.0));
        }
        b
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Batch loss, its gradient and the batch-mean per-band residual energies.
struct Evaluation {
    loss: f64,
    grad: Vec<f64>,
    energies: [f64; 4],
}

fn evaluate(model: &Denoiser, batch: &Batch, cfg: &TrainConfig, with_grad: bool) -> Result<Evaluation> {
    if batch.is_empty() || batch.x0.len() != batch.len() || batch.eps.len() != batch.len() {
        return Err(Error::contract(
            "batch must be non-empty with matching x0/eps/t lengths",
        ));
    }
    let n = batch.len() as f64;
    let weights = cfg.band_weights.as_array();
    let mut grad = if with_grad {
        vec![0.0; model.params().len()]
    } else {
        Vec::new()
    };
    let mut loss = 0.0;
    let mut energies = [0.0; 4];
    for ((x0, eps), &t) in batch.x0.iter().zip(&batch.eps).zip(&batch.t) {
        let z = forward_diffuse(x0, eps, t, cfg.schedule)?;
        let tgt = target(cfg.objective, x0, eps)?;
        let (pred, cache) = model.forward(&z, t)?;
        if !pred.all_finite() {
            return Err(Error::Numeric { step: 0 });
        }
        let w_t = cfg.w_t(t);
        let scale = match cfg.reduction {
            Reduction::Sum => 1.0,
            Reduction::Mean => 1.0 / pred.len() as f64,
        };
        let residual = pred.sub(&tgt)?;
        let mut bands = dwt_haar(&residual)?;
        for (acc, e) in energies.iter_mut().zip(bands.energies()) {
            *acc += e / n;
        }
        let sample_loss = match cfg.loss_path {
            LossPath::Wavelet => wlf_loss(&pred, &tgt, &cfg.band_weights, w_t, cfg.reduction)?,
            LossPath::Plain => w_t * scale * residual.norm_sq(),
        };
        loss += sample_loss / n;
        if with_grad {
            let g_out = match cfg.loss_path {
                LossPath::Wavelet => {
                    for (band, w) in Band::ALL.into_iter().zip(weights) {
                        let k = 2.0 * w_t * scale * w / n;
                        for v in bands.band_mut(band).as_mut_slice() {
                            *v *= k;
                        }
                    }
                    idwt_haar(&bands)?
                }
                LossPath::Plain => residual.map(|r| 2.0 * w_t * scale * r / n),
            };
            model.backward(&z, &cache, &g_out, &mut grad);
        }
    }
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numeric { step: 0 });
    }
    Ok(Evaluation { loss, grad, energies })
}

/// Batch-mean loss and its gradient with respect to the flat parameters.
///
/// A non-finite forward value yields [`Error::Numeric`] with `step` 0;
/// [`train`] replaces it with the failing step.
pub fn loss_and_grad(model: &Denoiser, batch: &Batch, cfg: &TrainConfig) -> Result<(f64, Vec<f64>)> {
    let e = evaluate(model, batch, cfg, true)?;
    Ok((e.loss, e.grad))
}

/// Held-out loss and per-band residual energies at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurvePoint {
    pub step: usize,
    pub loss: f64,
    pub e_ll: f64,
    pub e_lh: f64,
    pub e_hl: f64,
    pub e_hh: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainReport {
    pub config: TrainConfig,
    /// Evaluation on a fixed held-out batch, every `eval_every` steps and
    /// after the last step.
    pub curve: Vec<CurvePoint>,
    /// Minibatch loss before each update.
    pub train_loss: Vec<f64>,
    pub channels: usize,
    pub hidden: usize,
    pub params: Vec<f64>,
}

impl TrainReport {
    pub fn initial_loss(&self) -> f64 {
        self.curve.first().map_or(f64::NAN, |p| p.loss)
    }

    pub fn final_loss(&self) -> f64 {
        self.curve.last().map_or(f64::NAN, |p| p.loss)
    }

    pub fn model(&self) -> Result<Denoiser> {
        Denoiser::from_params(self.channels, self.hidden, self.params.clone())
    }
}

fn at_step(step: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Numeric { .. } => Error::Numeric { step },
        other => other,
    }
}

/// Plain gradient descent with a fixed learning rate. Training batches and
/// the held-out batch come from separate ChaCha8 streams of `cfg.seed`.
pub fn train(cfg: &TrainConfig, dataset: &SyntheticDataset) -> Result<TrainReport> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut eval_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    eval_rng.set_stream(1);
    let mut model = Denoiser::init(dataset.channels, cfg.hidden, &mut rng);
    let held_out = Batch::sample(dataset, cfg.eval_batch, &mut eval_rng);

    let point = |model: &Denoiser, step: usize| -> Result<CurvePoint> {
        let e = evaluate(model, &held_out, cfg, false).map_err(at_step(step))?;
        Ok(CurvePoint {
            step,
            loss: e.loss,
            e_ll: e.energies[0],
            e_lh: e.energies[1],
            e_hl: e.energies[2],
            e_hh: e.energies[3],
        })
    };

    let mut curve = Vec::new();
    let mut train_loss = Vec::with_capacity(cfg.steps);
    for step in 0..cfg.steps {
        if step % cfg.eval_every == 0 {
            curve.push(point(&model, step)?);
        }
        let batch = Batch::sample(dataset, cfg.batch, &mut rng);
        let (loss, grad) = loss_and_grad(&model, &batch, cfg).map_err(at_step(step))?;
        train_loss.push(loss);
        for (p, g) in model.params_mut().iter_mut().zip(&grad) {
            *p -= cfg.lr * g;
        }
    }
    curve.push(point(&model, cfg.steps)?);

    Ok(TrainReport {
        config: cfg.clone(),
        curve,
        train_loss,
        channels: model.channels(),
        hidden: model.hidden(),
        params: model.params().to_vec(),
    })
}
