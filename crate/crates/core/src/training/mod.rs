//! Full-batch training of the residual + boundary objective with Adam, plus
//! grid evaluation and operator interpolation.

mod lossgrad;
pub mod reference;

pub use lossgrad::LossBreakdown;
pub use reference::{loss_tape, loss_value};

use std::time::Instant;

use crate::autodiff::grad::MlpGrad;
use crate::autodiff::tape::TapeError;
use crate::models::{Model, ModelConfig, ModelError};
use crate::nn::{Mlp, NnError};
use crate::pde::{PdeError, Problem};
use crate::sampling::{grid, SampleSet, SamplingError};

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("training diverged (non-finite loss) at step {step}")]
    Diverged { step: usize },
    #[error("non-finite gradient")]
    NonFiniteGradient,
    #[error("gradient shapes do not match parameters")]
    ShapeMismatch,
    #[error(transparent)]
    Model(Box<ModelError>),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Tape(TapeError),
}

/// Everything one training run needs. Defaults follow the experimental
/// setup: unit residual/boundary weights, Adam at 0.001, full-batch steps.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub problem: Problem,
    pub model: ModelConfig,
    /// Source parameters `a_k`; one entry trains a single instance.
    pub a_values: Vec<f64>,
    #[serde(default = "default_lambda")]
    pub lambda1: f64,
    #[serde(default = "default_lambda")]
    pub lambda2: f64,
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Interior collocation points per parameterization.
    #[serde(default = "default_n_interior")]
    pub n_interior: usize,
    /// Boundary collocation points per parameterization.
    #[serde(default = "default_m_boundary")]
    pub m_boundary: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_eval_resolution")]
    pub eval_resolution: usize,
    /// Worker threads for the loss sweep; 1 is the bit-reproducible mode.
    #[serde(default = "default_threads")]
    pub threads: usize,
    /// Stop once the training loss drops below this.
    #[serde(default = "default_early_stop")]
    pub early_stop_train_loss: Option<f64>,
    #[serde(default = "default_log_every")]
    pub log_every: usize,
}

fn default_lambda() -> f64 {
    1.0
}
fn default_lr() -> f64 {
    0.001
}
fn default_steps() -> usize {
    20_000
}
fn default_n_interior() -> usize {
    1000
}
fn default_m_boundary() -> usize {
    400
}
fn default_eval_resolution() -> usize {
    101
}
fn default_threads() -> usize {
    1
}
fn default_early_stop() -> Option<f64> {
    Some(1e-6)
}
fn default_log_every() -> usize {
    100
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 {
            return Err(TrainError::InvalidConfig(
                "lambda1 and lambda2 must be >= 0".into(),
            ));
        }
        if self.lr.is_nan() || self.lr <= 0.0 {
            return Err(TrainError::InvalidConfig("lr must be > 0".into()));
        }
        if self.steps < 1 {
            return Err(TrainError::InvalidConfig("steps must be >= 1".into()));
        }
        if self.a_values.is_empty() {
            return Err(TrainError::InvalidConfig(
                "a_values must not be empty".into(),
            ));
        }
        if self.n_interior < 1 || self.m_boundary < 1 {
            return Err(TrainError::InvalidConfig(
                "collocation counts must be >= 1".into(),
            ));
        }
        if self.eval_resolution < 2 {
            return Err(TrainError::InvalidConfig(
                "eval_resolution must be >= 2".into(),
            ));
        }
        if self.threads < 1 {
            return Err(TrainError::InvalidConfig("threads must be >= 1".into()));
        }
        if self.log_every < 1 {
            return Err(TrainError::InvalidConfig("log_every must be >= 1".into()));
        }
        self.model.validate().map_err(|e| TrainError::Model(Box::new(e)))?;
        Ok(())
    }
}

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// First/second moment estimates per parameter plus the shared step counter.
#[derive(Clone, Debug)]
pub struct AdamState {
    m: Vec<MlpGrad>,
    v: Vec<MlpGrad>,
    step: u64,
}

impl AdamState {
    pub fn new(model: &Model) -> Self {
        let zeros: Vec<MlpGrad> = model
            .nets()
            .iter()
            .map(|(_, n)| MlpGrad::zeros_like(n))
            .collect();
        AdamState {
            m: zeros.clone(),
            v: zeros,
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One Adam update (bias-corrected, zero weight decay) over every network.
pub fn adam_step(
    nets: &mut [(&'static str, &mut Mlp)],
    grads: &[MlpGrad],
    state: &mut AdamState,
    lr: f64,
) -> Result<(), TrainError> {
    if nets.len() != grads.len() || nets.len() != state.m.len() {
        return Err(TrainError::ShapeMismatch);
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(TrainError::NonFiniteGradient);
    }
    state.step += 1;
    let bc1 = 1.0 - ADAM_BETA1.powi(state.step as i32);
    let bc2 = 1.0 - ADAM_BETA2.powi(state.step as i32);
    for (((_, net), grad), (m, v)) in nets
        .iter_mut()
        .zip(grads.iter())
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        if grad.param_count() != net.param_count() {
            return Err(TrainError::ShapeMismatch);
        }
        let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
            *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
        };
        let layers = grad.weights().len();
        for l in 0..layers {
            {
                let gw = &grad.weights()[l];
                let mw = &mut m.weights_mut()[l];
                let vw = &mut v.weights_mut()[l];
                let pw = &mut net.weights_mut()[l];
                ndarray::Zip::from(pw)
                    .and(gw)
                    .and(mw)
                    .and(vw)
                    .for_each(|p, &g, m, v| update(p, g, m, v));
            }
            {
                let gb = &grad.biases()[l];
                let mb = &mut m.biases_mut()[l];
                let vb = &mut v.biases_mut()[l];
                let pb = &mut net.biases_mut()[l];
                ndarray::Zip::from(pb)
                    .and(gb)
                    .and(mb)
                    .and(vb)
                    .for_each(|p, &g, m, v| update(p, g, m, v));
            }
        }
    }
    Ok(())
}

/// One metrics-stream record.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub residual: f64,
    pub boundary: f64,
    pub total: f64,
    pub elapsed_sec: f64,
    pub eval_counts: Vec<(String, u64)>,
}

/// Run summary: logged records, final losses, per-parameter test error and
/// the evaluation counters.
#[derive(Clone, Debug)]
pub struct Metrics {
    pub records: Vec<StepRecord>,
    pub steps_run: usize,
    pub early_stopped: bool,
    pub final_residual: f64,
    pub final_boundary: f64,
    pub final_total: f64,
    /// `(a, grid MSE)` per trained parameterization.
    pub test_mse: Vec<(f64, f64)>,
    pub wall_clock_sec: f64,
    pub eval_counts: Vec<(String, u64)>,
}

/// Owns the model, the frozen sample sets and the optimizer state; steps the
/// objective one full batch at a time.
pub struct Trainer {
    model: Model,
    problem: Problem,
    samples: SampleSet,
    adam: AdamState,
    cfg: TrainConfig,
    step: usize,
}

impl Trainer {
    pub fn new(cfg: &TrainConfig) -> Result<Self, TrainError> {
        cfg.validate()?;
        let model =
            Model::new(cfg.model.clone(), cfg.seed).map_err(|e| TrainError::Model(Box::new(e)))?;
        Self::with_model(cfg, model)
    }

    /// Resume with an existing model (e.g. loaded from a checkpoint). The
    /// sample sets are regenerated from the config seed, so a resumed run
    /// sees the same frozen quadrature set.
    pub fn with_model(cfg: &TrainConfig, model: Model) -> Result<Self, TrainError> {
        cfg.validate()?;
        let samples = SampleSet::generate(
            &cfg.problem.domain(),
            cfg.model.p,
            cfg.n_interior,
            cfg.m_boundary,
            cfg.a_values.len(),
            cfg.seed,
        )?;
        let adam = AdamState::new(&model);
        Ok(Trainer {
            model,
            problem: cfg.problem,
            samples,
            adam,
            cfg: cfg.clone(),
            step: 0,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn into_model(self) -> Model {
        self.model
    }

    pub fn samples(&self) -> &SampleSet {
        &self.samples
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    /// Evaluate the objective and apply one Adam update. Returns the loss at
    /// the pre-update parameters; a non-finite loss aborts with the step
    /// index.
    pub fn step(&mut self) -> Result<LossBreakdown, TrainError> {
        let lp = lossgrad::LossParams {
            problem: self.problem,
            lambda1: self.cfg.lambda1,
            lambda2: self.cfg.lambda2,
            a_values: &self.cfg.a_values,
            threads: self.cfg.threads,
        };
        let (breakdown, grads) = lossgrad::loss_and_grad(&self.model, &self.samples, &lp)?;
        if !breakdown.total.is_finite() {
            return Err(TrainError::Diverged { step: self.step });
        }
        adam_step(&mut self.model.nets_mut(), &grads, &mut self.adam, self.cfg.lr)?;
        self.step += 1;
        Ok(breakdown)
    }

    /// Loss at the current parameters without updating them.
    pub fn loss(&self) -> Result<LossBreakdown, TrainError> {
        let lp = lossgrad::LossParams {
            problem: self.problem,
            lambda1: self.cfg.lambda1,
            lambda2: self.cfg.lambda2,
            a_values: &self.cfg.a_values,
            threads: self.cfg.threads,
        };
        Ok(lossgrad::loss_and_grad(&self.model, &self.samples, &lp)?.0)
    }
}

/// Train to completion (step budget, early stop or divergence). `on_record`
/// receives one record per logging interval plus the final step.
pub fn train(
    cfg: &TrainConfig,
    mut on_record: impl FnMut(&StepRecord),
) -> Result<(Model, Metrics), TrainError> {
    let start = Instant::now();
    let mut trainer = Trainer::new(cfg)?;
    trainer.model.reset_eval_counts();
    let mut records = Vec::new();
    let mut early_stopped = false;
    let mut last = None;
    let mut steps_run = 0;

    for step in 0..cfg.steps {
        let breakdown = trainer.step()?;
        steps_run = step + 1;
        last = Some(breakdown);
        let should_log = step % cfg.log_every == 0 || step + 1 == cfg.steps;
        let stop = cfg
            .early_stop_train_loss
            .map(|t| breakdown.total < t)
            .unwrap_or(false);
        if should_log || stop {
            let record = StepRecord {
                step,
                residual: breakdown.residual,
                boundary: breakdown.boundary,
                total: breakdown.total,
                elapsed_sec: start.elapsed().as_secs_f64(),
                eval_counts: trainer
                    .model
                    .eval_counts()
                    .into_iter()
                    .map(|(r, c)| (r.to_string(), c))
                    .collect(),
            };
            on_record(&record);
            records.push(record);
        }
        if stop {
            early_stopped = true;
            break;
        }
    }

    let final_loss = last.expect("steps >= 1");
    let mut test_mse = Vec::new();
    for &a in &cfg.a_values {
        let mse = evaluate(
            &trainer.model,
            cfg.problem,
            &trainer.samples.quadrature,
            a,
            cfg.eval_resolution,
        )?;
        test_mse.push((a, mse));
    }
    let eval_counts = trainer
        .model
        .eval_counts()
        .into_iter()
        .map(|(r, c)| (r.to_string(), c))
        .collect();
    let metrics = Metrics {
        records,
        steps_run,
        early_stopped,
        final_residual: final_loss.residual,
        final_boundary: final_loss.boundary,
        final_total: final_loss.total,
        test_mse,
        wall_clock_sec: start.elapsed().as_secs_f64(),
        eval_counts,
    };
    Ok((trainer.into_model(), metrics))
}

/// Mean squared error of the model field against the analytic solution over
/// a uniform grid. Pure: repeated calls give identical results.
pub fn evaluate(
    model: &Model,
    problem: Problem,
    quadrature: &[crate::autodiff::jet::Point2],
    a: f64,
    resolution: usize,
) -> Result<f64, TrainError> {
    let pts = grid(&problem.domain(), resolution)?;
    let gvals: Vec<f64> = quadrature.iter().map(|&y| problem.source(y, a)).collect();
    let prep = model
        .prepare(quadrature, &gvals)
        .map_err(|e| TrainError::Model(Box::new(e)))?;
    let vals = model
        .eval_values(&prep, &pts)
        .map_err(|e| TrainError::Model(Box::new(e)))?;
    let mut sq = 0.0;
    for (&x, &v) in pts.iter().zip(vals.iter()) {
        let d = v - problem.exact(x, a);
        sq += d * d;
    }
    Ok(sq / pts.len() as f64)
}

/// Interpolation report for an unseen source parameter.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct InterpReport {
    pub a: f64,
    pub mse: f64,
    /// `||u_pred - u_exact||_2 / ||u_exact||_2` over the grid.
    pub rel_l2: f64,
    /// Set when `a` lies outside the trained parameter range.
    pub extrapolation: bool,
}

/// Evaluate a trained multi-parameter model at a new source parameter: build
/// `g(.; a_new)` on the frozen quadrature set, rebuild the cache, and measure
/// the error against the analytic solution. No retraining.
pub fn interpolate_eval(
    model: &Model,
    problem: Problem,
    quadrature: &[crate::autodiff::jet::Point2],
    trained_a: &[f64],
    a_new: f64,
    resolution: usize,
) -> Result<InterpReport, TrainError> {
    let pts = grid(&problem.domain(), resolution)?;
    let gvals: Vec<f64> = quadrature.iter().map(|&y| problem.source(y, a_new)).collect();
    let prep = model
        .prepare(quadrature, &gvals)
        .map_err(|e| TrainError::Model(Box::new(e)))?;
    let vals = model
        .eval_values(&prep, &pts)
        .map_err(|e| TrainError::Model(Box::new(e)))?;
    let mut sq = 0.0;
    let mut exact_sq = 0.0;
    for (&x, &v) in pts.iter().zip(vals.iter()) {
        let e = problem.exact(x, a_new);
        let d = v - e;
        sq += d * d;
        exact_sq += e * e;
    }
    let mse = sq / pts.len() as f64;
    let rel_l2 = if exact_sq > 0.0 {
        (sq / exact_sq).sqrt()
    } else {
        f64::INFINITY
    };
    let lo = trained_a.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = trained_a.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(InterpReport {
        a: a_new,
        mse,
        rel_l2,
        extrapolation: a_new < lo || a_new > hi,
    })
}
