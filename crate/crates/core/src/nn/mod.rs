//! Fully connected networks with ReLU-K activations and a linear output
//! layer.
//!
//! Layer structure follows the width-list notation `[in, h, ..., h, out]`.
//! Every hidden layer applies `max(0, v)^K`; the final layer is affine so the
//! terminal widths can be used as raw vectors.

pub mod batch;

use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::{Array1, Array2};

use crate::autodiff::jet::{relu_k_value_derivs, Jet2, Point2};
use crate::rng::Rng;

#[derive(Debug, thiserror::Error)]
pub enum NnError {
    #[error("invalid layer spec: {0}")]
    InvalidSpec(String),
    #[error("activation power must be >= 1, got {0}")]
    InvalidActivation(u32),
    #[error("input length {got} does not match network input width {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parameter vector length {got} does not match parameter count {expected}")]
    ParamLength { expected: usize, got: usize },
}

/// Per-layer widths `[in, h, ..., h, out]`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct LayerSpec(Vec<usize>);

impl LayerSpec {
    pub fn new(widths: Vec<usize>) -> Result<Self, NnError> {
        if widths.len() < 2 {
            return Err(NnError::InvalidSpec(format!(
                "need at least [in, out], got {widths:?}"
            )));
        }
        if widths.contains(&0) {
            return Err(NnError::InvalidSpec(format!(
                "all widths must be >= 1, got {widths:?}"
            )));
        }
        Ok(LayerSpec(widths))
    }

    pub fn widths(&self) -> &[usize] {
        &self.0
    }

    pub fn input(&self) -> usize {
        self.0[0]
    }

    pub fn output(&self) -> usize {
        *self.0.last().unwrap()
    }

    pub fn layers(&self) -> usize {
        self.0.len() - 1
    }

    pub fn param_count(&self) -> usize {
        self.0
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }
}

impl std::fmt::Display for LayerSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, "]")
    }
}

/// Fully connected network. Weight matrices are `(out x in)`; evaluation at a
/// point is `z = W a + b` per layer with ReLU-K between layers.
///
/// Each instance counts how many single-point applications it has performed
/// (one per point, whatever the derivative order), which the models layer
/// uses to verify its evaluation-count laws.
#[derive(Debug)]
pub struct Mlp {
    spec: LayerSpec,
    relu_power: u32,
    seed: u64,
    weights: Vec<Array2<f64>>,
    biases: Vec<Array1<f64>>,
    evals: AtomicU64,
}

impl Clone for Mlp {
    fn clone(&self) -> Self {
        Mlp {
            spec: self.spec.clone(),
            relu_power: self.relu_power,
            seed: self.seed,
            weights: self.weights.clone(),
            biases: self.biases.clone(),
            evals: AtomicU64::new(self.evals.load(Ordering::Relaxed)),
        }
    }
}

impl Mlp {
    /// Seeded construction: weights and biases uniform in
    /// `±1/sqrt(fan_in)` per layer. The same `(spec, k, seed)` always
    /// produces identical parameters.
    ///
    /// The nonzero bias draw matters for deep ReLU-K stacks: with zero
    /// biases, cubing contracts small activations toward zero layer after
    /// layer until the network (and its gradients) underflow entirely; the
    /// per-layer bias term keeps every layer's pre-activations at a live
    /// scale so gradient signal reaches the early layers.
    pub fn new(spec: LayerSpec, k: u32, seed: u64) -> Result<Self, NnError> {
        if k < 1 {
            return Err(NnError::InvalidActivation(k));
        }
        let mut rng = Rng::seeded(seed);
        let widths = spec.widths();
        let mut weights = Vec::with_capacity(spec.layers());
        let mut biases = Vec::with_capacity(spec.layers());
        for w in widths.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let mat = Array2::from_shape_fn((fan_out, fan_in), |_| rng.symmetric(bound));
            weights.push(mat);
            biases.push(Array1::from_shape_fn(fan_out, |_| rng.symmetric(bound)));
        }
        Ok(Mlp {
            spec,
            relu_power: k,
            seed,
            weights,
            biases,
            evals: AtomicU64::new(0),
        })
    }

    pub fn spec(&self) -> &LayerSpec {
        &self.spec
    }

    pub fn relu_power(&self) -> u32 {
        self.relu_power
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Array1<f64>] {
        &self.biases
    }

    pub fn param_count(&self) -> usize {
        self.spec.param_count()
    }

    /// Number of single-point applications performed so far.
    pub fn eval_count(&self) -> u64 {
        self.evals.load(Ordering::Relaxed)
    }

    pub fn reset_eval_count(&self) {
        self.evals.store(0, Ordering::Relaxed);
    }

    pub(crate) fn record_evals(&self, points: u64) {
        self.evals.fetch_add(points, Ordering::Relaxed);
    }

    /// Parameters in canonical flat order: per layer, weights row-major then
    /// bias.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for (w, b) in self.weights.iter().zip(self.biases.iter()) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }

    pub fn set_params_flat(&mut self, params: &[f64]) -> Result<(), NnError> {
        if params.len() != self.param_count() {
            return Err(NnError::ParamLength {
                expected: self.param_count(),
                got: params.len(),
            });
        }
        let mut it = params.iter();
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            for x in w.iter_mut() {
                *x = *it.next().unwrap();
            }
            for x in b.iter_mut() {
                *x = *it.next().unwrap();
            }
        }
        Ok(())
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [Array2<f64>] {
        &mut self.weights
    }

    pub(crate) fn biases_mut(&mut self) -> &mut [Array1<f64>] {
        &mut self.biases
    }

    /// Plain forward pass.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        if x.len() != self.spec.input() {
            return Err(NnError::DimensionMismatch {
                expected: self.spec.input(),
                got: x.len(),
            });
        }
        self.record_evals(1);
        let layers = self.spec.layers();
        let mut act: Vec<f64> = x.to_vec();
        for l in 0..layers {
            let w = &self.weights[l];
            let b = &self.biases[l];
            let mut next = vec![0.0; w.nrows()];
            for (j, out) in next.iter_mut().enumerate() {
                let mut acc = b[j];
                for (i, &a) in act.iter().enumerate() {
                    acc += w[[j, i]] * a;
                }
                *out = if l + 1 < layers {
                    let (f, _, _) = relu_k_value_derivs(acc, self.relu_power);
                    f
                } else {
                    acc
                };
            }
            act = next;
        }
        Ok(act)
    }

    /// Jet forward pass seeded on the two coordinates of `p`.
    pub fn forward_jet(&self, p: Point2) -> Result<Vec<Jet2>, NnError> {
        if self.spec.input() != 2 {
            return Err(NnError::DimensionMismatch {
                expected: self.spec.input(),
                got: 2,
            });
        }
        self.forward_jet_inputs(&[Jet2::var(p, 0), Jet2::var(p, 1)])
    }

    /// Jet forward pass with caller-supplied input jets (chained networks,
    /// or inputs where only some coordinates are spatial variables).
    pub fn forward_jet_inputs(&self, inputs: &[Jet2]) -> Result<Vec<Jet2>, NnError> {
        if inputs.len() != self.spec.input() {
            return Err(NnError::DimensionMismatch {
                expected: self.spec.input(),
                got: inputs.len(),
            });
        }
        self.record_evals(1);
        let layers = self.spec.layers();
        let mut act: Vec<Jet2> = inputs.to_vec();
        for l in 0..layers {
            let w = &self.weights[l];
            let b = &self.biases[l];
            let mut next = Vec::with_capacity(w.nrows());
            for j in 0..w.nrows() {
                let mut acc = Jet2::constant(b[j]);
                for (i, &a) in act.iter().enumerate() {
                    acc = acc + a.scale(w[[j, i]]);
                }
                if l + 1 < layers {
                    acc = acc.relu_k(self.relu_power);
                }
                next.push(acc);
            }
            act = next;
        }
        Ok(act)
    }
}
