//! Reverse-mode differentiation over jet-augmented forward passes.
//!
//! The tape records a scalar computation graph in which every jet component
//! (value, gradient entries, Hessian entries) is an ordinary node. Running a
//! network forward in jet form on the tape and then sweeping backwards yields
//! exact parameter gradients of any scalar built from those components —
//! including losses that contain second input-derivatives such as a PDE
//! residual with a Laplacian. One backward sweep covers all registered
//! networks.

use ndarray::{Array1, Array2};

use super::grad::MlpGrad;
use super::jet::Point2;
use crate::nn::Mlp;

#[derive(Debug, thiserror::Error)]
pub enum TapeError {
    #[error("loss is not finite ({0})")]
    NonFiniteLoss(f64),
    #[error("input length {got} does not match network input width {expected}")]
    InputWidth { expected: usize, got: usize },
}

/// Handle to a node on the tape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(u32);

#[derive(Clone, Copy, Debug)]
enum Op {
    /// Independent node: a network parameter or other external input.
    Leaf,
    Const,
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Neg(u32),
    Scale(u32, f64),
    /// `max(0, v)^k`; derivative `k * max(0, v)^(k-1)`, zero at `v <= 0`.
    ReluPow(u32, u32),
}

struct Node {
    op: Op,
    val: f64,
}

/// A jet whose six components live on the tape.
#[derive(Clone, Copy, Debug)]
pub struct TapeJet {
    pub value: Var,
    pub gx: Var,
    pub gy: Var,
    pub hxx: Var,
    pub hxy: Var,
    pub hyy: Var,
}

impl TapeJet {
    pub fn laplacian(&self, tape: &mut Tape) -> Var {
        tape.add(self.hxx, self.hyy)
    }
}

/// A network registered on the tape: one leaf per trainable parameter.
pub struct TapeNet {
    weights: Vec<Array2<Var>>,
    biases: Vec<Array1<Var>>,
    input_width: usize,
    relu_power: u32,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> f64 {
        self.nodes[v.0 as usize].val
    }

    fn push(&mut self, op: Op, val: f64) -> Var {
        let id = self.nodes.len() as u32;
        self.nodes.push(Node { op, val });
        Var(id)
    }

    pub fn leaf(&mut self, val: f64) -> Var {
        self.push(Op::Leaf, val)
    }

    pub fn constant(&mut self, val: f64) -> Var {
        self.push(Op::Const, val)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let val = self.value(a) + self.value(b);
        self.push(Op::Add(a.0, b.0), val)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let val = self.value(a) - self.value(b);
        self.push(Op::Sub(a.0, b.0), val)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let val = self.value(a) * self.value(b);
        self.push(Op::Mul(a.0, b.0), val)
    }

    pub fn neg(&mut self, a: Var) -> Var {
        let val = -self.value(a);
        self.push(Op::Neg(a.0), val)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let val = c * self.value(a);
        self.push(Op::Scale(a.0, c), val)
    }

    pub fn square(&mut self, a: Var) -> Var {
        self.mul(a, a)
    }

    pub fn relu_pow(&mut self, a: Var, k: u32) -> Var {
        let v = self.value(a);
        let val = if v > 0.0 { v.powi(k as i32) } else { 0.0 };
        self.push(Op::ReluPow(a.0, k), val)
    }

    pub fn sum(&mut self, vars: &[Var]) -> Var {
        let mut acc = self.constant(0.0);
        for &v in vars {
            acc = self.add(acc, v);
        }
        acc
    }

    pub fn mean(&mut self, vars: &[Var]) -> Var {
        assert!(!vars.is_empty());
        let s = self.sum(vars);
        self.scale(s, 1.0 / vars.len() as f64)
    }

    // ---- jet arithmetic on tape nodes -------------------------------------

    pub fn jet_constant(&mut self, v: f64) -> TapeJet {
        let value = self.constant(v);
        let zero = self.constant(0.0);
        TapeJet {
            value,
            gx: zero,
            gy: zero,
            hxx: zero,
            hxy: zero,
            hyy: zero,
        }
    }

    /// Seed coordinate `axis` of `p` as a spatial variable.
    pub fn jet_var(&mut self, p: Point2, axis: usize) -> TapeJet {
        assert!(axis < 2);
        let value = self.constant(p[axis]);
        let zero = self.constant(0.0);
        let one = self.constant(1.0);
        TapeJet {
            value,
            gx: if axis == 0 { one } else { zero },
            gy: if axis == 1 { one } else { zero },
            hxx: zero,
            hxy: zero,
            hyy: zero,
        }
    }

    /// Lift a leaf (e.g. a network parameter) to a spatially-constant jet.
    pub fn jet_from_scalar(&mut self, v: Var) -> TapeJet {
        let zero = self.constant(0.0);
        TapeJet {
            value: v,
            gx: zero,
            gy: zero,
            hxx: zero,
            hxy: zero,
            hyy: zero,
        }
    }

    pub fn jet_add(&mut self, a: TapeJet, b: TapeJet) -> TapeJet {
        TapeJet {
            value: self.add(a.value, b.value),
            gx: self.add(a.gx, b.gx),
            gy: self.add(a.gy, b.gy),
            hxx: self.add(a.hxx, b.hxx),
            hxy: self.add(a.hxy, b.hxy),
            hyy: self.add(a.hyy, b.hyy),
        }
    }

    pub fn jet_sub(&mut self, a: TapeJet, b: TapeJet) -> TapeJet {
        TapeJet {
            value: self.sub(a.value, b.value),
            gx: self.sub(a.gx, b.gx),
            gy: self.sub(a.gy, b.gy),
            hxx: self.sub(a.hxx, b.hxx),
            hxy: self.sub(a.hxy, b.hxy),
            hyy: self.sub(a.hyy, b.hyy),
        }
    }

    pub fn jet_mul(&mut self, a: TapeJet, b: TapeJet) -> TapeJet {
        let value = self.mul(a.value, b.value);

        let gx1 = self.mul(a.gx, b.value);
        let gx2 = self.mul(b.gx, a.value);
        let gx = self.add(gx1, gx2);
        let gy1 = self.mul(a.gy, b.value);
        let gy2 = self.mul(b.gy, a.value);
        let gy = self.add(gy1, gy2);

        let hxx = {
            let t1 = self.mul(a.hxx, b.value);
            let t2 = self.mul(b.hxx, a.value);
            let t3 = self.mul(a.gx, b.gx);
            let t3 = self.scale(t3, 2.0);
            let s = self.add(t1, t2);
            self.add(s, t3)
        };
        let hxy = {
            let t1 = self.mul(a.hxy, b.value);
            let t2 = self.mul(b.hxy, a.value);
            let t3 = self.mul(a.gx, b.gy);
            let t4 = self.mul(a.gy, b.gx);
            let s = self.add(t1, t2);
            let s = self.add(s, t3);
            self.add(s, t4)
        };
        let hyy = {
            let t1 = self.mul(a.hyy, b.value);
            let t2 = self.mul(b.hyy, a.value);
            let t3 = self.mul(a.gy, b.gy);
            let t3 = self.scale(t3, 2.0);
            let s = self.add(t1, t2);
            self.add(s, t3)
        };
        TapeJet {
            value,
            gx,
            gy,
            hxx,
            hxy,
            hyy,
        }
    }

    pub fn jet_scale(&mut self, a: TapeJet, c: f64) -> TapeJet {
        TapeJet {
            value: self.scale(a.value, c),
            gx: self.scale(a.gx, c),
            gy: self.scale(a.gy, c),
            hxx: self.scale(a.hxx, c),
            hxy: self.scale(a.hxy, c),
            hyy: self.scale(a.hyy, c),
        }
    }

    /// Multiply a jet by a tape scalar that is spatially constant (a
    /// parameter-dependent coefficient, not a function of x).
    pub fn jet_scale_var(&mut self, a: TapeJet, c: Var) -> TapeJet {
        TapeJet {
            value: self.mul(a.value, c),
            gx: self.mul(a.gx, c),
            gy: self.mul(a.gy, c),
            hxx: self.mul(a.hxx, c),
            hxy: self.mul(a.hxy, c),
            hyy: self.mul(a.hyy, c),
        }
    }

    /// ReLU-K on a tape jet. The chain-rule factors `f'(v)` and `f''(v)` are
    /// themselves tape expressions of `v`, so the backward sweep sees the
    /// third-derivative contribution that parameter gradients of a Laplacian
    /// require.
    pub fn jet_relu_k(&mut self, a: TapeJet, k: u32) -> TapeJet {
        assert!(k >= 1, "ReLU-K requires k >= 1, got {k}");
        let value = self.relu_pow(a.value, k);
        let f1 = {
            let p = self.relu_pow(a.value, k - 1);
            self.scale(p, f64::from(k))
        };
        let f2 = if k >= 2 {
            let p = self.relu_pow(a.value, k - 2);
            self.scale(p, f64::from(k) * f64::from(k - 1))
        } else {
            self.constant(0.0)
        };

        let gx = self.mul(f1, a.gx);
        let gy = self.mul(f1, a.gy);
        let hxx = {
            let t1 = self.mul(a.gx, a.gx);
            let t1 = self.mul(f2, t1);
            let t2 = self.mul(f1, a.hxx);
            self.add(t1, t2)
        };
        let hxy = {
            let t1 = self.mul(a.gx, a.gy);
            let t1 = self.mul(f2, t1);
            let t2 = self.mul(f1, a.hxy);
            self.add(t1, t2)
        };
        let hyy = {
            let t1 = self.mul(a.gy, a.gy);
            let t1 = self.mul(f2, t1);
            let t2 = self.mul(f1, a.hyy);
            self.add(t1, t2)
        };
        TapeJet {
            value,
            gx,
            gy,
            hxx,
            hxy,
            hyy,
        }
    }

    // ---- networks on the tape ---------------------------------------------

    /// Register every parameter of `net` as a leaf. The returned handle is
    /// the network's differentiable view; forwarding through it makes the
    /// loss depend on those leaves.
    pub fn register_net(&mut self, net: &Mlp) -> TapeNet {
        let weights = net
            .weights()
            .iter()
            .map(|w| w.map(|&x| self.leaf(x)))
            .collect();
        let biases = net
            .biases()
            .iter()
            .map(|b| b.map(|&x| self.leaf(x)))
            .collect();
        TapeNet {
            weights,
            biases,
            input_width: net.spec().input(),
            relu_power: net.relu_power(),
        }
    }

    /// Jet-mode forward pass through a registered network.
    pub fn net_forward_jet(
        &mut self,
        tn: &TapeNet,
        inputs: &[TapeJet],
    ) -> Result<Vec<TapeJet>, TapeError> {
        if inputs.len() != tn.input_width {
            return Err(TapeError::InputWidth {
                expected: tn.input_width,
                got: inputs.len(),
            });
        }
        let layers = tn.weights.len();
        let mut act: Vec<TapeJet> = inputs.to_vec();
        for l in 0..layers {
            let w = &tn.weights[l];
            let b = &tn.biases[l];
            let (rows, cols) = w.dim();
            let mut next = Vec::with_capacity(rows);
            for j in 0..rows {
                let mut acc = self.jet_from_scalar(b[j]);
                for (i, &a) in act.iter().enumerate().take(cols) {
                    let term = self.jet_scale_var(a, w[[j, i]]);
                    acc = self.jet_add(acc, term);
                }
                if l + 1 < layers {
                    acc = self.jet_relu_k(acc, tn.relu_power);
                }
                next.push(acc);
            }
            act = next;
        }
        Ok(act)
    }

    /// Plain value forward pass (no spatial derivatives) through a registered
    /// network.
    pub fn net_forward_value(&mut self, tn: &TapeNet, x: &[Var]) -> Result<Vec<Var>, TapeError> {
        if x.len() != tn.input_width {
            return Err(TapeError::InputWidth {
                expected: tn.input_width,
                got: x.len(),
            });
        }
        let layers = tn.weights.len();
        let mut act: Vec<Var> = x.to_vec();
        for l in 0..layers {
            let w = &tn.weights[l];
            let b = &tn.biases[l];
            let (rows, cols) = w.dim();
            let mut next = Vec::with_capacity(rows);
            for j in 0..rows {
                let mut acc = b[j];
                for (i, &a) in act.iter().enumerate().take(cols) {
                    let term = self.mul(a, w[[j, i]]);
                    acc = self.add(acc, term);
                }
                if l + 1 < layers {
                    let p = self.relu_pow(acc, tn.relu_power);
                    acc = p;
                }
                next.push(acc);
            }
            act = next;
        }
        Ok(act)
    }

    // ---- reverse sweep ------------------------------------------------------

    /// Adjoints of every node with respect to `loss`.
    fn adjoints(&self, loss: Var) -> Vec<f64> {
        let mut adj = vec![0.0; self.nodes.len()];
        adj[loss.0 as usize] = 1.0;
        for id in (0..self.nodes.len()).rev() {
            let a = adj[id];
            if a == 0.0 {
                continue;
            }
            match self.nodes[id].op {
                Op::Leaf | Op::Const => {}
                Op::Add(x, y) => {
                    adj[x as usize] += a;
                    adj[y as usize] += a;
                }
                Op::Sub(x, y) => {
                    adj[x as usize] += a;
                    adj[y as usize] -= a;
                }
                Op::Mul(x, y) => {
                    let vx = self.nodes[x as usize].val;
                    let vy = self.nodes[y as usize].val;
                    adj[x as usize] += a * vy;
                    adj[y as usize] += a * vx;
                }
                Op::Neg(x) => adj[x as usize] -= a,
                Op::Scale(x, c) => adj[x as usize] += a * c,
                Op::ReluPow(x, k) => {
                    let v = self.nodes[x as usize].val;
                    if v > 0.0 && k >= 1 {
                        adj[x as usize] += a * f64::from(k) * v.powi(k as i32 - 1);
                    }
                }
            }
        }
        adj
    }

    /// Exact gradient of `loss` with respect to every parameter of every
    /// registered network in `nets`.
    ///
    /// Networks whose leaves the loss never touched come back with all-zero
    /// gradients. A non-finite loss is rejected.
    pub fn param_gradient(&self, loss: Var, nets: &[&TapeNet]) -> Result<Vec<MlpGrad>, TapeError> {
        let loss_val = self.value(loss);
        if !loss_val.is_finite() {
            return Err(TapeError::NonFiniteLoss(loss_val));
        }
        let adj = self.adjoints(loss);
        let grads = nets
            .iter()
            .map(|tn| {
                let weights = tn
                    .weights
                    .iter()
                    .map(|w| w.map(|v| adj[v.0 as usize]))
                    .collect();
                let biases = tn
                    .biases
                    .iter()
                    .map(|b| b.map(|v| adj[v.0 as usize]))
                    .collect();
                MlpGrad::from_parts(weights, biases)
            })
            .collect();
        Ok(grads)
    }

    /// Derivative of `loss` with respect to an individual node (for tests and
    /// small compositions).
    pub fn gradient_of(&self, loss: Var, wrt: &[Var]) -> Vec<f64> {
        let adj = self.adjoints(loss);
        wrt.iter().map(|v| adj[v.0 as usize]).collect()
    }
}
