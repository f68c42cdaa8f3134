//! Batched network evaluation with jet channels, and the structured reverse
//! sweep that turns output adjoints into parameter gradients.
//!
//! A batch stores one column block per point. With `channels == 1` the block
//! is the plain value; with `channels == 6` it is the jet layout
//! `[v, gx, gy, hxx, hxy, hyy]`. Affine layers act identically on every
//! channel (the bias only touches the value channel), so each layer is one
//! GEMM; the ReLU-K chain rule couples channels only within a block.
//!
//! The reverse sweep propagates adjoints of all channels. Because the adjoint
//! of a Hessian channel differentiates the activation once more, the sweep
//! uses up to the third derivative of ReLU-K — this is what makes parameter
//! gradients of residuals containing a Laplacian exact.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2};

use crate::autodiff::grad::MlpGrad;
use crate::autodiff::jet::{relu_k_derivs3, relu_k_value_derivs, Jet2, Point2};
use crate::nn::Mlp;

pub const JET_CHANNELS: usize = 6;

/// A batch of per-point column blocks; rows are feature dimensions.
#[derive(Clone, Debug)]
pub struct BatchMat {
    pub data: Array2<f64>,
    pub channels: usize,
}

impl BatchMat {
    pub fn zeros(dim: usize, channels: usize, points: usize) -> Self {
        BatchMat {
            data: Array2::zeros((dim, channels * points)),
            channels,
        }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn points(&self) -> usize {
        self.data.ncols() / self.channels
    }

    /// Jet-seeded inputs for 2-d points: row 0 is x (gx = 1), row 1 is y
    /// (gy = 1).
    pub fn jet_points(points: &[Point2]) -> Self {
        let mut m = BatchMat::zeros(2, JET_CHANNELS, points.len());
        for (q, p) in points.iter().enumerate() {
            let c = JET_CHANNELS * q;
            m.data[[0, c]] = p[0];
            m.data[[0, c + 1]] = 1.0;
            m.data[[1, c]] = p[1];
            m.data[[1, c + 2]] = 1.0;
        }
        m
    }

    /// Value-only inputs for 2-d points.
    pub fn value_points(points: &[Point2]) -> Self {
        let mut m = BatchMat::zeros(2, 1, points.len());
        for (q, p) in points.iter().enumerate() {
            m.data[[0, q]] = p[0];
            m.data[[1, q]] = p[1];
        }
        m
    }

    /// Jet-seeded inputs for concatenated pairs `(x, y)`: rows 0-1 carry the
    /// seeded evaluation point, rows 2-3 the constant sample point.
    pub fn jet_pairs(pairs: &[(Point2, Point2)]) -> Self {
        let mut m = BatchMat::zeros(4, JET_CHANNELS, pairs.len());
        for (q, (x, y)) in pairs.iter().enumerate() {
            let c = JET_CHANNELS * q;
            m.data[[0, c]] = x[0];
            m.data[[0, c + 1]] = 1.0;
            m.data[[1, c]] = x[1];
            m.data[[1, c + 2]] = 1.0;
            m.data[[2, c]] = y[0];
            m.data[[3, c]] = y[1];
        }
        m
    }

    /// Value-only inputs for concatenated pairs.
    pub fn value_pairs(pairs: &[(Point2, Point2)]) -> Self {
        let mut m = BatchMat::zeros(4, 1, pairs.len());
        for (q, (x, y)) in pairs.iter().enumerate() {
            m.data[[0, q]] = x[0];
            m.data[[1, q]] = x[1];
            m.data[[2, q]] = y[0];
            m.data[[3, q]] = y[1];
        }
        m
    }

    /// Read point `q` of a jet batch as a [`Jet2`] (row `r` of the output).
    pub fn jet_at(&self, r: usize, q: usize) -> Jet2 {
        assert_eq!(self.channels, JET_CHANNELS);
        let c = JET_CHANNELS * q;
        Jet2 {
            value: self.data[[r, c]],
            grad: [self.data[[r, c + 1]], self.data[[r, c + 2]]],
            hess: [
                self.data[[r, c + 3]],
                self.data[[r, c + 4]],
                self.data[[r, c + 5]],
            ],
        }
    }
}

/// Saved intermediate state of a traced forward pass: the input batch plus
/// pre- and post-activation matrices for every hidden layer.
pub struct Trace {
    pub input: BatchMat,
    pre: Vec<Array2<f64>>,
    post: Vec<Array2<f64>>,
}

/// `dot` on transposed views can hand back an F-layout result; the
/// activation kernels need contiguous rows.
fn to_standard(a: Array2<f64>) -> Array2<f64> {
    if a.is_standard_layout() {
        a
    } else {
        let dim = a.raw_dim();
        Array2::from_shape_vec(dim, a.iter().copied().collect()).expect("shape preserved")
    }
}

fn add_bias(z: &mut Array2<f64>, b: &ndarray::Array1<f64>, channels: usize) {
    let step = channels as isize;
    for (j, mut row) in z.rows_mut().into_iter().enumerate() {
        let mut vals = row.slice_mut(s![..;step]);
        vals += b[j];
    }
}

fn activation_forward(pre: &Array2<f64>, k: u32, channels: usize) -> Array2<f64> {
    let mut post = pre.clone();
    if channels == 1 {
        post.mapv_inplace(|v| relu_k_value_derivs(v, k).0);
        return post;
    }
    let buf = post.as_slice_mut().expect("standard layout");
    for blk in buf.chunks_exact_mut(JET_CHANNELS) {
        let (f, f1, f2) = relu_k_value_derivs(blk[0], k);
        let [_, gx, gy, hxx, hxy, hyy] = *blk else {
            unreachable!()
        };
        blk[0] = f;
        blk[1] = f1 * gx;
        blk[2] = f1 * gy;
        blk[3] = f2 * gx * gx + f1 * hxx;
        blk[4] = f2 * gx * gy + f1 * hxy;
        blk[5] = f2 * gy * gy + f1 * hyy;
    }
    post
}

/// Pull a post-activation adjoint back through ReLU-K, in place.
///
/// `abar` holds the adjoint of the activation output; `pre` the saved
/// pre-activation jets. On return `abar` holds the pre-activation adjoint.
fn activation_backward_inplace(abar: &mut Array2<f64>, pre: &Array2<f64>, k: u32, channels: usize) {
    if channels == 1 {
        ndarray::Zip::from(abar).and(pre).for_each(|a, &v| {
            let (f1, _, _) = relu_k_derivs3(v, k);
            *a *= f1;
        });
        return;
    }
    let adj = abar.as_slice_mut().expect("standard layout");
    let pre = pre.as_slice().expect("standard layout");
    for (qb, pb) in adj
        .chunks_exact_mut(JET_CHANNELS)
        .zip(pre.chunks_exact(JET_CHANNELS))
    {
        let [v, gx, gy, hxx, hxy, hyy] = *pb else {
            unreachable!()
        };
        let (f1, f2, f3) = relu_k_derivs3(v, k);
        let [qv, qgx, qgy, qhxx, qhxy, qhyy] = *qb else {
            unreachable!()
        };
        qb[0] = qv * f1
            + f2 * (qgx * gx + qgy * gy)
            + qhxx * (f3 * gx * gx + f2 * hxx)
            + qhxy * (f3 * gx * gy + f2 * hxy)
            + qhyy * (f3 * gy * gy + f2 * hyy);
        qb[1] = qgx * f1 + 2.0 * f2 * gx * qhxx + f2 * gy * qhxy;
        qb[2] = qgy * f1 + 2.0 * f2 * gy * qhyy + f2 * gx * qhxy;
        qb[3] = qhxx * f1;
        qb[4] = qhxy * f1;
        qb[5] = qhyy * f1;
    }
}

/// Forward pass over a batch; no state is retained.
pub fn forward_batch(net: &Mlp, input: &BatchMat) -> BatchMat {
    assert_eq!(input.dim(), net.spec().input(), "input width mismatch");
    net.record_evals(input.points() as u64);
    let layers = net.spec().layers();
    let channels = input.channels;
    let mut act = to_standard(input.data.clone());
    for l in 0..layers {
        let mut z = to_standard(net.weights()[l].dot(&act));
        add_bias(&mut z, &net.biases()[l], channels);
        act = if l + 1 < layers {
            activation_forward(&z, net.relu_power(), channels)
        } else {
            z
        };
    }
    BatchMat {
        data: act,
        channels,
    }
}

/// Forward pass that records everything the reverse sweep needs.
pub fn forward_batch_traced(net: &Mlp, input: BatchMat) -> (BatchMat, Trace) {
    assert_eq!(input.dim(), net.spec().input(), "input width mismatch");
    net.record_evals(input.points() as u64);
    let layers = net.spec().layers();
    let channels = input.channels;
    let mut pre = Vec::with_capacity(layers.saturating_sub(1));
    let mut post = Vec::with_capacity(layers.saturating_sub(1));
    let input = BatchMat {
        data: to_standard(input.data),
        channels: input.channels,
    };
    let mut act = input.data.clone();
    for l in 0..layers {
        let mut z = to_standard(net.weights()[l].dot(&act));
        add_bias(&mut z, &net.biases()[l], channels);
        if l + 1 < layers {
            let a = activation_forward(&z, net.relu_power(), channels);
            pre.push(z);
            act = a.clone();
            post.push(a);
        } else {
            act = z;
        }
    }
    (
        BatchMat {
            data: act,
            channels,
        },
        Trace { input, pre, post },
    )
}

/// Reverse sweep. Accumulates parameter gradients into `grad` and returns the
/// adjoint of the input batch (for chaining into an upstream network).
pub fn backward_batch(net: &Mlp, trace: &Trace, out_adj: BatchMat, grad: &mut MlpGrad) -> BatchMat {
    let layers = net.spec().layers();
    let channels = trace.input.channels;
    assert_eq!(out_adj.channels, channels);
    let mut zbar = to_standard(out_adj.data);
    for l in (0..layers).rev() {
        let a_prev = if l == 0 {
            &trace.input.data
        } else {
            &trace.post[l - 1]
        };
        general_mat_mul(1.0, &zbar, &a_prev.t(), 1.0, &mut grad.weights_mut()[l]);
        {
            let step = channels as isize;
            let biases = &mut grad.biases_mut()[l];
            for (j, row) in zbar.rows().into_iter().enumerate() {
                biases[j] += row.slice(s![..;step]).sum();
            }
        }
        let mut abar = to_standard(net.weights()[l].t().dot(&zbar));
        if l == 0 {
            return BatchMat {
                data: abar,
                channels,
            };
        }
        activation_backward_inplace(&mut abar, &trace.pre[l - 1], net.relu_power(), channels);
        zbar = abar;
    }
    unreachable!("network has at least one layer")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::tape::Tape;
    use crate::nn::LayerSpec;
    use crate::rng::{derive_seed, Rng};

    fn random_points(n: usize, seed: u64) -> Vec<Point2> {
        let mut rng = Rng::seeded(seed);
        (0..n)
            .map(|_| [rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)])
            .collect()
    }

    #[test]
    fn batch_values_match_scalar_forward() {
        let net = Mlp::new(LayerSpec::new(vec![2, 7, 5, 3]).unwrap(), 3, 21).unwrap();
        let pts = random_points(17, 1);
        let out = forward_batch(&net, &BatchMat::value_points(&pts));
        for (q, p) in pts.iter().enumerate() {
            let v = net.forward(p).unwrap();
            for (r, &vr) in v.iter().enumerate() {
                assert!((out.data[[r, q]] - vr).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn batch_jets_match_scalar_jets() {
        let net = Mlp::new(LayerSpec::new(vec![2, 7, 5, 2]).unwrap(), 3, 33).unwrap();
        let pts = random_points(11, 2);
        let out = forward_batch(&net, &BatchMat::jet_points(&pts));
        for (q, p) in pts.iter().enumerate() {
            let jets = net.forward_jet(*p).unwrap();
            for (r, j) in jets.iter().enumerate() {
                let got = out.jet_at(r, q);
                assert!((got.value - j.value).abs() < 1e-13);
                for i in 0..2 {
                    assert!((got.grad[i] - j.grad[i]).abs() < 1e-13);
                }
                for i in 0..3 {
                    assert!((got.hess[i] - j.hess[i]).abs() < 1e-13, "hess {i}");
                }
            }
        }
    }

    #[test]
    fn pair_batch_matches_scalar_jets_with_constant_tail() {
        let net = Mlp::new(LayerSpec::new(vec![4, 6, 1]).unwrap(), 3, 5).unwrap();
        let x = [0.3, -0.4];
        let y = [0.9, 0.1];
        let out = forward_batch(&net, &BatchMat::jet_pairs(&[(x, y)]));
        let jets = net
            .forward_jet_inputs(&[
                Jet2::var(x, 0),
                Jet2::var(x, 1),
                Jet2::constant(y[0]),
                Jet2::constant(y[1]),
            ])
            .unwrap();
        let got = out.jet_at(0, 0);
        assert!((got.value - jets[0].value).abs() < 1e-14);
        assert!((got.hess[0] - jets[0].hess[0]).abs() < 1e-13);
    }

    /// Structured backward against the tape on a linear functional of the
    /// output jets: loss = sum over points/rows/channels of a fixed random
    /// weight times the component. The adjoint seed is then exactly that
    /// weight and both routes must produce identical parameter gradients.
    #[test]
    fn backward_matches_tape_on_weighted_components() {
        let net = Mlp::new(LayerSpec::new(vec![2, 6, 4, 2]).unwrap(), 3, 77).unwrap();
        let pts = random_points(5, 3);
        let mut wrng = Rng::seeded(derive_seed(4, 0));

        let (out, trace) = forward_batch_traced(&net, BatchMat::jet_points(&pts));
        let mut adj = BatchMat::zeros(out.dim(), JET_CHANNELS, pts.len());
        for r in 0..out.dim() {
            for c in 0..JET_CHANNELS * pts.len() {
                adj.data[[r, c]] = wrng.range(-1.0, 1.0);
            }
        }
        let mut grad = MlpGrad::zeros_like(&net);
        backward_batch(&net, &trace, adj.clone(), &mut grad);

        // Same loss on the tape: sum_{q,r,ch} adj[r, 6q+ch] * component.
        let mut tape = Tape::new();
        let tn = tape.register_net(&net);
        let mut loss = tape.constant(0.0);
        for (q, p) in pts.iter().enumerate() {
            let x = tape.jet_var(*p, 0);
            let y = tape.jet_var(*p, 1);
            let outs = tape.net_forward_jet(&tn, &[x, y]).unwrap();
            for (r, jet) in outs.iter().enumerate() {
                let comps = [jet.value, jet.gx, jet.gy, jet.hxx, jet.hxy, jet.hyy];
                for (ch, comp) in comps.into_iter().enumerate() {
                    let t = tape.scale(comp, adj.data[[r, JET_CHANNELS * q + ch]]);
                    loss = tape.add(loss, t);
                }
            }
        }
        let tape_grads = tape.param_gradient(loss, &[&tn]).unwrap();

        let flat_batch: Vec<f64> = grad.iter_flat().collect();
        let flat_tape: Vec<f64> = tape_grads[0].iter_flat().collect();
        assert_eq!(flat_batch.len(), flat_tape.len());
        for (i, (a, b)) in flat_batch.iter().zip(flat_tape.iter()).enumerate() {
            let scale = a.abs().max(b.abs()).max(1.0);
            assert!((a - b).abs() / scale < 1e-12, "param {i}: {a} vs {b}");
        }
    }

    #[test]
    fn value_only_backward_matches_tape() {
        let net = Mlp::new(LayerSpec::new(vec![2, 5, 1]).unwrap(), 3, 13).unwrap();
        let pts = random_points(7, 9);
        let (out, trace) = forward_batch_traced(&net, BatchMat::value_points(&pts));
        // loss = mean of outputs
        let n = pts.len() as f64;
        let mut adj = BatchMat::zeros(1, 1, pts.len());
        adj.data.fill(1.0 / n);
        let mut grad = MlpGrad::zeros_like(&net);
        backward_batch(&net, &trace, adj, &mut grad);

        let mut tape = Tape::new();
        let tn = tape.register_net(&net);
        let mut outs = vec![];
        for p in &pts {
            let x = tape.constant(p[0]);
            let y = tape.constant(p[1]);
            outs.push(tape.net_forward_value(&tn, &[x, y]).unwrap()[0]);
        }
        let loss = tape.mean(&outs);
        let tg = tape.param_gradient(loss, &[&tn]).unwrap();
        let _ = out;
        for (a, b) in grad.iter_flat().zip(tg[0].iter_flat()) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn batch_counts_points() {
        let net = Mlp::new(LayerSpec::new(vec![2, 3, 1]).unwrap(), 3, 1).unwrap();
        let pts = random_points(9, 4);
        forward_batch(&net, &BatchMat::value_points(&pts));
        assert_eq!(net.eval_count(), 9);
        let (_, _t) = forward_batch_traced(&net, BatchMat::jet_points(&pts));
        assert_eq!(net.eval_count(), 18);
    }
}
