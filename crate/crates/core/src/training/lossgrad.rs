//! Full-batch loss evaluation with exact parameter gradients, structured per
//! model kind.
//!
//! The objective over `K` source parameterizations is
//!
//! ```text
//! (1/K) sum_k [ lambda1 * mean_i (L[u](x_i) - g_k(x_i))^2
//!             + lambda2 * mean_b (u(x_b) - phi(x_b))^2 ]
//! ```
//!
//! Interior points run in jet mode (the operator needs first and second
//! spatial derivatives); boundary points run value-only. Both operators are
//! linear in the jet components, so the adjoint seed of each output jet is
//! the residual times the operator's coefficient vector; from there the
//! structured reverse sweep of `nn::batch` carries gradients into every
//! component network, including through the H-cache.
//!
//! For factorized kinds the quadrature network H is evaluated once per call
//! (`P` applications); its adjoint is accumulated across every
//! parameterization, interior and boundary alike, and swept back in a single
//! pass at the end. Kernel-pair kinds evaluate `G` once per
//! (collocation point, sample) pair, which is exactly the repeated cost the
//! factorization removes.
//!
//! Work is split over `threads` contiguous spans of each point set; every
//! span accumulates into its own buffers and the spans are merged in index
//! order, so results are bit-reproducible for a fixed configuration.

use ndarray::{Array1, Array2, Axis};

use crate::autodiff::grad::MlpGrad;
use crate::autodiff::jet::Point2;
use crate::models::{Model, Nets};
use crate::nn::batch::{backward_batch, forward_batch_traced, BatchMat, JET_CHANNELS};
use crate::nn::Mlp;
use crate::pde::Problem;
use crate::sampling::SampleSet;

use super::TrainError;

/// Points per jet-mode chunk (bounds trace memory for wide networks).
const JET_CHUNK: usize = 128;
/// (point, sample) pairs per kernel chunk.
const PAIR_CHUNK_BUDGET: usize = 2048;
/// Points per value-only chunk.
const VALUE_CHUNK: usize = 2048;

#[derive(Clone, Copy, Debug)]
pub struct LossBreakdown {
    /// `(1/K) sum_k mean_i residual^2` (unweighted by lambda1).
    pub residual: f64,
    /// `(1/K) sum_k mean_b boundary^2` (unweighted by lambda2).
    pub boundary: f64,
    /// `lambda1 * residual + lambda2 * boundary`.
    pub total: f64,
}

pub(crate) struct LossParams<'a> {
    pub problem: Problem,
    pub lambda1: f64,
    pub lambda2: f64,
    pub a_values: &'a [f64],
    pub threads: usize,
}

/// Per-parameterization cache context for factorized kinds. The broadcast
/// case (H output width 1) is materialized to full rank so one code path
/// serves both layouts.
struct KCtx {
    /// `(R x P)`: column `i` is the rank-sized factor of sample `i`.
    m_eff: Array2<f64>,
    /// Row sums of `m_eff`.
    c: Array1<f64>,
    gvals: Vec<f64>,
}

/// Mutable accumulation owned by one span of points.
struct Partial {
    grads: Vec<MlpGrad>,
    sq_sum: f64,
    /// Adjoint of `m_eff` (factorized kinds only).
    mbar: Option<Array2<f64>>,
}

impl Partial {
    fn new(model: &Model, mbar_shape: Option<(usize, usize)>) -> Self {
        Partial {
            grads: model
                .nets()
                .iter()
                .map(|(_, n)| MlpGrad::zeros_like(n))
                .collect(),
            sq_sum: 0.0,
            mbar: mbar_shape.map(|(r, p)| Array2::zeros((r, p))),
        }
    }

    fn merge(&mut self, other: Partial) {
        for (a, b) in self.grads.iter_mut().zip(other.grads.iter()) {
            a.add_assign(b);
        }
        self.sq_sum += other.sq_sum;
        if let (Some(a), Some(b)) = (self.mbar.as_mut(), other.mbar.as_ref()) {
            *a += b;
        }
    }
}

/// What a chunk is being evaluated for.
enum Phase<'a> {
    /// PDE residual: jet mode, operator coefficients and source targets.
    Interior {
        coeffs: &'a [[f64; 6]],
        targets: &'a [f64],
    },
    /// Boundary mismatch: value mode, Dirichlet targets.
    Boundary { targets: &'a [f64] },
}

impl Phase<'_> {
    fn channels(&self) -> usize {
        match self {
            Phase::Interior { .. } => JET_CHANNELS,
            Phase::Boundary { .. } => 1,
        }
    }

    fn seed(&self, pts: &[Point2]) -> BatchMat {
        match self {
            Phase::Interior { .. } => BatchMat::jet_points(pts),
            Phase::Boundary { .. } => BatchMat::value_points(pts),
        }
    }

    fn seed_pairs(&self, pairs: &[(Point2, Point2)]) -> BatchMat {
        match self {
            Phase::Interior { .. } => BatchMat::jet_pairs(pairs),
            Phase::Boundary { .. } => BatchMat::value_pairs(pairs),
        }
    }

    /// Residual sum of squares plus the adjoint of the solution field `u`
    /// (row vector over `channels * points` columns). `adj_scale` is
    /// `d(total)/d(residual) / (2 residual)`, i.e. `2 lambda / (K n)`.
    fn loss_and_adjoint(
        &self,
        u: &Array1<f64>,
        range: std::ops::Range<usize>,
        adj_scale: f64,
    ) -> (f64, Array1<f64>) {
        let mut sq = 0.0;
        let mut ubar = Array1::zeros(u.len());
        match self {
            Phase::Interior { coeffs, targets } => {
                for (local, idx) in range.enumerate() {
                    let base = JET_CHANNELS * local;
                    let c = &coeffs[idx];
                    let lu: f64 = (0..JET_CHANNELS).map(|ch| c[ch] * u[base + ch]).sum();
                    let r = lu - targets[idx];
                    sq += r * r;
                    let s = adj_scale * r;
                    for ch in 0..JET_CHANNELS {
                        ubar[base + ch] = s * c[ch];
                    }
                }
            }
            Phase::Boundary { targets } => {
                for (local, idx) in range.enumerate() {
                    let r = u[local] - targets[idx];
                    sq += r * r;
                    ubar[local] = adj_scale * r;
                }
            }
        }
        (sq, ubar)
    }
}

fn row_vec(a: Array1<f64>) -> Array2<f64> {
    let n = a.len();
    a.into_shape_with_order((1, n)).expect("row reshape")
}

/// One chunk of a factorized model (`decgreen` without head, `decgreen_nl`
/// with). Forward composes `u` from F (and O); backward pushes adjoints into
/// F and O gradients and into the cache adjoint `mbar`.
#[allow(clippy::too_many_arguments)]
fn factorized_chunk(
    f: &Mlp,
    o: Option<&Mlp>,
    kctx: &KCtx,
    pts: &[Point2],
    range: std::ops::Range<usize>,
    phase: &Phase<'_>,
    adj_scale: f64,
    partial: &mut Partial,
) {
    let chunk = &pts[range.clone()];
    let (fout, ftrace) = forward_batch_traced(f, phase.seed(chunk));
    let channels = phase.channels();
    let mbar = partial.mbar.as_mut().expect("factorized partial");

    match o {
        None => {
            // u = c^T F
            let u = kctx.c.dot(&fout.data);
            let (sq, ubar) = phase.loss_and_adjoint(&u, range, adj_scale);
            partial.sq_sum += sq;
            // cache adjoint: cbar = F ubar, distributed over every column of
            // m_eff (c is the row sum of m_eff).
            let cbar = fout.data.dot(&ubar);
            for mut col in mbar.columns_mut() {
                col += &cbar;
            }
            // F adjoint: outer(c, ubar).
            let fbar = kctx
                .c
                .view()
                .insert_axis(Axis(1))
                .dot(&ubar.view().insert_axis(Axis(0)));
            backward_batch(
                f,
                &ftrace,
                BatchMat {
                    data: fbar,
                    channels,
                },
                &mut partial.grads[0],
            );
        }
        Some(o) => {
            // t = m_eff^T F per point, u = O(t)
            let t = kctx.m_eff.t().dot(&fout.data);
            let (oout, otrace) = forward_batch_traced(
                o,
                BatchMat {
                    data: t,
                    channels,
                },
            );
            let u = oout.data.row(0).to_owned();
            let (sq, ubar) = phase.loss_and_adjoint(&u, range, adj_scale);
            partial.sq_sum += sq;
            let tbar = backward_batch(
                o,
                &otrace,
                BatchMat {
                    data: row_vec(ubar),
                    channels,
                },
                &mut partial.grads[2],
            );
            // m adjoint: F tbar^T; F adjoint: m_eff tbar.
            *mbar += &fout.data.dot(&tbar.data.t());
            let fbar = kctx.m_eff.dot(&tbar.data);
            backward_batch(
                f,
                &ftrace,
                BatchMat {
                    data: fbar,
                    channels,
                },
                &mut partial.grads[0],
            );
        }
    }
}

/// One chunk of a kernel-pair model (`modnet` without head, `modnet_nl`
/// with). Each point in the chunk expands to `P` concatenated pairs.
#[allow(clippy::too_many_arguments)]
fn kernel_chunk(
    g: &Mlp,
    f2: Option<&Mlp>,
    samples: &[Point2],
    gvals: &[f64],
    pts: &[Point2],
    range: std::ops::Range<usize>,
    phase: &Phase<'_>,
    adj_scale: f64,
    partial: &mut Partial,
) {
    let chunk = &pts[range.clone()];
    let p = samples.len();
    let q = chunk.len();
    let channels = phase.channels();
    let pairs: Vec<(Point2, Point2)> = chunk
        .iter()
        .flat_map(|&x| samples.iter().map(move |&y| (x, y)))
        .collect();
    let (gout, gtrace) = forward_batch_traced(g, phase.seed_pairs(&pairs));
    let width = gout.dim();

    // Aggregate pairs into the per-point inner sum s[w, point] (jet channels
    // kept separate): s = sum_i gout[.., pair(point, i)] * gvals[i].
    let mut inner = Array2::zeros((width, channels * q));
    for (w, row) in gout.data.rows().into_iter().enumerate() {
        let row = row.as_slice().expect("standard layout");
        for qi in 0..q {
            for (i, &gv) in gvals.iter().enumerate() {
                let src = channels * (qi * p + i);
                let dst = channels * qi;
                for ch in 0..channels {
                    inner[[w, dst + ch]] += row[src + ch] * gv;
                }
            }
        }
    }

    let scatter = |sbar: &Array2<f64>| -> Array2<f64> {
        let mut gbar = Array2::zeros((width, channels * q * p));
        for w in 0..width {
            for qi in 0..q {
                for (i, &gv) in gvals.iter().enumerate() {
                    let dst = channels * (qi * p + i);
                    let src = channels * qi;
                    for ch in 0..channels {
                        gbar[[w, dst + ch]] = sbar[[w, src + ch]] * gv;
                    }
                }
            }
        }
        gbar
    };

    match f2 {
        None => {
            let u = inner.row(0).to_owned();
            let (sq, ubar) = phase.loss_and_adjoint(&u, range, adj_scale);
            partial.sq_sum += sq;
            let gbar = scatter(&row_vec(ubar));
            backward_batch(
                g,
                &gtrace,
                BatchMat {
                    data: gbar,
                    channels,
                },
                &mut partial.grads[0],
            );
        }
        Some(f2) => {
            let (f2out, f2trace) = forward_batch_traced(
                f2,
                BatchMat {
                    data: inner,
                    channels,
                },
            );
            let u = f2out.data.row(0).to_owned();
            let (sq, ubar) = phase.loss_and_adjoint(&u, range, adj_scale);
            partial.sq_sum += sq;
            let sbar = backward_batch(
                f2,
                &f2trace,
                BatchMat {
                    data: row_vec(ubar),
                    channels,
                },
                &mut partial.grads[1],
            );
            let gbar = scatter(&sbar.data);
            backward_batch(
                g,
                &gtrace,
                BatchMat {
                    data: gbar,
                    channels,
                },
                &mut partial.grads[0],
            );
        }
    }
}

/// One chunk of the plain PINN.
fn pinn_chunk(
    net: &Mlp,
    pts: &[Point2],
    range: std::ops::Range<usize>,
    phase: &Phase<'_>,
    adj_scale: f64,
    partial: &mut Partial,
) {
    let chunk = &pts[range.clone()];
    let (out, trace) = forward_batch_traced(net, phase.seed(chunk));
    let u = out.data.row(0).to_owned();
    let (sq, ubar) = phase.loss_and_adjoint(&u, range, adj_scale);
    partial.sq_sum += sq;
    backward_batch(
        net,
        &trace,
        BatchMat {
            data: row_vec(ubar),
            channels: phase.channels(),
        },
        &mut partial.grads[0],
    );
}

/// Split `0..n` into `threads` contiguous spans, run `work` on each (its own
/// `Partial`), and merge in span order. `chunk` bounds the sub-chunk size
/// inside a span.
fn run_spans<W>(
    model: &Model,
    mbar_shape: Option<(usize, usize)>,
    n: usize,
    threads: usize,
    chunk: usize,
    work: W,
) -> Partial
where
    W: Fn(std::ops::Range<usize>, &mut Partial) + Sync,
{
    let mut total = Partial::new(model, mbar_shape);
    if threads <= 1 || n <= chunk {
        let mut start = 0;
        while start < n {
            let end = (start + chunk).min(n);
            work(start..end, &mut total);
            start = end;
        }
        return total;
    }
    let span = n.div_ceil(threads);
    let partials: Vec<Partial> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let lo = (t * span).min(n);
                let hi = ((t + 1) * span).min(n);
                let work = &work;
                scope.spawn(move || {
                    let mut partial = Partial::new(model, mbar_shape);
                    let mut start = lo;
                    while start < hi {
                        let end = (start + chunk).min(hi);
                        work(start..end, &mut partial);
                        start = end;
                    }
                    partial
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    for p in partials {
        total.merge(p);
    }
    total
}

/// Evaluate the objective and its exact gradient with respect to every
/// parameter of every component network. Gradients come back in
/// [`Model::nets`] order.
pub(crate) fn loss_and_grad(
    model: &Model,
    samples: &SampleSet,
    lp: &LossParams<'_>,
) -> Result<(LossBreakdown, Vec<MlpGrad>), TrainError> {
    let k_count = lp.a_values.len();
    if k_count == 0 {
        return Err(TrainError::InvalidConfig(
            "at least one source parameterization required".into(),
        ));
    }
    if samples.interior.len() != k_count || samples.boundary.len() != k_count {
        return Err(TrainError::InvalidConfig(format!(
            "sample set has {} interior / {} boundary sets but {} parameterizations",
            samples.interior.len(),
            samples.boundary.len(),
            k_count
        )));
    }
    for k in 0..k_count {
        if samples.interior[k].is_empty() || samples.boundary[k].is_empty() {
            return Err(TrainError::InvalidConfig(
                "empty collocation set".into(),
            ));
        }
    }

    let mut grads: Vec<MlpGrad> = model
        .nets()
        .iter()
        .map(|(_, n)| MlpGrad::zeros_like(n))
        .collect();
    let mut residual_sum = 0.0;
    let mut boundary_sum = 0.0;

    // Factorized kinds: evaluate H once over the quadrature set and keep the
    // trace; every parameterization reuses the same outputs.
    let fact = match &model.nets {
        Nets::Decgreen { f, h } => Some((f, h, None)),
        Nets::DecgreenNl { f, h, o } => Some((f, h, Some(o))),
        _ => None,
    };

    if let Some((f, h, o)) = fact {
        if samples.quadrature.is_empty() {
            return Err(TrainError::InvalidConfig(
                "factorized model requires a non-empty quadrature set".into(),
            ));
        }
        let rank = f.spec().output();
        let p = samples.quadrature.len();
        let (hout, htrace) =
            forward_batch_traced(h, BatchMat::value_points(&samples.quadrature));
        let h_rows = hout.dim();
        let mut hbar = Array2::zeros((h_rows, p));

        for (k, &a) in lp.a_values.iter().enumerate() {
            let gvals: Vec<f64> = samples
                .quadrature
                .iter()
                .map(|&y| lp.problem.source(y, a))
                .collect();
            // Materialize the rank-sized cache (broadcast if H is scalar).
            let mut m_eff = Array2::zeros((rank, p));
            for i in 0..p {
                for r in 0..rank {
                    let hval = if h_rows == rank { hout.data[[r, i]] } else { hout.data[[0, i]] };
                    m_eff[[r, i]] = hval * gvals[i];
                }
            }
            let c = m_eff.sum_axis(Axis(1));
            let kctx = KCtx { m_eff, c, gvals };

            let interior = &samples.interior[k];
            let coeffs: Vec<[f64; 6]> =
                interior.iter().map(|&x| lp.problem.operator_coeffs(x)).collect();
            let targets: Vec<f64> =
                interior.iter().map(|&x| lp.problem.source(x, a)).collect();
            let n = interior.len();
            let phase = Phase::Interior {
                coeffs: &coeffs,
                targets: &targets,
            };
            let adj = 2.0 * lp.lambda1 / (k_count as f64 * n as f64);
            let part = run_spans(
                model,
                Some((rank, p)),
                n,
                lp.threads,
                JET_CHUNK,
                |range, partial| {
                    factorized_chunk(f, o, &kctx, interior, range, &phase, adj, partial)
                },
            );
            residual_sum += part.sq_sum / n as f64;
            fold_partial(&mut grads, &mut hbar, part, &kctx, h_rows);

            let bpoints = &samples.boundary[k];
            let btargets: Vec<f64> = bpoints
                .iter()
                .map(|&x| lp.problem.boundary_value_unchecked(x))
                .collect();
            let m = bpoints.len();
            let phase = Phase::Boundary { targets: &btargets };
            let adj = 2.0 * lp.lambda2 / (k_count as f64 * m as f64);
            let part = run_spans(
                model,
                Some((rank, p)),
                m,
                lp.threads,
                VALUE_CHUNK,
                |range, partial| {
                    factorized_chunk(f, o, &kctx, bpoints, range, &phase, adj, partial)
                },
            );
            boundary_sum += part.sq_sum / m as f64;
            fold_partial(&mut grads, &mut hbar, part, &kctx, h_rows);
        }

        // One reverse sweep through H with everything that reached the cache.
        let h_idx = 1; // nets order: f, h, (o)
        backward_batch(
            h,
            &htrace,
            BatchMat {
                data: hbar,
                channels: 1,
            },
            &mut grads[h_idx],
        );
    } else {
        for (k, &a) in lp.a_values.iter().enumerate() {
            let gvals: Vec<f64> = samples
                .quadrature
                .iter()
                .map(|&y| lp.problem.source(y, a))
                .collect();
            let interior = &samples.interior[k];
            let coeffs: Vec<[f64; 6]> =
                interior.iter().map(|&x| lp.problem.operator_coeffs(x)).collect();
            let targets: Vec<f64> =
                interior.iter().map(|&x| lp.problem.source(x, a)).collect();
            let n = interior.len();
            let phase = Phase::Interior {
                coeffs: &coeffs,
                targets: &targets,
            };
            let adj = 2.0 * lp.lambda1 / (k_count as f64 * n as f64);

            let p = samples.quadrature.len().max(1);
            let pair_chunk = (PAIR_CHUNK_BUDGET / p).max(1);
            let part = match &model.nets {
                Nets::Pinn { net } => run_spans(
                    model,
                    None,
                    n,
                    lp.threads,
                    JET_CHUNK,
                    |range, partial| pinn_chunk(net, interior, range, &phase, adj, partial),
                ),
                Nets::Modnet { g } => run_spans(
                    model,
                    None,
                    n,
                    lp.threads,
                    pair_chunk,
                    |range, partial| {
                        kernel_chunk(
                            g,
                            None,
                            &samples.quadrature,
                            &gvals,
                            interior,
                            range,
                            &phase,
                            adj,
                            partial,
                        )
                    },
                ),
                Nets::ModnetNl { g, f2 } => run_spans(
                    model,
                    None,
                    n,
                    lp.threads,
                    pair_chunk,
                    |range, partial| {
                        kernel_chunk(
                            g,
                            Some(f2),
                            &samples.quadrature,
                            &gvals,
                            interior,
                            range,
                            &phase,
                            adj,
                            partial,
                        )
                    },
                ),
                _ => unreachable!(),
            };
            residual_sum += part.sq_sum / n as f64;
            for (gacc, gpart) in grads.iter_mut().zip(part.grads.iter()) {
                gacc.add_assign(gpart);
            }

            let bpoints = &samples.boundary[k];
            let btargets: Vec<f64> = bpoints
                .iter()
                .map(|&x| lp.problem.boundary_value_unchecked(x))
                .collect();
            let m = bpoints.len();
            let phase = Phase::Boundary { targets: &btargets };
            let adj = 2.0 * lp.lambda2 / (k_count as f64 * m as f64);
            let part = match &model.nets {
                Nets::Pinn { net } => run_spans(
                    model,
                    None,
                    m,
                    lp.threads,
                    VALUE_CHUNK,
                    |range, partial| pinn_chunk(net, bpoints, range, &phase, adj, partial),
                ),
                Nets::Modnet { g } => run_spans(
                    model,
                    None,
                    m,
                    lp.threads,
                    pair_chunk,
                    |range, partial| {
                        kernel_chunk(
                            g,
                            None,
                            &samples.quadrature,
                            &gvals,
                            bpoints,
                            range,
                            &phase,
                            adj,
                            partial,
                        )
                    },
                ),
                Nets::ModnetNl { g, f2 } => run_spans(
                    model,
                    None,
                    m,
                    lp.threads,
                    pair_chunk,
                    |range, partial| {
                        kernel_chunk(
                            g,
                            Some(f2),
                            &samples.quadrature,
                            &gvals,
                            bpoints,
                            range,
                            &phase,
                            adj,
                            partial,
                        )
                    },
                ),
                _ => unreachable!(),
            };
            boundary_sum += part.sq_sum / m as f64;
            for (gacc, gpart) in grads.iter_mut().zip(part.grads.iter()) {
                gacc.add_assign(gpart);
            }
        }
    }

    let residual = residual_sum / k_count as f64;
    let boundary = boundary_sum / k_count as f64;
    let total = lp.lambda1 * residual + lp.lambda2 * boundary;
    Ok((
        LossBreakdown {
            residual,
            boundary,
            total,
        },
        grads,
    ))
}

/// Merge a span partial into the global gradient buffers and fold its cache
/// adjoint into the H output adjoint.
fn fold_partial(
    grads: &mut [MlpGrad],
    hbar: &mut Array2<f64>,
    part: Partial,
    kctx: &KCtx,
    h_rows: usize,
) {
    for (gacc, gpart) in grads.iter_mut().zip(part.grads.iter()) {
        gacc.add_assign(gpart);
    }
    let mbar = part.mbar.expect("factorized partial");
    if h_rows == mbar.nrows() {
        // hbar[r, i] += mbar[r, i] * g_i
        for (i, &gv) in kctx.gvals.iter().enumerate() {
            for r in 0..h_rows {
                hbar[[r, i]] += mbar[[r, i]] * gv;
            }
        }
    } else {
        // Scalar H broadcast over the rank: every row of m_eff shares the
        // same H output, so the adjoint sums over rows.
        for (i, &gv) in kctx.gvals.iter().enumerate() {
            let col_sum: f64 = mbar.column(i).sum();
            hbar[[0, i]] += col_sum * gv;
        }
    }
}
