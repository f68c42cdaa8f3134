//! Reference routes for the training objective.
//!
//! [`loss_value`] walks the scalar jet path point by point — no batching, no
//! gradients — and is the oracle the finite-difference checks evaluate.
//! [`loss_tape`] builds the same objective as a tape expression whose
//! parameter gradient comes from [`Tape::param_gradient`]; the optimized
//! batched route in `lossgrad` must agree with both to rounding error.

use crate::autodiff::tape::{Tape, TapeError, TapeJet, TapeNet, Var};
use crate::models::{Model, ModelError, Nets};
use crate::pde::Problem;
use crate::sampling::SampleSet;

use super::lossgrad::LossBreakdown;
use super::TrainError;

/// Scalar-path evaluation of the objective (values only).
pub fn loss_value(
    model: &Model,
    problem: Problem,
    samples: &SampleSet,
    lambda1: f64,
    lambda2: f64,
    a_values: &[f64],
) -> Result<LossBreakdown, TrainError> {
    let k_count = a_values.len();
    if k_count == 0 || samples.interior.len() != k_count || samples.boundary.len() != k_count {
        return Err(TrainError::InvalidConfig(
            "sample sets do not match the parameterization count".into(),
        ));
    }
    let mut residual = 0.0;
    let mut boundary = 0.0;
    for (k, &a) in a_values.iter().enumerate() {
        let gvals: Vec<f64> = samples
            .quadrature
            .iter()
            .map(|&y| problem.source(y, a))
            .collect();
        let prep = model.prepare(&samples.quadrature, &gvals)?;
        let interior = &samples.interior[k];
        let mut res_sq = 0.0;
        for &x in interior {
            let u = model.eval_jet(&prep, x)?;
            let r = problem.apply_operator(&u, x) - problem.source(x, a);
            res_sq += r * r;
        }
        residual += res_sq / interior.len() as f64;

        let bpts = &samples.boundary[k];
        let mut bnd_sq = 0.0;
        for &x in bpts {
            let u = model.eval_jet(&prep, x)?;
            let r = u.value - problem.boundary_value_unchecked(x);
            bnd_sq += r * r;
        }
        boundary += bnd_sq / bpts.len() as f64;
    }
    let residual = residual / k_count as f64;
    let boundary = boundary / k_count as f64;
    Ok(LossBreakdown {
        residual,
        boundary,
        total: lambda1 * residual + lambda2 * boundary,
    })
}

/// The objective as a differentiable tape expression.
///
/// Registers every component network on a fresh tape, composes the model's
/// solution field in jet form at every collocation point, and assembles the
/// averaged residual and boundary terms. The returned loss node, together
/// with the registered networks (in [`Model::nets`] order), feeds
/// [`Tape::param_gradient`].
pub fn loss_tape(
    model: &Model,
    problem: Problem,
    samples: &SampleSet,
    lambda1: f64,
    lambda2: f64,
    a_values: &[f64],
) -> Result<(Tape, Var, Vec<TapeNet>), TrainError> {
    let k_count = a_values.len();
    if k_count == 0 || samples.interior.len() != k_count || samples.boundary.len() != k_count {
        return Err(TrainError::InvalidConfig(
            "sample sets do not match the parameterization count".into(),
        ));
    }
    let mut tape = Tape::new();
    let tnets: Vec<TapeNet> = model
        .nets()
        .iter()
        .map(|(_, n)| tape.register_net(n))
        .collect();

    let mut k_terms = Vec::with_capacity(k_count);
    for (k, &a) in a_values.iter().enumerate() {
        let gvals: Vec<f64> = samples
            .quadrature
            .iter()
            .map(|&y| problem.source(y, a))
            .collect();
        // Quadrature-side values for factorized kinds: one H column per
        // sample, scaled by the source.
        let cache_cols: Option<Vec<Vec<Var>>> = match &model.nets {
            Nets::Decgreen { .. } | Nets::DecgreenNl { .. } => {
                let h = &tnets[1];
                let mut cols = Vec::with_capacity(samples.quadrature.len());
                for (y, &gv) in samples.quadrature.iter().zip(gvals.iter()) {
                    let y0 = tape.constant(y[0]);
                    let y1 = tape.constant(y[1]);
                    let hv = tape.net_forward_value(h, &[y0, y1])?;
                    cols.push(hv.into_iter().map(|v| tape.scale(v, gv)).collect());
                }
                Some(cols)
            }
            _ => None,
        };

        let mut res_terms = Vec::new();
        for &x in &samples.interior[k] {
            let u = field_jet(&mut tape, model, &tnets, cache_cols.as_deref(), &gvals, samples, x)?;
            let coeffs = problem.operator_coeffs(x);
            let lu = apply_operator_tape(&mut tape, &u, &coeffs);
            let target = tape.constant(problem.source(x, a));
            let r = tape.sub(lu, target);
            res_terms.push(tape.square(r));
        }
        let res_mean = tape.mean(&res_terms);

        let mut bnd_terms = Vec::new();
        for &x in &samples.boundary[k] {
            let u = field_jet(&mut tape, model, &tnets, cache_cols.as_deref(), &gvals, samples, x)?;
            let target = tape.constant(problem.boundary_value_unchecked(x));
            let r = tape.sub(u.value, target);
            bnd_terms.push(tape.square(r));
        }
        let bnd_mean = tape.mean(&bnd_terms);

        let res_w = tape.scale(res_mean, lambda1);
        let bnd_w = tape.scale(bnd_mean, lambda2);
        k_terms.push(tape.add(res_w, bnd_w));
        let _ = k;
    }
    let loss = tape.mean(&k_terms);
    Ok((tape, loss, tnets))
}

fn apply_operator_tape(tape: &mut Tape, u: &TapeJet, coeffs: &[f64; 6]) -> Var {
    let comps = [u.value, u.gx, u.gy, u.hxx, u.hxy, u.hyy];
    let mut acc = tape.constant(0.0);
    for (c, comp) in coeffs.iter().zip(comps.iter()) {
        if *c != 0.0 {
            let t = tape.scale(*comp, *c);
            acc = tape.add(acc, t);
        }
    }
    acc
}

/// Compose the model's solution field at `x` as a tape jet.
fn field_jet(
    tape: &mut Tape,
    model: &Model,
    tnets: &[TapeNet],
    cache_cols: Option<&[Vec<Var>]>,
    gvals: &[f64],
    samples: &SampleSet,
    x: crate::autodiff::jet::Point2,
) -> Result<TapeJet, TapeError> {
    let jx = tape.jet_var(x, 0);
    let jy = tape.jet_var(x, 1);
    match &model.nets {
        Nets::Pinn { .. } => Ok(tape.net_forward_jet(&tnets[0], &[jx, jy])?[0]),
        Nets::Modnet { .. } => {
            let mut u = tape.jet_constant(0.0);
            for (y, &gv) in samples.quadrature.iter().zip(gvals.iter()) {
                let cy0 = tape.jet_constant(y[0]);
                let cy1 = tape.jet_constant(y[1]);
                let out = tape.net_forward_jet(&tnets[0], &[jx, jy, cy0, cy1])?;
                let term = tape.jet_scale(out[0], gv);
                u = tape.jet_add(u, term);
            }
            Ok(u)
        }
        Nets::ModnetNl { g, .. } => {
            let width = g.spec().output();
            let mut inner = vec![tape.jet_constant(0.0); width];
            for (y, &gv) in samples.quadrature.iter().zip(gvals.iter()) {
                let cy0 = tape.jet_constant(y[0]);
                let cy1 = tape.jet_constant(y[1]);
                let out = tape.net_forward_jet(&tnets[0], &[jx, jy, cy0, cy1])?;
                for (acc, o) in inner.iter_mut().zip(out) {
                    let term = tape.jet_scale(o, gv);
                    *acc = tape.jet_add(*acc, term);
                }
            }
            Ok(tape.net_forward_jet(&tnets[1], &inner)?[0])
        }
        Nets::Decgreen { f, .. } => {
            let cols = cache_cols.expect("cache for factorized kind");
            let fjets = tape.net_forward_jet(&tnets[0], &[jx, jy])?;
            let rank = f.spec().output();
            let h_rows = cols[0].len();
            // c_r = sum_i cols[i][r]
            let mut u = tape.jet_constant(0.0);
            for (r, fj) in fjets.iter().enumerate().take(rank) {
                let hr = if h_rows == rank { r } else { 0 };
                let col_vars: Vec<Var> = cols.iter().map(|col| col[hr]).collect();
                let cr = tape.sum(&col_vars);
                let term = tape.jet_scale_var(*fj, cr);
                u = tape.jet_add(u, term);
            }
            Ok(u)
        }
        Nets::DecgreenNl { f, .. } => {
            let cols = cache_cols.expect("cache for factorized kind");
            let fjets = tape.net_forward_jet(&tnets[0], &[jx, jy])?;
            let rank = f.spec().output();
            let h_rows = cols[0].len();
            let mut inner = Vec::with_capacity(cols.len());
            for col in cols {
                let mut t = tape.jet_constant(0.0);
                for (r, fj) in fjets.iter().enumerate().take(rank) {
                    let hr = if h_rows == rank { r } else { 0 };
                    let term = tape.jet_scale_var(*fj, col[hr]);
                    t = tape.jet_add(t, term);
                }
                inner.push(t);
            }
            Ok(tape.net_forward_jet(&tnets[2], &inner)?[0])
        }
    }
}

impl From<ModelError> for TrainError {
    fn from(e: ModelError) -> Self {
        TrainError::Model(Box::new(e))
    }
}

impl From<TapeError> for TrainError {
    fn from(e: TapeError) -> Self {
        TrainError::Tape(e)
    }
}
