//! The five solution parameterizations and the cached evaluation strategy
//! that separates quadrature-sample work from query-point work.
//!
//! * `pinn` — a single network `u(x) = net(x)`.
//! * `modnet` — kernel network `G(x, y)` over concatenated pairs;
//!   `u(x) = sum_i G(x, y_i) g(y_i)` over the fixed quadrature set, so every
//!   query point costs `P` kernel evaluations.
//! * `modnet_nl` — the same sum fed through a second network `F2`.
//! * `decgreen` — factorized kernel `u(x) = F(x)^T sum_i H(y_i) g(y_i)`: the
//!   bracketed sum (the H-cache) is built once per parameter update, after
//!   which query points never touch `H`.
//! * `decgreen_nl` — keeps the per-sample products as a `P`-vector
//!   `F(x)^T M` and feeds it through a head network `O`; with a
//!   summation head it reduces exactly to `decgreen`.
//!
//! The normalizing factor `|domain| / P` is dropped everywhere; the networks
//! absorb it during training.

use ndarray::{Array1, Array2};

use crate::autodiff::jet::{Jet2, Point2};
use crate::nn::batch::{forward_batch, BatchMat};
use crate::nn::{LayerSpec, Mlp, NnError};
use crate::rng::derive_seed;

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("invalid model config: {0}")]
    InvalidConfig(String),
    #[error("cache rank {cache} does not match F output width {f_out}")]
    RankMismatch { cache: usize, f_out: usize },
    #[error("head network input width {o_in} does not match sample count {p}")]
    HeadWidthMismatch { o_in: usize, p: usize },
    #[error("quadrature set is empty")]
    EmptyQuadrature,
    #[error("{samples} samples but {gvals} source values")]
    LengthMismatch { samples: usize, gvals: usize },
    #[error(transparent)]
    Nn(#[from] NnError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Pinn,
    Modnet,
    ModnetNl,
    Decgreen,
    DecgreenNl,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Pinn => "pinn",
            ModelKind::Modnet => "modnet",
            ModelKind::ModnetNl => "modnet_nl",
            ModelKind::Decgreen => "decgreen",
            ModelKind::DecgreenNl => "decgreen_nl",
        }
    }

    /// Whether the model factorizes the kernel and therefore uses an H-cache.
    pub fn factorized(&self) -> bool {
        matches!(self, ModelKind::Decgreen | ModelKind::DecgreenNl)
    }
}

/// Architecture of one model: kind, activation power, quadrature size and the
/// width lists of its component networks (only those the kind uses).
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// ReLU-K activation power.
    #[serde(default = "default_relu_power")]
    pub k: u32,
    /// Monte-Carlo quadrature sample count (unused by `pinn`).
    #[serde(default)]
    pub p: usize,
    /// Optional explicit rank; must equal the F output width when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub net_spec: Option<LayerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_spec: Option<LayerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f2_spec: Option<LayerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_spec: Option<LayerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_spec: Option<LayerSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub o_spec: Option<LayerSpec>,
}

fn default_relu_power() -> u32 {
    3
}

impl ModelConfig {
    fn require<'a>(
        spec: &'a Option<LayerSpec>,
        field: &str,
        kind: ModelKind,
    ) -> Result<&'a LayerSpec, ModelError> {
        spec.as_ref().ok_or_else(|| {
            ModelError::InvalidConfig(format!("{} requires {field}", kind.name()))
        })
    }

    fn forbid(spec: &Option<LayerSpec>, field: &str, kind: ModelKind) -> Result<(), ModelError> {
        if spec.is_some() {
            return Err(ModelError::InvalidConfig(format!(
                "{} does not use {field}",
                kind.name()
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidConfig(msg));
        if self.k < 1 {
            return bad("activation power k must be >= 1".into());
        }
        if self.kind != ModelKind::Pinn && self.p == 0 {
            return bad(format!("{} requires p >= 1", self.kind.name()));
        }
        match self.kind {
            ModelKind::Pinn => {
                let net = Self::require(&self.net_spec, "net_spec", self.kind)?;
                if net.input() != 2 {
                    return bad(format!("pinn net input width must be 2, got {net}"));
                }
                if net.output() != 1 {
                    return bad(format!("pinn net output width must be 1, got {net}"));
                }
                for (f, s) in [
                    ("g_spec", &self.g_spec),
                    ("f2_spec", &self.f2_spec),
                    ("f_spec", &self.f_spec),
                    ("h_spec", &self.h_spec),
                    ("o_spec", &self.o_spec),
                ] {
                    Self::forbid(s, f, self.kind)?;
                }
            }
            ModelKind::Modnet | ModelKind::ModnetNl => {
                let g = Self::require(&self.g_spec, "g_spec", self.kind)?;
                if g.input() != 4 {
                    return bad(format!(
                        "kernel network takes the concatenated pair (x, y), input width must be 4, got {g}"
                    ));
                }
                if self.kind == ModelKind::Modnet {
                    if g.output() != 1 {
                        return bad(format!("modnet kernel output width must be 1, got {g}"));
                    }
                    Self::forbid(&self.f2_spec, "f2_spec", self.kind)?;
                } else {
                    let f2 = Self::require(&self.f2_spec, "f2_spec", self.kind)?;
                    if f2.input() != g.output() {
                        return bad(format!(
                            "f2 input width {} must match kernel output width {}",
                            f2.input(),
                            g.output()
                        ));
                    }
                    if f2.output() != 1 {
                        return bad(format!("f2 output width must be 1, got {f2}"));
                    }
                }
                for (f, s) in [
                    ("net_spec", &self.net_spec),
                    ("f_spec", &self.f_spec),
                    ("h_spec", &self.h_spec),
                    ("o_spec", &self.o_spec),
                ] {
                    Self::forbid(s, f, self.kind)?;
                }
            }
            ModelKind::Decgreen | ModelKind::DecgreenNl => {
                let f = Self::require(&self.f_spec, "f_spec", self.kind)?;
                let h = Self::require(&self.h_spec, "h_spec", self.kind)?;
                if f.input() != 2 || h.input() != 2 {
                    return bad("F and H take a 2-d point as input".into());
                }
                let rank = f.output();
                if h.output() != rank && h.output() != 1 {
                    return bad(format!(
                        "H output width {} must equal the rank {} (F output width) or be 1 (scalar kernel factor broadcast over the rank)",
                        h.output(),
                        rank
                    ));
                }
                if let Some(r) = self.r {
                    if r != rank {
                        return bad(format!(
                            "declared rank r = {r} does not match F output width {rank}"
                        ));
                    }
                }
                if self.kind == ModelKind::DecgreenNl {
                    let o = Self::require(&self.o_spec, "o_spec", self.kind)?;
                    if o.input() != self.p {
                        return bad(format!(
                            "O input width {} must equal the sample count p = {}",
                            o.input(),
                            self.p
                        ));
                    }
                    if o.output() != 1 {
                        return bad(format!("O output width must be 1, got {o}"));
                    }
                } else {
                    Self::forbid(&self.o_spec, "o_spec", self.kind)?;
                }
                for (fi, s) in [
                    ("net_spec", &self.net_spec),
                    ("g_spec", &self.g_spec),
                    ("f2_spec", &self.f2_spec),
                ] {
                    Self::forbid(s, fi, self.kind)?;
                }
            }
        }
        Ok(())
    }

    /// Separation rank: the shared output width of F and H.
    pub fn rank(&self) -> Option<usize> {
        self.f_spec.as_ref().map(|f| f.output())
    }

    /// Human-readable structure summary, e.g. `F=[2,512,50], H=[2,16,1]`.
    pub fn structure_string(&self) -> String {
        let mut parts = Vec::new();
        if let Some(s) = &self.net_spec {
            parts.push(format!("net={s}"));
        }
        if let Some(s) = &self.g_spec {
            parts.push(format!("G={s}"));
        }
        if let Some(s) = &self.f_spec {
            parts.push(format!("F={s}"));
        }
        if let Some(s) = &self.h_spec {
            parts.push(format!("H={s}"));
        }
        if let Some(s) = &self.o_spec {
            parts.push(format!("O={s}"));
        }
        if let Some(s) = &self.f2_spec {
            parts.push(format!("F2={s}"));
        }
        parts.join(", ")
    }
}

/// Component networks of a model, by role.
#[derive(Clone, Debug)]
pub enum Nets {
    Pinn { net: Mlp },
    Modnet { g: Mlp },
    ModnetNl { g: Mlp, f2: Mlp },
    Decgreen { f: Mlp, h: Mlp },
    DecgreenNl { f: Mlp, h: Mlp, o: Mlp },
}

/// A model instance: configuration plus its component networks.
#[derive(Clone, Debug)]
pub struct Model {
    pub config: ModelConfig,
    pub nets: Nets,
}

const NET_STREAM_BASE: u64 = 3000;

impl Model {
    /// Build a model with parameters seeded deterministically from `seed`
    /// (each component network gets its own derived stream).
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self, ModelError> {
        config.validate()?;
        let k = config.k;
        let mk = |spec: &Option<LayerSpec>, idx: u64| -> Result<Mlp, ModelError> {
            Ok(Mlp::new(
                spec.clone().expect("validated"),
                k,
                derive_seed(seed, NET_STREAM_BASE + idx),
            )?)
        };
        let nets = match config.kind {
            ModelKind::Pinn => Nets::Pinn {
                net: mk(&config.net_spec, 0)?,
            },
            ModelKind::Modnet => Nets::Modnet {
                g: mk(&config.g_spec, 0)?,
            },
            ModelKind::ModnetNl => Nets::ModnetNl {
                g: mk(&config.g_spec, 0)?,
                f2: mk(&config.f2_spec, 1)?,
            },
            ModelKind::Decgreen => Nets::Decgreen {
                f: mk(&config.f_spec, 0)?,
                h: mk(&config.h_spec, 1)?,
            },
            ModelKind::DecgreenNl => Nets::DecgreenNl {
                f: mk(&config.f_spec, 0)?,
                h: mk(&config.h_spec, 1)?,
                o: mk(&config.o_spec, 2)?,
            },
        };
        Ok(Model { config, nets })
    }

    /// Component networks in a fixed role order (the optimizer and checkpoint
    /// formats rely on this order being stable).
    pub fn nets(&self) -> Vec<(&'static str, &Mlp)> {
        match &self.nets {
            Nets::Pinn { net } => vec![("net", net)],
            Nets::Modnet { g } => vec![("g", g)],
            Nets::ModnetNl { g, f2 } => vec![("g", g), ("f2", f2)],
            Nets::Decgreen { f, h } => vec![("f", f), ("h", h)],
            Nets::DecgreenNl { f, h, o } => vec![("f", f), ("h", h), ("o", o)],
        }
    }

    pub fn nets_mut(&mut self) -> Vec<(&'static str, &mut Mlp)> {
        match &mut self.nets {
            Nets::Pinn { net } => vec![("net", net)],
            Nets::Modnet { g } => vec![("g", g)],
            Nets::ModnetNl { g, f2 } => vec![("g", g), ("f2", f2)],
            Nets::Decgreen { f, h } => vec![("f", f), ("h", h)],
            Nets::DecgreenNl { f, h, o } => vec![("f", f), ("h", h), ("o", o)],
        }
    }

    pub fn param_count(&self) -> usize {
        self.nets().iter().map(|(_, n)| n.param_count()).sum()
    }

    /// Evaluation counts per component network since the last reset.
    pub fn eval_counts(&self) -> Vec<(&'static str, u64)> {
        self.nets()
            .into_iter()
            .map(|(role, n)| (role, n.eval_count()))
            .collect()
    }

    pub fn reset_eval_counts(&self) {
        for (_, n) in self.nets() {
            n.reset_eval_count();
        }
    }

    /// Precompute the per-source context: source values on the quadrature set
    /// and, for factorized kinds, the H-cache.
    pub fn prepare(&self, samples: &[Point2], gvals: &[f64]) -> Result<Prepared, ModelError> {
        if samples.len() != gvals.len() {
            return Err(ModelError::LengthMismatch {
                samples: samples.len(),
                gvals: gvals.len(),
            });
        }
        let cache = match &self.nets {
            Nets::Decgreen { h, .. } | Nets::DecgreenNl { h, .. } => {
                Some(hcache_build(h, samples, gvals)?)
            }
            _ => None,
        };
        Ok(Prepared {
            samples: samples.to_vec(),
            gvals: gvals.to_vec(),
            cache,
        })
    }

    /// Jet evaluation of the solution field at one point.
    pub fn eval_jet(&self, prep: &Prepared, x: Point2) -> Result<Jet2, ModelError> {
        match &self.nets {
            Nets::Pinn { net } => pinn_eval(net, x),
            Nets::Modnet { g } => modnet_eval(g, &prep.samples, &prep.gvals, x),
            Nets::ModnetNl { g, f2 } => modnet_nl_eval(g, f2, &prep.samples, &prep.gvals, x),
            Nets::Decgreen { f, .. } => decgreen_eval(f, prep.cache()?, x),
            Nets::DecgreenNl { f, o, .. } => decgreen_nl_eval(f, o, prep.cache()?, x),
        }
    }

    /// Value-only evaluation over many points (used for grid metrics and
    /// field export). Chunked so memory stays bounded.
    pub fn eval_values(&self, prep: &Prepared, points: &[Point2]) -> Result<Vec<f64>, ModelError> {
        const CHUNK: usize = 4096;
        let mut out = Vec::with_capacity(points.len());
        for chunk in points.chunks(CHUNK) {
            self.eval_values_chunk(prep, chunk, &mut out)?;
        }
        Ok(out)
    }

    fn eval_values_chunk(
        &self,
        prep: &Prepared,
        points: &[Point2],
        out: &mut Vec<f64>,
    ) -> Result<(), ModelError> {
        match &self.nets {
            Nets::Pinn { net } => {
                let o = forward_batch(net, &BatchMat::value_points(points));
                out.extend(o.data.row(0).iter());
            }
            Nets::Modnet { g } => {
                for &x in points {
                    let pairs: Vec<(Point2, Point2)> =
                        prep.samples.iter().map(|&y| (x, y)).collect();
                    let o = forward_batch(g, &BatchMat::value_pairs(&pairs));
                    let u: f64 = o
                        .data
                        .row(0)
                        .iter()
                        .zip(prep.gvals.iter())
                        .map(|(v, g)| v * g)
                        .sum();
                    out.push(u);
                }
            }
            Nets::ModnetNl { g, f2 } => {
                for &x in points {
                    let pairs: Vec<(Point2, Point2)> =
                        prep.samples.iter().map(|&y| (x, y)).collect();
                    let o = forward_batch(g, &BatchMat::value_pairs(&pairs));
                    let mut inner = vec![0.0; o.dim()];
                    for (r, item) in inner.iter_mut().enumerate() {
                        *item = o
                            .data
                            .row(r)
                            .iter()
                            .zip(prep.gvals.iter())
                            .map(|(v, g)| v * g)
                            .sum();
                    }
                    out.push(f2.forward(&inner)?[0]);
                }
            }
            Nets::Decgreen { f, .. } => {
                let cache = prep.cache()?;
                let fo = forward_batch(f, &BatchMat::value_points(points));
                check_rank(cache, fo.dim())?;
                for q in 0..points.len() {
                    let col = fo.data.column(q);
                    let u = if cache.rank() == fo.dim() {
                        col.iter().zip(cache.c.iter()).map(|(a, b)| a * b).sum()
                    } else {
                        col.sum() * cache.c[0]
                    };
                    out.push(u);
                }
            }
            Nets::DecgreenNl { f, o, .. } => {
                let cache = prep.cache()?;
                check_rank(cache, f.spec().output())?;
                check_head(o, cache)?;
                let fo = forward_batch(f, &BatchMat::value_points(points));
                // T = M^T F, shape (P x points)
                let t = cache.m.t().dot(&fo.data);
                let ov = forward_batch(
                    o,
                    &BatchMat {
                        data: t,
                        channels: 1,
                    },
                );
                out.extend(ov.data.row(0).iter());
            }
        }
        Ok(())
    }
}

/// Per-source evaluation context: quadrature samples, their source values and
/// (for factorized kinds) the H-cache.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub samples: Vec<Point2>,
    pub gvals: Vec<f64>,
    pub cache: Option<HCache>,
}

impl Prepared {
    fn cache(&self) -> Result<&HCache, ModelError> {
        self.cache.as_ref().ok_or(ModelError::EmptyQuadrature)
    }
}

/// The cached quadrature summary `M[:, i] = H(y_i) g(y_i)` with its row sum
/// `c = sum_i M[:, i]`. Rebuilt whenever the H parameters or the source
/// change.
#[derive(Clone, Debug)]
pub struct HCache {
    pub m: Array2<f64>,
    pub c: Array1<f64>,
}

impl HCache {
    pub fn rank(&self) -> usize {
        self.m.nrows()
    }

    pub fn p(&self) -> usize {
        self.m.ncols()
    }
}

fn check_rank(cache: &HCache, f_out: usize) -> Result<(), ModelError> {
    if cache.rank() != f_out && cache.rank() != 1 {
        return Err(ModelError::RankMismatch {
            cache: cache.rank(),
            f_out,
        });
    }
    Ok(())
}

fn check_head(o: &Mlp, cache: &HCache) -> Result<(), ModelError> {
    if o.spec().input() != cache.p() {
        return Err(ModelError::HeadWidthMismatch {
            o_in: o.spec().input(),
            p: cache.p(),
        });
    }
    Ok(())
}

/// Evaluate `H` once over the quadrature set and scale each column by its
/// source value. Exactly `samples.len()` applications of `H` are performed.
pub fn hcache_build(h: &Mlp, samples: &[Point2], gvals: &[f64]) -> Result<HCache, ModelError> {
    if samples.is_empty() {
        return Err(ModelError::EmptyQuadrature);
    }
    if samples.len() != gvals.len() {
        return Err(ModelError::LengthMismatch {
            samples: samples.len(),
            gvals: gvals.len(),
        });
    }
    let out = forward_batch(h, &BatchMat::value_points(samples));
    let mut m = out.data;
    for (i, mut col) in m.columns_mut().into_iter().enumerate() {
        col *= gvals[i];
    }
    let c = m.sum_axis(ndarray::Axis(1));
    Ok(HCache { m, c })
}

/// `u(x) = F(x)^T c` on jets; derivatives flow only through `F`.
pub fn decgreen_eval(f: &Mlp, cache: &HCache, x: Point2) -> Result<Jet2, ModelError> {
    let jets = f.forward_jet(x)?;
    check_rank(cache, jets.len())?;
    let u = if cache.rank() == jets.len() {
        jets.iter()
            .zip(cache.c.iter())
            .map(|(j, &c)| j.scale(c))
            .sum()
    } else {
        // Scalar kernel factor: H contributes one number per sample, shared
        // across the rank; u = (sum_r F_r(x)) * c.
        jets.into_iter().sum::<Jet2>().scale(cache.c[0])
    };
    Ok(u)
}

/// `u(x) = O(F(x)^T M)` on jets; the inner `P`-vector keeps each quadrature
/// sample's contribution separate.
pub fn decgreen_nl_eval(f: &Mlp, o: &Mlp, cache: &HCache, x: Point2) -> Result<Jet2, ModelError> {
    let jets = f.forward_jet(x)?;
    check_rank(cache, jets.len())?;
    check_head(o, cache)?;
    let inner: Vec<Jet2> = (0..cache.p())
        .map(|i| {
            let col = cache.m.column(i);
            if cache.rank() == jets.len() {
                jets.iter()
                    .zip(col.iter())
                    .map(|(j, &mi)| j.scale(mi))
                    .sum()
            } else {
                jets.iter().copied().sum::<Jet2>().scale(col[0])
            }
        })
        .collect();
    Ok(o.forward_jet_inputs(&inner)?[0])
}

/// `u(x) = sum_i G(x, y_i) g(y_i)` on jets; every call performs one kernel
/// evaluation per quadrature sample.
pub fn modnet_eval(
    g: &Mlp,
    samples: &[Point2],
    gvals: &[f64],
    x: Point2,
) -> Result<Jet2, ModelError> {
    if samples.len() != gvals.len() {
        return Err(ModelError::LengthMismatch {
            samples: samples.len(),
            gvals: gvals.len(),
        });
    }
    let mut u = Jet2::ZERO;
    for (&y, &gv) in samples.iter().zip(gvals.iter()) {
        let out = g.forward_jet_inputs(&[
            Jet2::var(x, 0),
            Jet2::var(x, 1),
            Jet2::constant(y[0]),
            Jet2::constant(y[1]),
        ])?;
        u = u + out[0].scale(gv);
    }
    Ok(u)
}

/// `u(x) = F2( sum_i G(x, y_i) g(y_i) )` on jets.
pub fn modnet_nl_eval(
    g: &Mlp,
    f2: &Mlp,
    samples: &[Point2],
    gvals: &[f64],
    x: Point2,
) -> Result<Jet2, ModelError> {
    if samples.len() != gvals.len() {
        return Err(ModelError::LengthMismatch {
            samples: samples.len(),
            gvals: gvals.len(),
        });
    }
    let width = g.spec().output();
    let mut inner = vec![Jet2::ZERO; width];
    for (&y, &gv) in samples.iter().zip(gvals.iter()) {
        let out = g.forward_jet_inputs(&[
            Jet2::var(x, 0),
            Jet2::var(x, 1),
            Jet2::constant(y[0]),
            Jet2::constant(y[1]),
        ])?;
        for (acc, j) in inner.iter_mut().zip(out) {
            *acc = *acc + j.scale(gv);
        }
    }
    Ok(f2.forward_jet_inputs(&inner)?[0])
}

/// `u(x) = net(x)` on jets.
pub fn pinn_eval(net: &Mlp, x: Point2) -> Result<Jet2, ModelError> {
    Ok(net.forward_jet(x)?[0])
}

/// A hand-built `[2,4,4,1]` ReLU-2 network that realizes the analytic
/// Poisson solution `(a/2) x (x-1) y (y-1)` exactly on the closed unit
/// square.
///
/// Squares recover linear terms through shifted pairs
/// (`relu2(s+2), relu2(s+3)` span `{s^2, s, 1}` while both shifts stay
/// active), and the product of the two quadratics comes from the
/// polarization identity `q1 q2 = ((q1+q2)^2 - (q1-q2)^2) / 4`. Every hidden
/// unit's pre-activation stays >= 1.5 on the domain, so the network is
/// infinitely smooth there. Used as a referee: residual and boundary terms
/// vanish to rounding error.
pub fn poisson_oracle_net(a: f64) -> Mlp {
    let spec = LayerSpec::new(vec![2, 4, 4, 1]).unwrap();
    let mut net = Mlp::new(spec, 2, 0).unwrap();
    let s = a / 8.0;
    #[rustfmt::skip]
    let params = vec![
        // layer 1 weights (4x2): relu2 of x+2, x+3, y+2, y+3
        1.0, 0.0,
        1.0, 0.0,
        0.0, 1.0,
        0.0, 1.0,
        // layer 1 biases
        2.0, 3.0, 2.0, 3.0,
        // layer 2 weights (4x4): with q = 3.5*A - 2.5*E + 8.5 per axis,
        // rows give (q1+q2)+2, (q1+q2)+3, (q1-q2)+2, (q1-q2)+3
        3.5, -2.5, 3.5, -2.5,
        3.5, -2.5, 3.5, -2.5,
        3.5, -2.5, -3.5, 2.5,
        3.5, -2.5, -3.5, 2.5,
        // layer 2 biases
        19.0, 20.0, 2.0, 3.0,
        // output layer: (a/8) * (3G - 2H - 3I + 2J) = (a/2) q1 q2
        3.0 * s, -2.0 * s, -3.0 * s, 2.0 * s,
        0.0,
    ];
    net.set_params_flat(&params).unwrap();
    net
}

/// [`poisson_oracle_net`] wrapped as a `pinn` model.
pub fn poisson_oracle_model(a: f64) -> Model {
    let net = poisson_oracle_net(a);
    let config = ModelConfig {
        kind: ModelKind::Pinn,
        k: 2,
        p: 0,
        r: None,
        net_spec: Some(net.spec().clone()),
        g_spec: None,
        f2_spec: None,
        f_spec: None,
        h_spec: None,
        o_spec: None,
    };
    Model {
        config,
        nets: Nets::Pinn { net },
    }
}
