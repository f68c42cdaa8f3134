//! Problem definitions: differential operators on jets, source families,
//! boundary values, analytic solutions and domains.
//!
//! Both operators are linear in the jet components with point-dependent
//! coefficients, so each one is exposed both as a direct function of a jet
//! and as a coefficient vector (used by the trainer to seed adjoints).

use crate::autodiff::jet::{Jet2, Point2};
use crate::sampling::Rect;

/// Tolerance for deciding that a point lies on the domain boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum PdeError {
    #[error("unknown problem {0:?} (expected \"poisson2d\" or \"reaction_diffusion\")")]
    UnknownProblem(String),
    #[error("point ({0}, {1}) is not on the domain boundary")]
    NotOnBoundary(f64, f64),
}

/// `-(hxx + hyy)`.
pub fn poisson_operator(j: &Jet2) -> f64 {
    -(j.hess[0] + j.hess[2])
}

/// `g(x, y) = -a (x^2 - x + y^2 - y)`.
pub fn poisson_source(p: Point2, a: f64) -> f64 {
    let [x, y] = p;
    -a * (x * x - x + y * y - y)
}

/// `u(x, y) = (a/2) x (x - 1) y (y - 1)`.
pub fn poisson_exact(p: Point2, a: f64) -> f64 {
    let [x, y] = p;
    0.5 * a * x * (x - 1.0) * y * (y - 1.0)
}

/// Closed-form jet of the Poisson solution.
pub fn poisson_exact_jet(p: Point2, a: f64) -> Jet2 {
    let [x, y] = p;
    let qx = x * x - x;
    let qy = y * y - y;
    let dx = 2.0 * x - 1.0;
    let dy = 2.0 * y - 1.0;
    let h = 0.5 * a;
    Jet2 {
        value: h * qx * qy,
        grad: [h * dx * qy, h * qx * dy],
        hess: [a * qy, h * dx * dy, a * qx],
    }
}

/// `-(1 + 2x^2)(hxx + hyy) - 4x gx + (1 + y^2) v`, the divergence-form
/// operator `-div((1 + 2x^2) grad u) + (1 + y^2) u` expanded analytically so
/// second-order jets suffice.
pub fn rd_operator(j: &Jet2, p: Point2) -> f64 {
    let [x, y] = p;
    -(1.0 + 2.0 * x * x) * (j.hess[0] + j.hess[2]) - 4.0 * x * j.grad[0]
        + (1.0 + y * y) * j.value
}

/// `u(x, y) = exp(-(x^2 + 2 y^2 + 1))`.
pub fn rd_exact(p: Point2) -> f64 {
    let [x, y] = p;
    (-(x * x + 2.0 * y * y + 1.0)).exp()
}

/// Closed-form jet of the reaction-diffusion solution.
pub fn rd_exact_jet(p: Point2) -> Jet2 {
    let [x, y] = p;
    let u = rd_exact(p);
    Jet2 {
        value: u,
        grad: [-2.0 * x * u, -4.0 * y * u],
        hess: [
            (4.0 * x * x - 2.0) * u,
            8.0 * x * y * u,
            (16.0 * y * y - 4.0) * u,
        ],
    }
}

/// Manufactured source: the operator applied to the exact solution,
/// `g = u [ -(1 + 2x^2)(4x^2 + 16y^2 - 6) + 8x^2 + 1 + y^2 ]`.
pub fn rd_source(p: Point2) -> f64 {
    let [x, y] = p;
    let u = rd_exact(p);
    u * (-(1.0 + 2.0 * x * x) * (4.0 * x * x + 16.0 * y * y - 6.0) + 8.0 * x * x + 1.0 + y * y)
}

/// The two benchmark problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Problem {
    #[serde(rename = "poisson2d")]
    Poisson2d,
    #[serde(rename = "reaction_diffusion")]
    ReactionDiffusion,
}

impl Problem {
    pub fn by_name(name: &str) -> Result<Self, PdeError> {
        match name {
            "poisson2d" => Ok(Problem::Poisson2d),
            "reaction_diffusion" => Ok(Problem::ReactionDiffusion),
            other => Err(PdeError::UnknownProblem(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Problem::Poisson2d => "poisson2d",
            Problem::ReactionDiffusion => "reaction_diffusion",
        }
    }

    pub fn domain(&self) -> Rect {
        match self {
            Problem::Poisson2d => Rect::new([0.0, 0.0], [1.0, 1.0]),
            Problem::ReactionDiffusion => Rect::new([-1.0, -1.0], [1.0, 1.0]),
        }
    }

    /// Coefficients `c` with `L[u](p) = sum_ch c[ch] * u.ch` in the jet
    /// channel order `[v, gx, gy, hxx, hxy, hyy]`.
    pub fn operator_coeffs(&self, p: Point2) -> [f64; 6] {
        match self {
            Problem::Poisson2d => [0.0, 0.0, 0.0, -1.0, 0.0, -1.0],
            Problem::ReactionDiffusion => {
                let [x, y] = p;
                let d = -(1.0 + 2.0 * x * x);
                [1.0 + y * y, -4.0 * x, 0.0, d, 0.0, d]
            }
        }
    }

    pub fn apply_operator(&self, j: &Jet2, p: Point2) -> f64 {
        match self {
            Problem::Poisson2d => poisson_operator(j),
            Problem::ReactionDiffusion => rd_operator(j, p),
        }
    }

    /// Source family `g(p; a)`. The reaction-diffusion problem has a single
    /// manufactured source and ignores `a`.
    pub fn source(&self, p: Point2, a: f64) -> f64 {
        match self {
            Problem::Poisson2d => poisson_source(p, a),
            Problem::ReactionDiffusion => rd_source(p),
        }
    }

    pub fn exact(&self, p: Point2, a: f64) -> f64 {
        match self {
            Problem::Poisson2d => poisson_exact(p, a),
            Problem::ReactionDiffusion => rd_exact(p),
        }
    }

    pub fn exact_jet(&self, p: Point2, a: f64) -> Jet2 {
        match self {
            Problem::Poisson2d => poisson_exact_jet(p, a),
            Problem::ReactionDiffusion => rd_exact_jet(p),
        }
    }

    /// Dirichlet data on the boundary; rejects interior points.
    pub fn boundary_value(&self, p: Point2) -> Result<f64, PdeError> {
        if !self.domain().on_boundary(p, BOUNDARY_TOL) {
            return Err(PdeError::NotOnBoundary(p[0], p[1]));
        }
        Ok(self.boundary_value_unchecked(p))
    }

    /// Dirichlet data without the boundary membership check (for hot loops
    /// over points that are on the boundary by construction).
    pub fn boundary_value_unchecked(&self, p: Point2) -> f64 {
        match self {
            Problem::Poisson2d => 0.0,
            Problem::ReactionDiffusion => rd_exact(p),
        }
    }
}

impl std::fmt::Display for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
