//! Second-order jets over 2-D points.
//!
//! A [`Jet2`] carries the value of a scalar field together with its gradient
//! and Hessian with respect to the two spatial coordinates. Propagating jets
//! through a computation yields exact first and second input-derivatives, so
//! differential operators such as the Laplacian can be evaluated without
//! finite differencing.

/// A point in the plane.
pub type Point2 = [f64; 2];

/// Value, gradient and symmetric Hessian of a scalar field at a point.
///
/// The Hessian is stored once as `[dxx, dxy, dyy]`; symmetry holds by
/// construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    /// `(d/dx, d/dy)`
    pub grad: [f64; 2],
    /// `[d2/dx2, d2/dxdy, d2/dy2]`
    pub hess: [f64; 3],
}

impl Jet2 {
    pub const ZERO: Jet2 = Jet2 {
        value: 0.0,
        grad: [0.0, 0.0],
        hess: [0.0, 0.0, 0.0],
    };

    /// A constant: zero gradient, zero Hessian.
    pub fn constant(value: f64) -> Self {
        Jet2 {
            value,
            ..Jet2::ZERO
        }
    }

    /// Seed the coordinate variable `axis` (0 = x, 1 = y) at point `p`.
    ///
    /// The result has the coordinate as its value, a unit gradient on the
    /// chosen axis and a zero Hessian.
    pub fn var(p: Point2, axis: usize) -> Self {
        assert!(axis < 2, "axis must be 0 or 1, got {axis}");
        let mut grad = [0.0, 0.0];
        grad[axis] = 1.0;
        Jet2 {
            value: p[axis],
            grad,
            hess: [0.0, 0.0, 0.0],
        }
    }

    /// Hessian entry `(i, j)` through the symmetric storage.
    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        assert!(i < 2 && j < 2);
        self.hess[i + j]
    }

    /// Trace of the Hessian.
    pub fn laplacian(&self) -> f64 {
        self.hess[0] + self.hess[2]
    }

    /// Multiply every component by a constant.
    pub fn scale(self, c: f64) -> Self {
        Jet2 {
            value: c * self.value,
            grad: [c * self.grad[0], c * self.grad[1]],
            hess: [c * self.hess[0], c * self.hess[1], c * self.hess[2]],
        }
    }

    /// `max(0, v)^k` with first and second derivatives chained through.
    ///
    /// For `v <= 0` every component is zero; the second derivative at exactly
    /// `v = 0` is taken as the continuous extension from the left. `k` must be
    /// at least 1; jets feeding a second-order operator need `k >= 2` for the
    /// Hessian to be meaningful and `k >= 3` for it to be continuous.
    pub fn relu_k(self, k: u32) -> Self {
        assert!(k >= 1, "ReLU-K requires k >= 1, got {k}");
        let (f, f1, f2) = relu_k_value_derivs(self.value, k);
        let [gx, gy] = self.grad;
        let [hxx, hxy, hyy] = self.hess;
        Jet2 {
            value: f,
            grad: [f1 * gx, f1 * gy],
            hess: [
                f2 * gx * gx + f1 * hxx,
                f2 * gx * gy + f1 * hxy,
                f2 * gy * gy + f1 * hyy,
            ],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().all(|h| h.is_finite())
    }
}

/// `(f, f', f'')` of `max(0, v)^k` at `v`.
///
/// Zero for `v <= 0`. Powers that would be negative for small `k` are never
/// formed, so `k = 1, 2` stay finite at every `v`.
pub(crate) fn relu_k_value_derivs(v: f64, k: u32) -> (f64, f64, f64) {
    if v <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    match k {
        1 => (v, 1.0, 0.0),
        2 => (v * v, 2.0 * v, 2.0),
        _ => {
            let kf = f64::from(k);
            let p = v.powi(k as i32 - 3);
            (
                p * v * v * v,
                kf * p * v * v,
                kf * (kf - 1.0) * p * v,
            )
        }
    }
}

/// `(f', f'', f''')` of `max(0, v)^k` at `v`; used by the reverse sweep over
/// jet-augmented forward passes, where the adjoint of a Hessian channel pulls
/// in one extra derivative order.
pub(crate) fn relu_k_derivs3(v: f64, k: u32) -> (f64, f64, f64) {
    if v <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    match k {
        1 => (1.0, 0.0, 0.0),
        2 => (2.0 * v, 2.0, 0.0),
        3 => (3.0 * v * v, 6.0 * v, 6.0),
        _ => {
            let kf = f64::from(k);
            let p = v.powi(k as i32 - 3);
            (
                kf * p * v * v,
                kf * (kf - 1.0) * p * v,
                kf * (kf - 1.0) * (kf - 2.0) * p,
            )
        }
    }
}

impl std::ops::Add for Jet2 {
    type Output = Jet2;
    fn add(self, rhs: Jet2) -> Jet2 {
        Jet2 {
            value: self.value + rhs.value,
            grad: [self.grad[0] + rhs.grad[0], self.grad[1] + rhs.grad[1]],
            hess: [
                self.hess[0] + rhs.hess[0],
                self.hess[1] + rhs.hess[1],
                self.hess[2] + rhs.hess[2],
            ],
        }
    }
}

impl std::ops::Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, rhs: Jet2) -> Jet2 {
        Jet2 {
            value: self.value - rhs.value,
            grad: [self.grad[0] - rhs.grad[0], self.grad[1] - rhs.grad[1]],
            hess: [
                self.hess[0] - rhs.hess[0],
                self.hess[1] - rhs.hess[1],
                self.hess[2] - rhs.hess[2],
            ],
        }
    }
}

impl std::ops::Mul for Jet2 {
    type Output = Jet2;
    /// Product rule on value and gradient; the Hessian picks up both curvature
    /// terms and the symmetrized outer product of the gradients.
    fn mul(self, rhs: Jet2) -> Jet2 {
        let (a, b) = (self, rhs);
        Jet2 {
            value: a.value * b.value,
            grad: [
                a.grad[0] * b.value + b.grad[0] * a.value,
                a.grad[1] * b.value + b.grad[1] * a.value,
            ],
            hess: [
                a.hess[0] * b.value + b.hess[0] * a.value + 2.0 * a.grad[0] * b.grad[0],
                a.hess[1] * b.value
                    + b.hess[1] * a.value
                    + a.grad[0] * b.grad[1]
                    + a.grad[1] * b.grad[0],
                a.hess[2] * b.value + b.hess[2] * a.value + 2.0 * a.grad[1] * b.grad[1],
            ],
        }
    }
}

impl std::ops::Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl std::iter::Sum for Jet2 {
    fn sum<I: Iterator<Item = Jet2>>(iter: I) -> Jet2 {
        iter.fold(Jet2::ZERO, |acc, j| acc + j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_jet_close(a: &Jet2, b: &Jet2, tol: f64) {
        assert!((a.value - b.value).abs() <= tol, "value {} vs {}", a.value, b.value);
        for i in 0..2 {
            assert!((a.grad[i] - b.grad[i]).abs() <= tol, "grad[{i}] {} vs {}", a.grad[i], b.grad[i]);
        }
        for i in 0..3 {
            assert!((a.hess[i] - b.hess[i]).abs() <= tol, "hess[{i}] {} vs {}", a.hess[i], b.hess[i]);
        }
    }

    #[test]
    fn var_seeds_axis() {
        let jx = Jet2::var([0.3, 0.7], 0);
        assert_eq!(jx.value, 0.3);
        assert_eq!(jx.grad, [1.0, 0.0]);
        assert_eq!(jx.hess, [0.0, 0.0, 0.0]);

        let jy = Jet2::var([0.3, 0.7], 1);
        assert_eq!(jy.value, 0.7);
        assert_eq!(jy.grad, [0.0, 1.0]);
        assert_eq!(jy.hess, [0.0, 0.0, 0.0]);

        let j0 = Jet2::var([0.0, 0.0], 0);
        assert_eq!(j0.value, 0.0);
        assert_eq!(j0.grad, [1.0, 0.0]);
    }

    #[test]
    #[should_panic]
    fn var_rejects_bad_axis() {
        let _ = Jet2::var([0.0, 0.0], 2);
    }

    #[test]
    fn constant_has_no_derivatives() {
        let c = Jet2::constant(4.2);
        assert_eq!(c.grad, [0.0, 0.0]);
        assert_eq!(c.hess, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn square_of_x() {
        // d2(x^2)/dx2 = 2
        let x = Jet2::var([2.0, 0.0], 0);
        let sq = x * x;
        assert_eq!(sq.value, 4.0);
        assert_eq!(sq.grad, [4.0, 0.0]);
        assert_eq!(sq.hess[0], 2.0);
        assert_eq!(sq.hess[1], 0.0);
        assert_eq!(sq.hess[2], 0.0);
    }

    #[test]
    fn mul_by_zero_constant_annihilates() {
        let x = Jet2::var([1.5, -0.5], 0);
        let z = x * Jet2::constant(0.0);
        assert_eq!(z, Jet2::ZERO);
    }

    #[test]
    fn cross_term_xy() {
        // d2(xy)/dxdy = 1
        let x = Jet2::var([1.0, 1.0], 0);
        let y = Jet2::var([1.0, 1.0], 1);
        let xy = x * y;
        assert_eq!(xy.value, 1.0);
        assert_eq!(xy.grad, [1.0, 1.0]);
        assert_eq!(xy.hess, [0.0, 1.0, 0.0]);
    }

    #[test]
    fn relu3_active() {
        let x = Jet2::var([2.0, 0.0], 0);
        let r = x.relu_k(3);
        assert_eq!(r.value, 8.0);
        assert_eq!(r.grad[0], 12.0);
        assert_eq!(r.hess[0], 12.0);
    }

    #[test]
    fn relu3_inactive_and_boundary() {
        let xm = Jet2::var([-1.0, 0.0], 0);
        assert_eq!(xm.relu_k(3), Jet2::ZERO);
        let x0 = Jet2::var([0.0, 0.0], 0);
        assert_eq!(x0.relu_k(3), Jet2::ZERO);
    }

    #[test]
    #[should_panic]
    fn relu_k_rejects_zero_power() {
        let _ = Jet2::constant(1.0).relu_k(0);
    }

    #[test]
    fn laplacian_of_radius_squared_is_four() {
        for &p in &[[0.1, 0.9], [0.5, 0.5], [-2.0, 3.0], [0.0, 0.0]] {
            let x = Jet2::var(p, 0);
            let y = Jet2::var(p, 1);
            let u = x * x + y * y;
            assert_eq!(u.laplacian(), 4.0);
        }
    }

    /// Evaluate c0 + c1 x + c2 y + c3 x^2 + c4 xy + c5 y^2 through jet
    /// arithmetic and compare against the hand-written derivatives.
    fn quadratic_jet(c: &[f64; 6], p: Point2) -> (Jet2, Jet2) {
        let x = Jet2::var(p, 0);
        let y = Jet2::var(p, 1);
        let built = Jet2::constant(c[0])
            + x.scale(c[1])
            + y.scale(c[2])
            + (x * x).scale(c[3])
            + (x * y).scale(c[4])
            + (y * y).scale(c[5]);
        let [px, py] = p;
        let analytic = Jet2 {
            value: c[0] + c[1] * px + c[2] * py + c[3] * px * px + c[4] * px * py + c[5] * py * py,
            grad: [
                c[1] + 2.0 * c[3] * px + c[4] * py,
                c[2] + c[4] * px + 2.0 * c[5] * py,
            ],
            hess: [2.0 * c[3], c[4], 2.0 * c[5]],
        };
        (built, analytic)
    }

    proptest! {
        #[test]
        fn polynomial_exactness(
            c in proptest::array::uniform6(-3.0f64..3.0),
            px in -2.0f64..2.0,
            py in -2.0f64..2.0,
        ) {
            let (built, analytic) = quadratic_jet(&c, [px, py]);
            assert_jet_close(&built, &analytic, 1e-12);
        }

        /// The stored-once Hessian stays symmetric (hess_at accessor) and
        /// finite under arbitrary composition of the supported operations.
        #[test]
        fn composition_stays_well_formed(
            ops in proptest::collection::vec(0u8..5, 1..12),
            px in -1.5f64..1.5,
            py in -1.5f64..1.5,
        ) {
            let x = Jet2::var([px, py], 0);
            let y = Jet2::var([px, py], 1);
            let mut acc = x;
            let mut other = y;
            for op in ops {
                acc = match op {
                    0 => acc + other,
                    1 => acc - other,
                    2 => acc * other,
                    3 => acc.relu_k(3),
                    _ => acc.scale(0.5),
                };
                other = other * Jet2::constant(0.9) + acc.scale(0.1);
            }
            prop_assert!(acc.is_finite());
            prop_assert_eq!(acc.hess_at(0, 1), acc.hess_at(1, 0));
        }
    }
}
