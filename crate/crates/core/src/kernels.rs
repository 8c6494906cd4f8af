//! Influence functions and the monomial basis shared by the RK and GMLS
//! weight constructions.
//!
//! Monomials are ordered graded-lexicographically: by total degree first,
//! then by descending power of the first coordinate. In 2D with `n = 3`:
//!
//! ```text
//! x, y, x^2, xy, y^2, x^3, x^2 y, x y^2, y^3
//! ```
//!
//! All evaluations take a conditioning scale `s`; the basis is evaluated on
//! `xi / s` and the gradient selector carries the compensating `1 / s`.

use crate::error::{Error, Result};
use crate::Vec2;

/// Weighting kernel applied to a bond.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InfluenceFunction {
    /// Cubic B-spline of `|xi| / delta`, used by the RK route.
    CubicBSpline { delta: f64 },
    /// `1 / |xi|^2` on the physical separation, used by the GMLS route.
    InverseSquare,
}

impl InfluenceFunction {
    /// Weight of a bond. `metric_dist` is the bond length in the metric the
    /// family was built in; `xi` is always the physical separation.
    pub fn weight(&self, metric_dist: f64, xi: &Vec2) -> Result<f64> {
        match *self {
            InfluenceFunction::CubicBSpline { delta } => Ok(cubic_bspline(metric_dist / delta)),
            InfluenceFunction::InverseSquare => inverse_square(xi),
        }
    }
}

/// Piecewise cubic B-spline on the normalized bond length.
///
/// The value at `xi_hat = 0` is taken as the limit `2/3`; families never
/// contain zero-length bonds.
pub fn cubic_bspline(xi_hat: f64) -> f64 {
    debug_assert!(xi_hat >= 0.0);
    if xi_hat <= 0.5 {
        2.0 / 3.0 - 4.0 * xi_hat * xi_hat + 4.0 * xi_hat.powi(3)
    } else if xi_hat <= 1.0 {
        4.0 / 3.0 * (1.0 - xi_hat).powi(3)
    } else {
        0.0
    }
}

pub fn inverse_square(xi: &Vec2) -> Result<f64> {
    let r2 = xi.norm_squared();
    if r2 == 0.0 {
        return Err(Error::invalid(
            "inverse-square influence evaluated at zero separation",
        ));
    }
    Ok(1.0 / r2)
}

/// Polynomial basis `{xi^beta : 1 <= |beta| <= n}` in `d` dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    order: usize,
    dim: usize,
    exponents: Vec<[u8; 2]>,
}

impl MonomialBasis {
    pub fn new(order: usize, dim: usize) -> Result<Self> {
        if !(1..=3).contains(&order) {
            return Err(Error::invalid(format!(
                "polynomial order {order} not in 1..=3"
            )));
        }
        if !(1..=2).contains(&dim) {
            return Err(Error::invalid(format!("dimension {dim} not in 1..=2")));
        }
        let mut exponents = Vec::new();
        for degree in 1..=order as u8 {
            if dim == 1 {
                exponents.push([degree, 0]);
            } else {
                for px in (0..=degree).rev() {
                    exponents.push([px, degree - px]);
                }
            }
        }
        debug_assert_eq!(exponents.len(), unisolvency_min_bonds(order, dim));
        Ok(Self {
            order,
            dim,
            exponents,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of basis entries (the constant is excluded).
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Exponent pairs in basis order.
    pub fn exponents(&self) -> &[[u8; 2]] {
        &self.exponents
    }

    /// Writes `Q(xi / scale)` into `out`.
    pub fn eval_into(&self, xi: &Vec2, scale: f64, out: &mut [f64]) {
        let x = xi.x / scale;
        let y = xi.y / scale;
        let xp = [1.0, x, x * x, x * x * x];
        let yp = [1.0, y, y * y, y * y * y];
        for (o, e) in out.iter_mut().zip(&self.exponents) {
            *o = xp[e[0] as usize] * yp[e[1] as usize];
        }
    }

    /// `Q(xi / scale)` as a fresh vector.
    pub fn monomials(&self, xi: &Vec2, scale: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(xi, scale, &mut out);
        out
    }

    /// Selector picking the derivative in direction `j` (0-based) at the
    /// origin: a single `1 / scale` at the position of the linear monomial.
    pub fn grad_selector(&self, j: usize, scale: f64) -> Result<Vec<f64>> {
        if j >= self.dim {
            return Err(Error::invalid(format!(
                "derivative direction {} out of range for dimension {}",
                j + 1,
                self.dim
            )));
        }
        let mut sel = vec![0.0; self.len()];
        // linear monomials come first: x then y
        sel[j] = 1.0 / scale;
        Ok(sel)
    }
}

/// Minimum bond count for polynomial unisolvency: `(n+d)!/(n! d!) - 1`.
pub fn unisolvency_min_bonds(order: usize, dim: usize) -> usize {
    // binomial(n + d, d) computed incrementally to stay exact
    let mut c = 1usize;
    for i in 1..=dim {
        c = c * (order + i) / i;
    }
    c - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bspline_values() {
        assert_abs_diff_eq!(cubic_bspline(1.0), 0.0, epsilon = 1e-15);
        assert_eq!(cubic_bspline(1.2), 0.0);
        assert_abs_diff_eq!(cubic_bspline(0.0), 2.0 / 3.0);
        // both printed branches give 1/6 at the breakpoint
        let lower = 2.0 / 3.0 - 4.0 * 0.25 + 4.0 * 0.125;
        let upper = 4.0 / 3.0 - 2.0 + 1.0 - 4.0 / 3.0 * 0.125;
        assert_abs_diff_eq!(lower, 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(upper, 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cubic_bspline(0.5), 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn bspline_continuous_and_nonnegative() {
        let eps = 1e-9;
        for b in [0.5, 1.0] {
            let jump = (cubic_bspline(b + eps) - cubic_bspline(b)).abs();
            assert!(jump < 1e-8, "jump {jump} at {b}");
        }
        assert!((cubic_bspline(1.0) - cubic_bspline(1.0 + 1e-300)).abs() <= 1e-14);
        for i in 0..=15000 {
            assert!(cubic_bspline(i as f64 * 1e-4) >= 0.0);
        }
    }

    #[test]
    fn inverse_square_values() {
        assert_eq!(inverse_square(&Vec2::new(1.0, 0.0)).unwrap(), 1.0);
        assert_eq!(inverse_square(&Vec2::new(0.0, 2.0)).unwrap(), 0.25);
        assert!(inverse_square(&Vec2::zeros()).is_err());
    }

    #[test]
    fn basis_sizes_and_order() {
        assert_eq!(unisolvency_min_bonds(2, 2), 5);
        assert_eq!(unisolvency_min_bonds(1, 1), 1);
        assert_eq!(unisolvency_min_bonds(3, 2), 9);
        assert_eq!(unisolvency_min_bonds(2, 3), 9);
        let b = MonomialBasis::new(3, 2).unwrap();
        assert_eq!(
            b.exponents(),
            &[
                [1, 0],
                [0, 1],
                [2, 0],
                [1, 1],
                [0, 2],
                [3, 0],
                [2, 1],
                [1, 2],
                [0, 3]
            ]
        );
        assert!(MonomialBasis::new(4, 2).is_err());
    }

    #[test]
    fn monomial_values() {
        let b = MonomialBasis::new(1, 2).unwrap();
        assert_eq!(b.monomials(&Vec2::new(0.3, -0.7), 1.0), vec![0.3, -0.7]);
        let b = MonomialBasis::new(3, 1).unwrap();
        assert_eq!(b.monomials(&Vec2::new(2.0, 0.0), 1.0), vec![2.0, 4.0, 8.0]);
        assert_eq!(b.monomials(&Vec2::new(2.0, 0.0), 2.0), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn selector_entries() {
        let b = MonomialBasis::new(2, 2).unwrap();
        assert_eq!(
            b.grad_selector(0, 1.0).unwrap(),
            vec![1.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(
            b.grad_selector(1, 4.0).unwrap(),
            vec![0.0, 0.25, 0.0, 0.0, 0.0]
        );
        let b1 = MonomialBasis::new(1, 1).unwrap();
        assert_eq!(b1.grad_selector(0, 1.0).unwrap(), vec![1.0]);
        assert!(b.grad_selector(2, 1.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn selector_picks_scaled_linear_monomial(
            x in -5.0f64..5.0, y in -5.0f64..5.0, s in 0.1f64..10.0, n in 1usize..=3,
        ) {
            let b = MonomialBasis::new(n, 2).unwrap();
            let xi = Vec2::new(x, y);
            let q = b.monomials(&xi, s);
            for j in 0..2 {
                let sel = b.grad_selector(j, s).unwrap();
                let dot: f64 = sel.iter().zip(&q).map(|(a, b)| a * b).sum();
                proptest::prop_assert!((dot - xi[j] / (s * s)).abs() <= 1e-12 * (1.0 + xi[j].abs()));
            }
        }
    }
}
