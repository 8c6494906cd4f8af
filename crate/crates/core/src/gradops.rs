//! Per-bond gradient weights `gamma_IJ` and the non-local gradient
//!
//! ```text
//! (grad_h f)_I = sum_J (f_J - f_I) gamma_IJ^T
//! ```
//!
//! Two constructions are provided. The RK route inverts the moment matrix
//! `M = sum alpha Q Q^T V` and sets `gamma = alpha (grad Q)^T M^-1 Q V`. The
//! GMLS route finds, for each direction, the minimum-Frobenius-norm tensor
//! weights `omega_IJ` that reproduce polynomial gradients exactly and sets
//! `gamma = omega xi / |xi|^2`.
//!
//! Monomials are evaluated on `xi / s` with `s` the horizon (physical
//! families) or the longest physical bond (parametric families). Both
//! routes reject stencils whose reciprocal condition number falls below
//! [`RCOND_MIN`].

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{InfluenceFunction, MonomialBasis};
use crate::pointcloud::{Family, Metric, PointCloud};
use crate::{Tensor2, Vec2};

pub const RCOND_MIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    Rk,
    Gmls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Neighborhood {
    Kinematic,
    Stress,
}

/// A node and the bonds over which its weights are built.
#[derive(Debug, Clone, Copy)]
pub struct Stencil<'a> {
    pub cloud: &'a PointCloud,
    pub center: usize,
    pub neighbors: &'a [usize],
    pub metric: Metric,
    pub delta: f64,
}

impl<'a> Stencil<'a> {
    pub fn xi(&self, k: usize) -> Vec2 {
        self.cloud.position(self.neighbors[k]) - self.cloud.position(self.center)
    }

    fn metric_dist(&self, k: usize) -> f64 {
        crate::pointcloud::family::metric_distance(
            self.cloud,
            self.center,
            self.neighbors[k],
            self.metric,
        )
    }

    /// Conditioning scale for the monomial basis.
    pub fn scale(&self) -> f64 {
        match self.metric {
            Metric::Physical => self.delta,
            Metric::Parametric => (0..self.neighbors.len())
                .map(|k| self.xi(k).norm())
                .fold(0.0, f64::max)
                .max(f64::MIN_POSITIVE),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientWeights {
    pub center: usize,
    pub neighbors: Vec<usize>,
    /// One vector per bond, parallel to `neighbors` (units 1/length).
    pub gamma: Vec<Vec2>,
    pub order: usize,
    pub route: Route,
    pub neighborhood: Neighborhood,
}

impl GradientWeights {
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Vec2)> {
        self.neighbors.iter().copied().zip(&self.gamma)
    }

    /// `sum_J gamma_IJ`.
    pub fn gamma_sum(&self) -> Vec2 {
        self.gamma.iter().sum()
    }

    pub fn gamma_of(&self, neighbor: usize) -> Option<Vec2> {
        self.neighbors
            .binary_search(&neighbor)
            .ok()
            .map(|k| self.gamma[k])
    }
}

/// Symmetric `m x m` moment matrix of the RK construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix(pub DMatrix<f64>);

fn rcond_sym(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

fn check_count(stencil: &Stencil, basis: &MonomialBasis, active: usize) -> Result<()> {
    if active < basis.len() {
        return Err(Error::Unisolvency {
            node: stencil.center,
            reason: format!("{active} usable bonds, at least {} needed", basis.len()),
        });
    }
    Ok(())
}

/// `M = sum_J alpha_IJ Q(xi_IJ) Q(xi_IJ)^T V_J`.
pub fn rk_moment_matrix(
    stencil: &Stencil,
    influence: &InfluenceFunction,
    basis: &MonomialBasis,
) -> Result<MomentMatrix> {
    let m = basis.len();
    let s = stencil.scale();
    let mut mm = DMatrix::zeros(m, m);
    let mut q = vec![0.0; m];
    for k in 0..stencil.neighbors.len() {
        let xi = stencil.xi(k);
        let alpha = influence.weight(stencil.metric_dist(k), &xi)?;
        let w = alpha * stencil.cloud.volume(stencil.neighbors[k]);
        basis.eval_into(&xi, s, &mut q);
        for a in 0..m {
            for b in a..m {
                mm[(a, b)] += w * q[a] * q[b];
            }
        }
    }
    for a in 0..m {
        for b in 0..a {
            mm[(a, b)] = mm[(b, a)];
        }
    }
    Ok(MomentMatrix(mm))
}

/// RK gradient weights `gamma_IJ[j] = alpha_IJ (grad_j Q)^T M^-1 Q_IJ V_J`.
pub fn rk_weights(
    stencil: &Stencil,
    influence: &InfluenceFunction,
    basis: &MonomialBasis,
) -> Result<Vec<Vec2>> {
    let s = stencil.scale();
    let mut alphas = Vec::with_capacity(stencil.neighbors.len());
    for k in 0..stencil.neighbors.len() {
        alphas.push(influence.weight(stencil.metric_dist(k), &stencil.xi(k))?);
    }
    check_count(stencil, basis, alphas.iter().filter(|&&a| a > 0.0).count())?;
    let MomentMatrix(mm) = rk_moment_matrix(stencil, influence, basis)?;
    let rcond = rcond_sym(&mm);
    if rcond < RCOND_MIN {
        return Err(Error::Unisolvency {
            node: stencil.center,
            reason: format!("moment matrix reciprocal condition {rcond:.3e}"),
        });
    }
    let chol = mm.cholesky().ok_or_else(|| Error::Unisolvency {
        node: stencil.center,
        reason: "moment matrix not positive definite".into(),
    })?;
    let dirs: Vec<DVector<f64>> = (0..basis.dim())
        .map(|j| chol.solve(&DVector::from_vec(basis.grad_selector(j, s).unwrap())))
        .collect();
    let mut q = vec![0.0; basis.len()];
    Ok((0..stencil.neighbors.len())
        .map(|k| {
            basis.eval_into(&stencil.xi(k), s, &mut q);
            let wv = alphas[k] * stencil.cloud.volume(stencil.neighbors[k]);
            let mut g = Vec2::zeros();
            for (j, y) in dirs.iter().enumerate() {
                g[j] = wv * y.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>();
            }
            g
        })
        .collect())
}

/// Minimum-norm GMLS solution for one stencil.
#[derive(Debug, Clone)]
pub struct GmlsSolution {
    /// Tensor weight per bond; row `j` belongs to derivative direction `j`.
    pub omega: Vec<Tensor2>,
    /// Constraint matrix `C` (`m x n_bonds*d`), column `(J, k)` at `J*d + k`.
    pub constraints: DMatrix<f64>,
    /// Right-hand side per direction (the scaled gradient selector).
    pub rhs: Vec<DVector<f64>>,
    /// Lagrange multipliers per direction.
    pub multipliers: Vec<DVector<f64>>,
}

impl GmlsSolution {
    /// Unknown vector of direction `j`, laid out like the columns of `C`.
    pub fn omega_row(&self, j: usize, dim: usize) -> DVector<f64> {
        DVector::from_iterator(
            self.omega.len() * dim,
            self.omega
                .iter()
                .flat_map(|w| (0..dim).map(move |k| w[(j, k)])),
        )
    }
}

/// Solves, per direction `j`,
///
/// ```text
/// min sum_J |omega_J[j,:]|^2  s.t.  sum_J Q_b(xi_J) omega_J[j,:] . xi_J / |xi_J|^2 = d_j Q_b(0)
/// ```
///
/// through the KKT system `[I C^T; C 0] [omega; lambda] = [0; e_j]`, factored
/// in block form with the Schur complement `S = C C^T` (Cholesky).
pub fn gmls_solve(stencil: &Stencil, basis: &MonomialBasis) -> Result<GmlsSolution> {
    let d = basis.dim();
    let m = basis.len();
    let nb = stencil.neighbors.len();
    check_count(stencil, basis, nb)?;
    let s = stencil.scale();
    let mut c = DMatrix::zeros(m, nb * d);
    let mut q = vec![0.0; m];
    for k in 0..nb {
        let xi = stencil.xi(k);
        let r2 = xi.norm_squared();
        if r2 == 0.0 {
            return Err(Error::invalid(format!(
                "coincident nodes in family of {}",
                stencil.center
            )));
        }
        basis.eval_into(&xi, s, &mut q);
        for kk in 0..d {
            let g = xi[kk] / r2;
            for b in 0..m {
                c[(b, k * d + kk)] = q[b] * g;
            }
        }
    }
    let schur = &c * c.transpose();
    let rcond = rcond_sym(&schur);
    if rcond < RCOND_MIN {
        return Err(Error::Unisolvency {
            node: stencil.center,
            reason: format!("GMLS constraint system reciprocal condition {rcond:.3e}"),
        });
    }
    let chol = schur.cholesky().ok_or_else(|| Error::Unisolvency {
        node: stencil.center,
        reason: "GMLS constraints are rank deficient".into(),
    })?;
    let mut omega = vec![Tensor2::zeros(); nb];
    let mut rhs = Vec::with_capacity(d);
    let mut multipliers = Vec::with_capacity(d);
    for j in 0..d {
        let e = DVector::from_vec(basis.grad_selector(j, s).unwrap());
        // second block row: C omega = e with omega = -C^T lambda
        let lambda = -chol.solve(&e);
        let w = -(c.transpose() * &lambda);
        for k in 0..nb {
            for kk in 0..d {
                omega[k][(j, kk)] = w[k * d + kk];
            }
        }
        rhs.push(e);
        multipliers.push(lambda);
    }
    Ok(GmlsSolution {
        omega,
        constraints: c,
        rhs,
        multipliers,
    })
}

/// GMLS gradient weights `gamma_IJ = omega_IJ xi_IJ / |xi_IJ|^2`.
pub fn gmls_weights(stencil: &Stencil, basis: &MonomialBasis) -> Result<Vec<Vec2>> {
    let sol = gmls_solve(stencil, basis)?;
    Ok((0..stencil.neighbors.len())
        .map(|k| {
            let xi = stencil.xi(k);
            sol.omega[k] * xi / xi.norm_squared()
        })
        .collect())
}

/// Builds weights for node `center` over `neighbors` by the given route.
pub fn build_weights(
    cloud: &PointCloud,
    center: usize,
    neighbors: &[usize],
    family: &Family,
    route: Route,
    order: usize,
    neighborhood: Neighborhood,
) -> Result<GradientWeights> {
    let basis = MonomialBasis::new(order, cloud.dim())?;
    let stencil = Stencil {
        cloud,
        center,
        neighbors,
        metric: family.metric,
        delta: family.delta,
    };
    let gamma = match route {
        Route::Rk => rk_weights(
            &stencil,
            &InfluenceFunction::CubicBSpline {
                delta: family.delta,
            },
            &basis,
        )?,
        Route::Gmls => gmls_weights(&stencil, &basis)?,
    };
    Ok(GradientWeights {
        center,
        neighbors: neighbors.to_vec(),
        gamma,
        order,
        route,
        neighborhood,
    })
}

/// Weights for the requested nodes and neighborhood, built in parallel.
pub fn build_weight_table(
    cloud: &PointCloud,
    families: &[Family],
    nodes: &[usize],
    route: Route,
    order: usize,
    neighborhood: Neighborhood,
) -> Result<Vec<GradientWeights>> {
    nodes
        .par_iter()
        .map(|&i| {
            let f = &families[i];
            match neighborhood {
                Neighborhood::Kinematic => {
                    build_weights(cloud, i, &f.kinematic, f, route, order, neighborhood)
                }
                Neighborhood::Stress => {
                    let nb: Vec<usize> = f.stress_neighbors().collect();
                    build_weights(cloud, i, &nb, f, route, order, neighborhood)
                }
            }
        })
        .collect()
}

fn value<T: Copy>(values: &[T], node: usize) -> Result<T> {
    values.get(node).copied().ok_or(Error::MissingValue {
        node,
        what: "field value",
    })
}

/// `sum_J (f_J - f_I) gamma_IJ` for a scalar field indexed by node.
pub fn gradient_scalar(values: &[f64], w: &GradientWeights) -> Result<Vec2> {
    let fi = value(values, w.center)?;
    let mut g = Vec2::zeros();
    for (j, gamma) in w.iter() {
        g += (value(values, j)? - fi) * gamma;
    }
    Ok(g)
}

/// `sum_J (f_J - f_I) gamma_IJ^T` for a vector field indexed by node.
pub fn gradient_vector(values: &[Vec2], w: &GradientWeights) -> Result<Tensor2> {
    let fi = value(values, w.center)?;
    let mut g = Tensor2::zeros();
    for (j, gamma) in w.iter() {
        g += (value(values, j)? - fi) * gamma.transpose();
    }
    Ok(g)
}

/// `sum_J (P_J - P_I) gamma_IJ` for a tensor field indexed by node.
pub fn divergence_tensor(values: &[Tensor2], w: &GradientWeights) -> Result<Vec2> {
    let pi = value(values, w.center)?;
    let mut g = Vec2::zeros();
    for (j, gamma) in w.iter() {
        g += (value(values, j)? - pi) * gamma;
    }
    Ok(g)
}

/// Worst error of the non-local gradient over the monomials
/// `((X - X_I)/s)^beta`, `1 <= |beta| <= order`, where `s` is the longest
/// bond. Errors are measured against the exact gradient at `X_I` and scaled
/// by `s`, i.e. relative to the gradient of the unit linear probe.
pub fn verify_reproduction(w: &GradientWeights, cloud: &PointCloud, order: usize) -> Result<f64> {
    let basis = MonomialBasis::new(order, cloud.dim())?;
    let xi_of = |j: usize| cloud.position(j) - cloud.position(w.center);
    let s = w
        .neighbors
        .iter()
        .map(|&j| xi_of(j).norm())
        .fold(0.0, f64::max);
    if s == 0.0 {
        return Ok(0.0);
    }
    let mut worst = 0.0f64;
    for (b, e) in basis.exponents().iter().enumerate() {
        let mut approx = Vec2::zeros();
        for (j, gamma) in w.iter() {
            let p = basis.monomials(&xi_of(j), s)[b];
            approx += p * gamma;
        }
        let mut exact = Vec2::zeros();
        if e[0] + e[1] == 1 {
            exact[if e[0] == 1 { 0 } else { 1 }] = 1.0 / s;
        }
        worst = worst.max((approx - exact).norm() * s);
    }
    Ok(worst)
}
