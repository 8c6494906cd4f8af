//! Correspondence kinematics, the linear elastic law, and the base and
//! bond-associated stress-divergence operators.
//!
//! Force evaluation runs in two passes: [`KinematicState::new`] computes
//! `F_I` at every node that has kinematic weights, then the divergence
//! operators read neighbor gradients from that frozen state.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gradops::GradientWeights;
use crate::pointcloud::{BondState, StressBond};
use crate::{Tensor2, Vec2};

/// Linear elastic material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Material {
    /// Plane strain with Lamé parameters.
    PlaneStrain { lambda: f64, mu: f64 },
    /// 1D bar: `P = E (F - 1)`, stored in the `(0, 0)` component.
    Uniaxial { youngs: f64 },
}

impl Material {
    pub fn plane_strain(youngs: f64, poisson: f64) -> Result<Self> {
        if !(youngs > 0.0) || !youngs.is_finite() {
            return Err(Error::invalid(format!(
                "Young's modulus must be positive, got {youngs}"
            )));
        }
        if !(poisson > -1.0 && poisson < 0.5) {
            return Err(Error::invalid(format!(
                "Poisson's ratio must lie in (-1, 0.5), got {poisson}"
            )));
        }
        Ok(Material::PlaneStrain {
            lambda: youngs * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson)),
            mu: youngs / (2.0 * (1.0 + poisson)),
        })
    }

    pub fn uniaxial(youngs: f64) -> Result<Self> {
        if !(youngs > 0.0) || !youngs.is_finite() {
            return Err(Error::invalid(format!(
                "Young's modulus must be positive, got {youngs}"
            )));
        }
        Ok(Material::Uniaxial { youngs })
    }

    /// `lambda + 2 mu` (or `E` in 1D); sets the scale of residuals.
    pub fn p_wave_modulus(&self) -> f64 {
        match *self {
            Material::PlaneStrain { lambda, mu } => lambda + 2.0 * mu,
            Material::Uniaxial { youngs } => youngs,
        }
    }

    /// Matrix `B` with `P(I + u c^T) g = B u`: the action of the (linear)
    /// stress map on a rank-one displacement gradient, contracted with `g`.
    pub fn bond_matrix(&self, c: &Vec2, g: &Vec2) -> Tensor2 {
        match *self {
            Material::PlaneStrain { lambda, mu } => {
                lambda * g * c.transpose()
                    + mu * (c.dot(g) * Tensor2::identity() + c * g.transpose())
            }
            Material::Uniaxial { youngs } => {
                let mut b = Tensor2::zeros();
                b[(0, 0)] = youngs * c.x * g.x;
                b
            }
        }
    }

    pub fn stress(&self, f: &Tensor2) -> Tensor2 {
        match *self {
            Material::PlaneStrain { lambda, mu } => linear_elastic_stress(f, lambda, mu),
            Material::Uniaxial { youngs } => {
                let mut p = Tensor2::zeros();
                p[(0, 0)] = stress_1d(f[(0, 0)], youngs);
                p
            }
        }
    }
}

/// `P = lambda tr(eps) I + 2 mu eps` with `eps = (F + F^T)/2 - I`.
pub fn linear_elastic_stress(f: &Tensor2, lambda: f64, mu: f64) -> Tensor2 {
    let eps = 0.5 * (f + f.transpose()) - Tensor2::identity();
    lambda * eps.trace() * Tensor2::identity() + 2.0 * mu * eps
}

pub fn stress_1d(f: f64, youngs: f64) -> f64 {
    youngs * (f - 1.0)
}

/// `F_I = I + sum_{J in H^k} (u_J - u_I) gamma_IJ^T`.
pub fn deformation_gradient(u: &[Vec2], wk: &GradientWeights) -> Result<Tensor2> {
    Ok(Tensor2::identity() + crate::gradops::gradient_vector(u, wk)?)
}

/// Bond-level gradient with the non-homogeneous correction:
///
/// ```text
/// F_JI = F_J + [x_J - x_I - (F_I + F_J)/2 (X_J - X_I)] (X_J - X_I)^T / |X_J - X_I|^2
/// ```
///
/// `big_x_*` are reference positions and `x_*` current positions.
pub fn bond_deformation_gradient(
    f_i: &Tensor2,
    f_j: &Tensor2,
    big_x_i: &Vec2,
    big_x_j: &Vec2,
    x_i: &Vec2,
    x_j: &Vec2,
) -> Result<Tensor2> {
    let xi = big_x_j - big_x_i;
    let r2 = xi.norm_squared();
    if r2 == 0.0 {
        return Err(Error::invalid(
            "bond between coincident reference positions",
        ));
    }
    let f_bar = 0.5 * (f_i + f_j);
    Ok(f_j + (x_j - x_i - f_bar * xi) * xi.transpose() / r2)
}

/// Displacements and the deformation gradients derived from them.
#[derive(Debug, Clone)]
pub struct KinematicState {
    pub u: Vec<Vec2>,
    /// `None` for nodes without kinematic weights (natural-bc, free surface,
    /// collar nodes outside every bulk stress family).
    pub f: Vec<Option<Tensor2>>,
}

impl KinematicState {
    /// `kinematic[I]` holds the H^k weights of node `I` when it needs `F_I`.
    pub fn new(u: Vec<Vec2>, kinematic: &[Option<GradientWeights>]) -> Result<Self> {
        let f = kinematic
            .par_iter()
            .map(|w| w.as_ref().map(|w| deformation_gradient(&u, w)).transpose())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { u, f })
    }

    pub fn gradient(&self, node: usize) -> Result<Tensor2> {
        self.f
            .get(node)
            .copied()
            .flatten()
            .ok_or(Error::MissingValue {
                node,
                what: "deformation gradient",
            })
    }
}

fn prescribed_at(prescribed: &[Option<Tensor2>], node: usize) -> Result<Tensor2> {
    prescribed
        .get(node)
        .copied()
        .flatten()
        .ok_or(Error::MissingValue {
            node,
            what: "prescribed stress",
        })
}

fn check_alignment(ws: &GradientWeights, bonds: &[StressBond]) {
    debug_assert!(
        ws.neighbors.len() == bonds.len()
            && ws
                .neighbors
                .iter()
                .zip(bonds)
                .all(|(a, b)| *a == b.neighbor),
        "stress weights and bond states disagree at node {}",
        ws.center
    );
}

/// `sum_{J in H^s} (P_J - P_I) gamma_IJ` with `P_J` read from `node_stress`
/// (computed stress at kinematic nodes, the prescribed stress at natural-bc
/// nodes) and zero across broken bonds.
pub fn stress_divergence_base(
    node_stress: &[Option<Tensor2>],
    ws: &GradientWeights,
    bonds: &[StressBond],
) -> Result<Vec2> {
    check_alignment(ws, bonds);
    let p_i = node_stress
        .get(ws.center)
        .copied()
        .flatten()
        .ok_or(Error::MissingValue {
            node: ws.center,
            what: "nodal stress",
        })?;
    let mut div = Vec2::zeros();
    for (bond, gamma) in bonds.iter().zip(&ws.gamma) {
        let p_j =
            match bond.state {
                BondState::Broken => Tensor2::zeros(),
                _ => node_stress.get(bond.neighbor).copied().flatten().ok_or(
                    Error::MissingValue {
                        node: bond.neighbor,
                        what: "nodal stress",
                    },
                )?,
            };
        div += (p_j - p_i) * gamma;
    }
    Ok(div)
}

/// Bond-associated divergence `sum_{J in H^s} (P_JI - P_I) gamma_IJ`:
/// `P(F_JI)` across unbroken kinematic bonds, the prescribed `P_J` at
/// natural-bc (and free-surface) neighbors, zero across broken bonds.
///
/// With `correction = false` the bond gradient is `F_J` and the result
/// coincides with [`stress_divergence_base`].
pub fn stress_divergence_ba(
    positions: &[Vec2],
    state: &KinematicState,
    ws: &GradientWeights,
    bonds: &[StressBond],
    material: &Material,
    prescribed: &[Option<Tensor2>],
    correction: bool,
) -> Result<Vec2> {
    check_alignment(ws, bonds);
    let i = ws.center;
    let f_i = state.gradient(i)?;
    let p_i = material.stress(&f_i);
    let mut div = Vec2::zeros();
    for (bond, gamma) in bonds.iter().zip(&ws.gamma) {
        let j = bond.neighbor;
        let p_ji = match bond.state {
            BondState::KinematicUnbroken => {
                let f_j = state.gradient(j)?;
                let f_ji = if correction {
                    bond_deformation_gradient(
                        &f_i,
                        &f_j,
                        &positions[i],
                        &positions[j],
                        &(positions[i] + state.u[i]),
                        &(positions[j] + state.u[j]),
                    )?
                } else {
                    f_j
                };
                material.stress(&f_ji)
            }
            BondState::NaturalBc => prescribed_at(prescribed, j)?,
            BondState::Broken => Tensor2::zeros(),
        };
        div += (p_ji - p_i) * gamma;
    }
    Ok(div)
}
