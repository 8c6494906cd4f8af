//! Sparse operator of the (affine) residual map.
//!
//! Every deformation gradient is a linear form in nodal displacements,
//! `F_K - I = sum_M u_M w_KM^T` with `w_KM = gamma^k_KM` and
//! `w_KK = -sum_M gamma^k_KM`. Stresses and divergences inherit this
//! structure, so each residual row is assembled by propagating the forms
//! through the divergence sum. BA bonds add the correction
//! `(u_J - u_I - (G_I + G_J)/2 xi) xi^T / |xi|^2`, which couples a node to
//! the kinematic families of its neighbors.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{BcSpec, Model};
use crate::error::{Error, Result};
use crate::gradops::GradientWeights;
use crate::pointcloud::{BondState, NodeKind};
use crate::{Tensor2, Vec2};

/// `residual(u) = A x + offset` restricted to the free unknowns `x`, in
/// compressed-row storage.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
    pub offset: Vec<f64>,
    /// `(node, component)` of each unknown; rows use the same numbering.
    pub dofs: Vec<(usize, usize)>,
}

impl SparseOperator {
    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `A x` without the offset.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.len())
            .into_par_iter()
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|k| self.vals[k] * x[self.cols[k]])
                    .sum()
            })
            .collect()
    }

    /// `A x + offset`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.matvec(x);
        for (v, c) in y.iter_mut().zip(&self.offset) {
            *v += c;
        }
        y
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.len())
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .find(|&k| self.cols[k] == r)
                    .map_or(0.0, |k| self.vals[k])
            })
            .collect()
    }

    /// Free-unknown vector from a full displacement field.
    pub fn restrict(&self, u: &[Vec2]) -> Vec<f64> {
        self.dofs.iter().map(|&(i, k)| u[i][k]).collect()
    }

    /// Full displacement field: known data plus the unknowns `x`.
    pub fn expand(&self, x: &[f64], bc: &BcSpec) -> Vec<Vec2> {
        let mut u = bc.known_displacement();
        for (&(i, k), v) in self.dofs.iter().zip(x) {
            u[i][k] = *v;
        }
        u
    }

    /// Residual components in unknown numbering.
    pub fn restrict_residual(&self, r: &[Vec2]) -> Vec<f64> {
        self.restrict(r)
    }
}

type Form = Vec<(usize, Vec2)>;

fn linear_form(w: &GradientWeights) -> Form {
    let mut form: Form = w.iter().map(|(j, g)| (j, *g)).collect();
    form.push((w.center, -w.gamma_sum()));
    form
}

fn add_block(acc: &mut BTreeMap<usize, Tensor2>, node: usize, block: Tensor2) {
    *acc.entry(node).or_insert_with(Tensor2::zeros) += block;
}

/// Builds `A` and `offset` with `residual(u) = A x + offset` for the frozen
/// boundary data in `bc`.
pub fn assemble_operator(model: &Model, bc: &BcSpec) -> Result<SparseOperator> {
    bc.validate(&model.cloud)?;
    let dim = model.cloud.dim();
    let n = model.cloud.len();
    let mut fixed = vec![[false; 2]; n];
    for &(node, comp, _) in &bc.constraints {
        fixed[node][comp] = true;
    }
    let mut dof_of = vec![[usize::MAX; 2]; n];
    let mut dofs = Vec::new();
    for &i in &model.bulk {
        for k in 0..dim {
            if !fixed[i][k] {
                dof_of[i][k] = dofs.len();
                dofs.push((i, k));
            }
        }
    }
    let forms: Vec<Option<Form>> = model
        .kinematic
        .iter()
        .map(|w| w.as_ref().map(linear_form))
        .collect();
    let form_of = |k: usize| -> Result<&Form> {
        forms[k].as_ref().ok_or(Error::MissingValue {
            node: k,
            what: "kinematic weights",
        })
    };
    let positions = model.positions();
    let ba = model.formulation.bond_associated;
    let material = &model.material;

    let rows: Vec<Vec<(usize, usize, f64)>> = model
        .bulk
        .par_iter()
        .map(|&i| -> Result<Vec<(usize, usize, f64)>> {
            let ws = model.stress[i]
                .as_ref()
                .expect("bulk nodes carry stress weights");
            let form_i = form_of(i)?;
            let mut acc: BTreeMap<usize, Tensor2> = BTreeMap::new();
            let gsum = ws.gamma_sum();
            for (m, w) in form_i {
                add_block(&mut acc, *m, -material.bond_matrix(w, &gsum));
            }
            let mut coeff: BTreeMap<usize, Vec2> = BTreeMap::new();
            for (bond, gamma) in model.families[i].stress.iter().zip(&ws.gamma) {
                if bond.state != BondState::KinematicUnbroken {
                    continue;
                }
                let j = bond.neighbor;
                let form_j = form_of(j)?;
                if !ba {
                    for (m, w) in form_j {
                        add_block(&mut acc, *m, material.bond_matrix(w, gamma));
                    }
                    continue;
                }
                let xi = positions[j] - positions[i];
                let e = xi / xi.norm_squared();
                coeff.clear();
                for (m, w) in form_j {
                    *coeff.entry(*m).or_insert_with(Vec2::zeros) += w - 0.5 * w.dot(&xi) * e;
                }
                for (m, w) in form_i {
                    *coeff.entry(*m).or_insert_with(Vec2::zeros) -= 0.5 * w.dot(&xi) * e;
                }
                *coeff.entry(j).or_insert_with(Vec2::zeros) += e;
                *coeff.entry(i).or_insert_with(Vec2::zeros) -= e;
                for (m, c) in &coeff {
                    add_block(&mut acc, *m, material.bond_matrix(c, gamma));
                }
            }
            let mut out = Vec::new();
            for r in 0..dim {
                let row = dof_of[i][r];
                if row == usize::MAX {
                    continue;
                }
                for (&m, block) in &acc {
                    if model.cloud.kind(m) != NodeKind::Bulk {
                        continue;
                    }
                    for k in 0..dim {
                        let col = dof_of[m][k];
                        if col != usize::MAX && block[(r, k)] != 0.0 {
                            out.push((row, col, block[(r, k)]));
                        }
                    }
                }
            }
            out.sort_unstable_by_key(|t| (t.0, t.1));
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut by_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dofs.len()];
    for row in rows {
        for (r, c, v) in row {
            by_row[r].push((c, v));
        }
    }
    let mut row_ptr = Vec::with_capacity(dofs.len() + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for entries in &mut by_row {
        entries.sort_unstable_by_key(|e| e.0);
        for &(c, v) in entries.iter() {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }

    let r0 = model.residual(&bc.known_displacement(), bc)?;
    let offset = dofs.iter().map(|&(i, k)| r0[i][k]).collect();
    Ok(SparseOperator {
        row_ptr,
        cols,
        vals,
        offset,
        dofs,
    })
}
