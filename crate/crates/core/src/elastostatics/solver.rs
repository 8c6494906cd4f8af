use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};

use super::{assemble_operator, BcSpec, Model, SparseOperator};
use crate::error::{Error, Result};
use crate::pointcloud::NodeKind;
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearSolver {
    /// Direct factorization up to [`SolveConfig::direct_limit`] unknowns,
    /// GMRES beyond.
    Auto,
    Direct,
    Gmres,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub solver: LinearSolver,
    /// Relative residual target `|A x + c| / |c|`.
    pub rtol: f64,
    pub max_iterations: usize,
    pub restart: usize,
    pub direct_limit: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            solver: LinearSolver::Auto,
            rtol: 1e-10,
            max_iterations: 5000,
            restart: 200,
            direct_limit: 200_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StaticSolution {
    /// Displacement at every node (essential values included).
    pub u: Vec<Vec2>,
    /// Final relative residual `|A x + c| / |c|`.
    pub residual_norm: f64,
    /// Krylov iterations, or iterative-refinement steps for the direct path.
    pub iterations: usize,
    pub solver: LinearSolver,
    pub unknowns: usize,
    pub nonzeros: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_constrained(model: &Model, bc: &BcSpec) -> Result<()> {
    for k in 0..model.cloud.dim() {
        let held = model
            .cloud
            .nodes()
            .iter()
            .any(|n| n.kind == NodeKind::EssentialBc)
            || bc.constraints.iter().any(|c| c.1 == k);
        if !held {
            return Err(Error::SingularSystem(format!(
                "no essential data or constraint fixes displacement component {k}"
            )));
        }
    }
    Ok(())
}

/// Assembles and solves `A x = -c` for the bulk unknowns.
pub fn solve_static(model: &Model, bc: &BcSpec, config: &SolveConfig) -> Result<StaticSolution> {
    check_constrained(model, bc)?;
    let op = assemble_operator(model, bc)?;
    let rhs: Vec<f64> = op.offset.iter().map(|c| -c).collect();
    let use_direct = match config.solver {
        LinearSolver::Direct => true,
        LinearSolver::Gmres => false,
        LinearSolver::Auto => op.len() <= config.direct_limit,
    };
    let (x, iterations, solver) = if op.is_empty() {
        (Vec::new(), 0, LinearSolver::Direct)
    } else if use_direct {
        let (x, steps) = direct_solve(&op, &rhs, config.rtol)?;
        (x, steps, LinearSolver::Direct)
    } else {
        let (x, history) = gmres(&op, &rhs, config)?;
        (x, history.len(), LinearSolver::Gmres)
    };
    let bnorm = norm(&rhs);
    let residual_norm = if bnorm == 0.0 {
        norm(&op.apply(&x))
    } else {
        norm(&op.apply(&x)) / bnorm
    };
    if !residual_norm.is_finite() {
        return Err(Error::SingularSystem("solution is not finite".into()));
    }
    Ok(StaticSolution {
        u: op.expand(&x, bc),
        residual_norm,
        iterations,
        solver,
        unknowns: op.len(),
        nonzeros: op.nnz(),
    })
}

/// Sparse LU with a few steps of iterative refinement. The factorization
/// runs on a one-thread pool so results do not depend on the caller's pool.
fn direct_solve(op: &SparseOperator, rhs: &[f64], rtol: f64) -> Result<(Vec<f64>, usize)> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| Error::SingularSystem(format!("thread pool: {e}")))?
        .install(|| refined_lu_solve(op, rhs, rtol))
}

fn refined_lu_solve(op: &SparseOperator, rhs: &[f64], rtol: f64) -> Result<(Vec<f64>, usize)> {
    let n = op.len();
    let mut trip = Vec::with_capacity(op.nnz());
    for r in 0..n {
        for k in op.row_ptr[r]..op.row_ptr[r + 1] {
            trip.push(Triplet::new(r, op.cols[k], op.vals[k]));
        }
    }
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
        .map_err(|e| Error::SingularSystem(format!("matrix construction failed: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| Error::SingularSystem(format!("sparse LU failed: {e:?}")))?;
    let bnorm = norm(rhs);
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], 0));
    }
    let solve = |b: &[f64]| -> Vec<f64> {
        let col = Col::<f64>::from_fn(n, |i| b[i]);
        let x = lu.solve(&col);
        (0..n).map(|i| x[i]).collect()
    };
    let mut x = solve(rhs);
    let mut steps = 0;
    loop {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem(
                "factorization produced a non-finite solution".into(),
            ));
        }
        let ax = op.matvec(&x);
        let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let rel = norm(&r) / bnorm;
        if rel <= rtol {
            return Ok((x, steps));
        }
        if steps == 3 {
            return Err(Error::SingularSystem(format!(
                "relative residual {rel:.3e} after factorization and refinement"
            )));
        }
        let dx = solve(&r);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        steps += 1;
    }
}

/// Restarted GMRES with Jacobi right preconditioning for `A x = b`.
/// Returns the solution and the relative residual history.
pub fn gmres(op: &SparseOperator, b: &[f64], config: &SolveConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = op.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    let mut history = Vec::new();
    if bnorm == 0.0 {
        return Ok((x, history));
    }
    let diag: Vec<f64> = op
        .diagonal()
        .into_iter()
        .map(|d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let precond = |v: &[f64]| -> Vec<f64> { v.iter().zip(&diag).map(|(a, d)| a * d).collect() };
    let m = config.restart.max(1);
    let mut total = 0;
    while total < config.max_iterations {
        let ax = op.matvec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, a)| bi - a).collect();
        let beta = norm(&r);
        if beta / bnorm <= config.rtol {
            return Ok((x, history));
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut hess = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            let mut w = op.matvec(&precond(&basis[k]));
            for (j, v) in basis.iter().enumerate() {
                let h: f64 = w.iter().zip(v).map(|(a, b)| a * b).sum();
                hess[j][k] = h;
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= h * vi;
                }
            }
            let wn = norm(&w);
            hess[k + 1][k] = wn;
            for j in 0..k {
                let t = cs[j] * hess[j][k] + sn[j] * hess[j + 1][k];
                hess[j + 1][k] = -sn[j] * hess[j][k] + cs[j] * hess[j + 1][k];
                hess[j][k] = t;
            }
            let denom = hess[k][k].hypot(hess[k + 1][k]);
            if denom == 0.0 {
                return Err(Error::SingularSystem("GMRES breakdown".into()));
            }
            cs[k] = hess[k][k] / denom;
            sn[k] = hess[k + 1][k] / denom;
            hess[k][k] = denom;
            hess[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            total += 1;
            k_used = k + 1;
            let rel = g[k + 1].abs() / bnorm;
            history.push(rel);
            if rel <= config.rtol || wn == 0.0 || total >= config.max_iterations {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|j| hess[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / hess[i][i];
        }
        let mut z = vec![0.0; n];
        for (yi, v) in y.iter().zip(&basis) {
            for (zi, vi) in z.iter_mut().zip(v) {
                *zi += yi * vi;
            }
        }
        for (xi, d) in x.iter_mut().zip(precond(&z)) {
            *xi += d;
        }
    }
    let ax = op.matvec(&x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, a)| bi - a).collect();
    let rel = norm(&r) / bnorm;
    if rel <= config.rtol {
        return Ok((x, history));
    }
    Err(Error::NotConverged {
        iterations: total,
        residual: rel,
        history,
    })
}
