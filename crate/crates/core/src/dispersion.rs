//! One-dimensional plane-wave dispersion of the non-local operators.
//!
//! Displacements `u_J = e^{i k (X_J - X_I)}` are prescribed on a bar around
//! a center node `I`, the discrete equation of motion of `I` is evaluated
//! with complex kinematics, and `omega^2 = -div(P) / rho` follows with unit
//! amplitude.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::elastostatics::Scheme;
use crate::error::{Error, Result};
use crate::gradops::{build_weights, GradientWeights, Neighborhood};
use crate::pointcloud::{build_families, perturb_grid, Metric, Node, NodeKind, PointCloud};
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveGrid {
    Uniform,
    /// Normal perturbation with standard deviation 15% of the spacing.
    Perturbed {
        seed: u64,
    },
}

impl WaveGrid {
    pub fn name(&self) -> &'static str {
        match self {
            WaveGrid::Uniform => "uniform",
            WaveGrid::Perturbed { .. } => "perturbed",
        }
    }
}

/// Perturbation of the perturbed bar as a fraction of the spacing.
pub const PERTURBATION: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveConfig {
    pub youngs: f64,
    pub density: f64,
    pub h: f64,
    pub delta: f64,
    pub order: usize,
    pub grid: WaveGrid,
    pub scheme: Scheme,
}

impl WaveConfig {
    /// `E = rho = h = 1`, quadratic order, `delta = delta_over_h * h`.
    pub fn new(scheme: Scheme, delta_over_h: f64, grid: WaveGrid) -> Self {
        Self {
            youngs: 1.0,
            density: 1.0,
            h: 1.0,
            delta: delta_over_h,
            order: 2,
            grid,
            scheme,
        }
    }

    pub fn wave_speed(&self) -> f64 {
        (self.youngs / self.density).sqrt()
    }

    pub fn delta_over_h(&self) -> f64 {
        self.delta / self.h
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("E", self.youngs),
            ("rho", self.density),
            ("h", self.h),
            ("delta", self.delta),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(1..=3).contains(&self.order) {
            return Err(Error::invalid(format!("order {} not in 1..=3", self.order)));
        }
        if self.delta <= self.order as f64 * self.h {
            return Err(Error::invalid(format!(
                "horizon {} must exceed order times spacing {}",
                self.delta,
                self.order as f64 * self.h
            )));
        }
        Ok(())
    }
}

/// The discretized bar with the weights every needed node carries.
#[derive(Debug, Clone)]
pub struct Bar {
    /// Nodes `X_j = j h` for `|j| <= 2 delta / h`, shifted after any
    /// perturbation so the center node sits at the origin.
    pub cloud: PointCloud,
    pub center: usize,
    /// Weights over the full family of the center and each of its
    /// neighbors; `None` elsewhere.
    pub weights: Vec<Option<GradientWeights>>,
}

impl Bar {
    pub fn center_weights(&self) -> &GradientWeights {
        self.weights[self.center]
            .as_ref()
            .expect("center weights are built")
    }

    fn weights_of(&self, node: usize) -> &GradientWeights {
        self.weights[node]
            .as_ref()
            .expect("neighbor weights are built")
    }
}

pub fn setup_bar(config: &WaveConfig) -> Result<Bar> {
    config.validate()?;
    let half = (2.0 * config.delta_over_h() + 1e-9).floor() as i64;
    let nodes = (-half..=half)
        .enumerate()
        .map(|(id, j)| Node {
            id,
            x: Vec2::new(j as f64 * config.h, 0.0),
            volume: config.h,
            kind: NodeKind::Bulk,
            param: None,
        })
        .collect();
    let mut cloud = PointCloud::new(nodes, 1)?;
    if let WaveGrid::Perturbed { seed } = config.grid {
        cloud = perturb_grid(&cloud, PERTURBATION, seed)?;
    }
    let center = cloud
        .nearest(&Vec2::zeros(), |_| true)
        .expect("bar is not empty");
    let shift = cloud.position(center);
    let nodes = cloud
        .nodes()
        .iter()
        .map(|n| Node {
            x: n.x - shift,
            ..n.clone()
        })
        .collect();
    let cloud = PointCloud::new(nodes, 1)?;
    let families = build_families(&cloud, config.delta, Metric::Physical)?;
    let mut needed = families[center].kinematic.clone();
    needed.push(center);
    let mut weights = vec![None; cloud.len()];
    for i in needed {
        let f = &families[i];
        weights[i] = Some(build_weights(
            &cloud,
            i,
            &f.kinematic,
            f,
            config.scheme.route(),
            config.order,
            Neighborhood::Kinematic,
        )?);
    }
    Ok(Bar {
        cloud,
        center,
        weights,
    })
}

/// Square root with `Re >= 0`, and `Im >= 0` on the imaginary axis.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    let w = z.sqrt();
    if w.re < 0.0 || (w.re == 0.0 && w.im < 0.0) {
        -w
    } else {
        w
    }
}

/// `omega^2` of the center node for wavenumber `k`.
pub fn omega_squared(k: f64, config: &WaveConfig, bar: &Bar) -> Complex64 {
    let u: Vec<Complex64> = bar
        .cloud
        .nodes()
        .iter()
        .map(|n| Complex64::from_polar(1.0, k * n.x.x))
        .collect();
    // displacement gradient F - 1 from the node's own weights
    let grad = |j: usize| -> Complex64 {
        bar.weights_of(j)
            .iter()
            .map(|(m, g)| (u[m] - u[j]) * g.x)
            .sum()
    };
    let e = config.youngs;
    let i = bar.center;
    let wi = bar.center_weights();
    let gi = grad(i);
    let pi = e * gi;
    let xi_pos = bar.cloud.position(i).x;
    let div: Complex64 = wi
        .iter()
        .map(|(j, g)| {
            let gj = grad(j);
            let pj = if config.scheme.is_bond_associated() {
                let xi = bar.cloud.position(j).x - xi_pos;
                e * (0.5 * (gj - gi) + (u[j] - u[i]) / xi)
            } else {
                e * gj
            };
            (pj - pi) * g.x
        })
        .sum();
    -div / (config.density * u[i])
}

pub fn angular_frequency(k: f64, config: &WaveConfig, bar: &Bar) -> Complex64 {
    principal_sqrt(omega_squared(k, config, bar))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub k: f64,
    pub omega: Complex64,
}

/// Point in normalized units: `k h / 2 pi` and `omega h / (2 pi c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedPoint {
    pub k: f64,
    pub re_omega: f64,
    pub im_omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionCurve {
    pub config: WaveConfig,
    pub points: Vec<DispersionPoint>,
}

impl DispersionCurve {
    pub fn normalized(&self) -> Vec<NormalizedPoint> {
        let h = self.config.h;
        let w = h / (TAU * self.config.wave_speed());
        self.points
            .iter()
            .map(|p| NormalizedPoint {
                k: p.k * h / TAU,
                re_omega: p.omega.re * w,
                im_omega: p.omega.im * w,
            })
            .collect()
    }
}

/// Default number of sweep points.
pub const SWEEP_POINTS: usize = 200;

/// Wavenumbers with `k h / 2 pi = i / points` for `i = 1..=points`.
pub fn default_k_grid(h: f64, points: usize) -> Vec<f64> {
    (1..=points)
        .map(|i| TAU * i as f64 / (points as f64 * h))
        .collect()
}

/// Wavenumber for a normalized value `k h / 2 pi`.
pub fn wavenumber(k_norm: f64, h: f64) -> f64 {
    TAU * k_norm / h
}

pub fn sweep(config: &WaveConfig, ks: &[f64]) -> Result<DispersionCurve> {
    if ks.iter().any(|k| !(*k > 0.0) || !k.is_finite()) {
        return Err(Error::invalid("wavenumbers must be positive and finite"));
    }
    if ks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("wavenumbers must be strictly increasing"));
    }
    let bar = setup_bar(config)?;
    let points = ks
        .par_iter()
        .map(|&k| DispersionPoint {
            k,
            omega: angular_frequency(k, config, &bar),
        })
        .collect();
    Ok(DispersionCurve {
        config: *config,
        points,
    })
}

/// Normalized frequency below which a sweep point counts as a zero mode.
pub const ZERO_FREQUENCY_TOLERANCE: f64 = 1e-6;

/// Number of points whose normalized `|omega| h / (2 pi c)` is below
/// `tolerance`.
pub fn count_zero_frequencies(curve: &DispersionCurve, tolerance: f64) -> usize {
    curve
        .normalized()
        .iter()
        .filter(|p| p.k > 0.0 && p.re_omega.hypot(p.im_omega) < tolerance)
        .count()
}

/// Normalized frequency of the local model, `omega = c k`.
pub fn local_curve(config: &WaveConfig, ks: &[f64]) -> DispersionCurve {
    DispersionCurve {
        config: *config,
        points: ks
            .iter()
            .map(|&k| DispersionPoint {
                k,
                omega: Complex64::new(config.wave_speed() * k, 0.0),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn neighbor_counts() {
        for (f, n, len) in [(3.0, 6, 13), (4.0, 8, 17)] {
            let bar = setup_bar(&WaveConfig::new(Scheme::Rk, f, WaveGrid::Uniform)).unwrap();
            assert_eq!(bar.center_weights().neighbors.len(), n);
            assert_eq!(bar.cloud.len(), len);
            assert_eq!(bar.cloud.position(bar.center).x, 0.0);
        }
    }

    #[test]
    fn perturbed_bar_is_deterministic() {
        let c = WaveConfig::new(Scheme::BaGmls, 3.0, WaveGrid::Perturbed { seed: 7 });
        let a = setup_bar(&c).unwrap();
        let b = setup_bar(&c).unwrap();
        assert_eq!(a.cloud, b.cloud);
        let other = setup_bar(&WaveConfig::new(
            Scheme::BaGmls,
            3.0,
            WaveGrid::Perturbed { seed: 8 },
        ))
        .unwrap();
        assert_ne!(a.cloud, other.cloud);
        assert_eq!(a.cloud.position(a.center).x, 0.0);
    }

    #[test]
    fn approaches_the_local_limit_quadratically() {
        for scheme in Scheme::ALL {
            for grid in [WaveGrid::Uniform, WaveGrid::Perturbed { seed: 3 }] {
                let c = WaveConfig::new(scheme, 3.0, grid);
                let bar = setup_bar(&c).unwrap();
                let err = |kn: f64| {
                    let k = wavenumber(kn, 1.0);
                    (angular_frequency(k, &c, &bar).re / (c.wave_speed() * k) - 1.0).abs()
                };
                let (a, b) = (err(2e-3), err(1e-3));
                assert!(b < 1e-4, "{scheme} {grid:?}: {b}");
                assert!(
                    (a / b - 4.0).abs() < 0.05,
                    "{scheme} {grid:?}: ratio {}",
                    a / b
                );
            }
        }
    }

    /// Uniform bar, unit spacing: cubic B-spline weights of the six
    /// neighbors at `xi = +-1, +-2, +-3` with `delta = 3`.
    fn bspline_moments() -> (Vec<(f64, f64)>, f64) {
        let alpha = |m: f64| crate::kernels::cubic_bspline(m / 3.0);
        let pairs: Vec<(f64, f64)> = [1.0, 2.0, 3.0].iter().map(|&m| (m, alpha(m))).collect();
        let mu2 = 2.0 * pairs.iter().map(|(m, a)| a * m * m).sum::<f64>();
        (pairs, mu2)
    }

    #[test]
    fn uniform_symbols_match_closed_forms() {
        let (pairs, mu2) = bspline_moments();
        for kn in [0.05, 0.17, 0.25, 0.33, 0.45] {
            let k = wavenumber(kn, 1.0);
            // gradient symbol i S of the symmetric stencil; n = 2 adds no
            // odd moments, so the quadratic weights equal the linear ones
            let s_rk = 2.0
                * pairs
                    .iter()
                    .map(|(m, a)| a * m * (k * m).sin())
                    .sum::<f64>()
                / mu2;
            let c_rk = 2.0
                * pairs
                    .iter()
                    .map(|(m, a)| a * (1.0 - (k * m).cos()))
                    .sum::<f64>()
                / mu2;
            // minimum-norm GMLS: omega_J = 1/6 for every bond
            let s_gmls = [1.0, 2.0, 3.0]
                .iter()
                .map(|m: &f64| (k * m).sin() / m)
                .sum::<f64>()
                / 3.0;
            let c_gmls = [1.0, 2.0, 3.0]
                .iter()
                .map(|m: &f64| (1.0 - (k * m).cos()) / (m * m))
                .sum::<f64>()
                / 3.0;
            let expected = [
                (Scheme::Rk, s_rk * s_rk),
                (Scheme::BaRk, 0.5 * s_rk * s_rk + c_rk),
                (Scheme::Gmls, s_gmls * s_gmls),
                (Scheme::BaGmls, 0.5 * s_gmls * s_gmls + c_gmls),
            ];
            for (scheme, w2) in expected {
                let c = WaveConfig::new(scheme, 3.0, WaveGrid::Uniform);
                let got = omega_squared(k, &c, &setup_bar(&c).unwrap());
                assert!(
                    (got - w2).norm() <= 1e-13 * w2,
                    "{scheme} at {kn}: {got} vs {w2}"
                );
            }
        }
    }

    #[test]
    fn uniform_bar_gives_real_frequencies() {
        for scheme in Scheme::ALL {
            let c = WaveConfig::new(scheme, 4.0, WaveGrid::Uniform);
            let curve = sweep(&c, &default_k_grid(1.0, SWEEP_POINTS)).unwrap();
            for p in &curve.points {
                assert!(p.omega.im.abs() <= 1e-12, "{scheme} k={}: {}", p.k, p.omega);
            }
        }
    }

    #[test]
    fn conjugate_symmetry_of_omega_squared() {
        let c = WaveConfig::new(Scheme::BaRk, 3.0, WaveGrid::Perturbed { seed: 11 });
        let bar = setup_bar(&c).unwrap();
        for k in [0.3, 1.1, 2.7] {
            let a = omega_squared(k, &c, &bar);
            let b = omega_squared(-k, &c, &bar);
            assert!((a - b.conj()).norm() <= 1e-13 * a.norm().max(1.0));
        }
    }

    #[test]
    fn branch_convention() {
        assert_eq!(
            principal_sqrt(Complex64::new(-4.0, -0.0)),
            Complex64::new(0.0, 2.0)
        );
        assert_eq!(
            principal_sqrt(Complex64::new(-4.0, 0.0)),
            Complex64::new(0.0, 2.0)
        );
        let w = principal_sqrt(Complex64::new(3.0, -4.0));
        assert_relative_eq!(w.re, 2.0, max_relative = 1e-15);
        assert_relative_eq!(w.im, -1.0, max_relative = 1e-15);
    }

    #[test]
    fn zero_frequency_counting() {
        let c = WaveConfig::new(Scheme::Rk, 3.0, WaveGrid::Uniform);
        let ks = default_k_grid(1.0, SWEEP_POINTS);
        assert_eq!(count_zero_frequencies(&local_curve(&c, &ks), 1e-6), 0);
        let curve = sweep(&c, &ks).unwrap();
        assert_eq!(count_zero_frequencies(&curve, 0.0), 0);
        // the odd-even mode at k h / 2 pi = 1/2 has no stress in the base model
        let half = curve.normalized()[SWEEP_POINTS / 2 - 1];
        assert_eq!(half.k, 0.5);
        assert!(half.re_omega.hypot(half.im_omega) < 1e-6);
    }

    #[test]
    fn rejects_bad_input() {
        let mut c = WaveConfig::new(Scheme::Rk, 2.0, WaveGrid::Uniform);
        assert!(setup_bar(&c).is_err());
        c.delta = 3.0;
        assert!(sweep(&c, &[1.0, 0.5]).is_err());
        assert!(sweep(&c, &[0.0]).is_err());
    }
}
