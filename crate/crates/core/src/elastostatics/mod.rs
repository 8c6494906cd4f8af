//! Static equilibrium `div P + b = 0` at the bulk nodes, with essential data
//! on kinematic collars, prescribed stresses on natural-bc and free-surface
//! collars, and optional component-wise constraints on bulk nodes.

mod assembly;
mod solver;

pub use assembly::{assemble_operator, SparseOperator};
pub use solver::{gmres, solve_static, LinearSolver, SolveConfig, StaticSolution};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::correspondence::{
    stress_divergence_ba, stress_divergence_base, KinematicState, Material,
};
use crate::error::{Error, Result};
use crate::gradops::{build_weights, GradientWeights, Neighborhood, Route};
use crate::pointcloud::{
    build_families, split_families, BrokenBonds, Family, Metric, NodeKind, PointCloud,
};
use crate::{Tensor2, Vec2};

/// Operator family: RK or GMLS weights, with or without the bond-associated
/// correction, and the polynomial order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Formulation {
    pub bond_associated: bool,
    pub route: Route,
    pub order: usize,
}

/// The four operator variants by name, without an order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Rk,
    Gmls,
    BaRk,
    BaGmls,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Rk, Scheme::Gmls, Scheme::BaRk, Scheme::BaGmls];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Rk => "rk",
            Scheme::Gmls => "gmls",
            Scheme::BaRk => "ba-rk",
            Scheme::BaGmls => "ba-gmls",
        }
    }

    pub fn route(self) -> Route {
        match self {
            Scheme::Rk | Scheme::BaRk => Route::Rk,
            Scheme::Gmls | Scheme::BaGmls => Route::Gmls,
        }
    }

    pub fn is_bond_associated(self) -> bool {
        matches!(self, Scheme::BaRk | Scheme::BaGmls)
    }

    pub fn with_order(self, order: usize) -> Formulation {
        Formulation {
            bond_associated: self.is_bond_associated(),
            route: self.route(),
            order,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown formulation `{s}` (expected rk, gmls, ba-rk, ba-gmls)"
                ))
            })
    }
}

impl Formulation {
    pub fn scheme(&self) -> Scheme {
        match (self.bond_associated, self.route) {
            (false, Route::Rk) => Scheme::Rk,
            (false, Route::Gmls) => Scheme::Gmls,
            (true, Route::Rk) => Scheme::BaRk,
            (true, Route::Gmls) => Scheme::BaGmls,
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.scheme())
    }
}

/// Boundary and load data, indexed by node.
#[derive(Debug, Clone)]
pub struct BcSpec {
    /// Prescribed displacement; required at every essential-bc node.
    pub essential: Vec<Option<Vec2>>,
    /// Prescribed stress; required at every natural-bc and free-surface node.
    pub natural: Vec<Option<Tensor2>>,
    /// Body force per unit volume at bulk nodes.
    pub body_force: Vec<Vec2>,
    /// `(node, component, value)`: a fixed displacement component on a bulk
    /// node. The matching equilibrium component is dropped (it carries the
    /// reaction).
    pub constraints: Vec<(usize, usize, f64)>,
}

impl BcSpec {
    pub fn new(len: usize) -> Self {
        Self {
            essential: vec![None; len],
            natural: vec![None; len],
            body_force: vec![Vec2::zeros(); len],
            constraints: Vec::new(),
        }
    }

    /// Fills data from closed-form fields: displacement on essential nodes,
    /// stress on natural-bc nodes, zero stress on free-surface nodes, and
    /// body force on bulk nodes.
    pub fn from_fields(
        cloud: &PointCloud,
        displacement: impl Fn(&Vec2) -> Vec2,
        stress: impl Fn(&Vec2) -> Tensor2,
        body_force: impl Fn(&Vec2) -> Vec2,
    ) -> Self {
        let mut bc = Self::new(cloud.len());
        for (i, n) in cloud.nodes().iter().enumerate() {
            match n.kind {
                NodeKind::Bulk => bc.body_force[i] = body_force(&n.x),
                NodeKind::EssentialBc => bc.essential[i] = Some(displacement(&n.x)),
                NodeKind::NaturalBc => bc.natural[i] = Some(stress(&n.x)),
                NodeKind::FreeSurface => bc.natural[i] = Some(Tensor2::zeros()),
            }
        }
        bc
    }

    pub fn validate(&self, cloud: &PointCloud) -> Result<()> {
        let n = cloud.len();
        if self.essential.len() != n || self.natural.len() != n || self.body_force.len() != n {
            return Err(Error::invalid(
                "boundary data length differs from the node count",
            ));
        }
        for i in 0..n {
            match cloud.kind(i) {
                NodeKind::EssentialBc if self.essential[i].is_none() => {
                    return Err(Error::MissingValue {
                        node: i,
                        what: "prescribed displacement",
                    })
                }
                NodeKind::NaturalBc | NodeKind::FreeSurface if self.natural[i].is_none() => {
                    return Err(Error::MissingValue {
                        node: i,
                        what: "prescribed stress",
                    })
                }
                _ => {}
            }
        }
        for &(node, comp, value) in &self.constraints {
            if node >= n || cloud.kind(node) != NodeKind::Bulk {
                return Err(Error::invalid(format!(
                    "constraint on node {node}, which is not a bulk node"
                )));
            }
            if comp >= cloud.dim() || !value.is_finite() {
                return Err(Error::invalid(format!(
                    "bad constraint component {comp} on node {node}"
                )));
            }
        }
        Ok(())
    }

    /// Known part of the displacement: essential values and constrained
    /// components, zero elsewhere.
    pub fn known_displacement(&self) -> Vec<Vec2> {
        let mut u: Vec<Vec2> = self
            .essential
            .iter()
            .map(|e| e.unwrap_or_else(Vec2::zeros))
            .collect();
        for &(node, comp, value) in &self.constraints {
            u[node][comp] = value;
        }
        u
    }
}

/// A discretized body: families, both weight sets, and the formulation.
#[derive(Debug, Clone)]
pub struct Model {
    pub cloud: PointCloud,
    pub families: Vec<Family>,
    pub formulation: Formulation,
    pub material: Material,
    /// H^k weights at every node whose deformation gradient is needed.
    pub kinematic: Vec<Option<GradientWeights>>,
    /// H^s weights at bulk nodes.
    pub stress: Vec<Option<GradientWeights>>,
    pub bulk: Vec<usize>,
}

impl Model {
    pub fn build(
        cloud: PointCloud,
        delta: f64,
        metric: Metric,
        broken: &BrokenBonds,
        formulation: Formulation,
        material: Material,
    ) -> Result<Self> {
        if cloud.dim() == 1 && !matches!(material, Material::Uniaxial { .. }) {
            return Err(Error::invalid("1D clouds need a uniaxial material"));
        }
        if cloud.dim() == 2 && !matches!(material, Material::PlaneStrain { .. }) {
            return Err(Error::invalid("2D clouds need a plane-strain material"));
        }
        let families = split_families(&build_families(&cloud, delta, metric)?, &cloud, broken);
        let bulk = cloud.indices_of(NodeKind::Bulk);
        if bulk.is_empty() {
            return Err(Error::invalid("cloud has no bulk nodes"));
        }
        let mut needs_f = vec![false; cloud.len()];
        for &i in &bulk {
            needs_f[i] = true;
            for j in families[i].stress_neighbors() {
                if cloud.kind(j).is_kinematic() {
                    needs_f[j] = true;
                }
            }
        }
        let (route, order) = (formulation.route, formulation.order);
        let kinematic = (0..cloud.len())
            .into_par_iter()
            .map(|i| {
                needs_f[i]
                    .then(|| {
                        let f = &families[i];
                        build_weights(
                            &cloud,
                            i,
                            &f.kinematic,
                            f,
                            route,
                            order,
                            Neighborhood::Kinematic,
                        )
                    })
                    .transpose()
            })
            .collect::<Result<Vec<_>>>()?;
        let stress = (0..cloud.len())
            .into_par_iter()
            .map(|i| {
                (cloud.kind(i) == NodeKind::Bulk)
                    .then(|| {
                        let f = &families[i];
                        let nb: Vec<usize> = f.stress_neighbors().collect();
                        build_weights(&cloud, i, &nb, f, route, order, Neighborhood::Stress)
                    })
                    .transpose()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cloud,
            families,
            formulation,
            material,
            kinematic,
            stress,
            bulk,
        })
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.cloud.nodes().iter().map(|n| n.x).collect()
    }

    pub fn kinematic_state(&self, u: Vec<Vec2>) -> Result<KinematicState> {
        if u.len() != self.cloud.len() {
            return Err(Error::invalid(
                "displacement length differs from the node count",
            ));
        }
        KinematicState::new(u, &self.kinematic)
    }

    /// `P(F)` at bulk nodes (from the same H^k weights the solve used).
    pub fn bulk_stresses(&self, state: &KinematicState) -> Result<Vec<Option<Tensor2>>> {
        (0..self.cloud.len())
            .map(|i| match self.cloud.kind(i) {
                NodeKind::Bulk => Ok(Some(self.material.stress(&state.gradient(i)?))),
                _ => Ok(None),
            })
            .collect()
    }

    /// Force density `r_I = (div P)_I + b_I` at bulk nodes (zero elsewhere).
    /// The displacement values at essential nodes are taken from `u` as given.
    pub fn residual(&self, u: &[Vec2], bc: &BcSpec) -> Result<Vec<Vec2>> {
        let state = self.kinematic_state(u.to_vec())?;
        self.residual_from_state(&state, bc)
    }

    pub fn residual_from_state(&self, state: &KinematicState, bc: &BcSpec) -> Result<Vec<Vec2>> {
        bc.validate(&self.cloud)?;
        let positions = self.positions();
        let node_stress: Vec<Option<Tensor2>> = if self.formulation.bond_associated {
            Vec::new()
        } else {
            (0..self.cloud.len())
                .map(|i| {
                    state.f[i]
                        .map(|f| self.material.stress(&f))
                        .or(bc.natural[i])
                })
                .collect()
        };
        let rows = self
            .bulk
            .par_iter()
            .map(|&i| {
                let ws = self.stress[i]
                    .as_ref()
                    .expect("bulk nodes carry stress weights");
                let bonds = &self.families[i].stress;
                let div = if self.formulation.bond_associated {
                    stress_divergence_ba(
                        &positions,
                        state,
                        ws,
                        bonds,
                        &self.material,
                        &bc.natural,
                        true,
                    )?
                } else {
                    stress_divergence_base(&node_stress, ws, bonds)?
                };
                Ok((i, div + bc.body_force[i]))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut r = vec![Vec2::zeros(); self.cloud.len()];
        for (i, v) in rows {
            r[i] = v;
        }
        Ok(r)
    }
}

/// RMS over all scalar entries: `sqrt(sum (c - e)^2 / count)`.
pub fn rms_error(computed: &[f64], exact: &[f64]) -> Result<f64> {
    if computed.is_empty() || computed.len() != exact.len() {
        return Err(Error::invalid(
            "RMS error needs two nonempty fields of equal length",
        ));
    }
    let s: f64 = computed
        .iter()
        .zip(exact)
        .map(|(c, e)| (c - e).powi(2))
        .sum();
    Ok((s / computed.len() as f64).sqrt())
}

/// Displacement RMS over the given nodes and the first `dim` components.
pub fn rms_displacement_error(
    u: &[Vec2],
    exact: &[Vec2],
    nodes: &[usize],
    dim: usize,
) -> Result<f64> {
    let pick = |f: &[Vec2]| -> Vec<f64> {
        nodes
            .iter()
            .flat_map(|&i| (0..dim).map(move |k| f[i][k]))
            .collect()
    };
    rms_error(&pick(u), &pick(exact))
}

/// Stress RMS over `P11, P12, P22` jointly.
pub fn rms_stress_error(p: &[Tensor2], exact: &[Tensor2], nodes: &[usize]) -> Result<f64> {
    let pick = |f: &[Tensor2]| -> Vec<f64> {
        nodes
            .iter()
            .flat_map(|&i| [f[i][(0, 0)], f[i][(0, 1)], f[i][(1, 1)]])
            .collect()
    };
    rms_error(&pick(p), &pick(exact))
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn convergence_rate(errors: &[f64], spacings: &[f64]) -> Result<f64> {
    if errors.len() < 2 || errors.len() != spacings.len() {
        return Err(Error::invalid(
            "convergence rate needs at least two (h, error) pairs",
        ));
    }
    if errors
        .iter()
        .chain(spacings)
        .any(|v| !(*v > 0.0) || !v.is_finite())
    {
        return Err(Error::invalid(
            "convergence rate needs positive finite errors and spacings",
        ));
    }
    let xs: Vec<f64> = spacings.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("convergence rate needs distinct spacings"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Errors of one refinement study.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub formulation: Formulation,
    pub levels: Vec<LevelError>,
    /// Fitted displacement rate (absent with a single level).
    pub rate_u: Option<f64>,
    pub rate_stress: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelError {
    pub level: usize,
    pub h: f64,
    pub rms_u: f64,
    pub rms_stress: f64,
}

impl ErrorReport {
    pub fn new(formulation: Formulation, levels: Vec<LevelError>) -> Self {
        let hs: Vec<f64> = levels.iter().map(|l| l.h).collect();
        let eu: Vec<f64> = levels.iter().map(|l| l.rms_u).collect();
        let es: Vec<f64> = levels.iter().map(|l| l.rms_stress).collect();
        Self {
            formulation,
            rate_u: convergence_rate(&eu, &hs).ok(),
            rate_stress: convergence_rate(&es, &hs).ok(),
            levels,
        }
    }

    pub fn finest(&self) -> Option<&LevelError> {
        self.levels.last()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::{add_collar, generate_uniform_grid, perturb_grid, BoxDomain};
    use approx::assert_relative_eq;

    #[test]
    fn rms_cases() {
        assert_relative_eq!(
            rms_error(&[3.0, 4.0], &[0.0, 0.0]).unwrap(),
            (12.5f64).sqrt(),
            max_relative = 1e-15
        );
        assert_eq!(rms_error(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_relative_eq!(
            rms_error(&[1.5; 7], &[1.0; 7]).unwrap(),
            0.5,
            max_relative = 1e-15
        );
        assert!(rms_error(&[], &[]).is_err());
        let u = vec![Vec2::new(3.0, 4.0)];
        assert_relative_eq!(
            rms_displacement_error(&u, &[Vec2::zeros()], &[0], 2).unwrap(),
            (12.5f64).sqrt(),
            max_relative = 1e-15
        );
        assert!(rms_displacement_error(&u, &[Vec2::zeros()], &[], 2).is_err());
    }

    #[test]
    fn rate_cases() {
        assert_relative_eq!(
            convergence_rate(&[1.0, 0.25], &[1.0, 0.5]).unwrap(),
            2.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            convergence_rate(&[1.0, 0.5], &[1.0, 0.5]).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        assert!(convergence_rate(&[1.0], &[1.0]).is_err());
        assert!(convergence_rate(&[1.0, 0.0], &[1.0, 0.5]).is_err());
        assert!(convergence_rate(&[1.0, 0.5], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.as_str().parse::<Scheme>().unwrap(), s);
            assert_eq!(s.with_order(2).scheme(), s);
        }
        assert!("ba".parse::<Scheme>().is_err());
    }

    pub(crate) fn patch_model(scheme: Scheme, order: usize, seed: u64) -> Model {
        let h = 0.1;
        let delta = (order as f64 + 1.5) * h;
        let c = generate_uniform_grid(BoxDomain::rect([0.0, 0.0], [1.0, 1.0]), h).unwrap();
        let c = add_collar(&c, (delta / h).ceil() as usize, |p| {
            if p.x < 0.0 || p.y < 0.0 {
                NodeKind::EssentialBc
            } else {
                NodeKind::NaturalBc
            }
        })
        .unwrap();
        let c = perturb_grid(&c, 0.15, seed).unwrap();
        Model::build(
            c,
            delta,
            Metric::Physical,
            &BrokenBonds::new(),
            scheme.with_order(order),
            Material::plane_strain(1.0, 0.3).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_data_gives_zero_residual() {
        let m = patch_model(Scheme::BaGmls, 2, 1);
        let bc = BcSpec::from_fields(
            &m.cloud,
            |_| Vec2::zeros(),
            |_| Tensor2::zeros(),
            |_| Vec2::zeros(),
        );
        let r = m
            .residual(&vec![Vec2::zeros(); m.cloud.len()], &bc)
            .unwrap();
        assert!(r.iter().all(|v| *v == Vec2::zeros()));
    }

    #[test]
    fn missing_boundary_data_is_reported() {
        let m = patch_model(Scheme::Rk, 1, 2);
        let mut bc = BcSpec::from_fields(
            &m.cloud,
            |_| Vec2::zeros(),
            |_| Tensor2::zeros(),
            |_| Vec2::zeros(),
        );
        let nat = m.cloud.indices_of(NodeKind::NaturalBc)[0];
        bc.natural[nat] = None;
        assert!(matches!(
            m.residual(&vec![Vec2::zeros(); m.cloud.len()], &bc),
            Err(Error::MissingValue { .. })
        ));
    }

    #[test]
    fn residual_is_affine() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for scheme in Scheme::ALL {
            let m = patch_model(scheme, 2, 5);
            let bc = BcSpec::from_fields(
                &m.cloud,
                |x| Vec2::new(x.y, -x.x),
                |x| Tensor2::new(x.x, 0.0, 0.0, x.y),
                |x| Vec2::new(1.0, x.x),
            );
            let n = m.cloud.len();
            let mut rand_field = || -> Vec<Vec2> {
                (0..n)
                    .map(|_| Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect()
            };
            let (u1, u2) = (rand_field(), rand_field());
            let sum: Vec<Vec2> = u1.iter().zip(&u2).map(|(a, b)| a + b).collect();
            let r1 = m.residual(&u1, &bc).unwrap();
            let r2 = m.residual(&u2, &bc).unwrap();
            let r12 = m.residual(&sum, &bc).unwrap();
            let r0 = m.residual(&vec![Vec2::zeros(); n], &bc).unwrap();
            let scale = r12.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for i in 0..n {
                assert!(
                    (r12[i] - (r1[i] + r2[i] - r0[i])).norm() <= 1e-12 * scale,
                    "{scheme}"
                );
            }
        }
    }
}
