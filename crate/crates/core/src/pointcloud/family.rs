use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use super::PointCloud;
use crate::error::{Error, Result};
use crate::Vec2;

/// Distance used to decide family membership and to evaluate influence
/// functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Physical,
    /// Distance between parametric coordinates (structured polar grids).
    Parametric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondState {
    KinematicUnbroken,
    /// Neighbor is a natural-bc or free-surface node: its stress is supplied.
    NaturalBc,
    /// Damaged bond: carries zero stress.
    Broken,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StressBond {
    pub neighbor: usize,
    pub state: BondState,
}

/// Static damage map: unordered node-index pairs whose bond is broken.
#[derive(Debug, Clone, Default)]
pub struct BrokenBonds(BTreeSet<(usize, usize)>);

impl BrokenBonds {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, a: usize, b: usize) {
        self.0.insert((a.min(b), a.max(b)));
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.0.contains(&(a.min(b), a.max(b)))
    }
}

/// Neighbors of one node within the horizon.
///
/// `kinematic` (H^k) holds the unbroken bonds to bulk and essential-bc
/// nodes and feeds the deformation gradient. `stress` (H^s) holds every
/// neighbor with its bond state and feeds the stress divergence. Both are
/// sorted by node index.
#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub center: usize,
    pub kinematic: Vec<usize>,
    pub stress: Vec<StressBond>,
    pub delta: f64,
    pub metric: Metric,
}

impl Family {
    pub fn stress_neighbors(&self) -> impl Iterator<Item = usize> + '_ {
        self.stress.iter().map(|b| b.neighbor)
    }

    /// Whether H^k and H^s hold the same bonds.
    pub fn is_uniform(&self) -> bool {
        self.kinematic.len() == self.stress.len()
    }
}

fn metric_position(cloud: &PointCloud, i: usize, metric: Metric) -> Vec2 {
    match metric {
        Metric::Physical => cloud.position(i),
        // presence checked by build_families
        Metric::Parametric => cloud.nodes()[i].param.unwrap(),
    }
}

/// Distance between two nodes in the given metric.
pub(crate) fn metric_distance(cloud: &PointCloud, i: usize, j: usize, metric: Metric) -> f64 {
    (metric_position(cloud, j, metric) - metric_position(cloud, i, metric)).norm()
}

/// All nodes within `delta` (inclusive) of each node in the chosen metric,
/// excluding the node itself. Uses uniform bins of side `delta`. Every bond
/// starts as kinematic; call [`split_families`] to apply node kinds.
pub fn build_families(cloud: &PointCloud, delta: f64, metric: Metric) -> Result<Vec<Family>> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::invalid(format!("non-positive horizon {delta}")));
    }
    if metric == Metric::Parametric && cloud.nodes().iter().any(|n| n.param.is_none()) {
        return Err(Error::invalid(
            "parametric metric requested but nodes lack parametric coordinates",
        ));
    }
    let n = cloud.len();
    let pts: Vec<Vec2> = (0..n).map(|i| metric_position(cloud, i, metric)).collect();
    let bin_of = |p: &Vec2| ((p.x / delta).floor() as i64, (p.y / delta).floor() as i64);
    let mut bins: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in pts.iter().enumerate() {
        bins.entry(bin_of(p)).or_default().push(i);
    }
    let delta2 = delta * delta;
    let families = (0..n)
        .into_par_iter()
        .map(|i| {
            let (bx, by) = bin_of(&pts[i]);
            let mut nb = Vec::new();
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(members) = bins.get(&(bx + dx, by + dy)) {
                        for &j in members {
                            if j != i && (pts[j] - pts[i]).norm_squared() <= delta2 {
                                nb.push(j);
                            }
                        }
                    }
                }
            }
            nb.sort_unstable();
            Family {
                center: i,
                kinematic: nb.clone(),
                stress: nb
                    .into_iter()
                    .map(|neighbor| StressBond {
                        neighbor,
                        state: BondState::KinematicUnbroken,
                    })
                    .collect(),
                delta,
                metric,
            }
        })
        .collect();
    Ok(families)
}

/// Splits each family into H^k and H^s according to node kinds and the
/// damage map.
pub fn split_families(
    families: &[Family],
    cloud: &PointCloud,
    broken: &BrokenBonds,
) -> Vec<Family> {
    families
        .iter()
        .map(|f| {
            let i = f.center;
            let mut kinematic = Vec::new();
            let mut stress = Vec::with_capacity(f.stress.len());
            for j in f.stress_neighbors() {
                let state = if !cloud.kind(j).is_kinematic() {
                    BondState::NaturalBc
                } else if broken.contains(i, j) {
                    BondState::Broken
                } else {
                    kinematic.push(j);
                    BondState::KinematicUnbroken
                };
                stress.push(StressBond { neighbor: j, state });
            }
            Family {
                center: i,
                kinematic,
                stress,
                delta: f.delta,
                metric: f.metric,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointcloud::{
        add_collar, generate_polar_grid, generate_uniform_grid, perturb_grid, BoxDomain, NodeKind,
        PolarGrid,
    };

    #[test]
    fn one_dimensional_counts() {
        let bar = generate_uniform_grid(BoxDomain::interval(-10.0, 10.0), 1.0).unwrap();
        let fam = build_families(&bar, 3.0, Metric::Physical).unwrap();
        let center = bar.nearest(&Vec2::new(0.5, 0.0), |_| true).unwrap();
        assert_eq!(fam[center].stress.len(), 6);
        // exactly at distance delta counts
        assert_eq!(
            build_families(&bar, 1.0, Metric::Physical).unwrap()[center]
                .stress
                .len(),
            2
        );
        let empty = build_families(&bar, 0.5, Metric::Physical).unwrap();
        assert!(empty.iter().all(|f| f.stress.is_empty()));
        assert!(build_families(&bar, 0.0, Metric::Physical).is_err());
        assert!(build_families(&bar, 1.0, Metric::Parametric).is_err());
    }

    #[test]
    fn families_are_symmetric_and_brute_force_exact() {
        let c = generate_uniform_grid(BoxDomain::rect([0.0, 0.0], [1.0, 1.0]), 0.1).unwrap();
        let c = perturb_grid(&c, 0.3, 11).unwrap();
        let delta = 0.31;
        let fam = build_families(&c, delta, Metric::Physical).unwrap();
        for f in &fam {
            let brute: Vec<usize> = (0..c.len())
                .filter(|&j| {
                    j != f.center && (c.position(j) - c.position(f.center)).norm() <= delta
                })
                .collect();
            assert_eq!(f.kinematic, brute);
            for j in f.stress_neighbors() {
                assert!(fam[j].stress_neighbors().any(|k| k == f.center));
            }
        }
    }

    #[test]
    fn parametric_counts_uniform_on_polar_grid() {
        let g = PolarGrid {
            hole_radius: 1.0,
            half_width: 5.0,
            n_radial: 12,
            n_angular: 12,
            collar_layers: 3,
        };
        let c = generate_polar_grid(&g).unwrap();
        let fam = build_families(&c, 2.75, Metric::Parametric).unwrap();
        let mut counts = std::collections::BTreeSet::new();
        for f in &fam {
            let p = c.nodes()[f.center].param.unwrap();
            let interior = p.x >= 0.0 && p.x < 12.0 && p.y >= 3.0 && p.y <= 9.0;
            if interior {
                counts.insert(f.stress.len());
            }
        }
        assert_eq!(counts.into_iter().collect::<Vec<_>>(), vec![20]);
    }

    #[test]
    fn split_by_kind_and_damage() {
        let c = generate_uniform_grid(BoxDomain::rect([0.0, 0.0], [1.0, 1.0]), 0.25).unwrap();
        let c = add_collar(&c, 1, |p| {
            if p.x < 0.0 {
                NodeKind::EssentialBc
            } else if p.x > 1.0 {
                NodeKind::FreeSurface
            } else {
                NodeKind::NaturalBc
            }
        })
        .unwrap();
        let fam = build_families(&c, 0.3, Metric::Physical).unwrap();
        let mut broken = BrokenBonds::new();
        let bulk = c.indices_of(NodeKind::Bulk);
        broken.insert(bulk[5], bulk[6]);
        let split = split_families(&fam, &c, &broken);
        for f in &split {
            for b in &f.stress {
                let in_k = f.kinematic.contains(&b.neighbor);
                match b.state {
                    BondState::KinematicUnbroken => {
                        assert!(in_k && c.kind(b.neighbor).is_kinematic())
                    }
                    BondState::NaturalBc => assert!(!in_k && !c.kind(b.neighbor).is_kinematic()),
                    BondState::Broken => assert!(!in_k),
                }
            }
        }
        // an interior bulk node away from the collar and the damage
        let center = c.nearest(&Vec2::new(0.375, 0.625), |_| true).unwrap();
        assert!(split[center].is_uniform());
        let b = &split[bulk[5]];
        assert!(b
            .stress
            .iter()
            .any(|s| s.neighbor == bulk[6] && s.state == BondState::Broken));
        let edge = c.nearest(&Vec2::new(0.875, 0.375), |_| true).unwrap();
        assert!(split[edge].stress.iter().any(
            |s| c.kind(s.neighbor) == NodeKind::FreeSurface && s.state == BondState::NaturalBc
        ));
    }
}
