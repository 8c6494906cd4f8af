//! Meshfree nodal discretizations: generation, perturbation, refinement,
//! import, and the dual neighbor families used by the correspondence model.

pub(crate) mod family;
mod grid;
mod io;
mod polar;

pub use family::{
    build_families, split_families, BondState, BrokenBonds, Family, Metric, StressBond,
};
pub use grid::{add_collar, generate_uniform_grid, perturb_grid, refine_by_midpoints, BoxDomain};
pub use io::{import_cloud, parse_cloud, write_cloud};
pub use polar::{generate_polar_grid, PolarGrid};

use crate::error::{Error, Result};
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    /// Material point carrying displacement unknowns.
    Bulk,
    /// Fictitious collar node with prescribed displacement.
    EssentialBc,
    /// Fictitious collar node with prescribed stress and no kinematics.
    NaturalBc,
    /// Fictitious node in free space; carries zero stress.
    FreeSurface,
}

impl NodeKind {
    /// Whether the node carries displacement data usable in a deformation gradient.
    pub fn is_kinematic(self) -> bool {
        matches!(self, NodeKind::Bulk | NodeKind::EssentialBc)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Bulk => "bulk",
            NodeKind::EssentialBc => "essential",
            NodeKind::NaturalBc => "natural",
            NodeKind::FreeSurface => "freesurface",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "bulk" => NodeKind::Bulk,
            "essential" => NodeKind::EssentialBc,
            "natural" => NodeKind::NaturalBc,
            "freesurface" => NodeKind::FreeSurface,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    /// External identifier (as read from or written to cloud files).
    pub id: usize,
    /// Reference position. In 1D the second component is zero.
    pub x: Vec2,
    pub volume: f64,
    pub kind: NodeKind,
    /// Parametric coordinates, present on structured polar grids.
    pub param: Option<Vec2>,
}

/// Structured index metadata kept by generated grids so they can be refined.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Lattice {
    /// Slot counts along each axis; the second is 1 for 1D clouds.
    pub shape: [usize; 2],
    /// Unperturbed position of slot (0, 0) and the lattice spacing. `None`
    /// once positions no longer sit on the regular lattice.
    pub regular: Option<(Vec2, f64)>,
}

/// A set of nodes of one spatial dimension. Nodes are addressed by their
/// index in [`PointCloud::nodes`]; families and weights use these indices.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    nodes: Vec<Node>,
    dim: usize,
    pub(crate) lattice: Option<Lattice>,
}

impl PointCloud {
    pub fn new(nodes: Vec<Node>, dim: usize) -> Result<Self> {
        Self::with_lattice(nodes, dim, None)
    }

    pub(crate) fn with_lattice(
        nodes: Vec<Node>,
        dim: usize,
        lattice: Option<Lattice>,
    ) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::invalid(format!("dimension {dim} not in 1..=2")));
        }
        if nodes.is_empty() {
            return Err(Error::invalid("empty point cloud"));
        }
        for n in &nodes {
            if !(n.volume > 0.0) || !n.volume.is_finite() {
                return Err(Error::invalid(format!(
                    "node {} has non-positive volume {}",
                    n.id, n.volume
                )));
            }
            if !(n.x.x.is_finite() && n.x.y.is_finite()) {
                return Err(Error::invalid(format!(
                    "node {} has a non-finite position",
                    n.id
                )));
            }
            if dim == 1 && n.x.y != 0.0 {
                return Err(Error::invalid(format!(
                    "1D node {} has a nonzero y coordinate",
                    n.id
                )));
            }
        }
        if let Some(l) = &lattice {
            debug_assert_eq!(l.shape[0] * l.shape[1], nodes.len());
        }
        Ok(Self {
            nodes,
            dim,
            lattice,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn position(&self, i: usize) -> Vec2 {
        self.nodes[i].x
    }

    pub fn kind(&self, i: usize) -> NodeKind {
        self.nodes[i].kind
    }

    pub fn volume(&self, i: usize) -> f64 {
        self.nodes[i].volume
    }

    /// Whether the cloud keeps the lattice connectivity needed for refinement.
    pub fn is_refinable(&self) -> bool {
        self.lattice.is_some()
    }

    /// Indices of nodes of the given kind, ascending.
    pub fn indices_of(&self, kind: NodeKind) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].kind == kind)
            .collect()
    }

    /// Average nodal spacing `(sum V / N)^(1/d)` over the material (bulk)
    /// nodes, or over all nodes when there are none.
    pub fn spacing(&self) -> f64 {
        let bulk: Vec<&Node> = self
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Bulk)
            .collect();
        let (sum, count) = if bulk.is_empty() {
            (
                self.nodes.iter().map(|n| n.volume).sum::<f64>(),
                self.nodes.len(),
            )
        } else {
            (bulk.iter().map(|n| n.volume).sum::<f64>(), bulk.len())
        };
        (sum / count as f64).powf(1.0 / self.dim as f64)
    }

    pub fn total_volume(&self) -> f64 {
        self.nodes.iter().map(|n| n.volume).sum()
    }

    /// Index of the node nearest to `p` among nodes accepted by `filter`.
    pub fn nearest(&self, p: &Vec2, filter: impl Fn(&Node) -> bool) -> Option<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| filter(n))
            .min_by(|(_, a), (_, b)| {
                (a.x - p)
                    .norm_squared()
                    .total_cmp(&(b.x - p).norm_squared())
            })
            .map(|(i, _)| i)
    }

    /// Returns an error if two nodes share a position.
    pub fn check_distinct(&self) -> Result<()> {
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by(|&a, &b| {
            let (pa, pb) = (self.nodes[a].x, self.nodes[b].x);
            pa.x.total_cmp(&pb.x).then(pa.y.total_cmp(&pb.y))
        });
        for w in order.windows(2) {
            if self.nodes[w[0]].x == self.nodes[w[1]].x {
                return Err(Error::invalid(format!(
                    "nodes {} and {} coincide",
                    self.nodes[w[0]].id, self.nodes[w[1]].id
                )));
            }
        }
        Ok(())
    }
}
