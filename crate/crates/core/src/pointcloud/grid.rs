use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Lattice, Node, NodeKind, PointCloud};
use crate::error::{Error, Result};
use crate::Vec2;

/// Axis-aligned box. For 1D domains the `y` bounds are both zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDomain {
    pub lo: Vec2,
    pub hi: Vec2,
    pub dim: usize,
}

impl BoxDomain {
    pub fn interval(lo: f64, hi: f64) -> Self {
        Self {
            lo: Vec2::new(lo, 0.0),
            hi: Vec2::new(hi, 0.0),
            dim: 1,
        }
    }

    pub fn rect(lo: [f64; 2], hi: [f64; 2]) -> Self {
        Self {
            lo: Vec2::new(lo[0], lo[1]),
            hi: Vec2::new(hi[0], hi[1]),
            dim: 2,
        }
    }

    pub fn contains(&self, p: &Vec2) -> bool {
        (0..self.dim).all(|k| p[k] >= self.lo[k] && p[k] <= self.hi[k])
    }
}

fn cells_along(len: f64, h: f64) -> Result<usize> {
    let n = (len / h).round();
    if n < 1.0 || (n * h - len).abs() > 1e-9 * len.max(h) {
        return Err(Error::invalid(format!(
            "spacing {h} does not evenly divide length {len}"
        )));
    }
    Ok(n as usize)
}

/// Cell-centered lattice of bulk nodes with volume `h^d`, ordered with the
/// first coordinate varying fastest.
pub fn generate_uniform_grid(domain: BoxDomain, h: f64) -> Result<PointCloud> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::invalid(format!("non-positive spacing {h}")));
    }
    let ni = cells_along(domain.hi.x - domain.lo.x, h)?;
    let nj = if domain.dim == 2 {
        cells_along(domain.hi.y - domain.lo.y, h)?
    } else {
        1
    };
    let origin = if domain.dim == 2 {
        domain.lo + Vec2::new(0.5 * h, 0.5 * h)
    } else {
        Vec2::new(domain.lo.x + 0.5 * h, 0.0)
    };
    let volume = h.powi(domain.dim as i32);
    let mut nodes = Vec::with_capacity(ni * nj);
    for j in 0..nj {
        for i in 0..ni {
            nodes.push(Node {
                id: nodes.len(),
                x: origin + Vec2::new(i as f64 * h, j as f64 * h),
                volume,
                kind: NodeKind::Bulk,
                param: None,
            });
        }
    }
    let lattice = Lattice {
        shape: [ni, nj],
        regular: Some((origin, h)),
    };
    PointCloud::with_lattice(nodes, domain.dim, Some(lattice))
}

/// Extends a freshly generated lattice by `layers` fictitious node layers on
/// every side. `classify` receives the generation-time position of each new
/// node and decides its kind. Node ids are renumbered in lattice order.
pub fn add_collar(
    cloud: &PointCloud,
    layers: usize,
    classify: impl Fn(&Vec2) -> NodeKind,
) -> Result<PointCloud> {
    let lattice = cloud.lattice.as_ref().ok_or_else(|| {
        Error::Unsupported("collar construction needs a generated lattice".into())
    })?;
    let (origin, h) = lattice.regular.ok_or_else(|| {
        Error::Unsupported("collar must be added before perturbation or refinement".into())
    })?;
    let dim = cloud.dim();
    let [ni, nj] = lattice.shape;
    let pad_j = if dim == 2 { layers } else { 0 };
    let (ni2, nj2) = (ni + 2 * layers, nj + 2 * pad_j);
    let origin2 = origin - Vec2::new(layers as f64 * h, pad_j as f64 * h);
    let volume = h.powi(dim as i32);
    let mut nodes = Vec::with_capacity(ni2 * nj2);
    for j in 0..nj2 {
        for i in 0..ni2 {
            let inside = i >= layers && i < layers + ni && j >= pad_j && j < pad_j + nj;
            let node = if inside {
                let old = &cloud.nodes()[(i - layers) + ni * (j - pad_j)];
                Node {
                    id: nodes.len(),
                    ..old.clone()
                }
            } else {
                let x = origin2 + Vec2::new(i as f64 * h, j as f64 * h);
                Node {
                    id: nodes.len(),
                    x,
                    volume,
                    kind: classify(&x),
                    param: None,
                }
            };
            nodes.push(node);
        }
    }
    let lattice = Lattice {
        shape: [ni2, nj2],
        regular: Some((origin2, h)),
    };
    PointCloud::with_lattice(nodes, dim, Some(lattice))
}

/// Shifts every coordinate of every node by an independent normal draw with
/// standard deviation `sigma_fraction * h`. Draws come from ChaCha8 seeded
/// with `seed`, taken in node order, `x` before `y`; normals use the
/// ziggurat sampler of `rand_distr`. Volumes, kinds, and lattice topology
/// are kept.
pub fn perturb_grid(cloud: &PointCloud, sigma_fraction: f64, seed: u64) -> Result<PointCloud> {
    if !(sigma_fraction >= 0.0) {
        return Err(Error::invalid(format!(
            "negative perturbation fraction {sigma_fraction}"
        )));
    }
    if sigma_fraction == 0.0 {
        return Ok(cloud.clone());
    }
    let sigma = sigma_fraction * cloud.spacing();
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = cloud.dim();
    let nodes = cloud
        .nodes()
        .iter()
        .map(|n| {
            let mut x = n.x;
            for k in 0..dim {
                x[k] += normal.sample(&mut rng);
            }
            Node { x, ..n.clone() }
        })
        .collect();
    let lattice = cloud.lattice.as_ref().map(|l| Lattice {
        shape: l.shape,
        regular: None,
    });
    PointCloud::with_lattice(nodes, dim, lattice)
}

/// Splits every lattice node into `2^d` children placed at parametric
/// offsets of a quarter spacing, positions interpolated (bilinearly in 2D)
/// from the current, possibly perturbed, lattice. Each child is the
/// midpoint between its parent and the midpoint of the parent's cell in
/// that direction, so a uniform lattice of spacing `h` maps to the uniform
/// lattice of spacing `h/2` covering the same cells. Children inherit the
/// parent's kind and a `1/2^d` share of its volume.
pub fn refine_by_midpoints(cloud: &PointCloud) -> Result<PointCloud> {
    let lattice = cloud.lattice.as_ref().ok_or_else(|| {
        Error::Unsupported("cloud has no lattice connectivity and cannot be refined".into())
    })?;
    let dim = cloud.dim();
    let [ni, nj] = lattice.shape;
    if ni < 2 || (dim == 2 && nj < 2) {
        return Err(Error::Unsupported("lattice too small to refine".into()));
    }
    let pos = |i: usize, j: usize| cloud.nodes()[i + ni * j].x;
    // interpolation cell and local coordinate for a parametric location
    let locate = |s: f64, n: usize| -> (usize, f64) {
        let base = (s.floor().max(0.0) as usize).min(n - 2);
        (base, s - base as f64)
    };
    let (fi, fj) = (2 * ni, if dim == 2 { 2 * nj } else { 1 });
    let mut nodes = Vec::with_capacity(fi * fj);
    let share = 0.5f64.powi(dim as i32);
    for j in 0..fj {
        for i in 0..fi {
            let (pi, pj) = (i / 2, j / 2);
            let parent = &cloud.nodes()[pi + ni * pj];
            let si = pi as f64 + if i % 2 == 0 { -0.25 } else { 0.25 };
            let (i0, t) = locate(si, ni);
            let x = if dim == 1 {
                pos(i0, 0) * (1.0 - t) + pos(i0 + 1, 0) * t
            } else {
                let sj = pj as f64 + if j % 2 == 0 { -0.25 } else { 0.25 };
                let (j0, u) = locate(sj, nj);
                pos(i0, j0) * ((1.0 - t) * (1.0 - u))
                    + pos(i0 + 1, j0) * (t * (1.0 - u))
                    + pos(i0, j0 + 1) * ((1.0 - t) * u)
                    + pos(i0 + 1, j0 + 1) * (t * u)
            };
            nodes.push(Node {
                id: nodes.len(),
                x,
                volume: parent.volume * share,
                kind: parent.kind,
                param: None,
            });
        }
    }
    let regular = lattice.regular.map(|(o, h)| {
        let q = 0.25 * h;
        let shift = if dim == 2 {
            Vec2::new(q, q)
        } else {
            Vec2::new(q, 0.0)
        };
        (o - shift, 0.5 * h)
    });
    if let Some((o, h)) = regular {
        // keep exact lattice positions for regular grids (bilinear weights round)
        for (k, n) in nodes.iter_mut().enumerate() {
            let (i, j) = (k % fi, k / fi);
            n.x = o + Vec2::new(i as f64 * h, if dim == 2 { j as f64 * h } else { 0.0 });
        }
    }
    let lattice = Lattice {
        shape: [fi, fj],
        regular,
    };
    PointCloud::with_lattice(nodes, dim, Some(lattice))
}
