use std::f64::consts::FRAC_PI_2;

use super::{Node, NodeKind, PointCloud};
use crate::error::{Error, Result};
use crate::Vec2;

/// Structured polar discretization of the quarter plate `[0, L]^2` minus the
/// disc of radius `a`.
///
/// Angular stations are `theta_j = j * pi / (2 n_theta)` for
/// `j = 0..=n_theta`, so the first and last stations lie on the symmetry
/// axes. Along each ray the radius is `a (R(theta)/a)^s` with `R` the
/// distance from the origin to the square boundary and `s` the radial
/// parameter; radial stations sit at the centers `s = (i + 1/2) / n_r`.
/// Every node owns the image of its parametric cell
/// `[i, i+1]/n_r x [theta_j - dtheta/2, theta_j + dtheta/2]`, clipped to the
/// quarter, so axis nodes own half cells. Parametric coordinates are
/// `(i, j)`: adjacent nodes are exactly one unit apart.
///
/// Collars continue the lattice `collar_layers` stations in every direction:
/// free-surface layers inside the hole (`i < 0`) and natural-bc layers
/// everywhere else outside the quarter (`i >= n_r`, or across a symmetry
/// axis with `j < 0` or `j > n_theta`). Collar cells are not clipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarGrid {
    pub hole_radius: f64,
    pub half_width: f64,
    pub n_radial: usize,
    pub n_angular: usize,
    pub collar_layers: usize,
}

impl PolarGrid {
    fn outer_radius(&self, theta: f64) -> f64 {
        self.half_width / theta.cos().max(theta.sin())
    }

    fn radius(&self, s: f64, theta: f64) -> f64 {
        let a = self.hole_radius;
        a * (self.outer_radius(theta) / a).powf(s)
    }

    /// Area of the parametric cell `[s0, s1] x [t0, t1]`:
    /// `int (r(s1)^2 - r(s0)^2) / 2 dtheta`, integrated with composite
    /// Simpson split at the square's corner where `R` has a kink.
    fn cell_area(&self, s0: f64, s1: f64, t0: f64, t1: f64) -> f64 {
        let f = |t: f64| 0.5 * (self.radius(s1, t).powi(2) - self.radius(s0, t).powi(2));
        let simpson = |a: f64, b: f64| {
            let n = 32;
            let hstep = (b - a) / n as f64;
            let mut acc = f(a) + f(b);
            for k in 1..n {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                acc += w * f(a + k as f64 * hstep);
            }
            acc * hstep / 3.0
        };
        let corner = 0.25 * std::f64::consts::PI;
        if t0 < corner && t1 > corner {
            simpson(t0, corner) + simpson(corner, t1)
        } else {
            simpson(t0, t1)
        }
    }
}

pub fn generate_polar_grid(spec: &PolarGrid) -> Result<PointCloud> {
    let PolarGrid {
        hole_radius: a,
        half_width: l,
        n_radial,
        n_angular,
        collar_layers,
    } = *spec;
    if !(a > 0.0 && a < l) {
        return Err(Error::invalid(format!(
            "need 0 < a < L, got a = {a}, L = {l}"
        )));
    }
    if n_radial < 2 || n_angular < 2 {
        return Err(Error::invalid(
            "polar grid needs at least 2 radial and 2 angular cells",
        ));
    }
    let dtheta = FRAC_PI_2 / n_angular as f64;
    let ds = 1.0 / n_radial as f64;
    let lo = -(collar_layers as isize);
    let hi = (n_radial + collar_layers) as isize;
    let mut nodes = Vec::new();
    let last = n_angular as isize;
    for j in lo..=last + collar_layers as isize {
        let theta = j as f64 * dtheta;
        let inside = (0..=last).contains(&j);
        let (t0, t1) = if inside {
            (
                (theta - 0.5 * dtheta).max(0.0),
                (theta + 0.5 * dtheta).min(FRAC_PI_2),
            )
        } else {
            (theta - 0.5 * dtheta, theta + 0.5 * dtheta)
        };
        for i in lo..hi {
            let s = (i as f64 + 0.5) * ds;
            let r = spec.radius(s, theta);
            let kind = if i < 0 {
                NodeKind::FreeSurface
            } else if i >= n_radial as isize || !inside {
                NodeKind::NaturalBc
            } else {
                NodeKind::Bulk
            };
            // exact zero on the axes keeps symmetry constraints clean
            let x = match j {
                0 => Vec2::new(r, 0.0),
                _ if j == last => Vec2::new(0.0, r),
                _ => Vec2::new(r * theta.cos(), r * theta.sin()),
            };
            nodes.push(Node {
                id: nodes.len(),
                x,
                volume: spec.cell_area(i as f64 * ds, (i + 1) as f64 * ds, t0, t1),
                kind,
                param: Some(Vec2::new(i as f64, j as f64)),
            });
        }
    }
    PointCloud::new(nodes, 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize) -> PolarGrid {
        PolarGrid {
            hole_radius: 1.0,
            half_width: 5.0,
            n_radial: n,
            n_angular: n,
            collar_layers: 3,
        }
    }

    #[test]
    fn geometry_and_kinds() {
        let c = generate_polar_grid(&spec(10)).unwrap();
        for n in c.nodes() {
            let r = n.x.norm();
            match n.kind {
                NodeKind::FreeSurface => assert!(r < 1.0),
                NodeKind::Bulk => assert!((1.0..=5.0 * 2f64.sqrt()).contains(&r)),
                NodeKind::NaturalBc => {
                    assert!(
                        r >= 1.0 && (n.x.x > 5.0 - 1e-12 || n.x.y > 5.0 - 1e-12 || n.x.min() < 0.0)
                    )
                }
                NodeKind::EssentialBc => unreachable!(),
            }
        }
        assert_eq!(c.indices_of(NodeKind::Bulk).len(), 110);
    }

    #[test]
    fn material_area_matches_analytic() {
        let exact = 25.0 - std::f64::consts::PI / 4.0;
        for n in [25, 50] {
            let c = generate_polar_grid(&spec(n)).unwrap();
            let area: f64 = c
                .nodes()
                .iter()
                .filter(|n| n.kind == NodeKind::Bulk)
                .map(|n| n.volume)
                .sum();
            assert!(
                (area - exact).abs() / exact < 0.02,
                "area {area} vs {exact}"
            );
        }
    }

    #[test]
    fn axis_collars_mirror_the_quarter() {
        let c = generate_polar_grid(&spec(8)).unwrap();
        for n in c.nodes().iter().filter(|n| n.x.y < 0.0) {
            let image = Vec2::new(n.x.x, -n.x.y);
            let k = c.nearest(&image, |_| true).unwrap();
            assert!((c.position(k) - image).norm() < 1e-12);
            let m = &c.nodes()[k];
            assert!(
                n.kind == m.kind || (n.kind == NodeKind::NaturalBc && m.kind == NodeKind::Bulk)
            );
            assert!((n.volume - m.volume).abs() <= 1e-12 * m.volume);
        }
        assert_eq!(
            c.nodes().iter().filter(|n| n.x.y < 0.0).count(),
            3 * (8 + 6)
        );
    }

    #[test]
    fn invalid_geometry() {
        let mut s = spec(4);
        s.hole_radius = 6.0;
        assert!(generate_polar_grid(&s).is_err());
        let mut s = spec(4);
        s.n_angular = 1;
        assert!(generate_polar_grid(&s).is_err());
    }
}
