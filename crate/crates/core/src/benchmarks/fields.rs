use std::f64::consts::FRAC_PI_2;

use crate::correspondence::Material;
use crate::error::{Error, Result};
use crate::{Tensor2, Vec2};

/// Smooth plane-strain field on the square `[-1, 1]^2`:
///
/// ```text
/// u1 = A sin(pi x/2) cos(pi y/2) + B e^(x+y)
/// u2 = C cos(pi x/2) sin(pi y/2) + D e^(x+y)
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl ManufacturedSolution {
    /// The standard constants `A = 0.2, B = -0.15, C = -0.15, D = 0.1`.
    pub fn standard(material: &Material) -> Result<Self> {
        let Material::PlaneStrain { lambda, mu } = *material else {
            return Err(Error::invalid(
                "manufactured solution needs a plane-strain material",
            ));
        };
        Ok(Self {
            a: 0.2,
            b: -0.15,
            c: -0.15,
            d: 0.1,
            lambda,
            mu,
        })
    }

    fn trig(x: &Vec2) -> (f64, f64, f64, f64, f64) {
        let (sx, cx) = (FRAC_PI_2 * x.x).sin_cos();
        let (sy, cy) = (FRAC_PI_2 * x.y).sin_cos();
        (sx, cx, sy, cy, (x.x + x.y).exp())
    }

    pub fn displacement(&self, x: &Vec2) -> Vec2 {
        let (sx, cx, sy, cy, e) = Self::trig(x);
        Vec2::new(self.a * sx * cy + self.b * e, self.c * cx * sy + self.d * e)
    }

    /// Exact displacement gradient.
    pub fn gradient(&self, x: &Vec2) -> Tensor2 {
        let (sx, cx, sy, cy, e) = Self::trig(x);
        let p = FRAC_PI_2;
        Tensor2::new(
            self.a * p * cx * cy + self.b * e,
            -self.a * p * sx * sy + self.b * e,
            -self.c * p * sx * sy + self.d * e,
            self.c * p * cx * cy + self.d * e,
        )
    }

    pub fn stress(&self, x: &Vec2) -> Tensor2 {
        let (sx, cx, sy, cy, e) = Self::trig(x);
        let (l, m) = (self.lambda, self.mu);
        let (ac, bd) = (self.a + self.c, self.b + self.d);
        let p11 =
            FRAC_PI_2 * (ac * l + 2.0 * self.a * m) * cx * cy + (bd * l + 2.0 * self.b * m) * e;
        let p12 = -FRAC_PI_2 * ac * m * sx * sy + bd * m * e;
        let p22 =
            FRAC_PI_2 * (ac * l + 2.0 * self.c * m) * cx * cy + (bd * l + 2.0 * self.d * m) * e;
        Tensor2::new(p11, p12, p12, p22)
    }

    /// Body force with `div P + b = 0`.
    pub fn body_force(&self, x: &Vec2) -> Vec2 {
        let (sx, cx, sy, cy, e) = Self::trig(x);
        let (l, m) = (self.lambda, self.mu);
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let q = FRAC_PI_2 * FRAC_PI_2;
        let div1 = -q * ((a + c) * l + (3.0 * a + c) * m) * sx * cy
            + ((b + d) * l + (3.0 * b + d) * m) * e;
        let div2 = -q * ((a + c) * l + (a + 3.0 * c) * m) * cx * sy
            + ((b + d) * l + (b + 3.0 * d) * m) * e;
        -Vec2::new(div1, div2)
    }
}

/// Polar stress components `(P_rr, P_tt, P_rt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarStress {
    pub rr: f64,
    pub tt: f64,
    pub rt: f64,
}

/// Infinite plate with a circular hole of radius `a` under far-field
/// uniaxial tension `T_x` along x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KirschSolution {
    pub a: f64,
    pub t_x: f64,
}

impl KirschSolution {
    pub fn new(a: f64, t_x: f64) -> Result<Self> {
        if !(a > 0.0) || !t_x.is_finite() {
            return Err(Error::invalid(format!(
                "hole radius must be positive, got {a}"
            )));
        }
        Ok(Self { a, t_x })
    }

    /// Polar components at any `r > 0` (inside the hole only for plotting).
    pub fn polar_stress(&self, r: f64, theta: f64) -> PolarStress {
        let q2 = (self.a / r).powi(2);
        let q4 = q2 * q2;
        let h = 0.5 * self.t_x;
        let (s2, c2) = (2.0 * theta).sin_cos();
        PolarStress {
            rr: h * (1.0 - q2) + h * (1.0 - 4.0 * q2 + 3.0 * q4) * c2,
            tt: h * (1.0 + q2) - h * (1.0 + 3.0 * q4) * c2,
            rt: -h * (1.0 + 2.0 * q2 - 3.0 * q4) * s2,
        }
    }

    /// Cartesian stress `Q S Q^T` with `Q` the rotation by `theta`.
    pub fn cartesian_stress(&self, x: &Vec2) -> Tensor2 {
        let r = x.norm();
        let theta = x.y.atan2(x.x);
        polar_to_cartesian(&self.polar_stress(r, theta), theta)
    }

    /// Cartesian stress at a material point; errors inside the hole.
    pub fn material_stress(&self, x: &Vec2) -> Result<Tensor2> {
        if x.norm() < self.a * (1.0 - 1e-12) {
            return Err(Error::invalid(format!(
                "point ({}, {}) lies inside the hole",
                x.x, x.y
            )));
        }
        Ok(self.cartesian_stress(x))
    }
}

pub fn polar_to_cartesian(s: &PolarStress, theta: f64) -> Tensor2 {
    let (sn, cs) = theta.sin_cos();
    let q = Tensor2::new(cs, -sn, sn, cs);
    q * Tensor2::new(s.rr, s.rt, s.rt, s.tt) * q.transpose()
}

pub fn cartesian_to_polar(p: &Tensor2, theta: f64) -> PolarStress {
    let (sn, cs) = theta.sin_cos();
    let q = Tensor2::new(cs, -sn, sn, cs);
    let s = q.transpose() * p * q;
    PolarStress {
        rr: s[(0, 0)],
        tt: s[(1, 1)],
        rt: 0.5 * (s[(0, 1)] + s[(1, 0)]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn ms() -> ManufacturedSolution {
        ManufacturedSolution::standard(&Material::plane_strain(1e5, 0.3).unwrap()).unwrap()
    }

    #[test]
    fn origin_values() {
        let u = ms().displacement(&Vec2::zeros());
        assert_relative_eq!(u.x, -0.15, max_relative = 1e-15);
        assert_relative_eq!(u.y, 0.1, max_relative = 1e-15);
    }

    #[test]
    fn finite_difference_equilibrium_and_consistency() {
        let m = ms();
        let mat = Material::PlaneStrain {
            lambda: m.lambda,
            mu: m.mu,
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let eps = 1e-5;
        for _ in 0..1000 {
            let x = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let ex = Vec2::new(eps, 0.0);
            let ey = Vec2::new(0.0, eps);
            let dpx = (m.stress(&(x + ex)) - m.stress(&(x - ex))) / (2.0 * eps);
            let dpy = (m.stress(&(x + ey)) - m.stress(&(x - ey))) / (2.0 * eps);
            let div = Vec2::new(dpx[(0, 0)] + dpy[(0, 1)], dpx[(1, 0)] + dpy[(1, 1)]);
            let b = m.body_force(&x);
            let scale = div.norm().max(b.norm());
            assert!((div + b).norm() <= 1e-6 * scale, "{div} vs {b}");
            // stress from the constitutive law of the displacement gradient
            let grad_fd = Tensor2::from_columns(&[
                (m.displacement(&(x + ex)) - m.displacement(&(x - ex))) / (2.0 * eps),
                (m.displacement(&(x + ey)) - m.displacement(&(x - ey))) / (2.0 * eps),
            ]);
            assert!((grad_fd - m.gradient(&x)).norm() <= 1e-8);
            let p = mat.stress(&(Tensor2::identity() + m.gradient(&x)));
            assert!((p - m.stress(&x)).norm() <= 1e-10 * p.norm());
            let s = m.stress(&x);
            assert_eq!(s[(0, 1)], s[(1, 0)]);
        }
    }

    #[test]
    fn kirsch_limits() {
        let k = KirschSolution::new(1.0, 1.0).unwrap();
        for i in 0..=1000 {
            let t = i as f64 * std::f64::consts::PI / 1000.0;
            let s = k.polar_stress(1.0, t);
            assert!(s.rr.abs() + s.rt.abs() <= 1e-12);
        }
        assert_relative_eq!(k.polar_stress(1.0, FRAC_PI_2).tt, 3.0, max_relative = 1e-14);
        let far = k.cartesian_stress(&Vec2::new(3e3, 4e3));
        assert!((far - Tensor2::new(1.0, 0.0, 0.0, 0.0)).norm() < 1e-6);
        let top = k.cartesian_stress(&Vec2::new(0.0, 1.0));
        assert_relative_eq!(top[(0, 0)], 3.0, max_relative = 1e-14);
        assert!(k.material_stress(&Vec2::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn polar_cartesian_round_trip() {
        let k = KirschSolution::new(1.0, 2.5).unwrap();
        for i in 0..50 {
            let t = 0.1 + i as f64 * 0.12;
            let s = k.polar_stress(1.3 + 0.05 * i as f64, t);
            let back = cartesian_to_polar(&polar_to_cartesian(&s, t), t);
            assert!(
                (back.rr - s.rr).abs() + (back.tt - s.tt).abs() + (back.rt - s.rt).abs()
                    <= 1e-13 * 10.0
            );
        }
    }
}
