use crate::correspondence::Material;
use crate::elastostatics::{BcSpec, Model, Scheme};
use crate::error::Result;
use crate::pointcloud::{
    add_collar, generate_uniform_grid, perturb_grid, BoxDomain, BrokenBonds, Metric, NodeKind,
    PointCloud,
};
use crate::{Tensor2, Vec2};

/// Outcome of an affine patch test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchReport {
    /// Largest `|F - (I + A)|` over bulk nodes.
    pub max_gradient_error: f64,
    /// Largest `|r_I|` over bulk nodes, in units of `(lambda + 2 mu) / h`.
    pub max_residual: f64,
    pub passed: bool,
}

/// Tolerance on both reported quantities.
pub const PATCH_TOLERANCE: f64 = 1e-10;

/// Affine field used by [`run_patch_test`].
pub fn patch_field() -> (Tensor2, Vec2) {
    (
        Tensor2::new(0.012, -0.007, 0.004, -0.009),
        Vec2::new(0.02, -0.01),
    )
}

/// Unit-square cloud with spacing `h` and a collar of `layers` nodes:
/// essential on the left, natural on the other sides. With a seed, every
/// node is perturbed by 15% of the spacing.
pub fn unit_square_cloud(h: f64, layers: usize, seed: Option<u64>) -> Result<PointCloud> {
    let c = generate_uniform_grid(BoxDomain::rect([0.0, 0.0], [1.0, 1.0]), h)?;
    let c = add_collar(&c, layers, |p| {
        if p.x < 0.0 {
            NodeKind::EssentialBc
        } else {
            NodeKind::NaturalBc
        }
    })?;
    match seed {
        Some(seed) => perturb_grid(&c, 0.15, seed),
        None => Ok(c),
    }
}

/// Evaluates the exact affine field `u = A X + c` at every node with the
/// matching data on all collars (displacement on essential nodes, the
/// constant stress on natural-bc nodes). Free-surface nodes are not part of
/// an affine patch and should not be present.
pub fn run_patch_test(
    cloud: PointCloud,
    scheme: Scheme,
    order: usize,
    delta: f64,
    metric: Metric,
    material: Material,
) -> Result<PatchReport> {
    let (a, c) = patch_field();
    let model = Model::build(
        cloud,
        delta,
        metric,
        &BrokenBonds::new(),
        scheme.with_order(order),
        material,
    )?;
    let p = material.stress(&(Tensor2::identity() + a));
    let bc = BcSpec::from_fields(&model.cloud, |x| a * x + c, |_| p, |_| Vec2::zeros());
    let u: Vec<Vec2> = model.cloud.nodes().iter().map(|n| a * n.x + c).collect();
    let state = model.kinematic_state(u.clone())?;
    let r = model.residual_from_state(&state, &bc)?;
    let scale = material.p_wave_modulus() / model.cloud.spacing();
    let mut max_gradient_error = 0.0f64;
    let mut max_residual = 0.0f64;
    for &i in &model.bulk {
        max_gradient_error =
            max_gradient_error.max((state.gradient(i)? - Tensor2::identity() - a).norm());
        max_residual = max_residual.max(r[i].norm() / scale);
    }
    Ok(PatchReport {
        max_gradient_error,
        max_residual,
        passed: max_gradient_error <= PATCH_TOLERANCE && max_residual <= PATCH_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn cloud(seed: u64) -> PointCloud {
        unit_square_cloud(0.1, 5, Some(seed)).unwrap()
    }

    #[test]
    fn passes_for_every_scheme() {
        let m = Material::plane_strain(1e5, 0.3).unwrap();
        for scheme in Scheme::ALL {
            let r = run_patch_test(cloud(1), scheme, 2, 0.35, Metric::Physical, m).unwrap();
            assert!(r.passed, "{scheme}: {r:?}");
        }
    }

    #[test]
    fn tiny_horizon_is_a_build_error() {
        let m = Material::plane_strain(1.0, 0.3).unwrap();
        let e = run_patch_test(cloud(2), Scheme::BaRk, 3, 0.11, Metric::Physical, m).unwrap_err();
        assert!(matches!(e, Error::Unisolvency { .. }), "{e}");
    }
}
