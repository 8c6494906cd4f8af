use std::path::{Path, PathBuf};

use super::fields::KirschSolution;
use super::manufactured::LevelRun;
use crate::correspondence::Material;
use crate::elastostatics::{
    rms_stress_error, solve_static, BcSpec, ErrorReport, LevelError, Model, Scheme, SolveConfig,
};
use crate::error::{Error, Result};
use crate::pointcloud::{
    generate_polar_grid, import_cloud, BrokenBonds, Metric, NodeKind, PointCloud, PolarGrid,
};
use crate::Tensor2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MeshKind {
    /// Structured polar grid with parametric families.
    Polar,
    /// Triangle-based clouds read from `plate_tri_L{level}.txt` in the given
    /// directory, with physical families.
    Triangular { dir: PathBuf },
}

impl MeshKind {
    /// Directory holding the shipped triangular fixtures.
    pub fn shipped_triangular() -> Self {
        MeshKind::Triangular {
            dir: Path::new(env!("CARGO_MANIFEST_DIR")).join("data"),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MeshKind::Polar => "polar",
            MeshKind::Triangular { .. } => "triangular",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlateConfig {
    pub scheme: Scheme,
    pub order: usize,
    pub mesh: MeshKind,
    pub levels: usize,
    pub poisson: f64,
    pub youngs: f64,
    pub hole_radius: f64,
    pub half_width: f64,
    pub t_x: f64,
    /// Radial and angular cell count of the coarsest polar level.
    pub base_cells: usize,
    /// Parametric horizon (polar) or `delta / h` (triangular); `None`
    /// selects 0.75 + n (polar) or 1.25 + n (triangular).
    pub horizon: Option<f64>,
    pub solve: SolveConfig,
}

impl PlateConfig {
    pub fn new(scheme: Scheme, order: usize, mesh: MeshKind) -> Self {
        Self {
            scheme,
            order,
            mesh,
            levels: 3,
            poisson: 0.3,
            youngs: 1.0,
            hole_radius: 1.0,
            half_width: 5.0,
            t_x: 1.0,
            base_cells: 25,
            horizon: None,
            solve: SolveConfig::default(),
        }
    }

    pub fn horizon_value(&self) -> f64 {
        self.horizon.unwrap_or(match self.mesh {
            MeshKind::Polar => 0.75 + self.order as f64,
            MeshKind::Triangular { .. } => 1.25 + self.order as f64,
        })
    }
}

/// Cloud of one level.
pub fn plate_cloud(config: &PlateConfig, level: usize) -> Result<PointCloud> {
    match &config.mesh {
        MeshKind::Polar => {
            let n = config.base_cells << level;
            generate_polar_grid(&PolarGrid {
                hole_radius: config.hole_radius,
                half_width: config.half_width,
                n_radial: n,
                n_angular: n,
                collar_layers: config.horizon_value().ceil() as usize,
            })
        }
        MeshKind::Triangular { dir } => import_cloud(dir.join(format!("plate_tri_L{level}.txt"))),
    }
}

/// Bulk nodes lying on a symmetry axis get the normal displacement fixed.
fn symmetry_constraints(cloud: &PointCloud) -> Vec<(usize, usize, f64)> {
    let tol = 1e-9 * cloud.spacing();
    let mut out = Vec::new();
    for (i, n) in cloud.nodes().iter().enumerate() {
        if n.kind != NodeKind::Bulk {
            continue;
        }
        if n.x.y.abs() <= tol {
            out.push((i, 1, 0.0));
        }
        if n.x.x.abs() <= tol {
            out.push((i, 0, 0.0));
        }
    }
    out
}

pub fn solve_plate_level(
    config: &PlateConfig,
    cloud: PointCloud,
    level: usize,
) -> Result<LevelRun> {
    let material = Material::plane_strain(config.youngs, config.poisson)?;
    let kirsch = KirschSolution::new(config.hole_radius, config.t_x)?;
    let (delta, metric) = match config.mesh {
        MeshKind::Polar => (config.horizon_value(), Metric::Parametric),
        MeshKind::Triangular { .. } => (config.horizon_value() * cloud.spacing(), Metric::Physical),
    };
    if cloud
        .nodes()
        .iter()
        .any(|n| n.kind == NodeKind::EssentialBc)
    {
        return Err(Error::invalid("plate clouds carry no essential-bc nodes"));
    }
    let model = Model::build(
        cloud,
        delta,
        metric,
        &BrokenBonds::new(),
        config.scheme.with_order(config.order),
        material,
    )?;
    let mut bc = BcSpec::from_fields(
        &model.cloud,
        |_| crate::Vec2::zeros(),
        |x| kirsch.cartesian_stress(x),
        |_| crate::Vec2::zeros(),
    );
    bc.constraints = symmetry_constraints(&model.cloud);
    let solution = solve_static(&model, &bc, &config.solve)?;
    let state = model.kinematic_state(solution.u.clone())?;
    let stress = model.bulk_stresses(&state)?;
    let exact: Vec<Tensor2> = model
        .cloud
        .nodes()
        .iter()
        .map(|n| match n.kind {
            NodeKind::Bulk => kirsch.material_stress(&n.x),
            _ => Ok(Tensor2::zeros()),
        })
        .collect::<Result<_>>()?;
    let computed: Vec<Tensor2> = stress
        .iter()
        .map(|p| p.unwrap_or_else(Tensor2::zeros))
        .collect();
    let error = LevelError {
        level,
        h: model.cloud.spacing(),
        rms_u: f64::NAN,
        rms_stress: rms_stress_error(&computed, &exact, &model.bulk)?,
    };
    Ok(LevelRun {
        error,
        model,
        solution,
        stress,
    })
}

/// Result of a plate study: the error table and the stress concentration
/// observed on the finest level.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateReport {
    pub report: ErrorReport,
    /// `P11` at the bulk node nearest `(0, a)` on the finest level.
    pub hoop_stress: f64,
    pub hoop_node: usize,
}

/// Solves every level; returns the report and the finest level.
pub fn plate_study(config: &PlateConfig) -> Result<(PlateReport, LevelRun)> {
    if config.levels == 0 {
        return Err(Error::invalid("at least one level is required"));
    }
    let mut levels = Vec::with_capacity(config.levels);
    let mut finest = None;
    for l in 0..config.levels {
        let run = solve_plate_level(config, plate_cloud(config, l)?, l)?;
        levels.push(run.error);
        finest = Some(run);
    }
    let run = finest.expect("at least one level");
    let top = crate::Vec2::new(0.0, config.hole_radius);
    let node = run
        .model
        .cloud
        .nearest(&top, |n| n.kind == NodeKind::Bulk)
        .ok_or_else(|| Error::invalid("plate cloud has no bulk nodes"))?;
    let hoop_stress = run.stress[node].ok_or(Error::MissingValue {
        node,
        what: "bulk stress",
    })?[(0, 0)];
    let report = PlateReport {
        report: ErrorReport::new(config.scheme.with_order(config.order), levels),
        hoop_stress,
        hoop_node: node,
    };
    Ok((report, run))
}

pub fn run_plate_hole(config: &PlateConfig) -> Result<PlateReport> {
    Ok(plate_study(config)?.0)
}
