use super::fields::ManufacturedSolution;
use crate::correspondence::Material;
use crate::elastostatics::{
    rms_displacement_error, rms_stress_error, solve_static, BcSpec, ErrorReport, LevelError, Model,
    Scheme, SolveConfig, StaticSolution,
};
use crate::error::{Error, Result};
use crate::pointcloud::{
    add_collar, generate_uniform_grid, perturb_grid, refine_by_midpoints, BoxDomain, BrokenBonds,
    Metric, NodeKind, PointCloud,
};
use crate::{Tensor2, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Uniform,
    /// Normal perturbation of the coarsest level with standard deviation
    /// 15% of the spacing, then systematic refinement.
    NonUniform {
        seed: u64,
    },
}

impl GridKind {
    pub fn name(&self) -> &'static str {
        match self {
            GridKind::Uniform => "uniform",
            GridKind::NonUniform { .. } => "perturbed",
        }
    }
}

/// Default horizon multiplier `delta / h` for order `n`: 2.5, 3.5, 4.5.
pub fn default_horizon_factor(order: usize) -> f64 {
    order as f64 + 1.5
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedConfig {
    pub scheme: Scheme,
    pub order: usize,
    pub grid: GridKind,
    /// Spacing of the coarsest level.
    pub base_h: f64,
    pub levels: usize,
    /// `delta / h`; `None` selects [`default_horizon_factor`].
    pub horizon_factor: Option<f64>,
    pub youngs: f64,
    pub poisson: f64,
    pub solve: SolveConfig,
}

impl ManufacturedConfig {
    pub fn new(scheme: Scheme, order: usize, grid: GridKind) -> Self {
        Self {
            scheme,
            order,
            grid,
            base_h: 0.2,
            levels: 3,
            horizon_factor: None,
            youngs: 1e5,
            poisson: 0.3,
            solve: SolveConfig::default(),
        }
    }

    pub fn factor(&self) -> f64 {
        self.horizon_factor
            .unwrap_or_else(|| default_horizon_factor(self.order))
    }
}

/// One solved refinement level.
#[derive(Debug, Clone)]
pub struct LevelRun {
    pub error: LevelError,
    pub model: Model,
    pub solution: StaticSolution,
    /// Computed `P` at bulk nodes.
    pub stress: Vec<Option<Tensor2>>,
}

/// The coarsest square cloud with its collar. The collar is `ceil(factor)`
/// layers thick so refined levels keep a collar at least `delta` wide.
pub fn manufactured_base_cloud(base_h: f64, factor: f64, grid: GridKind) -> Result<PointCloud> {
    let c = generate_uniform_grid(BoxDomain::rect([-1.0, -1.0], [1.0, 1.0]), base_h)?;
    let c = add_collar(&c, factor.ceil() as usize, |p| {
        if p.x < -1.0 || p.y < -1.0 {
            NodeKind::EssentialBc
        } else {
            NodeKind::NaturalBc
        }
    })?;
    match grid {
        GridKind::Uniform => Ok(c),
        GridKind::NonUniform { seed } => perturb_grid(&c, 0.15, seed),
    }
}

/// Clouds for all levels, coarsest first.
pub fn manufactured_clouds(config: &ManufacturedConfig) -> Result<Vec<PointCloud>> {
    if config.levels == 0 {
        return Err(Error::invalid("at least one level is required"));
    }
    let mut clouds = vec![manufactured_base_cloud(
        config.base_h,
        config.factor(),
        config.grid,
    )?];
    for _ in 1..config.levels {
        let next = refine_by_midpoints(clouds.last().unwrap())?;
        clouds.push(next);
    }
    Ok(clouds)
}

/// Solves one level on a prepared cloud.
pub fn solve_manufactured_level(
    config: &ManufacturedConfig,
    cloud: PointCloud,
    level: usize,
) -> Result<LevelRun> {
    let material = Material::plane_strain(config.youngs, config.poisson)?;
    let ms = ManufacturedSolution::standard(&material)?;
    let h = config.base_h / (1usize << level) as f64;
    let model = Model::build(
        cloud,
        config.factor() * h,
        Metric::Physical,
        &BrokenBonds::new(),
        config.scheme.with_order(config.order),
        material,
    )?;
    let bc = BcSpec::from_fields(
        &model.cloud,
        |x| ms.displacement(x),
        |x| ms.stress(x),
        |x| ms.body_force(x),
    );
    let solution = solve_static(&model, &bc, &config.solve)?;
    let state = model.kinematic_state(solution.u.clone())?;
    let stress = model.bulk_stresses(&state)?;
    let exact_u: Vec<Vec2> = model
        .cloud
        .nodes()
        .iter()
        .map(|n| ms.displacement(&n.x))
        .collect();
    let exact_p: Vec<Tensor2> = model
        .cloud
        .nodes()
        .iter()
        .map(|n| ms.stress(&n.x))
        .collect();
    let computed_p: Vec<Tensor2> = stress
        .iter()
        .map(|p| p.unwrap_or_else(Tensor2::zeros))
        .collect();
    let error = LevelError {
        level,
        h: model.cloud.spacing(),
        rms_u: rms_displacement_error(&solution.u, &exact_u, &model.bulk, 2)?,
        rms_stress: rms_stress_error(&computed_p, &exact_p, &model.bulk)?,
    };
    Ok(LevelRun {
        error,
        model,
        solution,
        stress,
    })
}

/// Solves every level; returns the error table and the finest level.
pub fn manufactured_study(config: &ManufacturedConfig) -> Result<(ErrorReport, LevelRun)> {
    let mut levels = Vec::with_capacity(config.levels);
    let mut finest = None;
    for (l, cloud) in manufactured_clouds(config)?.into_iter().enumerate() {
        let run = solve_manufactured_level(config, cloud, l)?;
        levels.push(run.error);
        finest = Some(run);
    }
    let report = ErrorReport::new(config.scheme.with_order(config.order), levels);
    Ok((report, finest.expect("at least one level")))
}

/// Displacement and stress errors of every level and the fitted rates.
pub fn run_manufactured(config: &ManufacturedConfig) -> Result<ErrorReport> {
    Ok(manufactured_study(config)?.0)
}

/// Error reports for each horizon multiplier, in the order given.
pub fn run_horizon_sensitivity(
    base: &ManufacturedConfig,
    factors: &[f64],
) -> Result<Vec<(f64, ErrorReport)>> {
    factors
        .iter()
        .map(|&f| {
            let config = ManufacturedConfig {
                horizon_factor: Some(f),
                ..base.clone()
            };
            Ok((f, run_manufactured(&config)?))
        })
        .collect()
}
