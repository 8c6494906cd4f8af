//! Closed-form reference fields and the benchmark drivers built on them.

mod fields;
mod manufactured;
mod patch;
mod plate;

pub use fields::{
    cartesian_to_polar, polar_to_cartesian, KirschSolution, ManufacturedSolution, PolarStress,
};
pub use manufactured::{
    default_horizon_factor, manufactured_base_cloud, manufactured_clouds, manufactured_study,
    run_horizon_sensitivity, run_manufactured, solve_manufactured_level, GridKind, LevelRun,
    ManufacturedConfig,
};
pub use patch::{patch_field, run_patch_test, unit_square_cloud, PatchReport, PATCH_TOLERANCE};
pub use plate::{
    plate_cloud, plate_study, run_plate_hole, solve_plate_level, MeshKind, PlateConfig, PlateReport,
};
