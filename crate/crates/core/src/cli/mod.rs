//! Command-line front end: argument parsing, run orchestration, CSV and
//! plot emission, and the machine-readable error line.
//!
//! Every failure prints exactly one line on stderr,
//! `error kind=<tag> exit=<code> [key=<key>] msg="<text>"`, and returns
//! exit code 1 (validation) or 2 (numerical failure).

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::benchmarks::{
    default_horizon_factor, manufactured_study, plate_study, run_horizon_sensitivity,
    run_patch_test, unit_square_cloud, GridKind, KirschSolution, LevelRun, ManufacturedConfig,
    MeshKind, PlateConfig, PATCH_TOLERANCE,
};
use crate::correspondence::Material;
use crate::dispersion::{
    count_zero_frequencies, default_k_grid, sweep, WaveConfig, WaveGrid, SWEEP_POINTS,
    ZERO_FREQUENCY_TOLERANCE,
};
use crate::elastostatics::{
    convergence_rate, ErrorReport, LinearSolver, Model, Scheme, SolveConfig,
};
use crate::error::{Error, Result};
use crate::gradops::Neighborhood;
use crate::pointcloud::{import_cloud, BrokenBonds, Metric, PointCloud};
pub use config::{parse_config, parse_pairs, Command, GridChoice, MeshChoice, RunConfig};
use output::{num, Chart, Csv, Series};

/// Spacing of the generated unit-square cloud used by `patch-test` and
/// `dump-weights` when no cloud file is given.
pub const SQUARE_SPACING: f64 = 0.1;
/// Default `delta / h` of the dispersion bar.
pub const DEFAULT_WAVE_HORIZON: f64 = 3.0;
/// Default multipliers of the horizon study.
pub const DEFAULT_HORIZONS: [f64; 3] = [2.75, 3.5, 4.25];

#[derive(Debug, Parser)]
#[command(
    name = "pdcorr",
    version,
    about = "Meshfree peridynamic correspondence toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Flat `key = value` file; flags override its values
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory [default: pdcorr-out]
    #[arg(long, value_name = "DIR")]
    out: Option<String>,
    /// Seed for perturbed grids [default: 1]
    #[arg(long)]
    seed: Option<String>,
    #[arg(long, value_name = "rk|gmls|ba-rk|ba-gmls")]
    formulation: Option<String>,
    /// Polynomial order, 1 to 3 [default: 2; patch-test runs all three]
    #[arg(long)]
    order: Option<String>,
    /// Worker threads [default: all cores]
    #[arg(long)]
    threads: Option<String>,
}

impl CommonArgs {
    fn pairs(&self) -> Vec<(String, String)> {
        let mut v = Vec::new();
        let fields = [
            ("out", &self.out),
            ("seed", &self.seed),
            ("formulation", &self.formulation),
            ("order", &self.order),
            ("threads", &self.threads),
        ];
        for (k, x) in fields {
            if let Some(x) = x {
                v.push((k.to_string(), x.clone()));
            }
        }
        v
    }
}

/// Declares a flag struct whose fields mirror config keys one to one.
macro_rules! key_args {
    ($name:ident { $( $(#[$doc:meta])* $field:ident ),* $(,)? }) => {
        #[derive(Debug, Args)]
        struct $name {
            $(
                $(#[$doc])*
                #[arg(long)]
                $field: Option<String>,
            )*
        }

        impl $name {
            #[cfg(test)]
            const KEYS: &'static [&'static str] = &[$(stringify!($field)),*];

            fn pairs(&self) -> Vec<(String, String)> {
                let mut v = Vec::new();
                $(
                    if let Some(x) = &self.$field {
                        v.push((stringify!($field).to_string(), x.clone()));
                    }
                )*
                v
            }
        }
    };
}

key_args!(PatchKeys {
    /// delta / h [default: n + 1.5]
    horizon,
    /// Node-cloud file [default: perturbed unit square, h = 0.1]
    cloud,
    /// Young's modulus [default: 1e5]
    youngs,
    /// Poisson ratio [default: 0.3]
    poisson,
});

key_args!(DispersionKeys {
    /// delta / h [default: 3]
    horizon,
    /// uniform | perturbed [default: uniform]
    grid,
    /// Number of k h / 2 pi samples in (0, 1] [default: 200]
    points,
    /// Young's modulus [default: 1]
    youngs,
    /// Density [default: 1]
    density,
    /// Write dispersion.svg (true | false)
    plot,
});

key_args!(ManufacturedKeys {
    /// delta / h [default: n + 1.5]
    horizon,
    /// uniform | perturbed [default: uniform]
    grid,
    /// Refinement levels [default: 3]
    levels,
    /// Coarsest spacing [default: 0.2]
    base_h,
    /// Young's modulus [default: 1e5]
    youngs,
    /// Poisson ratio [default: 0.3]
    poisson,
    /// auto | direct | gmres [default: auto]
    solver,
    /// Write fields.csv for the finest level (true | false)
    fields,
    /// Write convergence.svg (true | false)
    plot,
});

key_args!(PlateKeys {
    /// Parametric horizon (polar) or delta / h (triangular) [default: n + 0.75 | n + 1.25]
    horizon,
    /// polar | triangular [default: polar]
    mesh,
    /// Directory with plate_tri_L{level}.txt [default: shipped fixtures]
    mesh_dir,
    /// Refinement levels [default: 3]
    levels,
    /// Young's modulus [default: 1]
    youngs,
    /// Poisson ratio [default: 0.3]
    poisson,
    /// auto | direct | gmres [default: auto]
    solver,
    /// Write fields.csv for the finest level (true | false)
    fields,
    /// Write convergence.svg (true | false)
    plot,
});

key_args!(HorizonKeys {
    /// Comma-separated delta / h values [default: 2.75,3.5,4.25]
    horizons,
    /// uniform | perturbed [default: perturbed]
    grid,
    /// Refinement levels [default: 3]
    levels,
    /// Coarsest spacing [default: 0.2]
    base_h,
    /// Young's modulus [default: 1e5]
    youngs,
    /// Poisson ratio [default: 0.3]
    poisson,
    /// auto | direct | gmres [default: auto]
    solver,
    /// Write horizon.svg (true | false)
    plot,
});

key_args!(WeightKeys {
    /// delta / h [default: n + 1.5]
    horizon,
    /// uniform | perturbed, for the generated cloud [default: uniform]
    grid,
    /// Node-cloud file [default: unit square, h = 0.1]
    cloud,
    /// kinematic | stress [default: kinematic]
    neighborhood,
});

#[derive(Debug, Subcommand)]
enum Sub {
    /// Affine patch test on a perturbed cloud with mixed boundary data
    PatchTest {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        keys: PatchKeys,
    },
    /// Complex dispersion relation of the 1D bar
    Dispersion {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        keys: DispersionKeys,
    },
    /// Convergence study with the manufactured solution
    Manufactured {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        keys: ManufacturedKeys,
    },
    /// Convergence study of the quarter plate with a circular hole
    PlateHole {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        keys: PlateKeys,
    },
    /// Manufactured errors for several horizons
    HorizonStudy {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        keys: HorizonKeys,
    },
    /// Gradient weights of every node that carries them
    DumpWeights {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        keys: WeightKeys,
    },
}

impl Sub {
    fn split(&self) -> (Command, &CommonArgs, Vec<(String, String)>) {
        match self {
            Sub::PatchTest { common, keys } => (Command::PatchTest, common, keys.pairs()),
            Sub::Dispersion { common, keys } => (Command::Dispersion, common, keys.pairs()),
            Sub::Manufactured { common, keys } => (Command::Manufactured, common, keys.pairs()),
            Sub::PlateHole { common, keys } => (Command::PlateHole, common, keys.pairs()),
            Sub::HorizonStudy { common, keys } => (Command::HorizonStudy, common, keys.pairs()),
            Sub::DumpWeights { common, keys } => (Command::DumpWeights, common, keys.pairs()),
        }
    }
}

fn load(sub: &Sub) -> Result<RunConfig> {
    let (command, common, keys) = sub.split();
    let file = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Config {
                key: "config".into(),
                msg: format!("{}: {e}", path.display()),
            })?;
            parse_pairs(&text)?
        }
        None => Vec::new(),
    };
    let mut flags = common.pairs();
    flags.extend(keys);
    parse_config(command, &file, &flags)
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        2
    } else {
        1
    }
}

/// The single diagnostic line for `e`.
pub fn error_line(e: &Error) -> String {
    let key = match e {
        Error::Config { key, .. } => format!(" key={key}"),
        _ => String::new(),
    };
    format!(
        "error kind={} exit={}{key} msg={:?}",
        e.kind(),
        exit_code(e),
        e.to_string()
    )
}

/// Parses `args` (program name first), runs the subcommand, and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let text = e.to_string();
            let first = text
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            eprintln!("error kind=usage exit=1 msg={first:?}");
            return 1;
        }
    };
    match load(&cli.command).and_then(|c| execute(&c)) {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("{}", error_line(&e));
            exit_code(&e)
        }
    }
}

/// Runs a validated configuration, writing its artifacts under `c.out`.
/// Returns a short human-readable summary.
pub fn execute(c: &RunConfig) -> Result<String> {
    fs::create_dir_all(&c.out)?;
    let body = || match c.command {
        Command::PatchTest => patch_test(c),
        Command::Dispersion => dispersion(c),
        Command::Manufactured => manufactured(c),
        Command::PlateHole => plate_hole(c),
        Command::HorizonStudy => horizon_study(c),
        Command::DumpWeights => dump_weights(c),
    };
    match c.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config {
                key: "threads".into(),
                msg: e.to_string(),
            })?
            .install(body),
        None => body(),
    }
}

fn solve_config(c: &RunConfig) -> SolveConfig {
    SolveConfig {
        solver: c.solver.unwrap_or(LinearSolver::Auto),
        ..SolveConfig::default()
    }
}

fn material_for(cloud: &PointCloud, youngs: f64, poisson: f64) -> Result<Material> {
    if cloud.dim() == 1 {
        Material::uniaxial(youngs)
    } else {
        Material::plane_strain(youngs, poisson)
    }
}

fn square_cloud(c: &RunConfig, factor: f64, perturbed: bool) -> Result<PointCloud> {
    match &c.cloud {
        Some(path) => import_cloud(path),
        None => unit_square_cloud(
            SQUARE_SPACING,
            factor.ceil() as usize,
            perturbed.then_some(c.seed),
        ),
    }
}

fn patch_test(c: &RunConfig) -> Result<String> {
    let schemes = c.scheme.map_or(Scheme::ALL.to_vec(), |s| vec![s]);
    let orders = c.order.map_or(vec![1, 2, 3], |n| vec![n]);
    let (youngs, poisson) = (c.youngs.unwrap_or(1e5), c.poisson.unwrap_or(0.3));
    let mut table = Csv::new(&[
        "formulation",
        "n",
        "delta_over_h",
        "max_gradient_error",
        "max_residual",
        "passed",
    ]);
    let mut summary = String::new();
    let mut worst: Option<(String, f64)> = None;
    for &scheme in &schemes {
        for &n in &orders {
            let factor = c.horizon.unwrap_or_else(|| default_horizon_factor(n));
            let cloud = square_cloud(c, factor, true)?;
            let delta = factor * cloud.spacing();
            let material = material_for(&cloud, youngs, poisson)?;
            let r = run_patch_test(cloud, scheme, n, delta, Metric::Physical, material)?;
            table.push(vec![
                scheme.to_string(),
                n.to_string(),
                num(factor),
                num(r.max_gradient_error),
                num(r.max_residual),
                r.passed.to_string(),
            ]);
            let _ = writeln!(
                summary,
                "{scheme} n={n}: gradient error {:.2e}, residual {:.2e}, {}",
                r.max_gradient_error,
                r.max_residual,
                if r.passed { "pass" } else { "FAIL" }
            );
            let value = r.max_gradient_error.max(r.max_residual);
            if !r.passed && worst.as_ref().is_none_or(|(_, v)| value > *v) {
                worst = Some((format!("patch test {scheme} n={n}"), value));
            }
        }
    }
    table.write(&c.out.join("patch.csv"))?;
    match worst {
        Some((what, value)) => Err(Error::CheckFailed {
            what,
            value,
            tolerance: PATCH_TOLERANCE,
        }),
        None => Ok(summary),
    }
}

fn dispersion(c: &RunConfig) -> Result<String> {
    let scheme = c.scheme_required()?;
    let factor = c.horizon.unwrap_or(DEFAULT_WAVE_HORIZON);
    let grid = match c.grid.unwrap_or(GridChoice::Uniform) {
        GridChoice::Uniform => WaveGrid::Uniform,
        GridChoice::Perturbed => WaveGrid::Perturbed { seed: c.seed },
    };
    let mut w = WaveConfig::new(scheme, factor, grid);
    w.order = c.order_or_default();
    w.youngs = c.youngs.unwrap_or(1.0);
    w.density = c.density.unwrap_or(1.0);
    w.validate()?;
    let ks = default_k_grid(w.h, c.points.unwrap_or(SWEEP_POINTS));
    let curve = sweep(&w, &ks)?;
    let norm = curve.normalized();
    let mut table = Csv::new(&[
        "k_norm",
        "re_omega_norm",
        "im_omega_norm",
        "formulation",
        "delta_over_h",
        "grid",
    ]);
    for p in &norm {
        table.push(vec![
            num(p.k),
            num(p.re_omega),
            num(p.im_omega),
            scheme.to_string(),
            num(factor),
            grid.name().to_string(),
        ]);
    }
    table.write(&c.out.join("dispersion.csv"))?;
    if c.plot {
        let mut series = vec![
            Series {
                name: format!("Re {scheme}"),
                points: norm.iter().map(|p| (p.k, p.re_omega)).collect(),
                dashed: false,
                markers: false,
            },
            Series {
                name: "local".into(),
                points: norm.iter().map(|p| (p.k, p.k)).collect(),
                dashed: true,
                markers: false,
            },
        ];
        if matches!(grid, WaveGrid::Perturbed { .. }) {
            series.push(Series {
                name: format!("Im {scheme}"),
                points: norm.iter().map(|p| (p.k, p.im_omega)).collect(),
                dashed: false,
                markers: false,
            });
        }
        Chart {
            title: format!(
                "{scheme}, n = {}, delta = {factor} h, {} grid",
                w.order,
                grid.name()
            ),
            x_label: "k h / 2 pi".into(),
            y_label: "omega h / (2 pi c)".into(),
            log_log: false,
            series,
        }
        .write(&c.out.join("dispersion.svg"))?;
    }
    let max_im = norm.iter().map(|p| p.im_omega.abs()).fold(0.0, f64::max);
    Ok(format!(
        "{scheme} n={} delta={factor}h {} grid: {} points, {} zero frequencies, max |Im| {max_im:.3e}\n",
        w.order,
        grid.name(),
        norm.len(),
        count_zero_frequencies(&curve, ZERO_FREQUENCY_TOLERANCE)
    ))
}

/// Which error column drives the `rate` column.
#[derive(Clone, Copy)]
enum Metric2 {
    Displacement,
    Stress,
}

/// Rows of `convergence.csv`. `rate` is the least-squares rate over levels
/// `0..=level` of the primary error; empty on the first level.
fn convergence_table(report: &ErrorReport, primary: Metric2) -> Result<Csv> {
    let mut table = Csv::new(&[
        "level",
        "h",
        "n",
        "formulation",
        "rms_u",
        "rms_stress",
        "rate",
    ]);
    let hs: Vec<f64> = report.levels.iter().map(|l| l.h).collect();
    let es: Vec<f64> = report
        .levels
        .iter()
        .map(|l| match primary {
            Metric2::Displacement => l.rms_u,
            Metric2::Stress => l.rms_stress,
        })
        .collect();
    for (i, l) in report.levels.iter().enumerate() {
        let rate = if i == 0 {
            String::new()
        } else {
            num(convergence_rate(&es[..=i], &hs[..=i])?)
        };
        table.push(vec![
            l.level.to_string(),
            num(l.h),
            report.formulation.order.to_string(),
            report.formulation.scheme().to_string(),
            num(l.rms_u),
            num(l.rms_stress),
            rate,
        ]);
    }
    Ok(table)
}

fn convergence_chart(report: &ErrorReport, title: String) -> Chart {
    let series = [("rms_u", 0), ("rms_stress", 1)]
        .into_iter()
        .map(|(name, col)| Series {
            name: name.into(),
            points: report
                .levels
                .iter()
                .map(|l| (l.h, if col == 0 { l.rms_u } else { l.rms_stress }))
                .collect(),
            dashed: false,
            markers: true,
        })
        .filter(|s| s.points.iter().any(|p| p.1.is_finite()))
        .collect();
    Chart {
        title,
        x_label: "h".into(),
        y_label: "RMS error".into(),
        log_log: true,
        series,
    }
}

/// Displacement and stress of the bulk nodes of a solved level.
fn fields_table(run: &LevelRun) -> Csv {
    let mut table = Csv::new(&["id", "x", "y", "u1", "u2", "P11", "P12", "P21", "P22"]);
    for &i in &run.model.bulk {
        let n = &run.model.cloud.nodes()[i];
        let u = run.solution.u[i];
        let p = run.stress[i].unwrap_or_else(|| crate::Tensor2::from_element(f64::NAN));
        table.push(vec![
            n.id.to_string(),
            num(n.x.x),
            num(n.x.y),
            num(u.x),
            num(u.y),
            num(p[(0, 0)]),
            num(p[(0, 1)]),
            num(p[(1, 0)]),
            num(p[(1, 1)]),
        ]);
    }
    table
}

fn manufactured_config(c: &RunConfig, default_grid: GridChoice) -> Result<ManufacturedConfig> {
    let grid = match c.grid.unwrap_or(default_grid) {
        GridChoice::Uniform => GridKind::Uniform,
        GridChoice::Perturbed => GridKind::NonUniform { seed: c.seed },
    };
    let mut m = ManufacturedConfig::new(c.scheme_required()?, c.order_or_default(), grid);
    m.base_h = c.base_h.unwrap_or(m.base_h);
    m.levels = c.levels.unwrap_or(m.levels);
    m.horizon_factor = c.horizon;
    m.youngs = c.youngs.unwrap_or(m.youngs);
    m.poisson = c.poisson.unwrap_or(m.poisson);
    m.solve = solve_config(c);
    Ok(m)
}

fn rate_text(r: Option<f64>) -> String {
    r.map_or_else(|| "-".into(), |r| format!("{r:.3}"))
}

fn manufactured(c: &RunConfig) -> Result<String> {
    let m = manufactured_config(c, GridChoice::Uniform)?;
    let (report, finest) = manufactured_study(&m)?;
    convergence_table(&report, Metric2::Displacement)?.write(&c.out.join("convergence.csv"))?;
    if c.fields {
        fields_table(&finest).write(&c.out.join("fields.csv"))?;
    }
    if c.plot {
        let title = format!(
            "manufactured, {} n = {}, {} grid",
            m.scheme,
            m.order,
            m.grid.name()
        );
        convergence_chart(&report, title).write(&c.out.join("convergence.svg"))?;
    }
    let fin = report.finest().expect("at least one level");
    Ok(format!(
        "{} n={} delta={}h {} grid: finest rms_u {:.3e}, rms_stress {:.3e}; rates u {} stress {}\n",
        m.scheme,
        m.order,
        m.factor(),
        m.grid.name(),
        fin.rms_u,
        fin.rms_stress,
        rate_text(report.rate_u),
        rate_text(report.rate_stress)
    ))
}

fn plate_hole(c: &RunConfig) -> Result<String> {
    let mesh = match c.mesh.unwrap_or(MeshChoice::Polar) {
        MeshChoice::Polar => MeshKind::Polar,
        MeshChoice::Triangular => match &c.mesh_dir {
            Some(dir) => MeshKind::Triangular { dir: dir.clone() },
            None => MeshKind::shipped_triangular(),
        },
    };
    let mut p = PlateConfig::new(c.scheme_required()?, c.order_or_default(), mesh);
    p.levels = c.levels.unwrap_or(p.levels);
    p.youngs = c.youngs.unwrap_or(p.youngs);
    p.poisson = c.poisson.unwrap_or(p.poisson);
    p.horizon = c.horizon;
    p.solve = solve_config(c);
    let (plate, finest) = plate_study(&p)?;
    convergence_table(&plate.report, Metric2::Stress)?.write(&c.out.join("convergence.csv"))?;
    let x = finest.model.cloud.position(plate.hoop_node);
    let exact = KirschSolution::new(p.hole_radius, p.t_x)?.cartesian_stress(&x)[(0, 0)];
    let mut summary = Csv::new(&[
        "formulation",
        "n",
        "mesh",
        "poisson",
        "horizon",
        "hoop_node",
        "x",
        "y",
        "hoop_stress",
        "hoop_exact",
        "rate",
    ]);
    summary.push(vec![
        p.scheme.to_string(),
        p.order.to_string(),
        p.mesh.name().to_string(),
        num(p.poisson),
        num(p.horizon_value()),
        finest.model.cloud.nodes()[plate.hoop_node].id.to_string(),
        num(x.x),
        num(x.y),
        num(plate.hoop_stress),
        num(exact),
        plate.report.rate_stress.map(num).unwrap_or_default(),
    ]);
    summary.write(&c.out.join("plate.csv"))?;
    if c.fields {
        fields_table(&finest).write(&c.out.join("fields.csv"))?;
    }
    if c.plot {
        let title = format!(
            "plate with hole, {} n = {}, {} mesh",
            p.scheme,
            p.order,
            p.mesh.name()
        );
        convergence_chart(&plate.report, title).write(&c.out.join("convergence.svg"))?;
    }
    let fin = plate.report.finest().expect("at least one level");
    Ok(format!(
        "{} n={} {} mesh nu={}: finest rms_stress {:.3e}, rate {}; hoop stress {:.4} (exact {:.4}) at ({:.4}, {:.4})\n",
        p.scheme,
        p.order,
        p.mesh.name(),
        p.poisson,
        fin.rms_stress,
        rate_text(plate.report.rate_stress),
        plate.hoop_stress,
        exact,
        x.x,
        x.y
    ))
}

fn horizon_study(c: &RunConfig) -> Result<String> {
    let m = manufactured_config(c, GridChoice::Perturbed)?;
    let factors = c
        .horizons
        .clone()
        .unwrap_or_else(|| DEFAULT_HORIZONS.to_vec());
    let results = run_horizon_sensitivity(&m, &factors)?;
    let mut table = Csv::new(&[
        "delta_over_h",
        "level",
        "h",
        "n",
        "formulation",
        "rms_u",
        "rms_stress",
    ]);
    for (f, report) in &results {
        for l in &report.levels {
            table.push(vec![
                num(*f),
                l.level.to_string(),
                num(l.h),
                m.order.to_string(),
                m.scheme.to_string(),
                num(l.rms_u),
                num(l.rms_stress),
            ]);
        }
    }
    table.write(&c.out.join("horizon.csv"))?;
    if c.plot {
        let series = results
            .iter()
            .map(|(f, r)| Series {
                name: format!("delta = {f} h"),
                points: r.levels.iter().map(|l| (l.h, l.rms_u)).collect(),
                dashed: false,
                markers: true,
            })
            .collect();
        Chart {
            title: format!(
                "horizon study, {} n = {}, {} grid",
                m.scheme,
                m.order,
                m.grid.name()
            ),
            x_label: "h".into(),
            y_label: "RMS displacement error".into(),
            log_log: true,
            series,
        }
        .write(&c.out.join("horizon.svg"))?;
    }
    let mut summary = String::new();
    for level in 0..m.levels {
        let errs: Vec<f64> = results.iter().map(|(_, r)| r.levels[level].rms_u).collect();
        let hi = errs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = errs.iter().copied().fold(f64::INFINITY, f64::min);
        let _ = writeln!(
            summary,
            "{} level {level} h={:.4}: rms_u spread {:.3} across {} horizons",
            m.scheme,
            results[0].1.levels[level].h,
            hi / lo,
            errs.len()
        );
    }
    Ok(summary)
}

fn dump_weights(c: &RunConfig) -> Result<String> {
    let scheme = c.scheme_required()?;
    let n = c.order_or_default();
    let factor = c.horizon.unwrap_or_else(|| default_horizon_factor(n));
    let cloud = square_cloud(c, factor, c.grid == Some(GridChoice::Perturbed))?;
    let delta = factor * cloud.spacing();
    let material = material_for(&cloud, 1.0, 0.3)?;
    let dim = cloud.dim();
    let model = Model::build(
        cloud,
        delta,
        Metric::Physical,
        &BrokenBonds::new(),
        scheme.with_order(n),
        material,
    )?;
    let neighborhood = c.neighborhood.unwrap_or(Neighborhood::Kinematic);
    let table_of = match neighborhood {
        Neighborhood::Kinematic => &model.kinematic,
        Neighborhood::Stress => &model.stress,
    };
    let header: &[&'static str] = if dim == 1 {
        &["node_id", "neighbor_id", "gamma_x"]
    } else {
        &["node_id", "neighbor_id", "gamma_x", "gamma_y"]
    };
    let mut table = Csv::new(header);
    let nodes = model.cloud.nodes();
    let mut count = 0;
    for w in table_of.iter().flatten() {
        count += 1;
        for (j, g) in w.iter() {
            let mut row = vec![
                nodes[w.center].id.to_string(),
                nodes[j].id.to_string(),
                num(g.x),
            ];
            if dim == 2 {
                row.push(num(g.y));
            }
            table.push(row);
        }
    }
    table.write(&c.out.join("weights.csv"))?;
    Ok(format!(
        "{scheme} n={n} delta={factor}h: {} {} weight sets, {} bonds\n",
        count,
        match neighborhood {
            Neighborhood::Kinematic => "kinematic",
            Neighborhood::Stress => "stress",
        },
        table.rows.len()
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_mirror_every_config_key() {
        let cases: [(Command, &[&str]); 6] = [
            (Command::PatchTest, PatchKeys::KEYS),
            (Command::Dispersion, DispersionKeys::KEYS),
            (Command::Manufactured, ManufacturedKeys::KEYS),
            (Command::PlateHole, PlateKeys::KEYS),
            (Command::HorizonStudy, HorizonKeys::KEYS),
            (Command::DumpWeights, WeightKeys::KEYS),
        ];
        for (cmd, keys) in cases {
            assert_eq!(cmd.keys(), keys, "{cmd}");
        }
    }

    #[test]
    fn error_line_is_single_line_and_tagged() {
        let e = Error::Config {
            key: "order".into(),
            msg: "bad\nvalue".into(),
        };
        let line = error_line(&e);
        assert!(!line.contains('\n'));
        assert!(
            line.starts_with("error kind=config exit=1 key=order msg=\""),
            "{line}"
        );
        let e = Error::SingularSystem("pivot".into());
        assert!(error_line(&e).starts_with("error kind=singular-system exit=2 msg="));
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["pdcorr", "frobnicate"]), 1);
        assert_eq!(run(["pdcorr", "dispersion", "--bogus", "1"]), 1);
        assert_eq!(
            run([
                "pdcorr",
                "dispersion",
                "--order",
                "4",
                "--formulation",
                "rk"
            ]),
            1
        );
        assert_eq!(run(["pdcorr", "--help"]), 0);
    }
}
