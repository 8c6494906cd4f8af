//! Flat `key = value` run configuration.
//!
//! Grammar: one `key = value` pair per line, `#` starts a comment, blank
//! lines are ignored, keys are lowercase with underscores, and each key may
//! appear once. Every key has a matching `--key` flag (underscores written
//! as hyphens) that overrides the file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::elastostatics::{LinearSolver, Scheme};
use crate::error::{Error, Result};
use crate::gradops::Neighborhood;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    PatchTest,
    Dispersion,
    Manufactured,
    PlateHole,
    HorizonStudy,
    DumpWeights,
}

impl Command {
    pub const ALL: [Command; 6] = [
        Command::PatchTest,
        Command::Dispersion,
        Command::Manufactured,
        Command::PlateHole,
        Command::HorizonStudy,
        Command::DumpWeights,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Command::PatchTest => "patch-test",
            Command::Dispersion => "dispersion",
            Command::Manufactured => "manufactured",
            Command::PlateHole => "plate-hole",
            Command::HorizonStudy => "horizon-study",
            Command::DumpWeights => "dump-weights",
        }
    }

    /// Keys accepted by this subcommand besides the common ones.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Command::PatchTest => &["horizon", "cloud", "youngs", "poisson"],
            Command::Dispersion => &["horizon", "grid", "points", "youngs", "density", "plot"],
            Command::Manufactured => &[
                "horizon", "grid", "levels", "base_h", "youngs", "poisson", "solver", "fields",
                "plot",
            ],
            Command::PlateHole => &[
                "horizon", "mesh", "mesh_dir", "levels", "youngs", "poisson", "solver", "fields",
                "plot",
            ],
            Command::HorizonStudy => &[
                "horizons", "grid", "levels", "base_h", "youngs", "poisson", "solver", "plot",
            ],
            Command::DumpWeights => &["horizon", "grid", "cloud", "neighborhood"],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Keys every subcommand accepts.
pub const COMMON_KEYS: [&str; 5] = ["formulation", "order", "seed", "threads", "out"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridChoice {
    Uniform,
    Perturbed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshChoice {
    Polar,
    Triangular,
}

/// Validated run configuration. Absent optional values take the defaults
/// of the subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// `None` runs all four formulations (patch test only).
    pub scheme: Option<Scheme>,
    /// `None` runs orders 1 to 3 (patch test) or selects 2.
    pub order: Option<usize>,
    pub seed: u64,
    pub threads: Option<usize>,
    pub out: PathBuf,
    /// `delta / h`, or the parametric horizon on polar meshes.
    pub horizon: Option<f64>,
    pub horizons: Option<Vec<f64>>,
    pub grid: Option<GridChoice>,
    pub mesh: Option<MeshChoice>,
    pub mesh_dir: Option<PathBuf>,
    pub cloud: Option<PathBuf>,
    pub levels: Option<usize>,
    pub base_h: Option<f64>,
    pub youngs: Option<f64>,
    pub poisson: Option<f64>,
    pub density: Option<f64>,
    pub points: Option<usize>,
    pub solver: Option<LinearSolver>,
    pub neighborhood: Option<Neighborhood>,
    pub plot: bool,
    pub fields: bool,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUT: &str = "pdcorr-out";

impl RunConfig {
    pub fn order_or_default(&self) -> usize {
        self.order.unwrap_or(2)
    }

    pub fn scheme_required(&self) -> Result<Scheme> {
        self.scheme
            .ok_or_else(|| config_err("formulation", "required for this subcommand"))
    }
}

fn config_err(key: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        msg: msg.into(),
    }
}

/// Parses the text of a config file into key-value pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Config {
            key: line.to_string(),
            msg: format!("line {}: expected `key = value`", n + 1),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty()
            || !k
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
        {
            return Err(config_err(k, format!("line {}: malformed key", n + 1)));
        }
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(config_err(k, format!("line {}: duplicate key", n + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn value<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| {
        config_err(
            key,
            format!("cannot parse `{v}` as {}", std::any::type_name::<T>()),
        )
    })
}

fn positive(key: &str, v: &str) -> Result<f64> {
    let x: f64 = value(key, v)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(config_err(
            key,
            format!("must be positive and finite, got {v}"),
        ));
    }
    Ok(x)
}

fn count(key: &str, v: &str) -> Result<usize> {
    let n: usize = value(key, v)?;
    if n == 0 {
        return Err(config_err(key, "must be at least 1"));
    }
    Ok(n)
}

fn boolean(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(config_err(
            key,
            format!("expected true or false, got `{v}`"),
        )),
    }
}

/// Merges file pairs with flag pairs (flags win) and validates the result.
pub fn parse_config(
    command: Command,
    file: &[(String, String)],
    flags: &[(String, String)],
) -> Result<RunConfig> {
    let mut merged: BTreeMap<&str, &str> = BTreeMap::new();
    for (k, v) in file.iter().chain(flags) {
        merged.insert(k.as_str(), v.as_str());
    }
    let mut c = RunConfig {
        command,
        scheme: None,
        order: None,
        seed: DEFAULT_SEED,
        threads: None,
        out: PathBuf::from(DEFAULT_OUT),
        horizon: None,
        horizons: None,
        grid: None,
        mesh: None,
        mesh_dir: None,
        cloud: None,
        levels: None,
        base_h: None,
        youngs: None,
        poisson: None,
        density: None,
        points: None,
        solver: None,
        neighborhood: None,
        plot: false,
        fields: false,
    };
    for (&k, &v) in &merged {
        if !COMMON_KEYS.contains(&k) && !command.keys().contains(&k) {
            return Err(config_err(k, format!("unknown key for `{command}`")));
        }
        match k {
            "formulation" => {
                c.scheme = Some(v.parse().map_err(|e: Error| config_err(k, e.to_string()))?)
            }
            "order" => {
                let n: usize = value(k, v)?;
                if !(1..=3).contains(&n) {
                    return Err(config_err(
                        k,
                        format!("supported orders are 1, 2, 3; got {n}"),
                    ));
                }
                c.order = Some(n);
            }
            "seed" => c.seed = value(k, v)?,
            "threads" => c.threads = Some(count(k, v)?),
            "out" => c.out = PathBuf::from(v),
            "horizon" => c.horizon = Some(positive(k, v)?),
            "horizons" => {
                let list = v
                    .split(',')
                    .map(|s| positive(k, s.trim()))
                    .collect::<Result<Vec<f64>>>()?;
                c.horizons = Some(list);
            }
            "grid" => {
                c.grid = Some(match v {
                    "uniform" => GridChoice::Uniform,
                    "perturbed" => GridChoice::Perturbed,
                    _ => {
                        return Err(config_err(
                            k,
                            format!("expected uniform or perturbed, got `{v}`"),
                        ))
                    }
                })
            }
            "mesh" => {
                c.mesh = Some(match v {
                    "polar" => MeshChoice::Polar,
                    "triangular" => MeshChoice::Triangular,
                    _ => {
                        return Err(config_err(
                            k,
                            format!("expected polar or triangular, got `{v}`"),
                        ))
                    }
                })
            }
            "mesh_dir" => c.mesh_dir = Some(PathBuf::from(v)),
            "cloud" => c.cloud = Some(PathBuf::from(v)),
            "levels" => c.levels = Some(count(k, v)?),
            "base_h" => c.base_h = Some(positive(k, v)?),
            "youngs" => c.youngs = Some(positive(k, v)?),
            "poisson" => {
                let nu: f64 = value(k, v)?;
                if !(nu > -1.0 && nu < 0.5) {
                    return Err(config_err(k, format!("must lie in (-1, 0.5), got {v}")));
                }
                c.poisson = Some(nu);
            }
            "density" => c.density = Some(positive(k, v)?),
            "points" => c.points = Some(count(k, v)?),
            "solver" => {
                c.solver = Some(match v {
                    "auto" => LinearSolver::Auto,
                    "direct" => LinearSolver::Direct,
                    "gmres" => LinearSolver::Gmres,
                    _ => {
                        return Err(config_err(
                            k,
                            format!("expected auto, direct, or gmres, got `{v}`"),
                        ))
                    }
                })
            }
            "neighborhood" => {
                c.neighborhood = Some(match v {
                    "kinematic" => Neighborhood::Kinematic,
                    "stress" => Neighborhood::Stress,
                    _ => {
                        return Err(config_err(
                            k,
                            format!("expected kinematic or stress, got `{v}`"),
                        ))
                    }
                })
            }
            "plot" => c.plot = boolean(k, v)?,
            "fields" => c.fields = boolean(k, v)?,
            _ => unreachable!("key list and match arms agree"),
        }
    }
    validate(&c)?;
    Ok(c)
}

fn validate(c: &RunConfig) -> Result<()> {
    if c.command != Command::PatchTest {
        c.scheme_required()?;
    }
    if c.command == Command::PlateHole
        && c.mesh == Some(MeshChoice::Triangular)
        && c.levels.unwrap_or(3) > 4
    {
        return Err(config_err(
            "levels",
            "triangular meshes are shipped for levels 0 to 3",
        ));
    }
    if c.mesh_dir.is_some() && c.mesh != Some(MeshChoice::Triangular) {
        return Err(config_err("mesh_dir", "only used with mesh = triangular"));
    }
    // delta must exceed n h; every horizon key is in units of h (or of the
    // unit parametric spacing on polar meshes)
    let orders: Vec<usize> = match (c.command, c.order) {
        (_, Some(n)) => vec![n],
        (Command::PatchTest, None) => vec![1, 2, 3],
        (_, None) => vec![2],
    };
    let horizons: Vec<f64> = c
        .horizon
        .into_iter()
        .chain(c.horizons.iter().flatten().copied())
        .collect();
    for &n in &orders {
        for &d in &horizons {
            if d <= n as f64 {
                let key = if c.horizon.is_some() {
                    "horizon"
                } else {
                    "horizons"
                };
                return Err(config_err(
                    key,
                    format!("horizon {d} h violates the rule delta > n h for order {n}"),
                ));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
        items
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn minimal_dispersion_config_gets_defaults() {
        let file =
            parse_pairs("# wave study\nformulation = ba-rk\nhorizon = 3\ngrid = perturbed\n")
                .unwrap();
        let c = parse_config(Command::Dispersion, &file, &[]).unwrap();
        assert_eq!(c.scheme, Some(Scheme::BaRk));
        assert_eq!(c.seed, DEFAULT_SEED);
        assert_eq!(c.points, None);
        assert_eq!(c.grid, Some(GridChoice::Perturbed));
    }

    #[test]
    fn flags_override_file() {
        let file = pairs(&[("formulation", "rk"), ("seed", "4")]);
        let flags = pairs(&[("seed", "9"), ("formulation", "gmls")]);
        let c = parse_config(Command::Manufactured, &file, &flags).unwrap();
        assert_eq!((c.seed, c.scheme), (9, Some(Scheme::Gmls)));
    }

    fn key_of(e: Error) -> String {
        match e {
            Error::Config { key, .. } => key,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn errors_name_the_key() {
        let bad = [
            (
                Command::Manufactured,
                vec![("formulation", "rk"), ("order", "4")],
                "order",
            ),
            (
                Command::Dispersion,
                vec![("formulation", "rk"), ("horizon", "2")],
                "horizon",
            ),
            (
                Command::Dispersion,
                vec![("formulation", "rk"), ("levels", "2")],
                "levels",
            ),
            (
                Command::Manufactured,
                vec![("formulation", "rk"), ("bogus", "1")],
                "bogus",
            ),
            (
                Command::Manufactured,
                vec![("formulation", "rk"), ("base_h", "x")],
                "base_h",
            ),
            (Command::Manufactured, vec![("order", "2")], "formulation"),
            (
                Command::HorizonStudy,
                vec![("formulation", "rk"), ("horizons", "2.75,1.5")],
                "horizons",
            ),
            (
                Command::PlateHole,
                vec![("formulation", "rk"), ("poisson", "0.5")],
                "poisson",
            ),
        ];
        for (cmd, items, key) in bad {
            assert_eq!(
                key_of(parse_config(cmd, &pairs(&items), &[]).unwrap_err()),
                key
            );
        }
    }

    #[test]
    fn file_grammar() {
        assert!(parse_pairs("a = 1\na = 2").is_err());
        assert!(parse_pairs("no equals sign").is_err());
        assert!(parse_pairs("Bad = 1").is_err());
        let p = parse_pairs("\n  seed=3   # trailing\n\n").unwrap();
        assert_eq!(p, pairs(&[("seed", "3")]));
    }

    #[test]
    fn patch_test_runs_all_orders_by_default() {
        let c = parse_config(Command::PatchTest, &[], &[]).unwrap();
        assert_eq!((c.scheme, c.order), (None, None));
        let e = parse_config(Command::PatchTest, &pairs(&[("horizon", "2.5")]), &[]).unwrap_err();
        assert_eq!(key_of(e), "horizon");
    }
}
