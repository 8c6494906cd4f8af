//! Displacement error of each formulation for three horizons on the
//! perturbed manufactured problem.

use pdcorr::benchmarks::{run_horizon_sensitivity, GridKind, ManufacturedConfig};
use pdcorr::elastostatics::Scheme;

fn main() -> pdcorr::Result<()> {
    let factors = [2.75, 3.5, 4.25];
    for scheme in Scheme::ALL {
        let base = ManufacturedConfig::new(scheme, 2, GridKind::NonUniform { seed: 1 });
        let results = match run_horizon_sensitivity(&base, &factors) {
            Ok(r) => r,
            Err(e) => {
                println!("{scheme}: {e}");
                continue;
            }
        };
        for level in 0..base.levels {
            let errs: Vec<String> = results
                .iter()
                .map(|(f, r)| format!("{f}h {:.2e}", r.levels[level].rms_u))
                .collect();
            println!(
                "{scheme:8} h={:.3}: {}",
                results[0].1.levels[level].h,
                errs.join(", ")
            );
        }
    }
    Ok(())
}
