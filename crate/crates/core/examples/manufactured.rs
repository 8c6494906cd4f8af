//! Manufactured-solution convergence of BA-RK on a perturbed grid.

use pdcorr::benchmarks::{run_manufactured, GridKind, ManufacturedConfig};
use pdcorr::elastostatics::Scheme;

fn main() -> pdcorr::Result<()> {
    for n in 1..=3 {
        let config = ManufacturedConfig::new(Scheme::BaRk, n, GridKind::NonUniform { seed: 1 });
        let report = run_manufactured(&config)?;
        for l in &report.levels {
            println!(
                "n={n} h={:.3}: rms_u {:.3e}, rms_stress {:.3e}",
                l.h, l.rms_u, l.rms_stress
            );
        }
        println!(
            "n={n} displacement rate {:.2}",
            report.rate_u.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
