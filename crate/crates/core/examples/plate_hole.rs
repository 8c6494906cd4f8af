//! Quarter plate with a circular hole under uniaxial tension, on the polar
//! mesh and on the shipped triangle-centroid clouds.

use pdcorr::benchmarks::{run_plate_hole, MeshKind, PlateConfig};
use pdcorr::elastostatics::Scheme;

fn main() -> pdcorr::Result<()> {
    for mesh in [MeshKind::Polar, MeshKind::shipped_triangular()] {
        for scheme in [Scheme::BaRk, Scheme::BaGmls] {
            let config = PlateConfig::new(scheme, 2, mesh.clone());
            let r = run_plate_hole(&config)?;
            let errs: Vec<String> = r
                .report
                .levels
                .iter()
                .map(|l| format!("{:.2e}", l.rms_stress))
                .collect();
            println!(
                "{} {scheme}: stress errors [{}], rate {:.2}, hoop stress {:.3} (Kirsch 3)",
                mesh.name(),
                errs.join(", "),
                r.report.rate_stress.unwrap_or(f64::NAN),
                r.hoop_stress
            );
        }
    }
    Ok(())
}
