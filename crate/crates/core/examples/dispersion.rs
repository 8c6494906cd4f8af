//! Dispersion of the four formulations on the uniform bar at two
//! wavenumbers, and the imaginary part on a perturbed bar.

use pdcorr::dispersion::{angular_frequency, setup_bar, wavenumber, WaveConfig, WaveGrid};
use pdcorr::elastostatics::Scheme;

fn main() -> pdcorr::Result<()> {
    for delta in [3.0, 4.0] {
        println!("delta = {delta} h");
        for scheme in Scheme::ALL {
            let c = WaveConfig::new(scheme, delta, WaveGrid::Uniform);
            let bar = setup_bar(&c)?;
            let errs: Vec<String> = [0.01, 0.3, 0.4]
                .iter()
                .map(|&kn| {
                    let k = wavenumber(kn, c.h);
                    let w = angular_frequency(k, &c, &bar);
                    format!("kh/2pi={kn}: {:+.3e}", w.re / (c.wave_speed() * k) - 1.0)
                })
                .collect();
            println!("  {scheme:8} Re(omega)/(ck) - 1 at {}", errs.join(", "));
        }
    }
    let c = WaveConfig::new(Scheme::BaGmls, 3.0, WaveGrid::Perturbed { seed: 1 });
    let bar = setup_bar(&c)?;
    let k = wavenumber(0.25, c.h);
    let w = angular_frequency(k, &c, &bar);
    println!(
        "perturbed ba-gmls, kh/2pi = 0.25: omega = {:.5} {:+.5}i",
        w.re, w.im
    );
    Ok(())
}
