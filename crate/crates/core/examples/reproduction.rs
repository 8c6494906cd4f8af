//! Builds RK and GMLS gradient weights on a perturbed cloud and reports the
//! worst polynomial-reproduction error for each order.

use pdcorr::gradops::{build_weight_table, verify_reproduction, Neighborhood, Route};
use pdcorr::pointcloud::{build_families, Metric, NodeKind};

fn main() -> pdcorr::Result<()> {
    let cloud = pdcorr::benchmarks::unit_square_cloud(0.1, 5, Some(7))?;
    let bulk = cloud.indices_of(NodeKind::Bulk);
    for route in [Route::Rk, Route::Gmls] {
        for n in 1..=3 {
            let families = build_families(&cloud, (n as f64 + 1.5) * 0.1, Metric::Physical)?;
            let table =
                build_weight_table(&cloud, &families, &bulk, route, n, Neighborhood::Kinematic)?;
            let worst = table
                .iter()
                .map(|w| verify_reproduction(w, &cloud, n))
                .collect::<pdcorr::Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            println!(
                "{route:?} n={n}: {} nodes, worst reproduction error {worst:.2e}",
                table.len()
            );
        }
    }
    Ok(())
}
