//! Prints the kinematic and stress gradient weights of one node next to a
//! natural-bc collar, where the two neighborhoods differ.

use pdcorr::benchmarks::unit_square_cloud;
use pdcorr::correspondence::Material;
use pdcorr::elastostatics::{Model, Scheme};
use pdcorr::pointcloud::{BrokenBonds, Metric, NodeKind};
use pdcorr::Vec2;

fn main() -> pdcorr::Result<()> {
    let cloud = unit_square_cloud(0.1, 3, None)?;
    let model = Model::build(
        cloud,
        0.25,
        Metric::Physical,
        &BrokenBonds::new(),
        Scheme::BaRk.with_order(1),
        Material::plane_strain(1.0, 0.3)?,
    )?;
    let node = model
        .cloud
        .nearest(&Vec2::new(0.95, 0.5), |n| n.kind == NodeKind::Bulk)
        .expect("bulk node");
    for (name, table) in [("kinematic", &model.kinematic), ("stress", &model.stress)] {
        let w = table[node].as_ref().expect("bulk nodes carry both");
        println!(
            "{name} weights of node {node} ({} bonds, sum {:.2e}):",
            w.neighbors.len(),
            w.gamma_sum().norm()
        );
        for (j, g) in w.iter() {
            let xi = model.cloud.position(j) - model.cloud.position(node);
            println!(
                "  xi = ({:+.2}, {:+.2})  gamma = ({:+.4}, {:+.4})",
                xi.x, xi.y, g.x, g.y
            );
        }
    }
    Ok(())
}
