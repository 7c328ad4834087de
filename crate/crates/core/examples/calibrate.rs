//! Tune the soft-core softening so every fractional order binds with the same
//! ionization potential.
//!
//! `cargo run --release --example calibrate -- [Ip]`

use std::sync::Arc;

use fractunnel::grid::SpatialGrid;
use fractunnel::groundstate::{calibrate_softcore, GroundStateOptions, DEFAULT_IP_TOLERANCE};
use fractunnel::model::FractionalOrder;

fn main() -> fractunnel::Result<()> {
    let ip: f64 = std::env::args().nth(1).map_or(0.67, |s| s.parse().expect("Ip"));
    let grid = Arc::new(SpatialGrid::new(100.0, 2048)?);
    let opts = GroundStateOptions::default();
    println!("{:>5} {:>12} {:>12} {:>6}", "alpha", "a*", "Ip", "solves");
    for alpha in [1.2, 1.4, 1.6, 1.8, 2.0] {
        let alpha = FractionalOrder::new(alpha)?;
        let cal = calibrate_softcore(alpha, ip, 1.0, grid.clone(), DEFAULT_IP_TOLERANCE, &opts)?;
        println!(
            "{:>5} {:>12.8} {:>12.8} {:>6}",
            alpha.value(),
            cal.a_star,
            cal.achieved_ip,
            cal.iterations
        );
    }
    Ok(())
}
