//! Soft-core ground-state energies across fractional orders, and the density
//! tail at |x| = 20.
//!
//! `cargo run --release --example ground_state -- [N] [L]`

use std::sync::Arc;

use fractunnel::grid::SpatialGrid;
use fractunnel::groundstate::solve_ground_state;
use fractunnel::model::{FractionalOrder, SoftCore};

fn main() -> fractunnel::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(2048, |s| s.parse().expect("N"));
    let l: f64 = args.next().map_or(100.0, |s| s.parse().expect("L"));
    let grid = Arc::new(SpatialGrid::new(l, n)?);
    let potential = SoftCore::new(1.0, 1.0)?;
    let tail = grid.x().iter().position(|&x| x >= 20.0).expect("box reaches x = 20");

    println!("{:>5} {:>14} {:>8} {:>12}", "alpha", "E0", "steps", "|psi(20)|^2");
    for i in 0..10 {
        let alpha = FractionalOrder::new(1.1 + 0.1 * i as f64)?;
        let gs = solve_ground_state(alpha, potential, grid.clone(), 1e-12)?;
        let rho = gs.psi0.density()[tail];
        println!("{:>5.1} {:>14.10} {:>8} {:>12.4e}", alpha.value(), gs.e0, gs.iterations, rho);
    }
    Ok(())
}
