//! Save a ground state, read it back and continue from it.

use std::sync::Arc;

use fractunnel::checkpoint;
use fractunnel::grid::SpatialGrid;
use fractunnel::groundstate::solve_ground_state;
use fractunnel::model::{FractionalOrder, SoftCore, SystemSpec};
use fractunnel::prop::energy_expectation;

fn main() -> fractunnel::Result<()> {
    let alpha = FractionalOrder::new(1.5)?;
    let potential = SoftCore::new(1.0, 1.0)?;
    let grid = Arc::new(SpatialGrid::new(100.0, 2048)?);
    let gs = solve_ground_state(alpha, potential, grid, 1e-10)?;

    let path = std::env::temp_dir().join("fractunnel_psi0.wf");
    checkpoint::write(&path, &gs.psi0, alpha, 0.0, checkpoint::FLAG_IMAGINARY_TIME)?;
    let (header, psi) = checkpoint::read(&path)?;
    println!("{header:?}");
    let e = energy_expectation(&psi, &SystemSpec::field_free(alpha, potential))?;
    println!("E0 solved {:.12}, from file {e:.12}", gs.e0);
    std::fs::remove_file(&path)?;
    Ok(())
}
