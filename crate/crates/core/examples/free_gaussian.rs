//! Free spreading of a Gaussian packet. For alpha = 2 the width follows
//! sqrt(1 + t^2); smaller orders disperse with heavier tails.

use std::sync::Arc;

use fractunnel::grid::SpatialGrid;
use fractunnel::model::{FieldSpec, FractionalOrder};
use fractunnel::prop::{Propagator, StepConfig, WaveFunction};

fn main() -> fractunnel::Result<()> {
    let grid = Arc::new(SpatialGrid::new(60.0, 1024)?);
    let zero = vec![0.0; grid.len()];
    let dt = 0.01;
    let steps = 500;

    for alpha in [2.0, 1.5, 1.1] {
        let alpha = FractionalOrder::new(alpha)?;
        // exp(-x^2/2) density, i.e. unit width in the amplitude convention below
        let mut psi = WaveFunction::gaussian(grid.clone(), 0.0, 1.0);
        let mut prop = Propagator::with_potential(grid.clone(), alpha, zero.clone(), FieldSpec::field_free(), StepConfig::real(dt))?;
        for i in 0..steps {
            prop.step(&mut psi, i as f64 * dt)?;
        }
        let t = steps as f64 * dt;
        let dens = psi.density();
        let var: f64 = grid.x().iter().zip(&dens).map(|(x, d)| x * x * d * grid.dx()).sum();
        println!(
            "alpha = {:.1}: <x^2>(t = {t}) = {var:.6}, beyond |x| = 15: {:.3e}",
            alpha.value(),
            psi.probability_beyond(15.0)
        );
        if alpha.is_standard() {
            let exact = 0.5 * (1.0 + t * t);
            let worst = grid
                .x()
                .iter()
                .zip(&dens)
                .map(|(&x, &d)| {
                    let s2 = 1.0 + t * t;
                    (d - (-x * x / s2).exp() / (std::f64::consts::PI * s2).sqrt()).abs()
                })
                .fold(0.0, f64::max);
            println!("    analytic <x^2> = {exact:.6}, max density error {worst:.2e}");
        }
    }
    Ok(())
}
