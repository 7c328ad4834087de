//! One tunneling run: ground state, ramped static field, survival probability
//! in the bound region and the fitted decay rate.
//!
//! `cargo run --release --example propagate -- [alpha] [F0] [T]`

use std::sync::Arc;

use fractunnel::grid::SpatialGrid;
use fractunnel::groundstate::solve_ground_state;
use fractunnel::model::{FieldSpec, FractionalOrder, MaskSpec, SoftCore, SystemSpec};
use fractunnel::prop::{propagate, Propagator, StepConfig};
use fractunnel::rates::{default_bound_radius, fit_rate, PlateauPolicy};

fn main() -> fractunnel::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<f64>().expect("numeric argument"));
    let alpha = FractionalOrder::new(args.next().unwrap_or(2.0))?;
    let f0 = args.next().unwrap_or(0.06);
    let t_total = args.next().unwrap_or(2000.0);

    let l = 100.0;
    let grid = Arc::new(SpatialGrid::new(l, 2048)?);
    let potential = SoftCore::new(1.0, 1.0)?;
    let gs = solve_ground_state(alpha, potential, grid.clone(), 1e-12)?;
    let mask = MaskSpec::default_for(l);
    let x_c = default_bound_radius(&gs.psi0, mask.onset);
    println!("alpha = {} Ip = {:.8} x_c = {x_c:.3}", alpha.value(), gs.ip);

    let field = FieldSpec::new(f0);
    let system = SystemSpec { alpha, potential, field };
    let mut prop = Propagator::new(grid, &system, StepConfig::real(0.01).with_mask(mask))?;
    let run = propagate(&gs.psi0, &mut prop, t_total, 100, x_c)?;

    let trace = &run.trace;
    let every = trace.len() / 10;
    for (t, p) in trace.times().iter().zip(trace.survival()).step_by(every.max(1)) {
        println!("t = {t:7.1}  Pb = {p:.10}");
    }
    let policy = PlateauPolicy {
        start_after: field.ramp_end(),
        ..Default::default()
    };
    let fit = fit_rate(trace, &policy)?;
    println!(
        "Gamma = {:.6e} over [{:.0}, {:.0}], r^2 = {:.10}",
        fit.gamma, fit.window.0, fit.window.1, fit.r_squared
    );
    Ok(())
}
