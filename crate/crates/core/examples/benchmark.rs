//! alpha = 2 field sweep: simulated rates against the ADK exponent pinned at
//! F0 = 0.05. Takes about half a minute in release mode.

use fractunnel::cli::{compute_benchmark, RunConfig};

fn main() -> fractunnel::Result<()> {
    let sweep = compute_benchmark(&RunConfig::default())?;
    for f in &sweep.failures {
        eprintln!("failed: {f}");
    }
    println!("{:>6} {:>12} {:>12} {:>8}", "1/F0", "Gamma", "model", "ratio");
    for c in &sweep.comparisons {
        println!("{:>6.2} {:>12.4e} {:>12.4e} {:>8.3}", c.inv_f0, c.gamma_sim, c.gamma_model, c.ratio);
    }
    if let Some(s) = sweep.slope(2.0) {
        println!(
            "slope {:.4} (r^2 = {:.6}), predicted {:.4}",
            s.fit.m_alpha, s.fit.r_squared, s.c_alpha_predicted
        );
    }
    Ok(())
}
