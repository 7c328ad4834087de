//! Field sweeps over several fractional orders, either at fixed soft-core
//! parameters (A) or at a fixed ionization potential (B), written to disk.
//!
//! `cargo run --release --example protocol_sweep -- B out/sweep-b`

use std::path::PathBuf;

use fractunnel::cli::{compute_sweep, write_sweep, Protocol, RunConfig, SWEEP_ALPHAS};
use fractunnel::model::FractionalOrder;

fn main() -> fractunnel::Result<()> {
    let mut args = std::env::args().skip(1);
    let protocol: Protocol = args.next().as_deref().unwrap_or("B").parse()?;
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/sweep".into()));

    let mut cfg = RunConfig::default();
    cfg.system.ip_target = Some(0.67);
    cfg.protocol = protocol;
    let alphas: Vec<FractionalOrder> = SWEEP_ALPHAS.iter().map(|&a| FractionalOrder::new(a)).collect::<Result<_, _>>()?;
    let sweep = compute_sweep(&cfg, protocol, &alphas, true)?;
    let report = write_sweep(&sweep, &out)?;

    for c in &sweep.calibrations {
        println!("alpha = {} a* = {:.6} Ip = {:.6}", c.alpha, c.a_star, c.achieved_ip);
    }
    println!("{:>5} {:>8} {:>10} {:>12}", "alpha", "Ip", "m_alpha", "C_alpha");
    for s in &sweep.slopes {
        println!("{:>5} {:>8.5} {:>10.4} {:>12.4}", s.alpha, s.ip, s.fit.m_alpha, s.c_alpha_predicted);
    }
    for f in &report.failures {
        eprintln!("failed: {f}");
    }
    println!("{} files in {}", report.files.len(), out.display());
    Ok(())
}
