//! Fractional-ADK exponents: closed-form coefficient against the quadrature
//! of the under-barrier action, and the `-ln Gamma` lines for a few orders.

use fractunnel::fadk::{adk_exponent, im_action_quadrature, TunnelingModel};
use fractunnel::model::FractionalOrder;

fn main() -> fractunnel::Result<()> {
    let ip = 0.67;
    println!("{:>5} {:>12} {:>12} {:>10}", "alpha", "C_alpha", "2 ImS F0", "rel.err");
    for alpha in [1.1, 1.2, 1.4, 1.5, 1.6, 1.8, 2.0] {
        let alpha = FractionalOrder::new(alpha)?;
        let model = TunnelingModel::new(alpha, ip)?;
        let f0 = 0.05;
        let quad = 2.0 * im_action_quadrature(alpha, ip, f0)? * f0;
        println!(
            "{:>5} {:>12.8} {:>12.8} {:>10.2e}",
            alpha.value(),
            model.c_alpha,
            quad,
            (quad - model.c_alpha).abs() / model.c_alpha
        );
    }

    println!("\n-ln Gamma at Ip = {ip}");
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "1/F0", "a=1.1", "a=1.5", "a=2.0", "ADK");
    let models: Vec<TunnelingModel> = [1.1, 1.5, 2.0]
        .iter()
        .map(|&a| TunnelingModel::new(FractionalOrder::new(a).unwrap(), ip))
        .collect::<Result<_, _>>()?;
    for inv in (10..=40).step_by(5) {
        let f0 = 1.0 / inv as f64;
        print!("{inv:>6}");
        for m in &models {
            print!(" {:>10.4}", m.exponent(f0));
        }
        println!(" {:>10.4}", adk_exponent(ip, f0));
    }
    Ok(())
}
