//! Analytic tunneling exponents: conventional ADK and its fractional
//! generalization for a triangular exit barrier `W(x) = Ip - F0 x`.
//!
//! Under the barrier the fractional WKB momentum has branches
//! `p_n = exp(i (π + 2πn)/α) (2W)^(1/α)`; the `n = 0` branch decays and gives
//!
//! ```text
//! -ln Γ_α = C_α / F0 + const,   C_α = 2α/(α+1) · sin(π/α) · 2^(1/α) · Ip^(1 + 1/α)
//! ```
//!
//! Only the exponent is modelled. Prefactors enter through the normalization
//! in [`normalized_rate_curve`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FractionalOrder;

/// Absolute tolerance on `Im S` for [`im_action_quadrature`].
pub const ACTION_QUADRATURE_TOL: f64 = 1e-10;

/// Complex under-barrier momentum on branch `n`.
pub fn branch_momentum(w: f64, alpha: FractionalOrder, n: i32) -> Result<Complex64> {
    if !(w > 0.0) {
        return Err(Error::Domain(format!("barrier height W = {w} must be > 0")));
    }
    let a = alpha.value();
    let phase = (PI + 2.0 * PI * n as f64) / a;
    Ok(Complex64::from_polar((2.0 * w).powf(1.0 / a), phase))
}

/// Exponent coefficient `C_α(Ip)`.
pub fn fadk_coefficient(alpha: FractionalOrder, ip: f64) -> f64 {
    let a = alpha.value();
    2.0 * a / (a + 1.0) * (PI / a).sin() * 2f64.powf(1.0 / a) * ip.powf(1.0 + 1.0 / a)
}

/// Conventional ADK exponent `2 (2 Ip)^(3/2) / (3 F0)`.
pub fn adk_exponent(ip: f64, f0: f64) -> f64 {
    2.0 * (2.0 * ip).powf(1.5) / (3.0 * f0)
}

/// Triangular barrier `W(x) = Ip - F0 x` on `[0, x_exit]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierFunction {
    pub ip: f64,
    pub f0: f64,
    pub x_exit: f64,
}

impl BarrierFunction {
    pub fn new(ip: f64, f0: f64) -> Result<Self> {
        if !(ip > 0.0 && f0 > 0.0) {
            return Err(Error::Domain(format!("triangular barrier needs Ip > 0 and F0 > 0 (got {ip}, {f0})")));
        }
        Ok(Self {
            ip,
            f0,
            x_exit: ip / f0,
        })
    }

    pub fn height(&self, x: f64) -> f64 {
        self.ip - self.f0 * x
    }
}

/// `Im S = ∫_0^{x_e} Im p_0(x) dx`, evaluated by adaptive Gauss–Legendre quadrature.
///
/// Independent of the closed form: `2 Im S F0` must reproduce [`fadk_coefficient`].
pub fn im_action_quadrature(alpha: FractionalOrder, ip: f64, f0: f64) -> Result<f64> {
    let barrier = BarrierFunction::new(ip, f0)?;
    let a = alpha.value();
    let s = (PI / a).sin();
    let integrand = |x: f64| s * (2.0 * barrier.height(x).max(0.0)).powf(1.0 / a);
    adaptive_gauss_legendre(integrand, 0.0, barrier.x_exit, ACTION_QUADRATURE_TOL)
}

/// Exponent model for one fractional order and ionization potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunnelingModel {
    pub alpha: FractionalOrder,
    pub ip: f64,
    pub c_alpha: f64,
}

impl TunnelingModel {
    pub fn new(alpha: FractionalOrder, ip: f64) -> Result<Self> {
        if !(ip > 0.0) {
            return Err(Error::Domain(format!("Ip = {ip} must be > 0")));
        }
        Ok(Self {
            alpha,
            ip,
            c_alpha: fadk_coefficient(alpha, ip),
        })
    }

    /// Unnormalized `-ln Γ_α = C_α / F0`.
    pub fn exponent(&self, f0: f64) -> f64 {
        self.c_alpha / f0
    }
}

/// Model rates `gamma_ref · exp[-C_α (1/F0 - 1/F_ref)]`, pinned to a simulated rate at `F_ref`.
pub fn normalized_rate_curve(
    model: &TunnelingModel,
    f_ref: f64,
    gamma_ref: f64,
    fields: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if !(gamma_ref > 0.0) {
        return Err(Error::Domain(format!("reference rate {gamma_ref} must be > 0")));
    }
    if !(f_ref > 0.0) {
        return Err(Error::Domain(format!("reference field {f_ref} must be > 0")));
    }
    Ok(fields
        .iter()
        .map(|&f| {
            let g = if f == f_ref {
                gamma_ref
            } else {
                gamma_ref * (-model.c_alpha * (1.0 / f - 1.0 / f_ref)).exp()
            };
            (f, g)
        })
        .collect())
}

const GL_ORDER: usize = 10;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(z) and P_n'(z) by the three-term recurrence
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn adaptive_gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (nodes, weights) = gauss_legendre_rule(GL_ORDER);
    let rule = |lo: f64, hi: f64| {
        let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        h * nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * f(c + h * x))
            .sum::<f64>()
    };

    const MAX_DEPTH: u32 = 60;
    // explicit stack of (lo, hi, whole, tol, depth)
    let mut stack = vec![(a, b, rule(a, b), tol, 0u32)];
    let mut total = 0.0;
    while let Some((lo, hi, whole, tol, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let (left, right) = (rule(lo, mid), rule(mid, hi));
        let halves = left + right;
        let err = (halves - whole).abs();
        if err <= tol.max(4.0 * f64::EPSILON * halves.abs()) {
            total += halves;
        } else if depth >= MAX_DEPTH {
            return Err(Error::QuadratureStalled { error: err });
        } else {
            stack.push((lo, mid, left, 0.5 * tol, depth + 1));
            stack.push((mid, hi, right, 0.5 * tol, depth + 1));
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(a: f64) -> FractionalOrder {
        FractionalOrder::new(a).unwrap()
    }

    #[test]
    fn branch_momenta() {
        let p = branch_momentum(0.5, order(2.0), 0).unwrap();
        assert!(p.re.abs() < 1e-15 && (p.im - 1.0).abs() < 1e-15);
        let p = branch_momentum(0.5, order(1.5), 0).unwrap();
        assert!((p.re + 0.5).abs() < 1e-15 && (p.im - 0.866_025_403_784_438_6).abs() < 1e-15);
        let q = branch_momentum(0.5, order(1.5), -1).unwrap();
        assert!((q - p.conj()).norm() < 1e-15);
        assert!(q.im < 0.0);
        assert!(matches!(branch_momentum(0.0, order(1.5), 0), Err(Error::Domain(_))));
        assert!(branch_momentum(-1.0, order(1.5), 0).is_err());
    }

    #[test]
    fn coefficient_values() {
        assert!((fadk_coefficient(order(2.0), 0.5) - 2.0 / 3.0).abs() < 1e-15);
        // reference values from a 30-digit evaluation of the closed form
        assert!((fadk_coefficient(order(2.0), 0.67) - 1.034_108_096_649_260).abs() < 1e-13);
        assert!((fadk_coefficient(order(1.5), 0.67) - 0.846_297_801_528_917).abs() < 1e-13);
        assert!((fadk_coefficient(order(1.1), 0.67) - 0.258_026_934_150_485).abs() < 1e-13);
    }

    #[test]
    fn adk_values() {
        assert!((adk_exponent(0.5, 0.05) - 40.0 / 3.0).abs() < 1e-12);
        assert!((adk_exponent(0.67, 0.05) - 20.682).abs() < 1e-3);
    }

    #[test]
    fn quadrature_closed_adk_case() {
        let s = im_action_quadrature(order(2.0), 0.5, 0.05).unwrap();
        assert!((s - 20.0 / 3.0).abs() < 1e-9, "{s}");
        let s15 = im_action_quadrature(order(1.5), 0.67, 0.05).unwrap();
        let c = fadk_coefficient(order(1.5), 0.67);
        assert!((2.0 * s15 * 0.05 - c).abs() < 1e-8 * c);
    }

    #[test]
    fn action_scales_with_inverse_field() {
        for a in [1.1, 1.5, 2.0] {
            let s1 = im_action_quadrature(order(a), 0.8, 0.1).unwrap();
            let s2 = im_action_quadrature(order(a), 0.8, 0.05).unwrap();
            assert!((s2 / s1 - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre_rule(GL_ORDER);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // degree 18 integrates exactly: ∫ x^18 = 2/19
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn normalized_curve_pins_reference() {
        let m = TunnelingModel::new(order(2.0), 0.67).unwrap();
        let c = normalized_rate_curve(&m, 0.05, 3e-6, &[0.04, 0.05, 0.07]).unwrap();
        assert_eq!(c[1].1, 3e-6);
        let ratio = c[0].1 / 3e-6;
        assert!((ratio - (-m.c_alpha * 5.0).exp()).abs() < 1e-15);
        assert!((ratio - 5.681_497_235_155e-3).abs() < 1e-14);
        assert!(normalized_rate_curve(&m, 0.05, 0.0, &[0.04]).is_err());
    }

    #[test]
    fn fractional_curve_enhances_weak_field_rates() {
        let m11 = TunnelingModel::new(order(1.1), 0.67).unwrap();
        let m2 = TunnelingModel::new(order(2.0), 0.67).unwrap();
        let a = normalized_rate_curve(&m11, 0.05, 1e-6, &[0.04]).unwrap()[0].1;
        let b = normalized_rate_curve(&m2, 0.05, 1e-6, &[0.04]).unwrap()[0].1;
        assert!(a > b);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn standard_limit_identity(ip in 0.01f64..5.0, f0 in 0.005f64..0.5) {
                let c = fadk_coefficient(FractionalOrder::STANDARD, ip);
                let exact = 2.0 * (2.0 * ip).powf(1.5) / 3.0;
                prop_assert!((c - exact).abs() <= 1e-12 * exact);
                let e = adk_exponent(ip, f0);
                prop_assert!((e - c / f0).abs() <= 1e-12 * e);
            }

            #[test]
            fn decaying_branch_is_physical(w in 1e-6f64..50.0, a in 1.0001f64..2.0) {
                prop_assert!(branch_momentum(w, order(a), 0).unwrap().im > 0.0);
                prop_assert!(branch_momentum(w, order(a), -1).unwrap().im < 0.0);
            }

            #[test]
            fn coefficient_positive(ip in 1e-3f64..10.0, a in 1.0001f64..2.0) {
                prop_assert!(fadk_coefficient(order(a), ip) > 0.0);
            }
        }
    }
}
