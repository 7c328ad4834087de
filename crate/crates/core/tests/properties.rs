use std::sync::Arc;

use fractunnel::fadk::{fadk_coefficient, im_action_quadrature, TunnelingModel};
use fractunnel::grid::SpatialGrid;
use fractunnel::model::{mask_value, FractionalOrder, MaskSpec};
use fractunnel::prop::{Propagator, StepConfig, WaveFunction};
use fractunnel::model::FieldSpec;
use fractunnel::rates::{fit_rate, fit_slope, DecayTrace, PlateauPolicy};
use num_complex::Complex64;
use proptest::prelude::*;

fn order(a: f64) -> FractionalOrder {
    FractionalOrder::new(a).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn doubling_ip_rescales_coefficient(a in 1.01f64..2.0, ip in 0.05f64..3.0) {
        let ratio = fadk_coefficient(order(a), 2.0 * ip) / fadk_coefficient(order(a), ip);
        let expected = 2f64.powf(1.0 + 1.0 / a);
        prop_assert!((ratio - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn coefficient_grows_with_order(a in 1.01f64..1.99, da in 0.005f64..0.5) {
        let b = (a + da).min(2.0);
        prop_assert!(fadk_coefficient(order(a), 0.67) < fadk_coefficient(order(b), 0.67));
    }

    #[test]
    fn quadrature_reproduces_closed_form(a in 1.05f64..2.0, ip in 0.2f64..1.5, f0 in 0.02f64..0.2) {
        let c = fadk_coefficient(order(a), ip);
        let q = 2.0 * im_action_quadrature(order(a), ip, f0).unwrap() * f0;
        prop_assert!((q - c).abs() < 1e-8 * c, "{q} vs {c}");
    }

    #[test]
    fn analytic_rates_have_exact_slope(a in 1.05f64..2.0, ip in 0.2f64..1.5) {
        let model = TunnelingModel::new(order(a), ip).unwrap();
        let pts: Vec<(f64, f64)> = [0.03, 0.04, 0.05, 0.07].iter().map(|&f| (f, (-model.exponent(f)).exp())).collect();
        let fit = fit_slope(order(a), &pts).unwrap();
        prop_assert!((fit.m_alpha - model.c_alpha).abs() < 1e-9 * model.c_alpha);
        prop_assert!(fit.intercept.abs() < 1e-8);
        prop_assert!((1.0 - fit.r_squared).abs() < 1e-12);
    }

    #[test]
    fn mask_bounded_and_monotone(x in 0.0f64..50.0, dx in 0.0f64..5.0, eta in 0.1f64..20.0, m in 2.0f64..10.0) {
        let spec = MaskSpec { onset: 40.0, strength: eta, exponent: m };
        let a = mask_value(x, &spec, 50.0).unwrap();
        let b = mask_value((x + dx).min(50.0), &spec, 50.0).unwrap();
        prop_assert!(a > 0.0 && a <= 1.0);
        prop_assert!(b <= a);
        prop_assert_eq!(mask_value(-x, &spec, 50.0).unwrap(), a);
    }

    #[test]
    fn fitted_rate_ignores_amplitude(gamma in 1e-4f64..0.05, c in 1e-3f64..1.0) {
        let times: Vec<f64> = (0..=400).map(|i| i as f64).collect();
        let pb: Vec<f64> = times.iter().map(|t| (-gamma * t).exp()).collect();
        let trace = DecayTrace::new(times, pb, 5.0).unwrap();
        let policy = PlateauPolicy::default();
        let a = fit_rate(&trace, &policy).unwrap();
        let b = fit_rate(&trace.scaled(c).unwrap(), &policy).unwrap();
        prop_assert!((a.gamma - b.gamma).abs() < 1e-12 * a.gamma.max(1e-300) + 1e-15);
        prop_assert!((b.p0 / a.p0 - c).abs() < 1e-9 * c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn unmasked_steps_are_unitary(a in 1.05f64..2.0, k0 in -2.0f64..2.0, x0 in -5.0f64..5.0, f0 in 0.0f64..0.1) {
        let grid = Arc::new(SpatialGrid::new(40.0, 256).unwrap());
        let v: Vec<f64> = grid.x().iter().map(|x| -1.0 / (x * x + 1.0).sqrt()).collect();
        let mut prop = Propagator::with_potential(grid.clone(), order(a), v, FieldSpec::new(f0), StepConfig::real(0.02)).unwrap();
        let mut psi = WaveFunction::from_fn(grid, |x| Complex64::from_polar((-(x - x0) * (x - x0) / 2.0).exp(), k0 * x));
        psi.normalize().unwrap();
        for i in 0..300 {
            prop.step(&mut psi, i as f64 * 0.02).unwrap();
        }
        prop_assert!((psi.norm_sq() - 1.0).abs() < 1e-12);
    }
}
