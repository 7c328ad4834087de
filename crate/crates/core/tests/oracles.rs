//! Cross-checks against independently coded reference solvers.

use std::f64::consts::PI;
use std::sync::Arc;

use fractunnel::grid::SpatialGrid;
use fractunnel::groundstate::solve_ground_state;
use fractunnel::model::{FieldSpec, FractionalOrder, MaskSpec, SoftCore, SystemSpec};
use fractunnel::prop::{EnergyEvaluator, Propagator, StepConfig, WaveFunction};
use num_complex::Complex64;

mod common;
use common::fd_ground_energy;

#[test]
fn standard_ground_state_matches_finite_differences() {
    let soft = |x: f64| -1.0 / (x * x + 1.0).sqrt();
    // Richardson extrapolation of two second-order estimates
    let e1 = fd_ground_energy(soft, 50.0, 10_000);
    let e2 = fd_ground_energy(soft, 50.0, 20_001);
    let fd = (4.0 * e2 - e1) / 3.0;
    assert!((e1 - e2).abs() < 1e-5, "fd estimates {e1} {e2}");

    let grid = Arc::new(SpatialGrid::new(50.0, 1024).unwrap());
    let gs = solve_ground_state(FractionalOrder::STANDARD, SoftCore::new(1.0, 1.0).unwrap(), grid, 1e-12).unwrap();
    assert!((gs.e0 - fd).abs() < 1e-6, "spectral {} vs fd {fd}", gs.e0);
}

fn naive_dft(a: &[Complex64], sign: f64) -> Vec<Complex64> {
    let n = a.len();
    (0..n)
        .map(|m| {
            a.iter()
                .enumerate()
                .map(|(j, v)| v * Complex64::cis(sign * 2.0 * PI * (m * j % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

fn wavenumbers(n: usize, l: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let m = if i <= n / 2 { i as f64 } else { i as f64 - n as f64 };
            PI / l * m
        })
        .collect()
}

fn sample_state(grid: &Arc<SpatialGrid>) -> WaveFunction {
    let mut psi = WaveFunction::from_fn(grid.clone(), |x| {
        Complex64::new((-(x - 0.7) * (x - 0.7) / 3.0).exp(), 0.4 * (-(x + 1.0) * (x + 1.0)).exp() * x.sin())
    });
    psi.normalize().unwrap();
    psi
}

#[test]
fn energy_matches_dense_fractional_hamiltonian() {
    let (n, l) = (32usize, 10.0);
    let grid = Arc::new(SpatialGrid::new(l, n).unwrap());
    let k = wavenumbers(n, l);
    let x: Vec<f64> = (0..n).map(|j| -l + 2.0 * l * j as f64 / n as f64).collect();
    let soft = |x: f64| -1.3 / (x * x + 0.6).sqrt();
    let psi = sample_state(&grid);
    let amps = psi.amplitudes();

    for alpha in [1.1, 1.37, 1.5, 2.0] {
        // H_jl = (1/N) sum_n |k_n|^alpha / 2 exp(i k_n (x_j - x_l)) + V_j delta_jl
        let mut num = Complex64::new(0.0, 0.0);
        for j in 0..n {
            for m in 0..n {
                let mut h: Complex64 = k
                    .iter()
                    .map(|&kn| Complex64::cis(kn * (x[j] - x[m])) * (0.5 * kn.abs().powf(alpha)))
                    .sum::<Complex64>()
                    / n as f64;
                if j == m {
                    h += soft(x[j]);
                }
                num += amps[j].conj() * h * amps[m];
            }
        }
        let den: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let dense = num.re / den;
        assert!(num.im.abs() < 1e-10 * num.re.abs());

        let v: Vec<f64> = grid.x().iter().map(|&x| soft(x)).collect();
        let mut eval = EnergyEvaluator::new(&grid, FractionalOrder::new(alpha).unwrap(), v).unwrap();
        let e = eval.energy(&psi);
        assert!((e - dense).abs() < 1e-8, "alpha {alpha}: {e} vs dense {dense}");
    }
}

fn sin2_field(f0: f64, t_ramp: f64, t: f64) -> f64 {
    if t >= t_ramp {
        f0
    } else {
        f0 * (0.5 * PI * t / t_ramp).sin().powi(2)
    }
}

/// One Strang step of the standard Schrödinger equation with naive DFTs.
fn reference_step(psi: &[Complex64], x: &[f64], k: &[f64], v: &dyn Fn(f64, f64) -> f64, t: f64, dt: f64, mask: &dyn Fn(f64) -> f64) -> Vec<Complex64> {
    let n = psi.len();
    let tm = t + 0.5 * dt;
    let half: Vec<Complex64> = x.iter().map(|&x| Complex64::cis(-0.5 * dt * v(x, tm))).collect();
    let a: Vec<Complex64> = psi.iter().zip(&half).map(|(p, h)| p * h).collect();
    let mut s = naive_dft(&a, -1.0);
    for (c, &kn) in s.iter_mut().zip(k) {
        *c *= Complex64::cis(-0.5 * kn * kn * dt);
    }
    let b = naive_dft(&s, 1.0);
    b.iter()
        .zip(&half)
        .zip(x)
        .map(|((b, h), &x)| b / n as f64 * h * mask(x))
        .collect()
}

#[test]
fn standard_order_matches_reference_split_step() {
    let (n, l) = (64usize, 20.0);
    let grid = Arc::new(SpatialGrid::new(l, n).unwrap());
    let x = grid.x().to_vec();
    let k = wavenumbers(n, l);
    let (f0, dt) = (0.05, 0.05);
    let system = SystemSpec {
        alpha: FractionalOrder::STANDARD,
        potential: SoftCore::new(1.0, 1.0).unwrap(),
        field: FieldSpec::new(f0),
    };
    let v = |x: f64, t: f64| -1.0 / (x * x + 1.0).sqrt() + sin2_field(f0, 20.0, t) * x;
    let (x_cap, eta, m) = (0.8 * l, 5.0, 4);
    let mask = |x: f64| {
        if x.abs() <= x_cap {
            1.0
        } else {
            (-eta * ((x.abs() - x_cap) / (l - x_cap)).powi(m)).exp()
        }
    };
    let mut prop = Propagator::new(grid.clone(), &system, StepConfig::real(dt).with_mask(MaskSpec::default_for(l))).unwrap();

    // during the ramp, across its end, and in the flat field
    for t in [0.0, 7.3, 19.98, 35.0] {
        let mut psi = sample_state(&grid);
        let expected = reference_step(psi.amplitudes(), &x, &k, &v, t, dt, &mask);
        prop.step(&mut psi, t).unwrap();
        let err = psi
            .amplitudes()
            .iter()
            .zip(&expected)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "t = {t}: max deviation {err:e}");
    }
}

#[test]
fn imaginary_step_matches_reference() {
    let (n, l) = (64usize, 20.0);
    let grid = Arc::new(SpatialGrid::new(l, n).unwrap());
    let x = grid.x().to_vec();
    let k = wavenumbers(n, l);
    let dtau = 0.01;
    let alpha = 1.3;
    let system = SystemSpec::field_free(FractionalOrder::new(alpha).unwrap(), SoftCore::new(1.0, 1.0).unwrap());
    let mut prop = Propagator::new(grid.clone(), &system, StepConfig::imaginary(dtau)).unwrap();
    let mut psi = sample_state(&grid);

    let half: Vec<f64> = x.iter().map(|&x| (0.5 * dtau / (x * x + 1.0).sqrt()).exp()).collect();
    let a: Vec<Complex64> = psi.amplitudes().iter().zip(&half).map(|(p, h)| p * h).collect();
    let mut s = naive_dft(&a, -1.0);
    for (c, &kn) in s.iter_mut().zip(&k) {
        *c *= (-0.5 * kn.abs().powf(alpha) * dtau).exp();
    }
    let b: Vec<Complex64> = naive_dft(&s, 1.0).iter().zip(&half).map(|(b, h)| b * *h).collect();
    let norm = (b.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.dx()).sqrt();

    prop.step(&mut psi, 0.0).unwrap();
    for (a, b) in psi.amplitudes().iter().zip(&b) {
        assert!((a - b / norm).norm() < 1e-12);
    }
}
