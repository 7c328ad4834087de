//! Reference solvers shared by the integration tests.

#![allow(dead_code)]

/// Lowest eigenvalue of the three-point finite-difference Hamiltonian on
/// `[-l, l]` with Dirichlet ends, by Sturm-sequence bisection.
pub fn fd_ground_energy(v: impl Fn(f64) -> f64, l: f64, m: usize) -> f64 {
    let h = 2.0 * l / (m + 1) as f64;
    let diag: Vec<f64> = (1..=m).map(|j| 1.0 / (h * h) + v(-l + j as f64 * h)).collect();
    let off = -0.5 / (h * h);
    let below = |lambda: f64| {
        let mut count = 0;
        let mut q = 1.0;
        for (j, d) in diag.iter().enumerate() {
            q = d - lambda - if j == 0 { 0.0 } else { off * off / q };
            if q == 0.0 {
                q = 1e-300;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    let (mut lo, mut hi) = (diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * off.abs(), 0.0);
    assert!(below(hi) >= 1, "no bound state below zero");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if below(mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Richardson-extrapolated finite-difference ground energy of the unit soft-core well.
pub fn soft_core_reference_energy(l: f64) -> f64 {
    let soft = |x: f64| -1.0 / (x * x + 1.0).sqrt();
    let coarse = fd_ground_energy(soft, l, 20_000);
    let fine = fd_ground_energy(soft, l, 40_001);
    (4.0 * fine - coarse) / 3.0
}
