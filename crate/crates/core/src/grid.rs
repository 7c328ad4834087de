//! Uniform position grids on `[-L, L)` and their FFT-ordered wavenumber companions.
//!
//! The spectral transform used throughout the crate is unitary: forward and
//! inverse each carry `1/sqrt(N)`. Spectral amplitudes returned by
//! [`SpectralTransform::to_spectral`] additionally carry `sqrt(dx)`, so that
//! `sum |psi(x_j)|^2 dx == sum |psi~(k_n)|^2` holds with no correction factor.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    half_width: f64,
    n: usize,
    dx: f64,
    x: Vec<f64>,
    k: Vec<f64>,
}

impl SpatialGrid {
    /// Grid with `n` points on `[-half_width, half_width)`. `n` must be a power of two.
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if n.is_power_of_two() {
            Self::with_any_even(half_width, n)
        } else {
            Err(Error::InvalidDimension(format!(
                "N = {n} is not a power of two (use with_any_even for other sizes)"
            )))
        }
    }

    /// Like [`SpatialGrid::new`] but accepts any even `n >= 4`.
    pub fn with_any_even(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidDimension(format!(
                "half-width L = {half_width} must be positive and finite"
            )));
        }
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidDimension(format!(
                "N = {n} must be even and at least 4"
            )));
        }
        let dx = 2.0 * half_width / n as f64;
        let x = (0..n).map(|j| -half_width + j as f64 * dx).collect();
        let dk = PI / half_width;
        let k = (0..n)
            .map(|i| {
                if i <= n / 2 {
                    dk * i as f64
                } else {
                    dk * (i as f64 - n as f64)
                }
            })
            .collect();
        Ok(Self {
            half_width,
            n,
            dx,
            x,
            k,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    /// Spacing of the wavenumber grid, `2π / 2L`.
    pub fn dk(&self) -> f64 {
        PI / self.half_width
    }

    /// Nyquist wavenumber `(π/L)·(N/2)`.
    pub fn k_max(&self) -> f64 {
        self.dk() * (self.n / 2) as f64
    }

    /// Index of the node at `x = 0`.
    pub fn origin_index(&self) -> usize {
        self.n / 2
    }
}

/// Planned forward/inverse FFTs for one grid size.
#[derive(Clone)]
pub struct SpectralTransform {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    n: usize,
}

impl fmt::Debug for SpectralTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralTransform").field("n", &self.n).finish()
    }
}

impl SpectralTransform {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); len],
            n,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalized forward DFT, in place.
    pub fn forward_raw(&mut self, data: &mut [Complex64]) {
        self.forward.process_with_scratch(data, &mut self.scratch);
    }

    /// Unnormalized inverse DFT, in place.
    pub fn inverse_raw(&mut self, data: &mut [Complex64]) {
        self.inverse.process_with_scratch(data, &mut self.scratch);
    }

    /// Unitary forward transform (`1/sqrt(N)`).
    pub fn forward_unitary(&mut self, data: &mut [Complex64]) {
        self.forward_raw(data);
        let s = 1.0 / (self.n as f64).sqrt();
        data.iter_mut().for_each(|c| *c *= s);
    }

    /// Unitary inverse transform (`1/sqrt(N)`).
    pub fn inverse_unitary(&mut self, data: &mut [Complex64]) {
        self.inverse_raw(data);
        let s = 1.0 / (self.n as f64).sqrt();
        data.iter_mut().for_each(|c| *c *= s);
    }

    /// Spectral amplitudes normalized so that `sum |out|^2 == sum |psi|^2 dx`.
    pub fn to_spectral(&mut self, psi: &[Complex64], dx: f64) -> Vec<Complex64> {
        let mut out = psi.to_vec();
        self.forward_unitary(&mut out);
        let s = dx.sqrt();
        out.iter_mut().for_each(|c| *c *= s);
        out
    }
}
