//! Second-order split-step propagation in real and imaginary time.
//!
//! One step is `P(dt/2) · F⁻¹ K(dt) F · P(dt/2)` where `P` is diagonal in
//! position (potential, plus the length-gauge field term in real time) and
//! `K` is the spectral multiplier built from `T(k) = |k|^alpha / 2`.
//! The `1/N` of the raw FFT pair is folded into `K`.

use std::sync::Arc;

use log::warn;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{SpatialGrid, SpectralTransform};
use crate::model::{riesz_symbol, FieldSpec, FractionalOrder, MaskSpec, SystemSpec};
use crate::rates::{survival_probability, DecayTrace};

/// Norm below which imaginary-time renormalization is refused.
pub const NORM_FLOOR: f64 = 1e-300;

/// Fraction of probability beyond the absorber onset that triggers a box-size warning.
pub const BOUNDARY_WARNING_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Arc<SpatialGrid>,
    amps: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Arc<SpatialGrid>, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != grid.len() {
            return Err(Error::InvalidDimension(format!(
                "{} amplitudes for a grid of {} points",
                amps.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, amps })
    }

    pub fn from_fn(grid: Arc<SpatialGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let amps = grid.x().iter().map(|&x| f(x)).collect();
        Self { grid, amps }
    }

    /// Normalized Gaussian `exp(-(x - center)^2 / (2 width^2))`.
    pub fn gaussian(grid: Arc<SpatialGrid>, center: f64, width: f64) -> Self {
        let mut psi = Self::from_fn(grid, |x| {
            let u = (x - center) / width;
            Complex64::new((-0.5 * u * u).exp(), 0.0)
        });
        // a Gaussian sampled on a grid always has positive norm
        psi.normalize().expect("gaussian has positive norm");
        psi
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    /// `sum |psi_j|^2 dx`.
    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    /// Scales to unit norm and returns the norm before scaling.
    pub fn normalize(&mut self) -> Result<f64> {
        let norm = self.norm_sq().sqrt();
        if !(norm > NORM_FLOOR) || !norm.is_finite() {
            return Err(Error::NormUnderflow { norm });
        }
        let s = 1.0 / norm;
        self.amps.iter_mut().for_each(|c| *c *= s);
        Ok(norm)
    }

    pub fn density(&self) -> Vec<f64> {
        self.amps.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `<self|other>` with the grid measure.
    pub fn overlap(&self, other: &WaveFunction) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.dx()
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Rotates the global phase so that the amplitude at `x = 0` is real and positive.
    pub fn fix_phase_at_origin(&mut self) {
        let c = self.amps[self.grid.origin_index()];
        let r = c.norm();
        if r > 0.0 {
            let rot = c.conj() / r;
            self.amps.iter_mut().for_each(|a| *a *= rot);
        }
    }

    /// Probability in `|x| > x_out`.
    pub fn probability_beyond(&self, x_out: f64) -> f64 {
        self.grid
            .x()
            .iter()
            .zip(&self.amps)
            .filter(|(x, _)| x.abs() > x_out)
            .map(|(_, c)| c.norm_sqr())
            .sum::<f64>()
            * self.grid.dx()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeMode {
    Real,
    Imaginary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub dt: f64,
    pub mode: TimeMode,
    /// Absorber applied after every real-time step; never used in imaginary time.
    pub mask: Option<MaskSpec>,
}

impl StepConfig {
    pub const DEFAULT_REAL_DT: f64 = 0.01;
    pub const DEFAULT_IMAG_DT: f64 = 0.005;

    pub fn real(dt: f64) -> Self {
        Self {
            dt,
            mode: TimeMode::Real,
            mask: None,
        }
    }

    pub fn imaginary(dt: f64) -> Self {
        Self {
            dt,
            mode: TimeMode::Imaginary,
            mask: None,
        }
    }

    pub fn with_mask(mut self, mask: MaskSpec) -> Self {
        self.mask = Some(mask);
        self
    }

    pub fn validate(&self, half_width: f64) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step {} must be > 0", self.dt)));
        }
        match (self.mode, &self.mask) {
            (TimeMode::Imaginary, Some(_)) => Err(Error::Config(
                "the absorbing mask cannot be used in imaginary time".into(),
            )),
            (_, Some(m)) => m.validate(half_width),
            _ => Ok(()),
        }
    }
}

/// Kinetic and potential energy of a state, field term excluded.
#[derive(Debug, Clone)]
pub struct EnergyEvaluator {
    kinetic: Vec<f64>,
    potential: Vec<f64>,
    dx: f64,
    fft: SpectralTransform,
}

impl EnergyEvaluator {
    pub fn new(grid: &SpatialGrid, alpha: FractionalOrder, potential: Vec<f64>) -> Result<Self> {
        if potential.len() != grid.len() {
            return Err(Error::InvalidDimension("potential length differs from grid".into()));
        }
        Ok(Self {
            kinetic: grid.k().iter().map(|&k| riesz_symbol(k, alpha)).collect(),
            potential,
            dx: grid.dx(),
            fft: SpectralTransform::new(grid.len()),
        })
    }

    pub fn for_system(grid: &SpatialGrid, system: &SystemSpec) -> Result<Self> {
        let v = grid.x().iter().map(|&x| system.potential.potential(x)).collect();
        Self::new(grid, system.alpha, v)
    }

    /// `<T>`, computed as `sum T(k_n) |psi~_n|^2` over the normalized state.
    pub fn kinetic(&mut self, psi: &WaveFunction) -> f64 {
        let spec = self.fft.to_spectral(psi.amplitudes(), self.dx);
        let t: f64 = spec
            .iter()
            .zip(&self.kinetic)
            .map(|(c, tk)| tk * c.norm_sqr())
            .sum();
        t / psi.norm_sq()
    }

    pub fn potential(&self, psi: &WaveFunction) -> f64 {
        let v: f64 = psi
            .amplitudes()
            .iter()
            .zip(&self.potential)
            .map(|(c, v)| v * c.norm_sqr())
            .sum::<f64>()
            * self.dx;
        v / psi.norm_sq()
    }

    pub fn energy(&mut self, psi: &WaveFunction) -> f64 {
        self.kinetic(psi) + self.potential(psi)
    }
}

/// `<psi|H(F0 = 0)|psi>` for the soft-core system.
pub fn energy_expectation(psi: &WaveFunction, system: &SystemSpec) -> Result<f64> {
    let mut ev = EnergyEvaluator::for_system(psi.grid(), system)?;
    Ok(ev.energy(psi))
}

/// Reusable split-step propagator for a fixed grid, system and step configuration.
#[derive(Debug, Clone)]
pub struct Propagator {
    grid: Arc<SpatialGrid>,
    cfg: StepConfig,
    field: FieldSpec,
    potential: Vec<f64>,
    fft: SpectralTransform,
    kinetic: Vec<Complex64>,
    /// Half-step potential factor at full field strength.
    half: Vec<Complex64>,
    /// `half` with the mask folded in (real time only).
    half_masked: Vec<Complex64>,
    mask: Option<Vec<f64>>,
    work: Vec<Complex64>,
}

impl Propagator {
    pub fn new(grid: Arc<SpatialGrid>, system: &SystemSpec, cfg: StepConfig) -> Result<Self> {
        let v = grid.x().iter().map(|&x| system.potential.potential(x)).collect();
        Self::with_potential(grid, system.alpha, v, system.field, cfg)
    }

    /// Propagator for an arbitrary sampled binding potential plus the ramped field term.
    pub fn with_potential(
        grid: Arc<SpatialGrid>,
        alpha: FractionalOrder,
        potential: Vec<f64>,
        field: FieldSpec,
        cfg: StepConfig,
    ) -> Result<Self> {
        cfg.validate(grid.half_width())?;
        field.validate()?;
        if potential.len() != grid.len() {
            return Err(Error::InvalidDimension("potential length differs from grid".into()));
        }
        let n = grid.len();
        let inv_n = 1.0 / n as f64;
        let dt = cfg.dt;
        let field = match cfg.mode {
            TimeMode::Real => field,
            TimeMode::Imaginary => FieldSpec::field_free(),
        };
        let kinetic = grid
            .k()
            .iter()
            .map(|&k| {
                let t = riesz_symbol(k, alpha);
                match cfg.mode {
                    TimeMode::Real => Complex64::from_polar(inv_n, -t * dt),
                    TimeMode::Imaginary => Complex64::new(inv_n * (-t * dt).exp(), 0.0),
                }
            })
            .collect();
        let mask = cfg.mask.map(|m| {
            grid.x()
                .iter()
                .map(|&x| m.value_unchecked(x, grid.half_width()))
                .collect::<Vec<_>>()
        });
        let mut p = Self {
            half: Vec::new(),
            half_masked: Vec::new(),
            work: vec![Complex64::new(0.0, 0.0); n],
            fft: SpectralTransform::new(n),
            grid,
            cfg,
            field,
            potential,
            kinetic,
            mask,
        };
        p.half = p.half_factors(field.peak);
        p.half_masked = match &p.mask {
            Some(m) => p.half.iter().zip(m).map(|(h, m)| h * m).collect(),
            None => p.half.clone(),
        };
        Ok(p)
    }

    pub fn grid(&self) -> &Arc<SpatialGrid> {
        &self.grid
    }

    pub fn config(&self) -> &StepConfig {
        &self.cfg
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    fn half_factors(&self, strength: f64) -> Vec<Complex64> {
        let h = 0.5 * self.cfg.dt;
        self.grid
            .x()
            .iter()
            .zip(&self.potential)
            .map(|(&x, &v)| match self.cfg.mode {
                TimeMode::Real => Complex64::cis(-(v + strength * x) * h),
                TimeMode::Imaginary => Complex64::new((-v * h).exp(), 0.0),
            })
            .collect()
    }

    /// Advances `psi` by one step starting at time `t` (ignored in imaginary time).
    pub fn step(&mut self, psi: &mut WaveFunction, t: f64) -> Result<()> {
        match self.cfg.mode {
            TimeMode::Real => self.step_real(psi, t),
            TimeMode::Imaginary => self.step_imag(psi),
        }
    }

    fn kinetic_step(&mut self, amps: &mut [Complex64]) {
        self.fft.forward_raw(amps);
        amps.iter_mut().zip(&self.kinetic).for_each(|(a, k)| *a *= k);
        self.fft.inverse_raw(amps);
    }

    fn step_real(&mut self, psi: &mut WaveFunction, t: f64) -> Result<()> {
        let mid = t + 0.5 * self.cfg.dt;
        let ramping = mid < self.field.ramp_end() && self.field.peak != 0.0;
        let mut amps = std::mem::take(&mut psi.amps);
        if ramping {
            let f = self.field.strength(mid);
            let half = self.half_factors(f);
            amps.iter_mut().zip(&half).for_each(|(a, h)| *a *= h);
            self.kinetic_step(&mut amps);
            match &self.mask {
                Some(m) => amps
                    .iter_mut()
                    .zip(half.iter().zip(m))
                    .for_each(|(a, (h, m))| *a *= h * m),
                None => amps.iter_mut().zip(&half).for_each(|(a, h)| *a *= h),
            }
        } else {
            amps.iter_mut().zip(&self.half).for_each(|(a, h)| *a *= h);
            self.kinetic_step(&mut amps);
            amps.iter_mut()
                .zip(&self.half_masked)
                .for_each(|(a, h)| *a *= h);
        }
        psi.amps = amps;
        if !psi.is_finite() {
            return Err(Error::NumericOverflow { time: t + self.cfg.dt });
        }
        Ok(())
    }

    fn step_imag(&mut self, psi: &mut WaveFunction) -> Result<()> {
        let mut amps = std::mem::take(&mut psi.amps);
        amps.iter_mut().zip(&self.half).for_each(|(a, h)| *a *= h);
        self.kinetic_step(&mut amps);
        amps.iter_mut().zip(&self.half).for_each(|(a, h)| *a *= h);
        psi.amps = amps;
        psi.normalize()?;
        Ok(())
    }

    /// Applies the kinetic half of the step alone; used by tests of the spectral multiplier.
    pub fn apply_kinetic(&mut self, psi: &mut WaveFunction) {
        let mut amps = std::mem::take(&mut self.work);
        amps.copy_from_slice(psi.amplitudes());
        self.kinetic_step(&mut amps);
        psi.amps.copy_from_slice(&amps);
        self.work = amps;
    }
}

/// One real-time step of `psi` from time `t`.
pub fn step_real(psi: &WaveFunction, t: f64, system: &SystemSpec, cfg: &StepConfig) -> Result<WaveFunction> {
    if cfg.mode != TimeMode::Real {
        return Err(Error::Config("step_real needs a real-time step configuration".into()));
    }
    let mut p = Propagator::new(psi.grid().clone(), system, *cfg)?;
    let mut out = psi.clone();
    p.step(&mut out, t)?;
    Ok(out)
}

/// One renormalized imaginary-time step of `psi`; the field is ignored.
pub fn step_imag(psi: &WaveFunction, system: &SystemSpec, cfg: &StepConfig) -> Result<WaveFunction> {
    if cfg.mode != TimeMode::Imaginary {
        return Err(Error::Config("step_imag needs an imaginary-time step configuration".into()));
    }
    let mut p = Propagator::new(psi.grid().clone(), system, *cfg)?;
    let mut out = psi.clone();
    p.step(&mut out, 0.0)?;
    Ok(out)
}

/// Output of [`propagate`].
#[derive(Debug, Clone)]
pub struct Propagation {
    pub trace: DecayTrace,
    pub final_state: WaveFunction,
    pub final_time: f64,
    /// Largest probability seen beyond the absorber onset at any sample.
    pub max_outer_probability: f64,
    pub boundary_warning: bool,
}

/// Runs `propagator` from `psi0` for `t_total`, sampling the survival
/// probability in `|x| <= x_c` every `stride` steps (and at `t = 0`).
pub fn propagate(
    psi0: &WaveFunction,
    propagator: &mut Propagator,
    t_total: f64,
    stride: usize,
    x_c: f64,
) -> Result<Propagation> {
    let cfg = *propagator.config();
    if cfg.mode != TimeMode::Real {
        return Err(Error::Config("propagate runs in real time only".into()));
    }
    if stride == 0 {
        return Err(Error::InvalidParameter("observer stride must be >= 1".into()));
    }
    if !(t_total > propagator.field().ramp_end()) {
        return Err(Error::InvalidParameter(format!(
            "total time {t_total} must exceed the ramp end {}",
            propagator.field().ramp_end()
        )));
    }
    let half_width = propagator.grid().half_width();
    if !(x_c > 0.0 && x_c < half_width) {
        return Err(Error::InvalidParameter(format!("x_c = {x_c} outside (0, L)")));
    }
    let outer = cfg.mask.map(|m| m.onset);
    if let Some(x_cap) = outer {
        if x_c >= x_cap {
            return Err(Error::Config(format!(
                "bound region x_c = {x_c} must lie inside the absorber onset {x_cap}"
            )));
        }
    }

    let steps = (t_total / cfg.dt).round() as usize;
    let mut psi = psi0.clone();
    let mut times = Vec::with_capacity(steps / stride + 2);
    let mut pb = Vec::with_capacity(steps / stride + 2);
    let mut max_outer = 0.0f64;
    let mut warned = false;

    let mut observe = |psi: &WaveFunction, t: f64, times: &mut Vec<f64>, pb: &mut Vec<f64>| {
        times.push(t);
        pb.push(survival_probability(psi, x_c));
        if let Some(x_cap) = outer {
            let p_out = psi.probability_beyond(x_cap);
            max_outer = max_outer.max(p_out);
            if p_out > BOUNDARY_WARNING_FRACTION && !warned {
                warn!(
                    "probability {p_out:.3} beyond x_cap = {x_cap} at t = {t:.1}: box may be too small"
                );
                warned = true;
            }
        }
    };

    observe(&psi, 0.0, &mut times, &mut pb);
    for i in 0..steps {
        let t = i as f64 * cfg.dt;
        propagator.step(&mut psi, t)?;
        if (i + 1) % stride == 0 {
            observe(&psi, (i + 1) as f64 * cfg.dt, &mut times, &mut pb);
        }
    }
    let final_time = steps as f64 * cfg.dt;
    Ok(Propagation {
        trace: DecayTrace::new(times, pb, x_c)?,
        final_state: psi,
        final_time,
        max_outer_probability: max_outer,
        boundary_warning: warned,
    })
}
