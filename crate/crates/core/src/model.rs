//! Physical ingredients: fractional kinetic symbol, soft-core binding
//! potential, ramped static field in the length gauge and the absorbing mask.
//!
//! Atomic units throughout. The kinetic prefactor is fixed to 1/2 for every
//! fractional order, so `T(k) = |k|^alpha / 2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fractional order of the kinetic operator, restricted to `(1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub const STANDARD: FractionalOrder = FractionalOrder(2.0);

    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 1.0 && alpha <= 2.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::InvalidParameter(format!(
                "fractional order {alpha} outside (1, 2]"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_standard(self) -> bool {
        self.0 == 2.0
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FractionalOrder> for f64 {
    fn from(a: FractionalOrder) -> f64 {
        a.0
    }
}

/// Kinetic energy `|k|^alpha / 2` of the Riesz operator at wavenumber `k`.
pub fn riesz_symbol(k: f64, alpha: FractionalOrder) -> f64 {
    if alpha.is_standard() {
        0.5 * k * k
    } else {
        0.5 * k.abs().powf(alpha.0)
    }
}

/// Soft-core Coulomb well `V(x) = -Z / sqrt(x^2 + a^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftCore {
    /// Effective charge `Z`.
    pub charge: f64,
    /// Softening parameter `a` in bohr.
    pub softening: f64,
}

impl SoftCore {
    pub fn new(charge: f64, softening: f64) -> Result<Self> {
        if !(charge > 0.0 && softening > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "soft-core needs Z > 0 and a > 0 (got Z = {charge}, a = {softening})"
            )));
        }
        Ok(Self { charge, softening })
    }

    pub fn potential(&self, x: f64) -> f64 {
        soft_core(x, self)
    }
}

pub fn soft_core(x: f64, spec: &SoftCore) -> f64 {
    -spec.charge / x.hypot(spec.softening)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RampShape {
    None,
    Linear,
    #[default]
    Sin2,
}

/// Static field of peak strength `F0`, switched on by a ramp of duration `T_ramp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub peak: f64,
    #[serde(default)]
    pub ramp: RampShape,
    #[serde(default = "FieldSpec::default_ramp_duration")]
    pub ramp_duration: f64,
}

impl FieldSpec {
    pub const DEFAULT_RAMP_DURATION: f64 = 20.0;

    fn default_ramp_duration() -> f64 {
        Self::DEFAULT_RAMP_DURATION
    }

    /// Field `peak` with the default sin² ramp of 20 a.u.
    pub fn new(peak: f64) -> Self {
        Self {
            peak,
            ramp: RampShape::Sin2,
            ramp_duration: Self::DEFAULT_RAMP_DURATION,
        }
    }

    pub fn field_free() -> Self {
        Self {
            peak: 0.0,
            ramp: RampShape::None,
            ramp_duration: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.peak >= 0.0 && self.peak.is_finite()) {
            return Err(Error::InvalidParameter(format!("field F0 = {} must be >= 0", self.peak)));
        }
        if !(self.ramp_duration >= 0.0 && self.ramp_duration.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ramp duration {} must be >= 0",
                self.ramp_duration
            )));
        }
        Ok(())
    }

    /// Time after which the envelope is identically one.
    pub fn ramp_end(&self) -> f64 {
        match self.ramp {
            RampShape::None => 0.0,
            _ => self.ramp_duration,
        }
    }

    /// Envelope `g(t)` in `[0, 1]`.
    pub fn envelope(&self, t: f64) -> f64 {
        let tr = self.ramp_duration;
        match self.ramp {
            RampShape::None => 1.0,
            _ if t >= tr => 1.0,
            _ if t <= 0.0 => 0.0,
            RampShape::Linear => t / tr,
            RampShape::Sin2 => (0.5 * PI * t / tr).sin().powi(2),
        }
    }

    /// Instantaneous field strength `g(t) F0`.
    pub fn strength(&self, t: f64) -> f64 {
        self.envelope(t) * self.peak
    }
}

/// Complete description of the driven system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub alpha: FractionalOrder,
    pub potential: SoftCore,
    pub field: FieldSpec,
}

impl SystemSpec {
    pub fn field_free(alpha: FractionalOrder, potential: SoftCore) -> Self {
        Self {
            alpha,
            potential,
            field: FieldSpec::field_free(),
        }
    }
}

/// Length-gauge potential `V(x) + g(t) F0 x`.
pub fn total_potential(x: f64, spec: &SoftCore, field: &FieldSpec, t: f64) -> f64 {
    soft_core(x, spec) + field.strength(t) * x
}

/// Multiplicative absorber `M(x)`, flat inside `|x| <= x_cap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaskSpec {
    /// Absorber onset `x_cap` in bohr.
    pub onset: f64,
    /// Strength `eta`.
    pub strength: f64,
    /// Exponent `m`.
    pub exponent: f64,
}

impl MaskSpec {
    pub const DEFAULT_STRENGTH: f64 = 5.0;
    pub const DEFAULT_EXPONENT: f64 = 4.0;
    pub const DEFAULT_ONSET_FRACTION: f64 = 0.8;

    /// Defaults for a box of half-width `half_width`: onset at 0.8 L, eta = 5, m = 4.
    pub fn default_for(half_width: f64) -> Self {
        Self {
            onset: Self::DEFAULT_ONSET_FRACTION * half_width,
            strength: Self::DEFAULT_STRENGTH,
            exponent: Self::DEFAULT_EXPONENT,
        }
    }

    pub fn validate(&self, half_width: f64) -> Result<()> {
        if !(self.onset > 0.0 && self.onset < half_width) {
            return Err(Error::Config(format!(
                "mask onset x_cap = {} must lie in (0, L = {half_width})",
                self.onset
            )));
        }
        if !(self.strength > 0.0) {
            return Err(Error::Config(format!("mask strength {} must be > 0", self.strength)));
        }
        if !(self.exponent >= 2.0) {
            return Err(Error::Config(format!("mask exponent {} must be >= 2", self.exponent)));
        }
        Ok(())
    }

    pub fn value(&self, x: f64, half_width: f64) -> Result<f64> {
        self.validate(half_width)?;
        Ok(self.value_unchecked(x, half_width))
    }

    pub(crate) fn value_unchecked(&self, x: f64, half_width: f64) -> f64 {
        let ax = x.abs();
        if ax <= self.onset {
            1.0
        } else {
            let s = (ax - self.onset) / (half_width - self.onset);
            (-self.strength * s.powf(self.exponent)).exp()
        }
    }
}

pub fn mask_value(x: f64, spec: &MaskSpec, half_width: f64) -> Result<f64> {
    spec.value(x, half_width)
}

/// Barrier-suppression field `Ip^2 / (4 Z)`.
pub fn barrier_suppression_field(ip: f64, charge: f64) -> f64 {
    ip * ip / (4.0 * charge)
}
