//! Field-free ground states by imaginary-time propagation, and calibration of
//! the soft-core softening parameter to a target ionization potential.

use std::sync::Arc;

use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::model::{FractionalOrder, SoftCore, SystemSpec};
use crate::prop::{EnergyEvaluator, Propagator, StepConfig, WaveFunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GroundStateOptions {
    /// Imaginary time step.
    pub dtau: f64,
    /// Energy is compared across this imaginary-time interval.
    pub check_interval: f64,
    /// Convergence threshold on the energy change over `check_interval`.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        Self {
            dtau: StepConfig::DEFAULT_IMAG_DT,
            check_interval: 1.0,
            tol: 1e-10,
            max_steps: 4_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub psi0: WaveFunction,
    pub e0: f64,
    pub ip: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Imaginary-time relaxation from `guess` (or the default Gaussian `exp(-x^2/2)`).
pub fn relax(
    alpha: FractionalOrder,
    potential: SoftCore,
    grid: Arc<SpatialGrid>,
    opts: &GroundStateOptions,
    guess: Option<&WaveFunction>,
) -> Result<GroundStateResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {} must be > 0", opts.tol)));
    }
    let system = SystemSpec::field_free(alpha, potential);
    let mut prop = Propagator::new(grid.clone(), &system, StepConfig::imaginary(opts.dtau))?;
    let mut energy = EnergyEvaluator::for_system(&grid, &system)?;
    let mut psi = match guess {
        Some(g) if g.grid().as_ref() == grid.as_ref() => {
            let mut p = g.clone();
            p.normalize()?;
            p
        }
        _ => WaveFunction::gaussian(grid.clone(), 0.0, 1.0),
    };
    let per_check = ((opts.check_interval / opts.dtau).round() as usize).max(1);

    let mut e_prev = energy.energy(&psi);
    let mut steps = 0;
    let mut delta = f64::INFINITY;
    while steps < opts.max_steps {
        for _ in 0..per_check {
            prop.step(&mut psi, 0.0)?;
        }
        steps += per_check;
        let e = energy.energy(&psi);
        delta = (e - e_prev).abs();
        e_prev = e;
        if delta < opts.tol {
            psi.fix_phase_at_origin();
            debug!("ground state alpha={} a={} E0={e} after {steps} steps", alpha.value(), potential.softening);
            return Ok(GroundStateResult {
                psi0: psi,
                e0: e,
                ip: -e,
                iterations: steps,
                converged: true,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: steps,
        last_delta: delta,
    })
}

/// Ground state with default step settings and energy tolerance `tol`.
pub fn solve_ground_state(
    alpha: FractionalOrder,
    potential: SoftCore,
    grid: Arc<SpatialGrid>,
    tol: f64,
) -> Result<GroundStateResult> {
    let opts = GroundStateOptions {
        tol,
        ..Default::default()
    };
    relax(alpha, potential, grid, &opts, None)
}

#[derive(Debug, Clone)]
pub struct CalibrationResult {
    pub alpha: FractionalOrder,
    pub charge: f64,
    pub a_star: f64,
    pub achieved_ip: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub ground_state: GroundStateResult,
}

pub const CALIBRATION_A_MIN: f64 = 1e-3;
pub const CALIBRATION_A_MAX: f64 = 1e3;
pub const DEFAULT_IP_TOLERANCE: f64 = 1e-4;

/// Tunes the softening parameter `a` at fixed `Z` so that `Ip(alpha; a)`
/// matches `ip_target` within `tol_ip`, by geometric bracketing from `a = 1`
/// followed by bisection. Monotone decrease of `Ip(a)` is checked while bracketing.
pub fn calibrate_softcore(
    alpha: FractionalOrder,
    ip_target: f64,
    charge: f64,
    grid: Arc<SpatialGrid>,
    tol_ip: f64,
    opts: &GroundStateOptions,
) -> Result<CalibrationResult> {
    if !(ip_target > 0.0) {
        return Err(Error::InvalidParameter(format!("target Ip {ip_target} must be > 0")));
    }
    if !(tol_ip > 0.0) {
        return Err(Error::InvalidParameter(format!("Ip tolerance {tol_ip} must be > 0")));
    }
    let mut evals = 0usize;
    let mut last: Option<GroundStateResult> = None;
    let mut eval = |a: f64, last: &mut Option<GroundStateResult>| -> Result<(f64, GroundStateResult)> {
        evals += 1;
        let gs = relax(alpha, SoftCore::new(charge, a)?, grid.clone(), opts, last.as_ref().map(|g| &g.psi0))?;
        *last = Some(gs.clone());
        Ok((gs.ip - ip_target, gs))
    };

    let done = |a: f64, f: f64, gs: GroundStateResult, bracket: (f64, f64), evals: usize| CalibrationResult {
        alpha,
        charge,
        a_star: a,
        achieved_ip: f + ip_target,
        bracket,
        iterations: evals,
        ground_state: gs,
    };

    // geometric expansion from a = 1
    let (f1, gs1) = eval(1.0, &mut last)?;
    let (mut lo, mut hi);
    if f1 > 0.0 {
        lo = 1.0;
        let mut a = 1.0;
        let mut f_prev = f1;
        loop {
            a *= 2.0;
            if a > CALIBRATION_A_MAX {
                return Err(Error::BracketFailure { lo: CALIBRATION_A_MIN, hi: CALIBRATION_A_MAX });
            }
            let (f, _) = eval(a, &mut last)?;
            if !(f < f_prev) {
                return Err(Error::NonMonotone { a });
            }
            if f < 0.0 {
                hi = a;
                break;
            }
            (lo, f_prev) = (a, f);
        }
    } else if f1 < 0.0 {
        hi = 1.0;
        let mut a = 1.0;
        let mut f_prev = f1;
        loop {
            a *= 0.5;
            if a < CALIBRATION_A_MIN {
                return Err(Error::BracketFailure { lo: CALIBRATION_A_MIN, hi: CALIBRATION_A_MAX });
            }
            let (f, _) = eval(a, &mut last)?;
            if !(f > f_prev) {
                return Err(Error::NonMonotone { a });
            }
            if f > 0.0 {
                lo = a;
                break;
            }
            (hi, f_prev) = (a, f);
        }
    } else {
        return Ok(done(1.0, f1, gs1, (0.5, 2.0), evals));
    }
    debug!("calibration bracket [{lo}, {hi}]");

    loop {
        let mid = 0.5 * (lo + hi);
        let (f, gs) = eval(mid, &mut last)?;
        if f.abs() <= tol_ip {
            return Ok(done(mid, f, gs, (lo, hi), evals));
        }
        if hi - lo < 1e-12 * hi {
            return Err(Error::NonConvergence {
                iterations: evals,
                last_delta: f,
            });
        }
        if f > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}
