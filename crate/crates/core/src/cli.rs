//! Configuration-driven runs: ground states, calibrations, propagations,
//! field sweeps and analytic curve tables, persisted as CSV and JSON.
//!
//! Every CSV starts with a comment line
//! `# fractunnel schema=<name>/v1 config=<sha256>` naming the table schema and
//! the hash of the producing [`RunConfig`]. Timestamps only appear in
//! `provenance.json`, so the CSV tables of two runs of the same configuration
//! are byte-identical.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::checkpoint;
use crate::error::{Error, Result};
use crate::fadk::{fadk_coefficient, normalized_rate_curve, TunnelingModel};
use crate::grid::SpatialGrid;
use crate::groundstate::{calibrate_softcore, relax, GroundStateOptions, GroundStateResult, DEFAULT_IP_TOLERANCE};
use crate::model::{barrier_suppression_field, FieldSpec, FractionalOrder, MaskSpec, RampShape, SoftCore, SystemSpec};
use crate::prop::{propagate, Propagator, StepConfig, WaveFunction};
use crate::rates::{default_bound_radius, fit_rate, fit_slope, instantaneous_rate, DecayTrace, PlateauPolicy, RateFit, SlopeFit};

pub const SCHEMA_VERSION: u32 = 1;
pub const BENCHMARK_FIELDS: [f64; 4] = [0.04, 0.05, 0.06, 0.07];
pub const SWEEP_ALPHAS: [f64; 4] = [1.2, 1.4, 1.6, 1.8];
pub const CURVE_ALPHAS: [f64; 3] = [1.1, 1.5, 2.0];
/// Ionization potential used by `fadk-curves` when no target is configured.
pub const REFERENCE_IP: f64 = 0.67;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Protocol {
    /// Fixed soft-core parameters; `Ip` varies with alpha.
    #[default]
    A,
    /// Softening recalibrated per alpha to a fixed target `Ip`.
    B,
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Protocol::A),
            "B" | "b" => Ok(Protocol::B),
            _ => Err(Error::Config(format!("unknown protocol {s:?} (expected A or B)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Box half-width `L`.
    pub half_width: f64,
    /// Number of points `N`, a power of two.
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            half_width: 100.0,
            points: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Fractional orders; each command has its own default list.
    pub alphas: Option<Vec<f64>>,
    pub charge: f64,
    /// Softening `a` for fixed-potential runs.
    pub softening: f64,
    /// Target ionization potential for calibrated runs.
    pub ip_target: Option<f64>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            alphas: None,
            charge: 1.0,
            softening: 1.0,
            ip_target: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldConfig {
    pub f0: Vec<f64>,
    pub ramp: RampShape,
    pub ramp_duration: f64,
    /// Field at which model curves are pinned to the simulated rate.
    pub f_ref: f64,
    /// Run fields at or above the barrier-suppression field instead of rejecting them.
    pub allow_over_barrier: bool,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            f0: BENCHMARK_FIELDS.to_vec(),
            ramp: RampShape::Sin2,
            ramp_duration: FieldSpec::DEFAULT_RAMP_DURATION,
            f_ref: 0.05,
            allow_over_barrier: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationConfig {
    pub dt: f64,
    /// Fixed propagation time; `None` picks `20 / Gamma_est` clamped to
    /// `[min_total_time, max_total_time]`, with `Gamma_est = exp(-C_alpha / F0)`.
    pub total_time: Option<f64>,
    pub min_total_time: f64,
    pub max_total_time: f64,
    /// Steps between survival-probability samples.
    pub observer_stride: usize,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            dt: StepConfig::DEFAULT_REAL_DT,
            total_time: None,
            min_total_time: 2000.0,
            max_total_time: 3000.0,
            observer_stride: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaskConfig {
    /// Absorber onset `x_cap`; `None` means `0.8 L`.
    pub onset: Option<f64>,
    pub strength: f64,
    pub exponent: f64,
}

impl Default for MaskConfig {
    fn default() -> Self {
        Self {
            onset: None,
            strength: MaskSpec::DEFAULT_STRENGTH,
            exponent: MaskSpec::DEFAULT_EXPONENT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesConfig {
    /// Bound-region radius `x_c`; `None` uses four 1/e half-widths of the ground-state density.
    pub bound_radius: Option<f64>,
    pub plateau_tolerance: f64,
    pub min_window: f64,
}

impl Default for RatesConfig {
    fn default() -> Self {
        let p = PlateauPolicy::default();
        Self {
            bound_radius: None,
            plateau_tolerance: p.tolerance,
            min_window: p.min_window,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    pub ip_tolerance: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            ip_tolerance: DEFAULT_IP_TOLERANCE,
        }
    }
}

/// Complete description of a run. Deserializes from a JSON document in which
/// every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub system: SystemConfig,
    pub field: FieldConfig,
    pub propagation: PropagationConfig,
    pub mask: MaskConfig,
    pub rates: RatesConfig,
    pub ground_state: GroundStateOptions,
    pub calibration: CalibrationConfig,
    pub protocol: Protocol,
    /// Output directory. Not part of the configuration hash.
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json_str(&text).map_err(|e| e.context(format!("reading {}", path.display())))
    }

    /// SHA-256 of the canonical JSON form, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        format!("{:x}", Sha256::digest(&bytes))
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        SpatialGrid::new(g.half_width, g.points)?;
        self.mask_spec().validate(g.half_width)?;
        StepConfig::real(self.propagation.dt).validate(g.half_width)?;
        if let Some(alphas) = &self.system.alphas {
            if alphas.is_empty() {
                return Err(Error::Config("alpha list is empty".into()));
            }
            for &a in alphas {
                FractionalOrder::new(a)?;
            }
        }
        SoftCore::new(self.system.charge, self.system.softening)?;
        if let Some(ip) = self.system.ip_target {
            if !(ip > 0.0) {
                return Err(Error::Config(format!("ip_target = {ip} must be > 0")));
            }
        }
        if let Some(f) = self.field.f0.iter().find(|f| !(**f > 0.0 && f.is_finite())) {
            return Err(Error::Config(format!("field strength {f} must be positive")));
        }
        if !(self.field.f_ref > 0.0) {
            return Err(Error::Config(format!("f_ref = {} must be > 0", self.field.f_ref)));
        }
        self.field_spec(1.0).validate()?;
        let p = &self.propagation;
        if p.observer_stride == 0 {
            return Err(Error::Config("observer_stride must be >= 1".into()));
        }
        if !(p.min_total_time > 0.0 && p.min_total_time <= p.max_total_time) {
            return Err(Error::Config(format!(
                "need 0 < min_total_time <= max_total_time, got {} and {}",
                p.min_total_time, p.max_total_time
            )));
        }
        if let Some(t) = p.total_time {
            if !(t > self.field.ramp_duration) {
                return Err(Error::Config(format!("total_time {t} must exceed the ramp duration")));
            }
        }
        if !(self.rates.plateau_tolerance > 0.0 && self.rates.min_window > 0.0) {
            return Err(Error::Config("plateau tolerance and minimum window must be > 0".into()));
        }
        if !(self.calibration.ip_tolerance > 0.0) {
            return Err(Error::Config("ip_tolerance must be > 0".into()));
        }
        Ok(())
    }

    pub fn spatial_grid(&self) -> Result<Arc<SpatialGrid>> {
        Ok(Arc::new(SpatialGrid::new(self.grid.half_width, self.grid.points)?))
    }

    pub fn alphas_or(&self, default: &[f64]) -> Result<Vec<FractionalOrder>> {
        self.system
            .alphas
            .as_deref()
            .unwrap_or(default)
            .iter()
            .map(|&a| FractionalOrder::new(a))
            .collect()
    }

    pub fn mask_spec(&self) -> MaskSpec {
        let mut m = MaskSpec::default_for(self.grid.half_width);
        if let Some(onset) = self.mask.onset {
            m.onset = onset;
        }
        m.strength = self.mask.strength;
        m.exponent = self.mask.exponent;
        m
    }

    pub fn field_spec(&self, f0: f64) -> FieldSpec {
        FieldSpec {
            peak: f0,
            ramp: self.field.ramp,
            ramp_duration: self.field.ramp_duration,
        }
    }

    pub fn plateau_policy(&self, field: &FieldSpec) -> PlateauPolicy {
        PlateauPolicy {
            tolerance: self.rates.plateau_tolerance,
            min_window: self.rates.min_window,
            start_after: field.ramp_end(),
        }
    }

    pub fn total_time_for(&self, model: &TunnelingModel, f0: f64) -> f64 {
        let p = &self.propagation;
        if let Some(t) = p.total_time {
            return t;
        }
        let budget = 20.0 * model.exponent(f0).exp();
        budget.clamp(p.min_total_time, p.max_total_time)
    }

    fn require_ip_target(&self) -> Result<f64> {
        self.system
            .ip_target
            .ok_or_else(|| Error::Config("calibrated runs require system.ip_target".into()))
    }
}

/// The requested operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    GroundState,
    Calibrate,
    Propagate,
    Benchmark,
    Sweep(Protocol),
    FadkCurves,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::GroundState => "ground-state",
            Command::Calibrate => "calibrate",
            Command::Propagate => "propagate",
            Command::Benchmark => "benchmark",
            Command::Sweep(Protocol::A) => "sweep-A",
            Command::Sweep(Protocol::B) => "sweep-B",
            Command::FadkCurves => "fadk-curves",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateSummary {
    pub alpha: f64,
    pub charge: f64,
    pub softening: f64,
    pub e0: f64,
    pub ip: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub alpha: f64,
    #[serde(rename = "Z")]
    pub charge: f64,
    pub a_star: f64,
    #[serde(rename = "achieved_Ip")]
    pub achieved_ip: f64,
    pub iterations: usize,
}

/// Field-free starting point for one alpha.
#[derive(Debug, Clone)]
pub struct AlphaSetup {
    pub alpha: FractionalOrder,
    pub potential: SoftCore,
    pub ground: GroundStateResult,
    pub calibration: Option<CalibrationRow>,
}

impl AlphaSetup {
    pub fn summary(&self) -> GroundStateSummary {
        GroundStateSummary {
            alpha: self.alpha.value(),
            charge: self.potential.charge,
            softening: self.potential.softening,
            e0: self.ground.e0,
            ip: self.ground.ip,
            iterations: self.ground.iterations,
            converged: self.ground.converged,
        }
    }
}

/// Solves (Protocol A) or calibrates (Protocol B) the ground state for `alpha`.
pub fn prepare_alpha(
    cfg: &RunConfig,
    grid: &Arc<SpatialGrid>,
    alpha: FractionalOrder,
    protocol: Protocol,
) -> Result<AlphaSetup> {
    let charge = cfg.system.charge;
    match protocol {
        Protocol::A => {
            let potential = SoftCore::new(charge, cfg.system.softening)?;
            let ground = relax(alpha, potential, grid.clone(), &cfg.ground_state, None)
                .map_err(|e| e.context(format!("ground state for alpha = {}", alpha.value())))?;
            Ok(AlphaSetup {
                alpha,
                potential,
                ground,
                calibration: None,
            })
        }
        Protocol::B => {
            let target = cfg.require_ip_target()?;
            let cal = calibrate_softcore(
                alpha,
                target,
                charge,
                grid.clone(),
                cfg.calibration.ip_tolerance,
                &cfg.ground_state,
            )
            .map_err(|e| e.context(format!("calibration for alpha = {}", alpha.value())))?;
            Ok(AlphaSetup {
                alpha,
                potential: SoftCore::new(charge, cal.a_star)?,
                calibration: Some(CalibrationRow {
                    alpha: alpha.value(),
                    charge,
                    a_star: cal.a_star,
                    achieved_ip: cal.achieved_ip,
                    iterations: cal.iterations,
                }),
                ground: cal.ground_state,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    /// Ran at or above the barrier-suppression field with the override set.
    OverBarrier,
    /// At or above the barrier-suppression field without the override.
    Rejected,
    NoPlateau,
    BelowRateFloor,
    Error,
}

impl PointStatus {
    pub fn is_success(self) -> bool {
        matches!(self, PointStatus::Ok | PointStatus::OverBarrier)
    }
}

/// Outcome of one `(alpha, F0)` propagation.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub alpha: f64,
    pub f0: f64,
    pub ip: f64,
    pub softening: f64,
    pub total_time: f64,
    pub x_c: f64,
    pub status: PointStatus,
    pub detail: String,
    pub fit: Option<RateFit>,
    pub trace: Option<DecayTrace>,
    pub final_state: Option<WaveFunction>,
    pub boundary_warning: bool,
}

impl PointResult {
    pub fn gamma(&self) -> Option<f64> {
        self.fit.as_ref().filter(|_| self.status.is_success()).map(|f| f.gamma)
    }

    pub fn label(&self) -> String {
        point_label(self.alpha, self.f0)
    }
}

fn point_label(alpha: f64, f0: f64) -> String {
    format!("alpha{alpha}_f{f0}")
}

/// Propagates `setup` in the field `f0` and fits its decay rate. Failures are
/// recorded in the returned status rather than propagated.
pub fn simulate_point(cfg: &RunConfig, grid: &Arc<SpatialGrid>, setup: &AlphaSetup, f0: f64) -> PointResult {
    let ip = setup.ground.ip;
    let mut point = PointResult {
        alpha: setup.alpha.value(),
        f0,
        ip,
        softening: setup.potential.softening,
        total_time: 0.0,
        x_c: 0.0,
        status: PointStatus::Ok,
        detail: String::new(),
        fit: None,
        trace: None,
        final_state: None,
        boundary_warning: false,
    };
    let f_bsi = barrier_suppression_field(ip, setup.potential.charge);
    if f0 >= f_bsi {
        if !cfg.field.allow_over_barrier {
            point.status = PointStatus::Rejected;
            point.detail = format!("F0 = {f0} is not below F_BSI = {f_bsi:.5}; set allow_over_barrier to run it");
            return point;
        }
        warn!("alpha = {} F0 = {f0} is above the barrier-suppression field {f_bsi:.5}", point.alpha);
        point.status = PointStatus::OverBarrier;
        point.detail = format!("F_BSI = {f_bsi:.5}");
    }

    let mask = cfg.mask_spec();
    let field = cfg.field_spec(f0);
    let outcome = (|| -> Result<()> {
        let model = TunnelingModel::new(setup.alpha, ip)?;
        point.total_time = cfg.total_time_for(&model, f0);
        point.x_c = cfg
            .rates
            .bound_radius
            .unwrap_or_else(|| default_bound_radius(&setup.ground.psi0, mask.onset));
        let system = SystemSpec {
            alpha: setup.alpha,
            potential: setup.potential,
            field,
        };
        let step = StepConfig::real(cfg.propagation.dt).with_mask(mask);
        let mut propagator = Propagator::new(grid.clone(), &system, step)?;
        let run = propagate(
            &setup.ground.psi0,
            &mut propagator,
            point.total_time,
            cfg.propagation.observer_stride,
            point.x_c,
        )?;
        point.boundary_warning = run.boundary_warning;
        point.trace = Some(run.trace);
        point.final_state = Some(run.final_state);
        let fit = fit_rate(point.trace.as_ref().expect("trace stored"), &cfg.plateau_policy(&field))?;
        info!(
            "alpha = {} F0 = {f0}: Gamma = {:.6e} over [{:.1}, {:.1}]",
            point.alpha, fit.gamma, fit.window.0, fit.window.1
        );
        point.fit = Some(fit);
        Ok(())
    })();
    if let Err(e) = outcome {
        point.status = match e {
            Error::NoPlateau(_) => PointStatus::NoPlateau,
            Error::BelowRateFloor { .. } => PointStatus::BelowRateFloor,
            _ => PointStatus::Error,
        };
        point.detail = e.to_string();
        warn!("alpha = {} F0 = {f0} failed: {e}", point.alpha);
    }
    point
}

/// Slope of `-ln Gamma` against `1/F0` for one alpha, with the fADK prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeRecord {
    pub alpha: f64,
    pub ip: f64,
    pub fit: SlopeFit,
    pub c_alpha_predicted: f64,
}

/// Simulated rate next to the fADK curve pinned at the reference field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub alpha: f64,
    #[serde(rename = "F0")]
    pub f0: f64,
    #[serde(rename = "inv_F0")]
    pub inv_f0: f64,
    pub gamma_sim: f64,
    pub minus_ln_gamma_sim: f64,
    pub gamma_model: f64,
    pub minus_ln_gamma_model: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub config_hash: String,
    pub protocol: Protocol,
    pub setups: Vec<GroundStateSummary>,
    pub calibrations: Vec<CalibrationRow>,
    pub points: Vec<PointResult>,
    pub slopes: Vec<SlopeRecord>,
    pub comparisons: Vec<ComparisonRow>,
    /// Failed field points and alphas. Any entry makes the run unsuccessful.
    pub failures: Vec<String>,
    /// Analysis steps that could not be completed (e.g. too few fields for a slope).
    pub warnings: Vec<String>,
}

impl SweepResult {
    pub fn all_succeeded(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn point(&self, alpha: f64, f0: f64) -> Option<&PointResult> {
        self.points.iter().find(|p| same(p.alpha, alpha) && same(p.f0, f0))
    }

    pub fn gamma(&self, alpha: f64, f0: f64) -> Option<f64> {
        self.point(alpha, f0).and_then(PointResult::gamma)
    }

    pub fn slope(&self, alpha: f64) -> Option<&SlopeRecord> {
        self.slopes.iter().find(|s| same(s.alpha, alpha))
    }
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// Runs every `(alpha, F0)` pair. Jobs are independent and collected in
/// configuration order, so the result does not depend on the thread count.
pub fn compute_sweep(cfg: &RunConfig, protocol: Protocol, alphas: &[FractionalOrder], analyze: bool) -> Result<SweepResult> {
    cfg.validate()?;
    let grid = cfg.spatial_grid()?;
    let prepared: Vec<Result<AlphaSetup>> = alphas.par_iter().map(|&a| prepare_alpha(cfg, &grid, a, protocol)).collect();

    let mut failures = Vec::new();
    let mut warnings = Vec::new();
    let mut setups = Vec::new();
    for r in prepared {
        match r {
            Ok(s) => setups.push(s),
            Err(e @ Error::Config(_)) => return Err(e),
            Err(e) => {
                warn!("{e}");
                failures.push(e.to_string());
            }
        }
    }

    let jobs: Vec<(&AlphaSetup, f64)> = setups
        .iter()
        .flat_map(|s| cfg.field.f0.iter().map(move |&f| (s, f)))
        .collect();
    let points: Vec<PointResult> = jobs.par_iter().map(|&(s, f)| simulate_point(cfg, &grid, s, f)).collect();
    for p in points.iter().filter(|p| !p.status.is_success()) {
        failures.push(format!("alpha = {} F0 = {}: {}", p.alpha, p.f0, p.detail));
    }

    let mut slopes = Vec::new();
    let mut comparisons = Vec::new();
    if analyze {
        for s in &setups {
            let alpha = s.alpha.value();
            let ip = s.ground.ip;
            let measured: Vec<(f64, f64)> = points
                .iter()
                .filter(|p| same(p.alpha, alpha))
                .filter_map(|p| p.gamma().map(|g| (p.f0, g)))
                .collect();
            match fit_slope(s.alpha, &measured) {
                Ok(fit) => slopes.push(SlopeRecord {
                    alpha,
                    ip,
                    fit,
                    c_alpha_predicted: fadk_coefficient(s.alpha, ip),
                }),
                Err(e) => warnings.push(format!("slope for alpha = {alpha}: {e}")),
            }
            let Some(&(_, gamma_ref)) = measured.iter().find(|m| same(m.0, cfg.field.f_ref)) else {
                warnings.push(format!(
                    "alpha = {alpha}: no simulated rate at F_ref = {}, model curve not pinned",
                    cfg.field.f_ref
                ));
                continue;
            };
            let model = TunnelingModel::new(s.alpha, ip)?;
            let fields: Vec<f64> = measured.iter().map(|m| m.0).collect();
            let curve = normalized_rate_curve(&model, cfg.field.f_ref, gamma_ref, &fields)?;
            for (&(f0, gamma_sim), &(_, gamma_model)) in measured.iter().zip(&curve) {
                comparisons.push(ComparisonRow {
                    alpha,
                    f0,
                    inv_f0: 1.0 / f0,
                    gamma_sim,
                    minus_ln_gamma_sim: -gamma_sim.ln(),
                    gamma_model,
                    minus_ln_gamma_model: -gamma_model.ln(),
                    ratio: gamma_sim / gamma_model,
                });
            }
        }
    }

    Ok(SweepResult {
        config_hash: cfg.hash(),
        protocol,
        setups: setups.iter().map(AlphaSetup::summary).collect(),
        calibrations: setups.iter().filter_map(|s| s.calibration.clone()).collect(),
        points,
        slopes,
        comparisons,
        failures,
        warnings,
    })
}

/// One line of the analytic `-ln Gamma = C_alpha / F0` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub alpha: f64,
    #[serde(rename = "Ip")]
    pub ip: f64,
    #[serde(rename = "C_alpha")]
    pub c_alpha: f64,
    #[serde(rename = "inv_F0")]
    pub inv_f0: f64,
    pub minus_ln_gamma: f64,
}

pub fn compute_fadk_curves(cfg: &RunConfig) -> Result<Vec<CurveRow>> {
    let ip = cfg.system.ip_target.unwrap_or(REFERENCE_IP);
    let mut rows = Vec::new();
    for alpha in cfg.alphas_or(&CURVE_ALPHAS)? {
        let model = TunnelingModel::new(alpha, ip)?;
        for &f0 in &cfg.field.f0 {
            rows.push(CurveRow {
                alpha: alpha.value(),
                ip,
                c_alpha: model.c_alpha,
                inv_f0: 1.0 / f0,
                minus_ln_gamma: model.exponent(f0),
            });
        }
    }
    Ok(rows)
}

/// Files written by a command, and the failures that make its exit status non-zero.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub config_hash: String,
    pub files: Vec<PathBuf>,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn succeeded(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Runs `command` and writes its outputs under `out`.
pub fn run(cfg: &RunConfig, command: Command, out: &Path) -> Result<RunReport> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    let started = unix_now();
    let mut report = match command {
        Command::GroundState => run_ground_state(cfg, out)?,
        Command::Calibrate => run_calibration(cfg, out)?,
        Command::Propagate => run_propagation(cfg, out)?,
        Command::Benchmark => run_benchmark(cfg, out)?,
        Command::Sweep(p) => run_protocol_sweep(cfg, p, out)?,
        Command::FadkCurves => run_fadk_curves(cfg, out)?,
    };
    let path = out.join("provenance.json");
    let provenance = Provenance {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: command.name(),
        config_hash: &report.config_hash,
        config: cfg,
        started_unix: started,
        finished_unix: unix_now(),
        files: report.files.iter().map(|p| p.display().to_string()).collect(),
        failures: &report.failures,
        warnings: &report.warnings,
    };
    write_json(&path, &provenance)?;
    report.files.push(path);
    Ok(report)
}

#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config_hash: &'a str,
    config: &'a RunConfig,
    started_unix: f64,
    finished_unix: f64,
    files: Vec<String>,
    failures: &'a [String],
    warnings: &'a [String],
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// Ground states at fixed `(Z, a)` for every configured alpha (default `2`).
pub fn run_ground_state(cfg: &RunConfig, out: &Path) -> Result<RunReport> {
    let grid = cfg.spatial_grid()?;
    let hash = cfg.hash();
    let alphas = cfg.alphas_or(&[2.0])?;
    let setups: Vec<AlphaSetup> = alphas
        .par_iter()
        .map(|&a| prepare_alpha(cfg, &grid, a, Protocol::A))
        .collect::<Result<_>>()?;
    let mut report = RunReport {
        config_hash: hash.clone(),
        ..Default::default()
    };
    for s in &setups {
        let label = format!("alpha{}", s.alpha.value());
        let json = out.join(format!("ground_state_{label}.json"));
        write_json(
            &json,
            &Tagged {
                config_hash: &hash,
                body: &s.summary(),
            },
        )?;
        let wf = out.join(format!("psi0_{label}.wf"));
        checkpoint::write(&wf, &s.ground.psi0, s.alpha, 0.0, checkpoint::FLAG_IMAGINARY_TIME)?;
        report.files.extend([json, wf]);
    }
    let summaries: Vec<GroundStateSummary> = setups.iter().map(AlphaSetup::summary).collect();
    report.files.push(write_table(out, "ground_states", "ground_states", &hash, &summaries)?);
    Ok(report)
}

/// Calibrates the softening to `ip_target` for every configured alpha (default `2`).
pub fn run_calibration(cfg: &RunConfig, out: &Path) -> Result<RunReport> {
    cfg.require_ip_target()?;
    let grid = cfg.spatial_grid()?;
    let hash = cfg.hash();
    let alphas = cfg.alphas_or(&[2.0])?;
    let results: Vec<Result<AlphaSetup>> = alphas.par_iter().map(|&a| prepare_alpha(cfg, &grid, a, Protocol::B)).collect();
    let mut report = RunReport {
        config_hash: hash.clone(),
        ..Default::default()
    };
    let mut rows = Vec::new();
    for r in results {
        match r {
            Ok(s) => {
                let wf = out.join(format!("psi0_alpha{}.wf", s.alpha.value()));
                checkpoint::write(&wf, &s.ground.psi0, s.alpha, 0.0, checkpoint::FLAG_IMAGINARY_TIME)?;
                report.files.push(wf);
                rows.extend(s.calibration);
            }
            Err(e) => report.failures.push(e.to_string()),
        }
    }
    report.files.push(write_table(out, "calibration", "calibration", &hash, &rows)?);
    Ok(report)
}

/// Single propagations for every `(alpha, F0)` pair, without slope analysis.
pub fn run_propagation(cfg: &RunConfig, out: &Path) -> Result<RunReport> {
    let sweep = compute_sweep(cfg, cfg.protocol, &cfg.alphas_or(&[2.0])?, false)?;
    write_sweep(&sweep, out)
}

/// The standard-case benchmark: `alpha = 2` at fixed `(Z, a)`.
pub fn run_benchmark(cfg: &RunConfig, out: &Path) -> Result<RunReport> {
    let sweep = compute_benchmark(cfg)?;
    write_sweep(&sweep, out)
}

pub fn compute_benchmark(cfg: &RunConfig) -> Result<SweepResult> {
    if let Some(alphas) = &cfg.system.alphas {
        if alphas.as_slice() != [2.0] {
            return Err(Error::Config(format!("the benchmark runs at alpha = 2 only, got {alphas:?}")));
        }
    }
    compute_sweep(cfg, Protocol::A, &[FractionalOrder::STANDARD], true)
}

pub fn run_protocol_sweep(cfg: &RunConfig, protocol: Protocol, out: &Path) -> Result<RunReport> {
    let sweep = compute_sweep(cfg, protocol, &cfg.alphas_or(&SWEEP_ALPHAS)?, true)?;
    write_sweep(&sweep, out)
}

pub fn run_fadk_curves(cfg: &RunConfig, out: &Path) -> Result<RunReport> {
    let hash = cfg.hash();
    let rows = compute_fadk_curves(cfg)?;
    Ok(RunReport {
        files: vec![write_table(out, "fadk_curves", "fadk_curves", &hash, &rows)?],
        config_hash: hash,
        ..Default::default()
    })
}

/// Row of the `rates` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub alpha: f64,
    #[serde(rename = "F0")]
    pub f0: f64,
    #[serde(rename = "Ip")]
    pub ip: f64,
    pub softening: f64,
    pub x_c: f64,
    #[serde(rename = "T_total")]
    pub total_time: f64,
    pub gamma: Option<f64>,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub p0: Option<f64>,
    pub r2: Option<f64>,
    pub status: PointStatus,
    pub detail: String,
}

impl From<&PointResult> for RateRow {
    fn from(p: &PointResult) -> Self {
        let fit = p.fit.as_ref();
        Self {
            alpha: p.alpha,
            f0: p.f0,
            ip: p.ip,
            softening: p.softening,
            x_c: p.x_c,
            total_time: p.total_time,
            gamma: fit.map(|f| f.gamma),
            t1: fit.map(|f| f.window.0),
            t2: fit.map(|f| f.window.1),
            p0: fit.map(|f| f.p0),
            r2: fit.map(|f| f.r_squared),
            status: p.status,
            detail: p.detail.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SlopeRow {
    alpha: f64,
    #[serde(rename = "Ip")]
    ip: f64,
    m_alpha: f64,
    intercept: f64,
    r2: f64,
    points: usize,
    #[serde(rename = "C_alpha_predicted")]
    c_alpha_predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TraceRow {
    t: f64,
    #[serde(rename = "Pb")]
    pb: f64,
    #[serde(rename = "Gamma_inst")]
    gamma_inst: Option<f64>,
}

#[derive(Serialize)]
struct Tagged<'a, T> {
    config_hash: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    config_hash: &'a str,
    protocol: Protocol,
    ground_states: &'a [GroundStateSummary],
    calibrations: &'a [CalibrationRow],
    rates: Vec<RateRow>,
    slopes: &'a [SlopeRecord],
    failures: &'a [String],
    warnings: &'a [String],
}

/// Writes rate, trace, slope, comparison and calibration tables, final-state
/// checkpoints and a JSON summary of `sweep`.
pub fn write_sweep(sweep: &SweepResult, out: &Path) -> Result<RunReport> {
    fs::create_dir_all(out)?;
    let hash = &sweep.config_hash;
    let mut files = Vec::new();
    let rates: Vec<RateRow> = sweep.points.iter().map(RateRow::from).collect();
    files.push(write_table(out, "rates", "rates", hash, &rates)?);

    for p in &sweep.points {
        if let Some(trace) = &p.trace {
            let inst = match &p.fit {
                Some(f) => Some(f.gamma_inst.clone()),
                None => instantaneous_rate(trace).ok(),
            };
            let rows: Vec<TraceRow> = trace
                .times()
                .iter()
                .zip(trace.survival())
                .enumerate()
                .map(|(i, (&t, &pb))| TraceRow {
                    t,
                    pb,
                    gamma_inst: inst.as_ref().map(|g| g[i].1),
                })
                .collect();
            files.push(write_table(out, &format!("trace_{}", p.label()), "trace", hash, &rows)?);
        }
        if let Some(psi) = &p.final_state {
            let path = out.join(format!("psi_final_{}.wf", p.label()));
            let alpha = FractionalOrder::new(p.alpha)?;
            checkpoint::write(&path, psi, alpha, p.total_time, checkpoint::FLAG_MASKED)?;
            files.push(path);
        }
    }

    if !sweep.slopes.is_empty() {
        let rows: Vec<SlopeRow> = sweep
            .slopes
            .iter()
            .map(|s| SlopeRow {
                alpha: s.alpha,
                ip: s.ip,
                m_alpha: s.fit.m_alpha,
                intercept: s.fit.intercept,
                r2: s.fit.r_squared,
                points: s.fit.points.len(),
                c_alpha_predicted: s.c_alpha_predicted,
            })
            .collect();
        files.push(write_table(out, "slopes", "slopes", hash, &rows)?);
    }
    if !sweep.comparisons.is_empty() {
        files.push(write_table(out, "comparison", "comparison", hash, &sweep.comparisons)?);
    }
    if !sweep.calibrations.is_empty() {
        files.push(write_table(out, "calibration", "calibration", hash, &sweep.calibrations)?);
    }

    let summary = out.join("summary.json");
    write_json(
        &summary,
        &SweepSummary {
            config_hash: hash,
            protocol: sweep.protocol,
            ground_states: &sweep.setups,
            calibrations: &sweep.calibrations,
            rates,
            slopes: &sweep.slopes,
            failures: &sweep.failures,
            warnings: &sweep.warnings,
        },
    )?;
    files.push(summary);
    Ok(RunReport {
        config_hash: hash.clone(),
        files,
        failures: sweep.failures.clone(),
        warnings: sweep.warnings.clone(),
    })
}

fn tag_line(schema: &str, hash: &str) -> String {
    format!("# fractunnel schema={schema}/v{SCHEMA_VERSION} config={hash}")
}

/// Writes `rows` to `<out>/<stem>.csv` under the schema/config tag line.
pub fn write_table<T: Serialize>(out: &Path, stem: &str, schema: &str, hash: &str, rows: &[T]) -> Result<PathBuf> {
    let path = out.join(format!("{stem}.csv"));
    let mut file = File::create(&path)?;
    writeln!(file, "{}", tag_line(schema, hash))?;
    let mut w = csv::Writer::from_writer(file);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(path)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}

/// Schema name and configuration hash from a table's tag line.
pub fn read_tag(path: &Path) -> Result<(String, String)> {
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    let bad = || Error::Config(format!("{} has no fractunnel tag line", path.display()));
    let rest = first.trim_end().strip_prefix("# fractunnel schema=").ok_or_else(bad)?;
    let (schema, hash) = rest.split_once(" config=").ok_or_else(bad)?;
    Ok((schema.to_string(), hash.to_string()))
}

#[derive(Debug, Clone)]
pub struct RateTable {
    pub config_hash: String,
    pub rows: Vec<RateRow>,
}

pub fn read_rate_table(path: &Path) -> Result<RateTable> {
    let (schema, config_hash) = read_tag(path)?;
    let expected = format!("rates/v{SCHEMA_VERSION}");
    if schema != expected {
        return Err(Error::Config(format!("{} holds schema {schema}, expected {expected}", path.display())));
    }
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let rows = reader.deserialize().collect::<std::result::Result<_, _>>()?;
    Ok(RateTable { config_hash, rows })
}

/// Fits one slope per alpha from the successful rows of several rate tables.
/// Tables produced by different configurations are rejected.
pub fn slopes_from_tables(paths: &[&Path]) -> Result<Vec<SlopeFit>> {
    let mut tables = paths.iter().map(|p| read_rate_table(p));
    let Some(first) = tables.next() else {
        return Err(Error::Degenerate("no rate tables given".into()));
    };
    let first = first?;
    let mut rows = first.rows;
    for t in tables {
        let t = t?;
        if t.config_hash != first.config_hash {
            return Err(Error::ConfigMismatch(first.config_hash, t.config_hash));
        }
        rows.extend(t.rows);
    }
    let mut alphas: Vec<f64> = Vec::new();
    for r in &rows {
        if !alphas.iter().any(|&a| same(a, r.alpha)) {
            alphas.push(r.alpha);
        }
    }
    alphas
        .into_iter()
        .map(|alpha| {
            let points: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| same(r.alpha, alpha) && r.status.is_success())
                .filter_map(|r| r.gamma.map(|g| (r.f0, g)))
                .collect();
            fit_slope(FractionalOrder::new(alpha)?, &points)
        })
        .collect()
}
