//! Survival probability, instantaneous decay rate, plateau detection and the
//! two regressions used downstream: `ln Pb` against `t` for a single run, and
//! `-ln Gamma` against `1/F0` across a field sweep.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FractionalOrder;
use crate::prop::WaveFunction;

/// Fitted rates below this are reported as "no measurable decay".
pub const RATE_FLOOR: f64 = 1e-12;

/// Sampled bound-region survival probability `Pb(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTrace {
    times: Vec<f64>,
    pb: Vec<f64>,
    x_c: f64,
}

impl DecayTrace {
    pub fn new(times: Vec<f64>, pb: Vec<f64>, x_c: f64) -> Result<Self> {
        if times.len() != pb.len() {
            return Err(Error::InvalidDimension(format!(
                "{} times but {} probabilities",
                times.len(),
                pb.len()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("trace times must be strictly increasing".into()));
        }
        // allow roundoff just above one
        if let Some(p) = pb.iter().find(|p| !(**p >= 0.0 && **p <= 1.0 + 1e-9)) {
            return Err(Error::Domain(format!("survival probability {p} outside [0, 1]")));
        }
        Ok(Self { times, pb, x_c })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn survival(&self) -> &[f64] {
        &self.pb
    }

    pub fn x_c(&self) -> f64 {
        self.x_c
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Same trace with every probability multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.times.clone(), self.pb.iter().map(|p| p * c).collect(), self.x_c)
    }
}

/// `sum_{|x_j| <= x_c} |psi_j|^2 dx`.
pub fn survival_probability(psi: &WaveFunction, x_c: f64) -> f64 {
    psi.grid()
        .x()
        .iter()
        .zip(psi.amplitudes())
        .filter(|(x, _)| x.abs() <= x_c)
        .map(|(_, c)| c.norm_sqr())
        .sum::<f64>()
        * psi.grid().dx()
}

/// Default bound-region half-width: four times the `1/e` half-width of the
/// ground-state density, kept strictly inside the absorber onset.
pub fn default_bound_radius(psi0: &WaveFunction, x_cap: f64) -> f64 {
    let grid = psi0.grid();
    let dens = psi0.density();
    let i0 = grid.origin_index();
    let peak = dens[i0];
    let threshold = peak / std::f64::consts::E;
    let width = (i0..grid.len())
        .find(|&i| dens[i] < threshold)
        .map(|i| grid.x()[i])
        .unwrap_or(grid.half_width());
    (4.0 * width).min(0.95 * x_cap)
}

/// `Gamma_inst(t_i) = -d ln Pb / dt`, central differences inside, one-sided at the ends.
pub fn instantaneous_rate(trace: &DecayTrace) -> Result<Vec<(f64, f64)>> {
    let n = trace.len();
    if n < 3 {
        return Err(Error::Domain(format!("need at least 3 samples, got {n}")));
    }
    if let Some(p) = trace.pb.iter().find(|p| !(**p > 0.0)) {
        return Err(Error::Domain(format!("survival probability {p} is not positive")));
    }
    let ln: Vec<f64> = trace.pb.iter().map(|p| p.ln()).collect();
    let t = &trace.times;
    let rate = |a: usize, b: usize| -(ln[b] - ln[a]) / (t[b] - t[a]);
    Ok((0..n)
        .map(|i| {
            let g = if i == 0 {
                rate(0, 1)
            } else if i == n - 1 {
                rate(n - 2, n - 1)
            } else {
                rate(i - 1, i + 1)
            };
            (t[i], g)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauPolicy {
    /// Allowed relative deviation of `Gamma_inst` from its window median.
    pub tolerance: f64,
    /// Minimum window duration (a.u.).
    pub min_window: f64,
    /// Windows may not start before this time (the ramp end).
    pub start_after: f64,
}

impl Default for PlateauPolicy {
    fn default() -> Self {
        Self {
            tolerance: 0.10,
            min_window: 50.0,
            start_after: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub gamma: f64,
    pub window: (f64, f64),
    /// Fitted intercept amplitude `P0`.
    pub p0: f64,
    pub r_squared: f64,
    pub gamma_inst: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, PartialEq)]
struct Total(f64);

impl Eq for Total {}

impl PartialOrd for Total {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Total {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Streaming median over a growing set.
#[derive(Default)]
struct RunningMedian {
    low: BinaryHeap<Total>,
    high: BinaryHeap<Reverse<Total>>,
}

impl RunningMedian {
    fn push(&mut self, v: f64) {
        match self.low.peek() {
            Some(top) if v > top.0 => self.high.push(Reverse(Total(v))),
            _ => self.low.push(Total(v)),
        }
        if self.low.len() > self.high.len() + 1 {
            let t = self.low.pop().unwrap();
            self.high.push(Reverse(t));
        } else if self.high.len() > self.low.len() {
            let Reverse(t) = self.high.pop().unwrap();
            self.low.push(t);
        }
    }

    fn median(&self) -> f64 {
        let lo = self.low.peek().map(|t| t.0).unwrap_or(f64::NAN);
        if self.low.len() > self.high.len() {
            lo
        } else {
            0.5 * (lo + self.high.peek().map(|t| t.0 .0).unwrap_or(f64::NAN))
        }
    }
}

/// Longest qualifying window `[i, j]` over the given start indices.
fn longest_window(
    times: &[f64],
    rates: &[f64],
    starts: impl Iterator<Item = usize>,
    policy: &PlateauPolicy,
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    let mut best_len = f64::NEG_INFINITY;
    for i in starts {
        let mut med = RunningMedian::default();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for j in i..times.len() {
            let g = rates[j];
            med.push(g);
            lo = lo.min(g);
            hi = hi.max(g);
            let len = times[j] - times[i];
            if len < policy.min_window || len <= best_len {
                continue;
            }
            let m = med.median();
            if m > RATE_FLOOR && hi - m <= policy.tolerance * m && m - lo <= policy.tolerance * m {
                best = Some((i, j));
                best_len = len;
            }
        }
    }
    best
}

/// Ordinary least squares `y = slope x + intercept`, with `r^2`.
pub(crate) fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (slope, intercept, r2)
}

/// Regression of `ln Pb` over the samples in `[t1, t2]`.
pub fn fit_window(trace: &DecayTrace, t1: f64, t2: f64) -> Result<(f64, f64, f64)> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = trace
        .times
        .iter()
        .zip(&trace.pb)
        .filter(|(t, _)| **t >= t1 && **t <= t2)
        .map(|(t, p)| (*t, p.ln()))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::Degenerate(format!("fewer than two samples in [{t1}, {t2}]")));
    }
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    Ok((-slope, intercept.exp(), r2))
}

/// Detects the exponential-decay plateau and fits `Gamma` over it.
pub fn fit_rate(trace: &DecayTrace, policy: &PlateauPolicy) -> Result<RateFit> {
    let gamma_inst = instantaneous_rate(trace)?;
    let rates: Vec<f64> = gamma_inst.iter().map(|g| g.1).collect();
    let times = &trace.times;
    let first = times.partition_point(|&t| t < policy.start_after);
    let span = times.last().copied().unwrap_or(0.0) - times.get(first).copied().unwrap_or(f64::INFINITY);
    if !(span >= policy.min_window) {
        return Err(Error::NoPlateau(format!(
            "trace covers {span:.1} a.u. after t = {}, less than the minimum window {}",
            policy.start_after, policy.min_window
        )));
    }

    let count = times.len() - first;
    let coarse = count.div_ceil(256).max(1);
    let mut best = longest_window(times, &rates, (first..times.len()).step_by(coarse), policy);
    if coarse > 1 {
        if let Some((i, _)) = best {
            let lo = i.saturating_sub(coarse).max(first);
            let hi = (i + coarse).min(times.len());
            let fine = longest_window(times, &rates, lo..hi, policy);
            let dur = |w: Option<(usize, usize)>| w.map(|(a, b)| times[b] - times[a]).unwrap_or(-1.0);
            if dur(fine) > dur(best) {
                best = fine;
            }
        }
    }

    let Some((i, j)) = best else {
        let mut tail: Vec<f64> = rates[first..].to_vec();
        tail.sort_by(f64::total_cmp);
        let med = tail[tail.len() / 2];
        if med.abs() <= RATE_FLOOR {
            return Err(Error::BelowRateFloor { gamma: med });
        }
        return Err(Error::NoPlateau(format!(
            "Gamma_inst never stays within {:.0}% of its median for {} a.u.",
            100.0 * policy.tolerance,
            policy.min_window
        )));
    };

    let (gamma, p0, r_squared) = fit_window(trace, times[i], times[j])?;
    if gamma < RATE_FLOOR {
        return Err(Error::BelowRateFloor { gamma });
    }
    Ok(RateFit {
        gamma,
        window: (times[i], times[j]),
        p0,
        r_squared,
        gamma_inst,
    })
}

/// Linear fit of `-ln Gamma` against `1/F0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub alpha: FractionalOrder,
    /// `(F0, Gamma)` pairs.
    pub points: Vec<(f64, f64)>,
    pub m_alpha: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_slope(alpha: FractionalOrder, points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::Degenerate(format!(
            "slope fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| !(p.1 > 0.0) || !(p.0 > 0.0)) {
        return Err(Error::Domain(format!("non-positive field or rate in {p:?}")));
    }
    let mut fields: Vec<f64> = points.iter().map(|p| p.0).collect();
    fields.sort_by(f64::total_cmp);
    if fields.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Degenerate("duplicate field strengths".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| 1.0 / p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| -p.1.ln()).collect();
    let (m, b, r2) = linear_fit(&xs, &ys);
    Ok(SlopeFit {
        alpha,
        points: points.to_vec(),
        m_alpha: m,
        intercept: b,
        r_squared: r2,
    })
}
