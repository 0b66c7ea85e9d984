//! Monte Carlo reference for the misalignment model.
//!
//! Each axis is advanced by independent Gaussian increments of standard
//! deviation `Δ·√dt`. Trial `i` draws from `ChaCha8Rng::seed_from_u64(seed)`
//! on stream `i`, so results depend only on `(seed, i)` and not on how trials
//! are scheduled across threads. Per-trial results are reduced in index order.
//!
//! One trial is one alignment epoch that starts from perfect alignment:
//! a single aligned stretch plus its realignment for the on-demand scheme,
//! and consecutive update periods up to and including the first one in which
//! the beam is lost for the periodic scheme.

use std::io::{self, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::fpt::{Axis, FptDistribution, MobilityParams};
use crate::linkbudget::{
    misalignment_boundaries, outage_per_realignment, se_capacity_max, Boundaries, SystemConfig,
};
use crate::schemes::Scheme;

/// Default time step as a fraction of the shortest single-axis mean passage time.
pub const DEFAULT_STEP_FRACTION: f64 = 1e-4;

/// How a boundary crossing inside one step is detected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingDetection {
    /// Exit only if the end-of-step position is outside.
    EndOfStep,
    /// Additionally exit with the Brownian-bridge probability of having
    /// touched either boundary between two interior positions.
    #[default]
    BrownianBridge,
}

/// What the device does while the beams are being realigned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealignmentMobility {
    /// Motion is frozen during the sweep and the new alignment is exact.
    #[default]
    Frozen,
    /// Motion continues during the sweep, so each aligned stretch starts from
    /// the displacement accumulated over `T_B`.
    Continuing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimSpec {
    /// Step, s. `None` picks [`DEFAULT_STEP_FRACTION`] of the shortest
    /// single-axis mean passage time.
    pub dt: Option<f64>,
    pub n_trials: usize,
    /// Trials whose epoch would run past this are right-censored, s.
    pub horizon: f64,
    pub seed: u64,
    pub crossing: CrossingDetection,
    pub during_realignment: RealignmentMobility,
    /// Keep one [`RealignmentEvent`] per realignment.
    pub record_events: bool,
}

impl Default for SimSpec {
    fn default() -> Self {
        SimSpec {
            dt: None,
            n_trials: 10_000,
            horizon: 1e3,
            seed: 0,
            crossing: CrossingDetection::default(),
            during_realignment: RealignmentMobility::default(),
            record_events: false,
        }
    }
}

impl SimSpec {
    pub fn validate(&self) -> Result<()> {
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::validation(
                    "dt",
                    format!("must be positive, got {dt}"),
                ));
            }
        }
        if self.n_trials < 1 {
            return Err(Error::validation("n_trials", "must be at least 1"));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::validation(
                "horizon",
                format!("must be positive, got {}", self.horizon),
            ));
        }
        Ok(())
    }
}

/// Shortest single-axis mean passage time `M²/Δ²` over the active axes.
pub fn shortest_axis_mean(mob: &MobilityParams, bounds: &Boundaries) -> Result<f64> {
    mob.validate()?;
    let t = mob
        .axes()
        .into_iter()
        .filter(|&(_, d)| d > 0.0)
        .map(|(a, d)| (a.boundary(bounds) / d).powi(2))
        .fold(f64::INFINITY, f64::min);
    Ok(t)
}

fn step_size(spec: &SimSpec, mob: &MobilityParams, bounds: &Boundaries) -> Result<f64> {
    match spec.dt {
        Some(dt) => Ok(dt),
        None => Ok(DEFAULT_STEP_FRACTION * shortest_axis_mean(mob, bounds)?),
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

// Active axes only, flattened for the inner loop.
struct Walker {
    axes: Vec<(Axis, f64, f64)>, // (axis, Δ, M)
    dt: f64,
    crossing: CrossingDetection,
}

impl Walker {
    fn new(
        mob: &MobilityParams,
        bounds: &Boundaries,
        dt: f64,
        crossing: CrossingDetection,
    ) -> Result<Self> {
        mob.validate()?;
        for (name, v) in [
            ("linear boundary", bounds.linear_m),
            ("angular boundary", bounds.angular_rad),
        ] {
            if !(v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        let axes = mob
            .axes()
            .into_iter()
            .filter(|&(_, d)| d > 0.0)
            .map(|(a, d)| (a, d, a.boundary(bounds)))
            .collect();
        Ok(Walker { axes, dt, crossing })
    }

    fn start(&self, offset_time: f64, rng: &mut ChaCha8Rng) -> [f64; 4] {
        let mut x = [0.0; 4];
        if offset_time > 0.0 {
            for (i, &(_, d, _)) in self.axes.iter().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                x[i] = d * offset_time.sqrt() * z;
            }
        }
        x
    }

    /// Advances from `x` until an axis leaves its interval or `limit` elapses.
    /// Returns the exit time and axis, or `None` on reaching the limit.
    fn run(&self, x: &mut [f64; 4], limit: f64, rng: &mut ChaCha8Rng) -> Option<(f64, Axis)> {
        for (i, &(axis, _, m)) in self.axes.iter().enumerate() {
            if x[i].abs() >= m {
                return Some((0.0, axis));
            }
        }
        let mut t = 0.0;
        while t < limit {
            let h = self.dt.min(limit - t);
            let sd = h.sqrt();
            let mut hit = None;
            for (i, &(axis, d, m)) in self.axes.iter().enumerate() {
                let z: f64 = rng.sample(StandardNormal);
                let x0 = x[i];
                let x1 = x0 + d * sd * z;
                x[i] = x1;
                if hit.is_some() {
                    continue;
                }
                if x1.abs() >= m {
                    hit = Some(axis);
                } else if self.crossing == CrossingDetection::BrownianBridge {
                    let var = d * d * h;
                    let up = 2.0 * (m - x0) * (m - x1) / var;
                    let down = 2.0 * (m + x0) * (m + x1) / var;
                    if up.min(down) < 40.0 {
                        let p = (-up).exp() + (-down).exp();
                        if rng.random::<f64>() < p {
                            hit = Some(axis);
                        }
                    }
                }
            }
            if let Some(axis) = hit {
                let when = match self.crossing {
                    CrossingDetection::EndOfStep => t + h,
                    CrossingDetection::BrownianBridge => t + 0.5 * h,
                };
                return Some((when, axis));
            }
            t += h;
        }
        None
    }
}

/// First-passage samples in trial order. Censored trials hold `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FptSamples {
    pub times: Vec<f64>,
    pub horizon: f64,
    pub dt: f64,
}

impl FptSamples {
    pub fn censored(&self) -> usize {
        self.times.iter().filter(|t| t.is_infinite()).count()
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored() as f64 / self.times.len() as f64
    }

    pub fn uncensored(&self) -> impl Iterator<Item = f64> + '_ {
        self.times.iter().copied().filter(|t| t.is_finite())
    }

    /// Mean over uncensored trials.
    pub fn mean(&self) -> Result<f64> {
        let c = self.censored();
        if c > 0 {
            log::warn!(
                "{c} of {} trials censored at {} s; excluded from the mean",
                self.times.len(),
                self.horizon
            );
        }
        let n = self.times.len() - c;
        if n == 0 {
            return Err(Error::InsufficientData("every trial was censored".into()));
        }
        Ok(self.uncensored().sum::<f64>() / n as f64)
    }
}

/// Simulates the first exit of any axis, starting every trial from zero.
pub fn simulate_fpt(
    mob: &MobilityParams,
    bounds: &Boundaries,
    spec: &SimSpec,
) -> Result<FptSamples> {
    spec.validate()?;
    let dt = step_size(spec, mob, bounds)?;
    let walker = Walker::new(mob, bounds, dt, spec.crossing)?;
    let times = (0..spec.n_trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(spec.seed, i);
            let mut x = [0.0; 4];
            walker
                .run(&mut x, spec.horizon, &mut rng)
                .map_or(f64::INFINITY, |(t, _)| t)
        })
        .collect();
    Ok(FptSamples {
        times,
        horizon: spec.horizon,
        dt,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventCause {
    Axis(Axis),
    Periodic,
}

impl EventCause {
    pub fn name(&self) -> &'static str {
        match self {
            EventCause::Axis(a) => a.name(),
            EventCause::Periodic => "periodic",
        }
    }
}

/// Start of a realignment. For the periodic scheme the cause is the axis that
/// broke the link during the period, or `periodic` if it survived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealignmentEvent {
    pub trial: usize,
    /// Time since the start of the trial, s.
    pub time_s: f64,
    pub cause: EventCause,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTrace {
    /// Mean over cycles of the per-cycle outage share, the quantity the
    /// analytic outage formulas estimate.
    pub outage_fraction: f64,
    /// Total outage time over total simulated time.
    pub time_outage_fraction: f64,
    /// `C_max` times the aligned share of simulated time, bit/s.
    pub mean_throughput: f64,
    pub realignment_count: usize,
    /// Epoch start to first misalignment, one per uncensored trial, s.
    pub first_misalignment_times: Vec<f64>,
    pub censored_trials: usize,
    pub dt: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub events: Vec<RealignmentEvent>,
}

#[derive(Default)]
struct TrialOutcome {
    cycle_share_sum: f64,
    cycles: usize,
    outage_time: f64,
    total_time: f64,
    first_misalignment: Option<f64>,
    events: Vec<RealignmentEvent>,
}

fn on_demand_trial(
    walker: &Walker,
    t_b: f64,
    offset: f64,
    spec: &SimSpec,
    i: usize,
) -> TrialOutcome {
    let mut rng = trial_rng(spec.seed, i);
    let mut x = walker.start(offset, &mut rng);
    let mut out = TrialOutcome::default();
    match walker.run(&mut x, spec.horizon, &mut rng) {
        Some((t, axis)) => {
            out.cycle_share_sum = if t + t_b > 0.0 { t_b / (t + t_b) } else { 0.0 };
            out.cycles = 1;
            out.outage_time = t_b;
            out.total_time = t + t_b;
            out.first_misalignment = Some(t);
            if spec.record_events {
                out.events.push(RealignmentEvent {
                    trial: i,
                    time_s: t,
                    cause: EventCause::Axis(axis),
                });
            }
        }
        None => {
            // aligned for the whole horizon; counts as aligned time only
            out.total_time = spec.horizon;
        }
    }
    out
}

fn periodic_trial(
    walker: &Walker,
    t_b: f64,
    t_u: f64,
    offset: f64,
    spec: &SimSpec,
    i: usize,
) -> TrialOutcome {
    let mut rng = trial_rng(spec.seed, i);
    let cycle = t_u + t_b;
    let mut out = TrialOutcome::default();
    let mut elapsed = 0.0;
    while elapsed + cycle <= spec.horizon {
        let mut x = walker.start(offset, &mut rng);
        let exit = walker.run(&mut x, t_u, &mut rng);
        let down = match exit {
            Some((t, _)) => t_u - t + t_b,
            None => t_b,
        };
        out.cycle_share_sum += down / cycle;
        out.cycles += 1;
        out.outage_time += down;
        out.total_time += cycle;
        if spec.record_events {
            out.events.push(RealignmentEvent {
                trial: i,
                time_s: elapsed + t_u,
                cause: exit.map_or(EventCause::Periodic, |(_, a)| EventCause::Axis(a)),
            });
        }
        if let Some((t, _)) = exit {
            out.first_misalignment = Some(elapsed + t);
            break;
        }
        elapsed += cycle;
    }
    out
}

/// End-to-end simulation of a realignment scheme on `cfg`.
pub fn simulate_scheme(
    scheme: Scheme,
    cfg: &SystemConfig,
    mob: &MobilityParams,
    spec: &SimSpec,
) -> Result<SimulationTrace> {
    spec.validate()?;
    cfg.validate()?;
    let bounds = misalignment_boundaries(cfg);
    let dt = step_size(spec, mob, &bounds)?;
    let walker = Walker::new(mob, &bounds, dt, spec.crossing)?;
    let t_b = outage_per_realignment(cfg);
    let offset = match spec.during_realignment {
        RealignmentMobility::Frozen => 0.0,
        RealignmentMobility::Continuing => t_b,
    };
    if let Scheme::Periodic { update_period_s } = scheme {
        if !(update_period_s > 0.0) || !update_period_s.is_finite() {
            return Err(Error::validation(
                "update_period",
                format!("must be positive, got {update_period_s}"),
            ));
        }
        if update_period_s + t_b > spec.horizon {
            return Err(Error::validation(
                "horizon",
                "shorter than one update cycle",
            ));
        }
    }
    let outcomes: Vec<TrialOutcome> = (0..spec.n_trials)
        .into_par_iter()
        .map(|i| match scheme {
            Scheme::OnDemand => on_demand_trial(&walker, t_b, offset, spec, i),
            Scheme::Periodic { update_period_s } => {
                periodic_trial(&walker, t_b, update_period_s, offset, spec, i)
            }
        })
        .collect();

    let mut share_sum = 0.0;
    let mut cycles = 0usize;
    let mut outage_time = 0.0;
    let mut total_time = 0.0;
    let mut firsts = Vec::with_capacity(outcomes.len());
    let mut events = Vec::new();
    for o in outcomes {
        share_sum += o.cycle_share_sum;
        cycles += o.cycles;
        outage_time += o.outage_time;
        total_time += o.total_time;
        firsts.extend(o.first_misalignment);
        events.extend(o.events);
    }
    let censored = spec.n_trials - firsts.len();
    if censored > 0 {
        log::warn!(
            "{censored} of {} trials censored at {} s",
            spec.n_trials,
            spec.horizon
        );
    }
    let outage_fraction = if cycles > 0 {
        share_sum / cycles as f64
    } else {
        0.0
    };
    let time_outage_fraction = if total_time > 0.0 {
        outage_time / total_time
    } else {
        0.0
    };
    let c_max = se_capacity_max(cfg).capacity;
    Ok(SimulationTrace {
        outage_fraction,
        time_outage_fraction,
        mean_throughput: c_max * (1.0 - time_outage_fraction),
        realignment_count: cycles,
        first_misalignment_times: firsts,
        censored_trials: censored,
        dt,
        events,
    })
}

/// Tab-separated realignment log with a header row.
pub fn write_trace_tsv<W: Write>(events: &[RealignmentEvent], mut w: W) -> io::Result<()> {
    writeln!(w, "trial_id\tevent_time_s\tcause")?;
    for e in events {
        writeln!(w, "{}\t{:.9e}\t{}", e.trial, e.time_s, e.cause.name())?;
    }
    Ok(())
}

/// `sup_{t ≤ horizon} |F_n(t) − F(t)|`, with censored samples counted in `n`
/// but never below any `t`.
pub fn ks_distance(samples: &FptSamples, dist: &FptDistribution) -> f64 {
    let mut v: Vec<f64> = samples.uncensored().collect();
    v.sort_by(f64::total_cmp);
    let n = samples.times.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &t) in v.iter().enumerate() {
        let f = dist.cdf(t);
        d = d
            .max((f - k as f64 / n).abs())
            .max(((k + 1) as f64 / n - f).abs());
    }
    // gap between the last sample and the horizon
    let tail = dist.cdf(samples.horizon) - v.len() as f64 / n;
    d.max(tail.abs())
}

/// Two-sample Kolmogorov–Smirnov statistic over uncensored samples.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a: Vec<f64> = a.iter().copied().filter(|t| t.is_finite()).collect();
    let mut b: Vec<f64> = b.iter().copied().filter(|t| t.is_finite()).collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub alpha: f64,
    pub accept: bool,
    /// Bins left after merging sparse ones.
    pub bins: usize,
}

/// Pearson χ² test of `samples` against `dist`, on bins of equal probability
/// under `dist`. Adjacent bins are merged until each expects at least 5.
pub fn chi_square_gof(
    samples: &[f64],
    dist: &FptDistribution,
    bins: usize,
    alpha: f64,
) -> Result<GofResult> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("no samples".into()));
    }
    if bins < 5 {
        return Err(Error::validation(
            "bins",
            format!("need at least 5, got {bins}"),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::validation(
            "alpha",
            format!("must lie in (0, 1), got {alpha}"),
        ));
    }
    let n = samples.len() as f64;
    let edges: Vec<f64> = (1..bins)
        .map(|k| dist.quantile(k as f64 / bins as f64))
        .collect();
    let mut observed = vec![0usize; bins];
    for &s in samples {
        let k = edges.partition_point(|&e| e < s);
        observed[k] += 1;
    }
    let p_bin = 1.0 / bins as f64;
    let mut merged: Vec<(f64, f64)> = Vec::new(); // (expected, observed)
    let (mut e_acc, mut o_acc) = (0.0, 0.0);
    for &o in &observed {
        e_acc += n * p_bin;
        o_acc += o as f64;
        if e_acc >= 5.0 {
            merged.push((e_acc, o_acc));
            e_acc = 0.0;
            o_acc = 0.0;
        }
    }
    if e_acc > 0.0 {
        match merged.last_mut() {
            Some(last) => {
                last.0 += e_acc;
                last.1 += o_acc;
            }
            None => merged.push((e_acc, o_acc)),
        }
    }
    if merged.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} samples leave fewer than 2 bins with expected count ≥ 5",
            samples.len()
        )));
    }
    let statistic: f64 = merged.iter().map(|&(e, o)| (o - e) * (o - e) / e).sum();
    let dof = merged.len() - 1;
    let chi = ChiSquared::new(dof as f64).map_err(|e| Error::Domain(e.to_string()))?;
    let p_value = chi.sf(statistic);
    Ok(GofResult {
        statistic,
        dof,
        p_value,
        alpha,
        accept: p_value >= alpha,
        bins: merged.len(),
    })
}
