//! One function per subcommand. Each returns a [`Report`]; writing is left
//! to the caller.

use serde_json::{json, Value};
use thzlab::sweep::format_number;
use thzlab::{
    alignment_duration, capacity_envelope, chi_square_gof, misalignment_boundaries,
    optimize_array_ap, optimize_array_ue, optimize_arrays_joint, optimize_update_period,
    se_capacity_max, simulate_scheme, sweep, AggregateMode, FptDistribution, FptOptions, JointGrid,
    LinkMetrics, Metric, Model, RealignmentCost, Scheme, SchemeChoice, SimSpec, SweepAxis,
    SweepResult,
};

use crate::error::CliError;
use crate::output::Report;
use crate::scenario::Resolved;

const GOF_BINS: usize = 20;
const GOF_ALPHA: f64 = 0.05;
/// Relative mismatch allowed between simulated and analytic outage.
pub const OUTAGE_TOLERANCE: f64 = 0.03;
const AP_SCAN_STEP: u32 = 10;

/// Inclusive `lo:hi:steps` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl std::str::FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected lo:hi:steps, got {s:?}"));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
        let lo = num(parts[0])?;
        let hi = num(parts[1])?;
        let steps = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|e| format!("{:?}: {e}", parts[2]))?;
        if steps == 0 || !lo.is_finite() || !hi.is_finite() || (steps > 1 && lo == hi) {
            return Err(format!("empty range {s:?}"));
        }
        Ok(Range { lo, hi, steps })
    }
}

impl Range {
    pub fn linear(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.lo];
        }
        let n = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / n)
            .collect()
    }

    pub fn logarithmic(&self) -> Result<Vec<f64>, CliError> {
        if !(self.lo > 0.0 && self.hi > 0.0) {
            return Err(CliError::validation(
                "range",
                "log grid needs positive bounds",
            ));
        }
        let (a, b) = (self.lo.ln(), self.hi.ln());
        Ok(Range {
            lo: a,
            hi: b,
            steps: self.steps,
        }
        .linear()
        .into_iter()
        .map(f64::exp)
        .collect())
    }
}

/// Sweepable axis in scenario units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisArg {
    /// `T_U`, ms.
    UpdatePeriod,
    NUe,
    NAp,
    /// m.
    Dx,
    /// degrees.
    Dphi,
    /// m.
    Distance,
    /// `T_B`, ms.
    RealignmentTime,
}

impl std::str::FromStr for AxisArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "update_period" | "T_U" | "t_u" => AxisArg::UpdatePeriod,
            "n_ue" | "N_U" => AxisArg::NUe,
            "n_ap" | "N_A" => AxisArg::NAp,
            "dx" | "lateral" => AxisArg::Dx,
            "dphi" | "rotation" => AxisArg::Dphi,
            "distance" | "d" => AxisArg::Distance,
            "realignment_time" | "T_B" | "t_b" => AxisArg::RealignmentTime,
            _ => {
                return Err(format!(
                    "unknown axis {s:?} (update_period, n_ue, n_ap, dx, dphi, distance, realignment_time)"
                ))
            }
        })
    }
}

impl AxisArg {
    fn to_si(self, v: f64) -> (SweepAxis, f64) {
        match self {
            AxisArg::UpdatePeriod => (SweepAxis::UpdatePeriod, v * 1e-3),
            AxisArg::NUe => (SweepAxis::NUe, v),
            AxisArg::NAp => (SweepAxis::NAp, v),
            AxisArg::Dx => (SweepAxis::Dx, v),
            AxisArg::Dphi => (SweepAxis::Dphi, v.to_radians()),
            AxisArg::Distance => (SweepAxis::Distance, v),
            AxisArg::RealignmentTime => (SweepAxis::RealignmentTime, v * 1e-3),
        }
    }
}

/// What `optimize` searches over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizeTarget {
    UpdatePeriod,
    NUe,
    NAp,
    Joint,
    /// Aligned, fixed-array and jointly optimized capacity against distance.
    Envelope,
}

impl std::str::FromStr for OptimizeTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "update_period" | "T_U" | "t_u" => OptimizeTarget::UpdatePeriod,
            "n_ue" | "N_U" => OptimizeTarget::NUe,
            "n_ap" | "N_A" => OptimizeTarget::NAp,
            "joint" => OptimizeTarget::Joint,
            "envelope" => OptimizeTarget::Envelope,
            _ => {
                return Err(format!(
                    "unknown optimization axis {s:?} (update_period, n_ue, n_ap, joint, envelope)"
                ))
            }
        })
    }
}

pub fn parse_metric(s: &str) -> Result<Metric, String> {
    Ok(match s {
        "outage" | "outage_probability" => Metric::Outage,
        "se" | "spectral_efficiency" => Metric::SpectralEfficiency,
        "capacity" | "capacity_bps" => Metric::Capacity,
        "mean_time" | "mean_time_s" => Metric::MeanTime,
        _ => {
            return Err(format!(
                "unknown metric {s:?} (outage, spectral_efficiency, capacity, mean_time)"
            ))
        }
    })
}

fn metrics_row(name: &str, m: &LinkMetrics) -> String {
    let cols = [
        m.outage_probability,
        m.spectral_efficiency,
        m.capacity_bps,
        m.mean_time_s,
        m.realignment_s,
        m.update_period_s.unwrap_or(f64::NAN),
    ];
    let mut row = name.to_string();
    for v in cols {
        row.push(',');
        row.push_str(&format_number(v));
    }
    row.push('\n');
    row
}

const METRICS_HEADER: &str =
    "scheme,outage_probability,spectral_efficiency,capacity_bps,mean_time_s,realignment_s,update_period_s\n";

/// The periodic scheme of the scenario, optimized if no period is set.
fn periodic_of(scheme: SchemeChoice) -> SchemeChoice {
    match scheme {
        SchemeChoice::Periodic(t) => SchemeChoice::Periodic(t),
        _ => SchemeChoice::PeriodicOptimal,
    }
}

pub fn metrics(r: &Resolved) -> Result<Report, CliError> {
    let m = &r.model;
    let on = m.evaluate(SchemeChoice::OnDemand)?;
    let per = m.evaluate(periodic_of(r.scheme))?;
    let b = misalignment_boundaries(&m.system);
    let aligned = se_capacity_max(&m.system);
    let mut csv = METRICS_HEADER.to_string();
    csv.push_str(&metrics_row("on_demand", &on));
    csv.push_str(&metrics_row("periodic", &per));
    Ok(Report {
        command: "metrics",
        csv,
        data: json!({
            "on_demand": on,
            "periodic": per,
            "aligned": aligned,
            "boundaries": b,
            "alignment_duration_s": alignment_duration(&m.system),
        }),
    })
}

pub fn fpt(r: &Resolved, range: Option<Range>) -> Result<Report, CliError> {
    let dist = r.model.distribution()?;
    let mean = dist.mean()?;
    let grid = match range {
        Some(rg) => rg.logarithmic()?,
        None if mean.is_finite() => Range {
            lo: 1e-3 * mean,
            hi: 20.0 * mean,
            steps: 200,
        }
        .logarithmic()?,
        None => {
            return Err(CliError::Model(thzlab::Error::DegenerateInput(
                "misalignment never happens".into(),
            )))
        }
    };
    let mut csv = String::from("t_s,pdf,cdf,survival\n");
    let (mut pdf, mut cdf, mut sf) = (Vec::new(), Vec::new(), Vec::new());
    for &t in &grid {
        let (f, c, s) = (dist.pdf(t), dist.cdf(t), dist.survival(t));
        csv.push_str(&format!(
            "{},{},{},{}\n",
            format_number(t),
            format_number(f),
            format_number(c),
            format_number(s)
        ));
        pdf.push(f);
        cdf.push(c);
        sf.push(s);
    }
    Ok(Report {
        command: "fpt",
        csv,
        data: json!({
            "kind": dist.kind(),
            "mean_s": mean,
            "variance_s2": dist.variance()?,
            "median_s": dist.quantile(0.5),
            "t_s": grid,
            "pdf": pdf,
            "cdf": cdf,
            "survival": sf,
        }),
    })
}

pub fn sweep_cmd(
    r: &Resolved,
    axis: AxisArg,
    range: Range,
    metric: Metric,
) -> Result<Report, CliError> {
    let values = range.linear();
    let si: Vec<f64> = values.iter().map(|&v| axis.to_si(v).1).collect();
    let res = sweep(axis.to_si(0.0).0, &si, &r.model, r.scheme, metric)?;
    Ok(sweep_report("sweep", res, Value::Null))
}

fn sweep_report(command: &'static str, res: SweepResult, optimum: Value) -> Report {
    for e in &res.errors {
        log::warn!(
            "{} = {}: {}",
            res.axis_name,
            res.axis_values[e.index],
            e.message
        );
    }
    let csv = res.to_csv();
    let data = if optimum.is_null() {
        serde_json::to_value(&res).expect("sweep serializes")
    } else {
        json!({ "optimum": optimum, "scan": res })
    };
    Report { command, csv, data }
}

pub fn optimize(
    r: &Resolved,
    target: OptimizeTarget,
    range: Option<Range>,
) -> Result<Report, CliError> {
    let m = &r.model;
    let scheme = r.scheme;
    match target {
        OptimizeTarget::UpdatePeriod => {
            let opt = optimize_update_period(m)?;
            let (lo, hi) = thzlab::sweep::UPDATE_PERIOD_RANGE;
            let grid = Range { lo, hi, steps: 41 }.logarithmic()?;
            let scan = sweep(
                SweepAxis::UpdatePeriod,
                &grid,
                m,
                SchemeChoice::PeriodicOptimal,
                Metric::Outage,
            )?;
            Ok(sweep_report(
                "optimize",
                scan,
                serde_json::to_value(opt).unwrap(),
            ))
        }
        OptimizeTarget::NUe => {
            let opt = optimize_array_ue(m, scheme)?;
            let hi = thzlab::sweep::UE_RANGE.1.min(m.system.n_ap);
            let grid: Vec<f64> = (1..=hi).map(f64::from).collect();
            let scan = sweep(SweepAxis::NUe, &grid, m, scheme, Metric::SpectralEfficiency)?;
            Ok(sweep_report(
                "optimize",
                scan,
                serde_json::to_value(opt).unwrap(),
            ))
        }
        OptimizeTarget::NAp => {
            let opt = optimize_array_ap(m, scheme)?;
            let (lo, hi) = thzlab::sweep::AP_RANGE;
            let grid: Vec<f64> = (lo.max(m.system.n_ue)..=hi)
                .step_by(AP_SCAN_STEP as usize)
                .map(f64::from)
                .collect();
            let scan = sweep(SweepAxis::NAp, &grid, m, scheme, Metric::SpectralEfficiency)?;
            Ok(sweep_report(
                "optimize",
                scan,
                serde_json::to_value(opt).unwrap(),
            ))
        }
        OptimizeTarget::Joint => {
            let j = optimize_arrays_joint(m, scheme, &JointGrid::default())?;
            let mut csv = String::from("n_ap,n_ue,");
            csv.push_str(&METRICS_HEADER[7..]);
            csv.push_str(&format!("{},{},", j.n_ap, j.n_ue));
            csv.push_str(&metrics_row("", &j.metrics)[1..]);
            Ok(Report {
                command: "optimize",
                csv,
                data: json!({ "optimum": j }),
            })
        }
        OptimizeTarget::Envelope => {
            let Some(range) = range else {
                return Err(CliError::validation(
                    "range",
                    "the envelope needs a distance range in m",
                ));
            };
            let env = capacity_envelope(
                m,
                &range.linear(),
                &JointGrid::default(),
                RealignmentCost::PerBeamStep,
            )?;
            Ok(sweep_report("optimize", env, Value::Null))
        }
    }
}

fn to_scheme(m: &Model, choice: SchemeChoice) -> Result<Scheme, CliError> {
    Ok(match choice {
        SchemeChoice::OnDemand => Scheme::OnDemand,
        SchemeChoice::Periodic(t) => Scheme::Periodic { update_period_s: t },
        SchemeChoice::PeriodicOptimal => Scheme::Periodic {
            update_period_s: optimize_update_period(m)?.update_period_s,
        },
    })
}

pub fn simulate(
    r: &Resolved,
    record_events: bool,
) -> Result<(Report, Vec<thzlab::sim::RealignmentEvent>), CliError> {
    let m = &r.model;
    let scheme = to_scheme(m, r.scheme)?;
    let spec = SimSpec {
        record_events,
        ..r.sim
    };
    let trace = simulate_scheme(scheme, &m.system, &m.mobility, &spec)?;
    let analytic = m.evaluate(match scheme {
        Scheme::OnDemand => SchemeChoice::OnDemand,
        Scheme::Periodic { update_period_s } => SchemeChoice::Periodic(update_period_s),
    })?;
    let n = trace.first_misalignment_times.len();
    let mean_first = if n > 0 {
        trace.first_misalignment_times.iter().sum::<f64>() / n as f64
    } else {
        f64::NAN
    };
    let cols = [
        trace.outage_fraction,
        trace.time_outage_fraction,
        trace.mean_throughput,
        trace.realignment_count as f64,
        trace.censored_trials as f64,
        trace.dt,
        mean_first,
        analytic.outage_probability,
    ];
    let mut csv = String::from(
        "outage_fraction,time_outage_fraction,mean_throughput_bps,realignment_count,censored_trials,dt_s,mean_first_misalignment_s,analytic_outage_probability\n",
    );
    csv.push_str(
        &cols
            .iter()
            .map(|&v| format_number(v))
            .collect::<Vec<_>>()
            .join(","),
    );
    csv.push('\n');
    let data = json!({
        "scheme": scheme,
        "trials": spec.n_trials,
        "outage_fraction": trace.outage_fraction,
        "time_outage_fraction": trace.time_outage_fraction,
        "mean_throughput_bps": trace.mean_throughput,
        "realignment_count": trace.realignment_count,
        "censored_trials": trace.censored_trials,
        "dt_s": trace.dt,
        "mean_first_misalignment_s": mean_first,
        "analytic": analytic,
    });
    Ok((
        Report {
            command: "simulate",
            csv,
            data,
        },
        trace.events,
    ))
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Check {
    pub name: String,
    pub analytic: f64,
    pub simulated: f64,
    pub relative_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Outcome of `validate`; the report is written whether or not it passed.
pub struct Validation {
    pub report: Report,
    pub passed: bool,
    pub failures: Vec<String>,
}

pub fn validate(r: &Resolved) -> Result<Validation, CliError> {
    let m = &r.model;
    let mut checks = Vec::new();
    let mut samples = Vec::new();
    for choice in [SchemeChoice::OnDemand, periodic_of(r.scheme)] {
        let scheme = to_scheme(m, choice)?;
        let trace = simulate_scheme(scheme, &m.system, &m.mobility, &r.sim)?;
        let fixed = match scheme {
            Scheme::OnDemand => SchemeChoice::OnDemand,
            Scheme::Periodic { update_period_s } => SchemeChoice::Periodic(update_period_s),
        };
        let p = m.evaluate(fixed)?.outage_probability;
        let err = ((trace.outage_fraction - p) / p).abs();
        checks.push(Check {
            name: format!("outage_{}", fixed.name()),
            analytic: p,
            simulated: trace.outage_fraction,
            relative_error: err,
            tolerance: OUTAGE_TOLERANCE,
            pass: err <= OUTAGE_TOLERANCE,
        });
        if matches!(scheme, Scheme::OnDemand) {
            samples = trace.first_misalignment_times;
        }
    }
    let dist = m.distribution()?;
    let gof = chi_square_gof(&samples, &dist, GOF_BINS, GOF_ALPHA)?;
    let surrogate = surrogate_of(m, &samples)?;
    let mut failures: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{} off by {:.2}%", c.name, 100.0 * c.relative_error))
        .collect();
    if !gof.accept {
        failures.push(format!(
            "chi-square rejects the analytic law (p = {:.3e})",
            gof.p_value
        ));
    }
    let mut csv = String::from("check,analytic,simulated,relative_error,tolerance,pass\n");
    for c in &checks {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.name,
            format_number(c.analytic),
            format_number(c.simulated),
            format_number(c.relative_error),
            format_number(c.tolerance),
            c.pass
        ));
    }
    csv.push_str(&format!(
        "chi_square,{},{},{},{},{}\n",
        format_number(gof.alpha),
        format_number(gof.p_value),
        format_number(gof.statistic),
        gof.dof,
        gof.accept
    ));
    let passed = failures.is_empty();
    Ok(Validation {
        report: Report {
            command: "validate",
            csv,
            data: json!({
                "passed": passed,
                "checks": checks,
                "chi_square": gof,
                "chi_square_lognormal_surrogate": surrogate,
                "samples": samples.len(),
            }),
        },
        passed,
        failures,
    })
}

/// Verdict of the lognormal surrogate against the same samples, for the record.
fn surrogate_of(m: &Model, samples: &[f64]) -> Result<Option<thzlab::GofResult>, CliError> {
    if m.options.mode == AggregateMode::LognormalApprox {
        return Ok(None);
    }
    let options = FptOptions {
        mode: AggregateMode::LognormalApprox,
        ..m.options
    };
    let dist: FptDistribution = Model { options, ..*m }.distribution()?;
    Ok(Some(chi_square_gof(samples, &dist, GOF_BINS, GOF_ALPHA)?))
}
