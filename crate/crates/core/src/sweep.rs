//! Parameter studies: optimal update period, optimal array sizes, one-axis
//! sweeps and jointly optimized capacity against distance.
//!
//! Everything here is analytic and deterministic. Grid points are evaluated in
//! parallel and always reported in grid order.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpt::{aggregate_distribution, FptDistribution, FptOptions, MobilityParams};
use crate::linkbudget::{
    calibrate, gain, misalignment_boundaries, outage_per_realignment, se_capacity_max,
    CalibrationPoint, SystemConfig,
};
use crate::numerics::argmin_scalar;
use crate::schemes::{metrics_scheme1, metrics_scheme2, outage_scheme2, LinkMetrics};

/// Search interval for the update period, s.
pub const UPDATE_PERIOD_RANGE: (f64, f64) = (1e-3, 10.0);
const UPDATE_PERIOD_GRID: usize = 41;

/// Inclusive search range for `N_U`.
pub const UE_RANGE: (u32, u32) = (1, 100);
/// Inclusive search range for `N_A`.
pub const AP_RANGE: (u32, u32) = (10, 1100);
const COARSE_STEP: u32 = 10;
const MAX_RECENTER: usize = 20;

/// A system, its mobility and the model switches: everything needed to
/// evaluate the link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub system: SystemConfig,
    pub mobility: MobilityParams,
    pub options: FptOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeChoice {
    OnDemand,
    /// Periodic with a fixed update period, s.
    Periodic(f64),
    /// Periodic with the update period re-optimized at every evaluation.
    PeriodicOptimal,
}

impl SchemeChoice {
    pub fn name(&self) -> &'static str {
        match self {
            SchemeChoice::OnDemand => "on_demand",
            SchemeChoice::Periodic(_) => "periodic",
            SchemeChoice::PeriodicOptimal => "periodic_optimal",
        }
    }
}

impl Model {
    pub fn new(system: SystemConfig, mobility: MobilityParams, options: FptOptions) -> Self {
        Model {
            system,
            mobility,
            options,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.system.validate()?;
        self.mobility.validate()?;
        self.options.quad.validate()?;
        self.options.series.validate()
    }

    pub fn distribution(&self) -> Result<FptDistribution> {
        aggregate_distribution(
            &self.mobility,
            &misalignment_boundaries(&self.system),
            &self.options,
        )
    }

    pub fn evaluate(&self, scheme: SchemeChoice) -> Result<LinkMetrics> {
        self.validate()?;
        let dist = self.distribution()?;
        match scheme {
            SchemeChoice::OnDemand => metrics_scheme1(&self.system, &dist),
            SchemeChoice::Periodic(t_u) => metrics_scheme2(&self.system, &dist, t_u),
            SchemeChoice::PeriodicOptimal => {
                let opt = optimize_period_for(&dist, outage_per_realignment(&self.system))?;
                metrics_scheme2(&self.system, &dist, opt.update_period_s)
            }
        }
    }

    pub fn with_arrays(mut self, n_ap: u32, n_ue: u32) -> Self {
        self.system = self.system.with_arrays(n_ap, n_ue);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdatePeriodOptimum {
    pub update_period_s: f64,
    pub outage_probability: f64,
    pub at_boundary: bool,
}

fn optimize_period_for(dist: &FptDistribution, t_b: f64) -> Result<UpdatePeriodOptimum> {
    let (lo, hi) = UPDATE_PERIOD_RANGE;
    let mut failure = None;
    let m = argmin_scalar(
        |ln_t| match outage_scheme2(dist, t_b, ln_t.exp()) {
            Ok(p) => p,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo.ln(),
        hi.ln(),
        UPDATE_PERIOD_GRID,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(UpdatePeriodOptimum {
        update_period_s: m.x.exp(),
        outage_probability: m.value,
        at_boundary: m.at_boundary,
    })
}

/// Periodic-scheme outage minimized over `T_U ∈ [1 ms, 10 s]` on a log grid.
pub fn optimize_update_period(model: &Model) -> Result<UpdatePeriodOptimum> {
    model.validate()?;
    optimize_period_for(
        &model.distribution()?,
        outage_per_realignment(&model.system),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayOptimum {
    pub n: u32,
    /// Mean spectral efficiency at the optimum, bit/s/Hz.
    pub spectral_efficiency: f64,
    pub metrics: LinkMetrics,
    pub at_boundary: bool,
}

fn se_or_nan(model: &Model, scheme: SchemeChoice) -> (f64, Option<LinkMetrics>) {
    match model.evaluate(scheme) {
        Ok(m) => (m.spectral_efficiency, Some(m)),
        Err(_) => (f64::NAN, None),
    }
}

fn best_index(values: &[f64]) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_nan())
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
}

fn scan_integers<F>(ns: &[u32], eval: F) -> Vec<(f64, Option<LinkMetrics>)>
where
    F: Fn(u32) -> (f64, Option<LinkMetrics>) + Sync,
{
    ns.par_iter().map(|&n| eval(n)).collect()
}

fn pick(
    ns: &[u32],
    results: Vec<(f64, Option<LinkMetrics>)>,
    lo: u32,
    hi: u32,
) -> Result<ArrayOptimum> {
    let values: Vec<f64> = results.iter().map(|r| r.0).collect();
    let i =
        best_index(&values).ok_or_else(|| Error::DegenerateInput("no valid grid point".into()))?;
    Ok(ArrayOptimum {
        n: ns[i],
        spectral_efficiency: values[i],
        metrics: results[i].1.expect("finite value carries metrics"),
        at_boundary: ns[i] == lo || ns[i] == hi,
    })
}

/// Best `N_U ∈ [1, min(100, N_A)]` for mean spectral efficiency, by exhaustive scan.
pub fn optimize_array_ue(model: &Model, scheme: SchemeChoice) -> Result<ArrayOptimum> {
    model.validate()?;
    let hi = UE_RANGE.1.min(model.system.n_ap);
    let ns: Vec<u32> = (UE_RANGE.0..=hi).collect();
    let n_ap = model.system.n_ap;
    let results = scan_integers(&ns, |n| se_or_nan(&model.with_arrays(n_ap, n), scheme));
    pick(&ns, results, UE_RANGE.0, hi)
}

/// Best `N_A ∈ [max(10, N_U), 1100]`: a scan in steps of 10, then every
/// integer within ±10 of the coarse optimum.
pub fn optimize_array_ap(model: &Model, scheme: SchemeChoice) -> Result<ArrayOptimum> {
    model.validate()?;
    let n_ue = model.system.n_ue;
    let lo = AP_RANGE.0.max(n_ue);
    let hi = AP_RANGE.1;
    let eval = |n: u32| se_or_nan(&model.with_arrays(n, n_ue), scheme);
    let coarse = stepped(lo, hi, COARSE_STEP);
    let coarse_best = pick(&coarse, scan_integers(&coarse, eval), lo, hi)?;
    let fine: Vec<u32> = (coarse_best.n.saturating_sub(COARSE_STEP).max(lo)
        ..=(coarse_best.n + COARSE_STEP).min(hi))
        .collect();
    pick(&fine, scan_integers(&fine, eval), lo, hi)
}

fn stepped(lo: u32, hi: u32, step: u32) -> Vec<u32> {
    let mut v: Vec<u32> = (lo..=hi).step_by(step as usize).collect();
    if *v.last().unwrap() != hi {
        v.push(hi);
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// `T_U`, s. Forces the periodic scheme.
    UpdatePeriod,
    NUe,
    NAp,
    /// Lateral scale, applied to both `Δx` and `Δy`, m.
    Dx,
    /// Rotation scale, applied to both `Δφ` and `Δθ`, rad.
    Dphi,
    Distance,
    /// Realignment duration `T_B`, s, realized through the beam step delay.
    RealignmentTime,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::UpdatePeriod => "update_period_s",
            SweepAxis::NUe => "n_ue",
            SweepAxis::NAp => "n_ap",
            SweepAxis::Dx => "dx_m",
            SweepAxis::Dphi => "dphi_rad",
            SweepAxis::Distance => "distance_m",
            SweepAxis::RealignmentTime => "realignment_s",
        }
    }

    fn apply(self, model: &Model, scheme: SchemeChoice, v: f64) -> Result<(Model, SchemeChoice)> {
        let mut m = *model;
        let mut s = scheme;
        let as_count = |v: f64| -> Result<u32> {
            if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as u32)
            } else {
                Err(Error::Domain(format!(
                    "array size must be a positive integer, got {v}"
                )))
            }
        };
        match self {
            SweepAxis::UpdatePeriod => s = SchemeChoice::Periodic(v),
            SweepAxis::NUe => m.system.n_ue = as_count(v)?,
            SweepAxis::NAp => m.system.n_ap = as_count(v)?,
            SweepAxis::Dx => {
                m.mobility.dx = v;
                m.mobility.dy = v;
            }
            SweepAxis::Dphi => {
                m.mobility.dphi = v;
                m.mobility.dtheta = v;
            }
            SweepAxis::Distance => m.system.distance_m = v,
            SweepAxis::RealignmentTime => {
                let budget = v - m.system.detection_latency_s;
                if budget < 0.0 {
                    return Err(Error::Domain(format!(
                        "T_B = {v} s is below the detection latency"
                    )));
                }
                m.system.beam_step_delay_s = budget / (gain(m.system.n_ap) + gain(m.system.n_ue));
            }
        }
        Ok((m, s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Outage,
    SpectralEfficiency,
    Capacity,
    MeanTime,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Outage => "outage_probability",
            Metric::SpectralEfficiency => "spectral_efficiency",
            Metric::Capacity => "capacity_bps",
            Metric::MeanTime => "mean_time_s",
        }
    }

    pub fn of(self, m: &LinkMetrics) -> f64 {
        match self {
            Metric::Outage => m.outage_probability,
            Metric::SpectralEfficiency => m.spectral_efficiency,
            Metric::Capacity => m.capacity_bps,
            Metric::MeanTime => m.mean_time_s,
        }
    }

    /// Whether smaller is better.
    pub fn minimize(self) -> bool {
        matches!(self, Metric::Outage)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointError {
    pub index: usize,
    pub message: String,
}

/// A metric along one axis, plus any side columns. Failed points hold NaN
/// and are listed in `errors`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis_name: String,
    pub axis_values: Vec<f64>,
    pub metric_name: String,
    pub metric_values: Vec<f64>,
    pub optimum_index: usize,
    pub boundary_optimum: bool,
    pub columns: Vec<Column>,
    pub errors: Vec<PointError>,
}

impl SweepResult {
    fn new(
        axis_name: &str,
        axis_values: Vec<f64>,
        metric_name: &str,
        metric_values: Vec<f64>,
        minimize: bool,
    ) -> Self {
        let signed: Vec<f64> = metric_values
            .iter()
            .map(|&v| if minimize { -v } else { v })
            .collect();
        let optimum_index = best_index(&signed).unwrap_or(0);
        SweepResult {
            axis_name: axis_name.to_string(),
            boundary_optimum: optimum_index == 0 || optimum_index + 1 == axis_values.len(),
            axis_values,
            metric_name: metric_name.to_string(),
            metric_values,
            optimum_index,
            columns: Vec::new(),
            errors: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    /// Comma-separated table: axis, metric, then side columns. Numbers carry
    /// nine significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.axis_name);
        out.push(',');
        out.push_str(&self.metric_name);
        for c in &self.columns {
            out.push(',');
            out.push_str(&c.name);
        }
        out.push('\n');
        for i in 0..self.axis_values.len() {
            out.push_str(&format_number(self.axis_values[i]));
            out.push(',');
            out.push_str(&format_number(self.metric_values[i]));
            for c in &self.columns {
                out.push(',');
                out.push_str(&format_number(c.values[i]));
            }
            out.push('\n');
        }
        out
    }
}

/// `{:.8e}`, with `nan`, `inf` and `-inf` spelled out.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        let mut s = String::new();
        write!(s, "{v:.8e}").unwrap();
        s
    }
}

const METRIC_COLUMNS: [Metric; 4] = [
    Metric::Outage,
    Metric::SpectralEfficiency,
    Metric::Capacity,
    Metric::MeanTime,
];

/// Evaluates `metric` along `axis`, recomputing boundaries, `T_B` and the
/// misalignment distribution at every point.
pub fn sweep(
    axis: SweepAxis,
    values: &[f64],
    model: &Model,
    scheme: SchemeChoice,
    metric: Metric,
) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::validation("range", "sweep needs at least one point"));
    }
    let rows: Vec<Result<LinkMetrics>> = values
        .par_iter()
        .map(|&v| {
            let (m, s) = axis.apply(model, scheme, v)?;
            m.evaluate(s)
        })
        .collect();
    let mut errors = Vec::new();
    let mut table: Vec<Vec<f64>> = vec![Vec::with_capacity(values.len()); METRIC_COLUMNS.len() + 1];
    for (i, r) in rows.iter().enumerate() {
        match r {
            Ok(m) => {
                for (k, c) in METRIC_COLUMNS.iter().enumerate() {
                    table[k].push(c.of(m));
                }
                table[METRIC_COLUMNS.len()].push(m.update_period_s.unwrap_or(f64::NAN));
            }
            Err(e) => {
                for col in table.iter_mut() {
                    col.push(f64::NAN);
                }
                errors.push(PointError {
                    index: i,
                    message: e.to_string(),
                });
            }
        }
    }
    let target = METRIC_COLUMNS.iter().position(|&c| c == metric).unwrap();
    let mut res = SweepResult::new(
        axis.name(),
        values.to_vec(),
        metric.name(),
        table[target].clone(),
        metric.minimize(),
    );
    for (k, c) in METRIC_COLUMNS.iter().enumerate() {
        if k != target {
            res.columns.push(Column {
                name: c.name().into(),
                values: table[k].clone(),
            });
        }
    }
    if !matches!(scheme, SchemeChoice::OnDemand) || axis == SweepAxis::UpdatePeriod {
        res.columns.push(Column {
            name: "update_period_s".into(),
            values: table[METRIC_COLUMNS.len()].clone(),
        });
    }
    res.errors = errors;
    Ok(res)
}

/// Grid for the joint array search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointGrid {
    pub ap: (u32, u32),
    pub ue: (u32, u32),
    pub coarse_step: u32,
    /// Half-width of the unit-step refinement around the coarse optimum.
    pub refine: u32,
}

impl Default for JointGrid {
    fn default() -> Self {
        JointGrid {
            ap: AP_RANGE,
            ue: UE_RANGE,
            coarse_step: COARSE_STEP,
            refine: COARSE_STEP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointOptimum {
    pub n_ap: u32,
    pub n_ue: u32,
    pub metrics: LinkMetrics,
}

/// Maximizes mean capacity jointly over `(N_A, N_U)` with `N_U ≤ N_A`.
pub fn optimize_arrays_joint(
    model: &Model,
    scheme: SchemeChoice,
    grid: &JointGrid,
) -> Result<JointOptimum> {
    model.validate()?;
    let eval = |pairs: &[(u32, u32)]| -> Vec<Option<LinkMetrics>> {
        pairs
            .par_iter()
            .map(|&(a, u)| model.with_arrays(a, u).evaluate(scheme).ok())
            .collect()
    };
    let best = |pairs: &[(u32, u32)], res: &[Option<LinkMetrics>]| -> Option<JointOptimum> {
        let caps: Vec<f64> = res
            .iter()
            .map(|m| m.map_or(f64::NAN, |m| m.capacity_bps))
            .collect();
        best_index(&caps).map(|i| JointOptimum {
            n_ap: pairs[i].0,
            n_ue: pairs[i].1,
            metrics: res[i].unwrap(),
        })
    };
    let mut coarse = Vec::new();
    for a in stepped(grid.ap.0, grid.ap.1, grid.coarse_step) {
        for u in stepped(grid.ue.0, grid.ue.1, grid.coarse_step) {
            if u <= a {
                coarse.push((a, u));
            }
        }
        // the N_U ≤ N_A edge often carries the ridge
        if a >= grid.ue.0 && a <= grid.ue.1 && !coarse.contains(&(a, a)) {
            coarse.push((a, a));
        }
    }
    let mut c = best(&coarse, &eval(&coarse))
        .ok_or_else(|| Error::DegenerateInput("no valid array pair".into()))?;
    for _ in 0..MAX_RECENTER {
        let mut fine = Vec::new();
        for a in c.n_ap.saturating_sub(grid.refine).max(grid.ap.0)
            ..=(c.n_ap + grid.refine).min(grid.ap.1)
        {
            for u in c.n_ue.saturating_sub(grid.refine).max(grid.ue.0)
                ..=(c.n_ue + grid.refine).min(grid.ue.1)
            {
                if u <= a {
                    fine.push((a, u));
                }
            }
        }
        match best(&fine, &eval(&fine)) {
            Some(f) if f.metrics.capacity_bps > c.metrics.capacity_bps => c = f,
            _ => break,
        }
    }
    Ok(c)
}

/// How `T_B` responds to the array sizes during joint optimization.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RealignmentCost {
    /// `(N_A² + N_U²)·δ` from the template's beam step delay.
    #[default]
    PerBeamStep,
    /// The same `T_B` for every array pair, s.
    Fixed(f64),
}

/// Per distance: mean capacity of both schemes at the template arrays and
/// after joint array optimization (the periodic scheme always at its optimal
/// `T_U`), next to the aligned capacity `C_max` of the template arrays.
pub fn capacity_envelope(
    template: &Model,
    distances: &[f64],
    grid: &JointGrid,
    cost: RealignmentCost,
) -> Result<SweepResult> {
    template.validate()?;
    let mut template = *template;
    if let RealignmentCost::Fixed(t_b) = cost {
        if !(t_b >= 0.0) || !t_b.is_finite() {
            return Err(Error::validation(
                "realignment",
                format!("must be non-negative, got {t_b}"),
            ));
        }
        // a constant T_B is a sweep of zero cost plus a fixed latency
        template.system.beam_step_delay_s = 0.0;
        template.system.detection_latency_s = t_b;
    }
    if distances.is_empty() {
        return Err(Error::validation("range", "need at least one distance"));
    }
    let names = [
        "capacity_max_bps",
        "capacity_on_demand_fixed_bps",
        "capacity_periodic_fixed_bps",
        "capacity_periodic_opt_bps",
        "n_ap_on_demand",
        "n_ue_on_demand",
        "n_ap_periodic",
        "n_ue_periodic",
        "update_period_periodic_s",
    ];
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    let mut metric = Vec::new();
    let mut errors = Vec::new();
    for (i, &d) in distances.iter().enumerate() {
        let mut m = template;
        m.system.distance_m = d;
        let row = (|| -> Result<(f64, [f64; 9])> {
            let fixed1 = m.evaluate(SchemeChoice::OnDemand)?;
            let fixed2 = m.evaluate(SchemeChoice::PeriodicOptimal)?;
            let j1 = optimize_arrays_joint(&m, SchemeChoice::OnDemand, grid)?;
            let j2 = optimize_arrays_joint(&m, SchemeChoice::PeriodicOptimal, grid)?;
            Ok((
                j1.metrics.capacity_bps,
                [
                    se_capacity_max(&m.system).capacity,
                    fixed1.capacity_bps,
                    fixed2.capacity_bps,
                    j2.metrics.capacity_bps,
                    j1.n_ap as f64,
                    j1.n_ue as f64,
                    j2.n_ap as f64,
                    j2.n_ue as f64,
                    j2.metrics.update_period_s.unwrap_or(f64::NAN),
                ],
            ))
        })();
        match row {
            Ok((v, r)) => {
                metric.push(v);
                for (c, x) in cols.iter_mut().zip(r) {
                    c.push(x);
                }
            }
            Err(e) => {
                metric.push(f64::NAN);
                for c in cols.iter_mut() {
                    c.push(f64::NAN);
                }
                errors.push(PointError {
                    index: i,
                    message: e.to_string(),
                });
            }
        }
    }
    let mut res = SweepResult::new(
        "distance_m",
        distances.to_vec(),
        "capacity_on_demand_opt_bps",
        metric,
        false,
    );
    res.columns = names
        .iter()
        .zip(cols)
        .map(|(n, values)| Column {
            name: (*n).into(),
            values,
        })
        .collect();
    res.errors = errors;
    Ok(res)
}

/// Outcome of pinning the noise level to a target mean spectral efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub point: CalibrationPoint,
    /// On-demand mean spectral efficiency requested at `point`, bit/s/Hz.
    pub target_mean_se: f64,
    /// Aligned `L_max` at `point` that delivers it.
    pub l_max: f64,
    pub outage_at_point: f64,
    pub system: SystemConfig,
}

/// Rescales the noise of `model.system` so the on-demand mean spectral
/// efficiency at `point` equals `target_mean_se`. Outage does not depend on
/// the noise level, so `L_max = target / (1 − p_O)` there.
pub fn calibrate_mean_se(
    model: &Model,
    point: &CalibrationPoint,
    target_mean_se: f64,
) -> Result<Calibration> {
    model.validate()?;
    let mut at_point = *model;
    at_point.system = at_point
        .system
        .with_distance(point.distance_m)
        .with_arrays(point.n_ap, point.n_ue);
    let m = at_point.evaluate(SchemeChoice::OnDemand)?;
    if m.outage_probability >= 1.0 {
        return Err(Error::DegenerateInput(
            "link is always in outage at the calibration point".into(),
        ));
    }
    let l_max = target_mean_se / (1.0 - m.outage_probability);
    Ok(Calibration {
        point: *point,
        target_mean_se,
        l_max,
        outage_at_point: m.outage_probability,
        system: calibrate(&model.system, point, l_max)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpt::AggregateMode;

    fn model(mode: AggregateMode) -> Model {
        Model::new(
            SystemConfig::default(),
            MobilityParams::symmetric(0.1, 3.0),
            FptOptions {
                mode,
                ..FptOptions::default()
            },
        )
    }

    #[test]
    fn update_period_has_interior_optimum() {
        let o = optimize_update_period(&model(AggregateMode::ExactSeries)).unwrap();
        assert!(!o.at_boundary);
        assert!(o.update_period_s > 0.05 && o.update_period_s < 1.0);
    }

    #[test]
    fn sweep_is_grid_ordered_and_flags_bad_points() {
        let m = model(AggregateMode::LognormalApprox);
        let r = sweep(
            SweepAxis::NUe,
            &[5.0, 20.0, 2.5, 200.0],
            &m,
            SchemeChoice::OnDemand,
            Metric::SpectralEfficiency,
        )
        .unwrap();
        assert_eq!(r.axis_values.len(), r.metric_values.len());
        assert_eq!(
            r.errors.iter().map(|e| e.index).collect::<Vec<_>>(),
            vec![2, 3]
        );
        assert!(r.metric_values[2].is_nan());
        assert_eq!(r.optimum_index, 1);
        assert_eq!(r.columns.len(), 3);
    }

    #[test]
    fn realignment_axis_sets_t_b() {
        let m = model(AggregateMode::LognormalApprox);
        let r = sweep(
            SweepAxis::RealignmentTime,
            &[0.005, 0.05],
            &m,
            SchemeChoice::OnDemand,
            Metric::Outage,
        )
        .unwrap();
        assert!(r.metric_values[0] < r.metric_values[1]);
        assert_eq!(r.optimum_index, 0);
        assert!(r.boundary_optimum);
    }

    #[test]
    fn csv_layout() {
        let m = model(AggregateMode::LognormalApprox);
        let r = sweep(
            SweepAxis::UpdatePeriod,
            &[0.1, 0.2],
            &m,
            SchemeChoice::OnDemand,
            Metric::Outage,
        )
        .unwrap();
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "update_period_s,outage_probability,spectral_efficiency,capacity_bps,mean_time_s,update_period_s"
        );
        assert!(lines.next().unwrap().starts_with("1.00000000e-1,"));
        assert_eq!(format_number(f64::NAN), "nan");
        assert_eq!(format_number(123456789.123), "1.23456789e8");
    }

    #[test]
    fn ue_optimum_is_a_grid_optimum() {
        let m = model(AggregateMode::LognormalApprox);
        let o = optimize_array_ue(&m, SchemeChoice::OnDemand).unwrap();
        for n in [o.n - 1, o.n + 1] {
            let v = m
                .with_arrays(100, n)
                .evaluate(SchemeChoice::OnDemand)
                .unwrap()
                .spectral_efficiency;
            assert!(v <= o.spectral_efficiency);
        }
    }

    #[test]
    fn calibration_hits_target() {
        let m = model(AggregateMode::ExactSeries);
        let point = CalibrationPoint::default();
        let c = calibrate_mean_se(&m, &point, 15.4).unwrap();
        let mut at = m;
        at.system = c.system.with_distance(10.0).with_arrays(100, 21);
        let se = at
            .evaluate(SchemeChoice::OnDemand)
            .unwrap()
            .spectral_efficiency;
        assert!((se - 15.4).abs() < 1e-9, "{se}");
    }
}
