//! Outage and throughput under the two realignment strategies.
//!
//! Scheme 1 (on demand) realigns only after a misalignment is detected: each
//! cycle is an aligned stretch `T` followed by a sweep of length `T_B`.
//! Scheme 2 (periodic) realigns every `T_U` whether or not the beam has left;
//! a misalignment before `T_U` leaves the link down until the next sweep ends.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpt::FptDistribution;
use crate::linkbudget::{outage_per_realignment, se_capacity_max, SystemConfig};
use crate::numerics::integrate_scaled;

/// Realignment strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    OnDemand,
    /// Realign every `update_period_s` of aligned operation.
    Periodic {
        update_period_s: f64,
    },
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::OnDemand => "on_demand",
            Scheme::Periodic { .. } => "periodic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkMetrics {
    pub outage_probability: f64,
    /// Mean spectral efficiency `L_max·(1 − p_O)`, bit/s/Hz.
    pub spectral_efficiency: f64,
    /// Mean capacity `C_max·(1 − p_O)`, bit/s.
    pub capacity_bps: f64,
    /// Mean time between misalignments, s. Infinite if misalignment is impossible.
    pub mean_time_s: f64,
    /// Realignment outage `T_B`, s.
    pub realignment_s: f64,
    /// `T_U` for the periodic scheme.
    pub update_period_s: Option<f64>,
}

fn check_nonneg(field: &'static str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::validation(
            field,
            format!("must be finite and non-negative, got {v}"),
        ));
    }
    Ok(())
}

/// `p_O1 = E[T_B / (T + T_B)]`, the expected per-cycle outage share.
pub fn outage_scheme1(dist: &FptDistribution, t_b: f64) -> Result<f64> {
    check_nonneg("realignment", t_b)?;
    if t_b == 0.0 {
        return Ok(0.0);
    }
    let scale = dist.time_scale();
    if scale.is_infinite() {
        return Ok(0.0);
    }
    let p = integrate_scaled(
        |t| t_b / (t + t_b) * dist.pdf(t),
        0.0,
        f64::INFINITY,
        scale,
        dist.quadrature(),
    )?;
    // mass beyond the evaluation window counts as fully aligned
    Ok(p.clamp(0.0, 1.0))
}

/// Long-run fraction of time in outage, `T_B / (E[T] + T_B)`.
pub fn outage_scheme1_renewal(dist: &FptDistribution, t_b: f64) -> Result<f64> {
    check_nonneg("realignment", t_b)?;
    let mean = dist.mean()?;
    if mean.is_infinite() {
        return Ok(0.0);
    }
    if mean + t_b == 0.0 {
        return Err(Error::DegenerateInput("zero cycle length".into()));
    }
    Ok(t_b / (mean + t_b))
}

fn metrics(cfg: &SystemConfig, p: f64, mean_time: f64, t_b: f64, t_u: Option<f64>) -> LinkMetrics {
    let lim = se_capacity_max(cfg);
    LinkMetrics {
        outage_probability: p,
        spectral_efficiency: lim.spectral_efficiency * (1.0 - p),
        capacity_bps: lim.capacity * (1.0 - p),
        mean_time_s: mean_time,
        realignment_s: t_b,
        update_period_s: t_u,
    }
}

pub fn metrics_scheme1(cfg: &SystemConfig, dist: &FptDistribution) -> Result<LinkMetrics> {
    cfg.validate()?;
    let t_b = outage_per_realignment(cfg);
    let p = outage_scheme1(dist, t_b)?;
    Ok(metrics(cfg, p, dist.mean()?, t_b, None))
}

fn check_period(t_u: f64) -> Result<()> {
    if !(t_u > 0.0) || !t_u.is_finite() {
        return Err(Error::validation(
            "update_period",
            format!("must be positive, got {t_u}"),
        ));
    }
    Ok(())
}

// ∫_0^{T_U} g(t) f(t) dt
fn partial_expectation<G: Fn(f64) -> f64>(dist: &FptDistribution, t_u: f64, g: G) -> Result<f64> {
    let scale = dist.time_scale();
    if scale.is_infinite() {
        return Ok(0.0);
    }
    integrate_scaled(
        |t| g(t) * dist.pdf(t),
        0.0,
        t_u,
        scale.min(t_u),
        dist.quadrature(),
    )
}

/// Per-cycle outage share when realigning every `t_u`:
/// `T_B(1 − F(T_U))/(T_U + T_B) + ∫_0^{T_U} (T_U + T_B − t)/(T_U + T_B) f(t) dt`.
pub fn outage_scheme2(dist: &FptDistribution, t_b: f64, t_u: f64) -> Result<f64> {
    check_period(t_u)?;
    check_nonneg("realignment", t_b)?;
    let cycle = t_u + t_b;
    let survive = dist.survival(t_u);
    let early = partial_expectation(dist, t_u, |t| (cycle - t) / cycle)?;
    Ok((t_b * survive / cycle + early).clamp(0.0, 1.0))
}

/// Mean time to the first misalignment counted over whole periods:
/// `((1 − F)/F)(T_U + T_B) + (1/F) ∫_0^{T_U} t f(t) dt`.
pub fn mean_time_scheme2(dist: &FptDistribution, t_b: f64, t_u: f64) -> Result<f64> {
    check_period(t_u)?;
    check_nonneg("realignment", t_b)?;
    let f = dist.cdf(t_u);
    if !(f > 0.0) {
        return Err(Error::DegenerateInput(format!(
            "no misalignment is possible within one update period ({t_u} s)"
        )));
    }
    let within = partial_expectation(dist, t_u, |t| t)?;
    Ok((1.0 - f) / f * (t_u + t_b) + within / f)
}

/// Metrics for either scheme.
pub fn metrics_for(
    scheme: Scheme,
    cfg: &SystemConfig,
    dist: &FptDistribution,
) -> Result<LinkMetrics> {
    match scheme {
        Scheme::OnDemand => metrics_scheme1(cfg, dist),
        Scheme::Periodic { update_period_s } => metrics_scheme2(cfg, dist, update_period_s),
    }
}

pub fn metrics_scheme2(
    cfg: &SystemConfig,
    dist: &FptDistribution,
    t_u: f64,
) -> Result<LinkMetrics> {
    cfg.validate()?;
    let t_b = outage_per_realignment(cfg);
    let p = outage_scheme2(dist, t_b, t_u)?;
    let mean = match mean_time_scheme2(dist, t_b, t_u) {
        Ok(m) => m,
        Err(Error::DegenerateInput(_)) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    Ok(metrics(cfg, p, mean, t_b, Some(t_u)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpt::{lognormal_surrogate, MuConvention};
    use crate::numerics::SeriesSpec;

    fn exact() -> FptDistribution {
        FptDistribution::exact(0.089, 0.005, SeriesSpec::default()).unwrap()
    }

    #[test]
    fn zero_realignment_means_no_outage() {
        let d = exact();
        assert_eq!(outage_scheme1(&d, 0.0).unwrap(), 0.0);
        assert_eq!(outage_scheme1_renewal(&d, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn instant_misalignment_limit() {
        // T concentrated far below T_B: outage share tends to one
        let d = FptDistribution::lognormal(
            lognormal_surrogate(1e-3, 1.0, MuConvention::MomentMatched).unwrap(),
        );
        let p = outage_scheme1(&d, 10.0).unwrap();
        assert!(p > 0.999, "{p}");
    }

    #[test]
    fn scheme1_between_renewal_and_one() {
        let d = exact();
        let t_b = 0.052;
        let lotus = outage_scheme1(&d, t_b).unwrap();
        let renewal = outage_scheme1_renewal(&d, t_b).unwrap();
        // x ↦ T_B/(x+T_B) is convex so Jensen orders the two
        assert!(lotus > renewal && lotus < 1.0);
    }

    #[test]
    fn scheme2_outage_bounds_and_long_period_limit() {
        let d = exact();
        let t_b = 0.052;
        for &t_u in &[0.01, 0.1, 0.5, 2.0] {
            let p = outage_scheme2(&d, t_b, t_u).unwrap();
            assert!((0.0..=1.0).contains(&p));
            assert!(p >= t_b / (t_u + t_b) - 1e-12);
        }
        // with T_U ≫ E[T] the link is down for most of the cycle
        assert!(outage_scheme2(&d, t_b, 1e3).unwrap() > 0.99);
    }

    #[test]
    fn scheme2_mean_time_limits() {
        let d = exact();
        let mean = d.mean().unwrap();
        let long = mean_time_scheme2(&d, 0.05, 1e3).unwrap();
        assert!((long - mean).abs() < 1e-6 * mean, "{long} vs {mean}");
        let short = mean_time_scheme2(&d, 0.05, 0.05).unwrap();
        assert!(short > mean);
    }

    #[test]
    fn scheme2_degenerate_when_no_misalignment_in_period() {
        let d = exact();
        assert!(matches!(
            mean_time_scheme2(&d, 0.05, 1e-6),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            outage_scheme2(&d, 0.05, 0.0),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn metrics_scale_the_aligned_limits() {
        let cfg = SystemConfig::default();
        let d = exact();
        let m = metrics_scheme1(&cfg, &d).unwrap();
        let lim = se_capacity_max(&cfg);
        assert!(
            (m.spectral_efficiency - lim.spectral_efficiency * (1.0 - m.outage_probability)).abs()
                < 1e-12
        );
        assert!((m.realignment_s - 0.052).abs() < 1e-12);
        let m2 = metrics_scheme2(&cfg, &d, 1e-7).unwrap();
        assert!(m2.mean_time_s.is_infinite());
    }
}
