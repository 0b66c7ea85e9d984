//! Time to beam misalignment under Brownian micro-mobility.
//!
//! Each mobility axis (lateral `x`, `y`; rotations `φ`, `θ`) is an independent
//! Brownian motion started at zero with diffusion coefficient `D = Δ²/2`, where
//! `Δ` is the displacement scale after one second. Misalignment is the first exit
//! of any axis from its symmetric interval: `±M_XY` for the lateral axes,
//! `±M_φθ` for the rotations.
//!
//! A single axis has the two-sided first-passage density
//!
//! ```text
//! f(t) = Σ_{n∈ℤ} M (4n+1) exp(−(4n+1)² M² / (4 D t)) / √(π D t³)
//! ```
//!
//! with mean `M²/2D` and variance `M⁴/6D²`. It is evaluated with the image sum
//! above for `D t / M² ≤ 1/π` and with the equivalent eigenfunction sum
//! `(π D / M²) Σ (4n+1) exp(−(4n+1)² π² D t / 4M²)` beyond, so that neither
//! branch suffers from cancellation. Every term is exponentiated in log space;
//! terms below the `f64` underflow threshold contribute exactly zero.
//!
//! The aggregate time `T_A` is the minimum over the active axes, built by
//! composing [`min_of_two`] over either the exact series or moment-matched
//! lognormal surrogates.

use std::f64::consts::{PI, SQRT_2};
use std::sync::{Arc, OnceLock};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linkbudget::Boundaries;
use crate::numerics::{erfc, integrate_scaled, sum_symmetric_series, QuadratureSpec, SeriesSpec};

/// Evaluation window. Outside it the density is reported as zero and the
/// distribution function as 0 (below) or 1 (above).
pub const T_MIN: f64 = 1e-9;
pub const T_MAX: f64 = 1e6;

/// `σ = √ln(5/3)`, the log-scale that gives a lognormal the variance-to-mean²
/// ratio 2/3 of a two-sided Brownian first-passage time.
pub fn lognormal_sigma() -> f64 {
    (5.0f64 / 3.0).ln().sqrt()
}

const SERIES_SWITCH: f64 = 1.0 / PI;
/// `exp` of anything below this is subnormal or zero.
const LN_UNDERFLOW: f64 = -708.0;

#[inline]
fn exp_or_zero(x: f64) -> f64 {
    if x < LN_UNDERFLOW {
        0.0
    } else {
        x.exp()
    }
}

/// Per-second displacement scales of the four mobility axes, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilityParams {
    /// Lateral displacement scale along x, m.
    pub dx: f64,
    /// Lateral displacement scale along y, m.
    pub dy: f64,
    /// Rotation scale in φ, rad.
    pub dphi: f64,
    /// Rotation scale in θ, rad.
    pub dtheta: f64,
}

impl MobilityParams {
    pub fn new(dx: f64, dy: f64, dphi: f64, dtheta: f64) -> Result<Self> {
        let m = MobilityParams {
            dx,
            dy,
            dphi,
            dtheta,
        };
        m.validate()?;
        Ok(m)
    }

    /// `Δx = Δy` and `Δφ = Δθ`, rotation given in degrees.
    pub fn symmetric(lateral_m: f64, rotation_deg: f64) -> Self {
        let r = rotation_deg.to_radians();
        MobilityParams {
            dx: lateral_m,
            dy: lateral_m,
            dphi: r,
            dtheta: r,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("dx", self.dx),
            ("dy", self.dy),
            ("dphi", self.dphi),
            ("dtheta", self.dtheta),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::validation(
                    field,
                    format!("must be finite and non-negative, got {v}"),
                ));
            }
        }
        if self.axes().iter().all(|&(_, d)| d == 0.0) {
            return Err(Error::DegenerateInput(
                "all mobility scales are zero".into(),
            ));
        }
        Ok(())
    }

    pub fn diffusion(&self) -> DiffusionCoeffs {
        let d = |v: f64| 0.5 * v * v;
        DiffusionCoeffs {
            x: d(self.dx),
            y: d(self.dy),
            phi: d(self.dphi),
            theta: d(self.dtheta),
        }
    }

    pub fn axes(&self) -> [(Axis, f64); 4] {
        [
            (Axis::X, self.dx),
            (Axis::Y, self.dy),
            (Axis::Phi, self.dphi),
            (Axis::Theta, self.dtheta),
        ]
    }

    pub fn scale(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.dx,
            Axis::Y => self.dy,
            Axis::Phi => self.dphi,
            Axis::Theta => self.dtheta,
        }
    }
}

/// `D = Δ²/2` per axis (m²/s for x, y; rad²/s for φ, θ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionCoeffs {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Phi,
    Theta,
}

impl Axis {
    pub const ALL: [Axis; 4] = [Axis::X, Axis::Y, Axis::Phi, Axis::Theta];

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Phi => "phi",
            Axis::Theta => "theta",
        }
    }

    pub fn is_angular(self) -> bool {
        matches!(self, Axis::Phi | Axis::Theta)
    }

    pub fn boundary(self, b: &Boundaries) -> f64 {
        if self.is_angular() {
            b.angular_rad
        } else {
            b.linear_m
        }
    }
}

/// How the lognormal location `μ` is derived from `(M, Δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuConvention {
    /// `μ = ln(M²/Δ²) − ½ln(5/3)`: lognormal mean equals the FPT mean `M²/Δ²`.
    #[default]
    MomentMatched,
    /// `μ = ln(2M/Δ) − ½ln(5/3)`.
    PaperLiteral,
}

/// Which boundary enters `μ` for the rotation axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularMuBoundary {
    /// `M_φθ`, dimensionally consistent with `Δφ`, `Δθ`.
    #[default]
    Angular,
    /// `M_XY`.
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregateMode {
    #[serde(rename = "lognormal")]
    LognormalApprox,
    #[default]
    #[serde(rename = "exact")]
    ExactSeries,
}

/// Model switches that determine how `T_A` is built.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FptOptions {
    pub mode: AggregateMode,
    pub mu: MuConvention,
    pub angular_mu_boundary: AngularMuBoundary,
    #[serde(skip)]
    pub series: SeriesSpec,
    #[serde(skip)]
    pub quad: QuadratureSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalParams {
    pub mu: f64,
    pub sigma: f64,
}

impl LognormalParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !mu.is_finite() {
            return Err(Error::Domain(format!(
                "invalid lognormal (μ={mu}, σ={sigma})"
            )));
        }
        Ok(LognormalParams { mu, sigma })
    }

    pub fn mean(&self) -> f64 {
        (self.mu + 0.5 * self.sigma * self.sigma).exp()
    }

    pub fn variance(&self) -> f64 {
        let s2 = self.sigma * self.sigma;
        (s2.exp() - 1.0) * (2.0 * self.mu + s2).exp()
    }

    pub fn pdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let z = (t.ln() - self.mu) / self.sigma;
        exp_or_zero(-0.5 * z * z) / (t * self.sigma * (2.0 * PI).sqrt())
    }

    pub fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        0.5 * erfc((t.ln() - self.mu) / (SQRT_2 * self.sigma))
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        0.5 * erfc((self.mu - t.ln()) / (SQRT_2 * self.sigma))
    }
}

fn check_axis(boundary: f64, diffusion: f64) -> Result<()> {
    if !(boundary > 0.0) || !boundary.is_finite() {
        return Err(Error::Domain(format!(
            "boundary must be positive, got {boundary}"
        )));
    }
    if !(diffusion > 0.0) || !diffusion.is_finite() {
        return Err(Error::Domain(format!(
            "diffusion must be positive, got {diffusion}"
        )));
    }
    Ok(())
}

// Dimensionless time D t / M².
#[inline]
fn reduced_time(boundary: f64, diffusion: f64, t: f64) -> f64 {
    diffusion * t / (boundary * boundary)
}

fn pdf_series(boundary: f64, diffusion: f64, t: f64, spec: &SeriesSpec) -> Result<f64> {
    let tau = reduced_time(boundary, diffusion, t);
    if tau <= SERIES_SWITCH {
        let a = 0.25 / tau;
        let log_pref = boundary.ln() - 0.5 * (PI * diffusion * t * t * t).ln();
        sum_symmetric_series(
            |n| {
                let k = (4 * n + 1) as f64;
                k.signum() * exp_or_zero(k.abs().ln() - k * k * a + log_pref)
            },
            spec,
        )
    } else {
        let b = 0.25 * PI * PI * tau;
        let log_pref = (PI * diffusion / (boundary * boundary)).ln();
        sum_symmetric_series(
            |n| {
                let k = (4 * n + 1) as f64;
                k.signum() * exp_or_zero(k.abs().ln() - k * k * b + log_pref)
            },
            spec,
        )
    }
}

fn survival_series(boundary: f64, diffusion: f64, t: f64, spec: &SeriesSpec) -> Result<f64> {
    let tau = reduced_time(boundary, diffusion, t);
    if tau <= SERIES_SWITCH {
        let inv = 0.5 / tau.sqrt();
        let cdf = sum_symmetric_series(
            |n| {
                let k = (4 * n + 1) as f64;
                2.0 * k.signum() * erfc(k.abs() * inv)
            },
            spec,
        )?;
        Ok(1.0 - cdf)
    } else {
        let b = 0.25 * PI * PI * tau;
        let s = sum_symmetric_series(
            |n| {
                let k = (4 * n + 1) as f64;
                k.signum() * exp_or_zero(-k * k * b - k.abs().ln())
            },
            spec,
        )?;
        Ok(4.0 / PI * s)
    }
}

/// Exact first-passage density of a Brownian motion with diffusion `diffusion`
/// through `±boundary`, at time `t > 0`.
pub fn fpt_pdf_exact(boundary: f64, diffusion: f64, t: f64, spec: &SeriesSpec) -> Result<f64> {
    check_axis(boundary, diffusion)?;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("time must be positive, got {t}")));
    }
    Ok(pdf_series(boundary, diffusion, t, spec)?.max(0.0))
}

/// Exact first-passage distribution function; `P(T ≤ t)`, clamped to `[0, 1]`.
pub fn fpt_cdf_exact(boundary: f64, diffusion: f64, t: f64, spec: &SeriesSpec) -> Result<f64> {
    check_axis(boundary, diffusion)?;
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    if t.is_infinite() {
        return Ok(1.0);
    }
    Ok((1.0 - survival_series(boundary, diffusion, t, spec)?).clamp(0.0, 1.0))
}

/// `(mean, variance) = (M²/2D, M⁴/6D²)`.
pub fn fpt_moments(boundary: f64, diffusion: f64) -> (f64, f64) {
    let m2 = boundary * boundary;
    (
        m2 / (2.0 * diffusion),
        m2 * m2 / (6.0 * diffusion * diffusion),
    )
}

/// Lognormal with the same first two moments as the single-axis passage
/// time through `±boundary` at displacement scale `delta`.
pub fn lognormal_surrogate(
    boundary: f64,
    delta: f64,
    convention: MuConvention,
) -> Result<LognormalParams> {
    if !(boundary > 0.0) || !(delta > 0.0) {
        return Err(Error::Domain(format!(
            "boundary and displacement must be positive (got {boundary}, {delta})"
        )));
    }
    let half_log = 0.5 * (5.0f64 / 3.0).ln();
    let mu = match convention {
        MuConvention::MomentMatched => (boundary * boundary / (delta * delta)).ln() - half_log,
        MuConvention::PaperLiteral => (2.0 * boundary / delta).ln() - half_log,
    };
    LognormalParams::new(mu, lognormal_sigma())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FptKind {
    ExactSeries,
    Lognormal,
    MinOfTwo,
    Aggregate,
    /// Never fires: `T = ∞` almost surely.
    Never,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct ExactAxis {
    boundary: f64,
    diffusion: f64,
    series: SeriesSpec,
}

type Components = [Option<LognormalParams>; 4];

#[derive(Debug, Clone)]
enum Repr {
    Exact(ExactAxis),
    Lognormal(LognormalParams),
    Never,
    Min(Arc<FptDistribution>, Arc<FptDistribution>),
    Aggregate {
        composed: Arc<FptDistribution>,
        closed_form: Option<Components>,
    },
}

/// An evaluatable distribution of a time to misalignment.
///
/// Immutable once built. The mean is computed on first request and then cached.
#[derive(Debug, Clone)]
pub struct FptDistribution {
    repr: Repr,
    quad: QuadratureSpec,
    mean: OnceLock<f64>,
}

impl FptDistribution {
    fn from_repr(repr: Repr, quad: QuadratureSpec) -> Self {
        FptDistribution {
            repr,
            quad,
            mean: OnceLock::new(),
        }
    }

    /// Exact single-axis series. Fails if `series` cannot converge on the
    /// slowest point of either branch.
    pub fn exact(boundary: f64, diffusion: f64, series: SeriesSpec) -> Result<Self> {
        check_axis(boundary, diffusion)?;
        series.validate()?;
        let t_switch = SERIES_SWITCH * boundary * boundary / diffusion;
        pdf_series(boundary, diffusion, t_switch, &series)?;
        pdf_series(boundary, diffusion, t_switch * (1.0 + 1e-12), &series)?;
        survival_series(boundary, diffusion, t_switch, &series)?;
        survival_series(boundary, diffusion, t_switch * (1.0 + 1e-12), &series)?;
        Ok(Self::from_repr(
            Repr::Exact(ExactAxis {
                boundary,
                diffusion,
                series,
            }),
            QuadratureSpec::default(),
        ))
    }

    pub fn lognormal(params: LognormalParams) -> Self {
        Self::from_repr(Repr::Lognormal(params), QuadratureSpec::default())
    }

    pub fn never() -> Self {
        Self::from_repr(Repr::Never, QuadratureSpec::default())
    }

    /// Uses `quad` for lazily computed moments.
    pub fn with_quadrature(mut self, quad: QuadratureSpec) -> Self {
        self.quad = quad;
        self.mean = OnceLock::new();
        self
    }

    pub fn kind(&self) -> FptKind {
        match self.repr {
            Repr::Exact(_) => FptKind::ExactSeries,
            Repr::Lognormal(_) => FptKind::Lognormal,
            Repr::Never => FptKind::Never,
            Repr::Min(..) => FptKind::MinOfTwo,
            Repr::Aggregate { .. } => FptKind::Aggregate,
        }
    }

    /// The min-composition behind an aggregate, for cross-checking its
    /// closed-form density.
    pub fn composed(&self) -> Option<&FptDistribution> {
        match &self.repr {
            Repr::Aggregate { composed, .. } => Some(composed),
            _ => None,
        }
    }

    fn same_law(&self, other: &FptDistribution) -> bool {
        match (&self.repr, &other.repr) {
            (Repr::Exact(a), Repr::Exact(b)) => a == b,
            (Repr::Lognormal(a), Repr::Lognormal(b)) => a == b,
            (Repr::Never, Repr::Never) => true,
            _ => false,
        }
    }

    /// `(density, survival)` at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        if t.is_nan() || t < T_MIN {
            return (0.0, 1.0);
        }
        if t > T_MAX {
            return (0.0, 0.0);
        }
        match &self.repr {
            Repr::Exact(ax) => {
                let estimate = |r: Result<f64>| match r {
                    Ok(v) => v,
                    Err(Error::NonConvergence { estimate, .. }) => estimate,
                    Err(_) => f64::NAN,
                };
                let f = estimate(pdf_series(ax.boundary, ax.diffusion, t, &ax.series)).max(0.0);
                let s = estimate(survival_series(ax.boundary, ax.diffusion, t, &ax.series))
                    .clamp(0.0, 1.0);
                (f, s)
            }
            Repr::Lognormal(p) => (p.pdf(t), p.survival(t)),
            Repr::Never => (0.0, 1.0),
            Repr::Min(a, b) => {
                if Arc::ptr_eq(a, b) || a.same_law(b) {
                    let (f, s) = a.eval(t);
                    (2.0 * f * s, s * s)
                } else {
                    let (fa, sa) = a.eval(t);
                    let (fb, sb) = b.eval(t);
                    (fa * sb + fb * sa, sa * sb)
                }
            }
            Repr::Aggregate {
                composed,
                closed_form,
            } => {
                let (f, s) = composed.eval(t);
                match closed_form {
                    Some(c) => (lognormal_aggregate_pdf(t, c), s),
                    None => (f, s),
                }
            }
        }
    }

    pub fn pdf(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    pub fn survival(&self, t: f64) -> f64 {
        self.eval(t).1
    }

    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.survival(t)
    }

    /// Characteristic time of the distribution, used to place quadrature nodes.
    pub fn time_scale(&self) -> f64 {
        match &self.repr {
            Repr::Exact(ax) => fpt_moments(ax.boundary, ax.diffusion).0,
            Repr::Lognormal(p) => p.mu.exp(),
            Repr::Never => f64::INFINITY,
            Repr::Min(a, b) => a.time_scale().min(b.time_scale()),
            Repr::Aggregate { composed, .. } => composed.time_scale(),
        }
    }

    pub fn quadrature(&self) -> &QuadratureSpec {
        &self.quad
    }

    /// `E[T] = ∫ t f(t) dt`, closed form for a lognormal.
    pub fn mean(&self) -> Result<f64> {
        if let Some(m) = self.mean.get() {
            return Ok(*m);
        }
        let m = match &self.repr {
            Repr::Lognormal(p) => p.mean(),
            Repr::Never => f64::INFINITY,
            _ => integrate_scaled(
                |t| t * self.pdf(t),
                0.0,
                f64::INFINITY,
                self.time_scale(),
                &self.quad,
            )?,
        };
        Ok(*self.mean.get_or_init(|| m))
    }

    /// `∫ (t − E[T])² f(t) dt`.
    pub fn variance(&self) -> Result<f64> {
        if let Repr::Lognormal(p) = &self.repr {
            return Ok(p.variance());
        }
        let m = self.mean()?;
        if m.is_infinite() {
            return Ok(f64::INFINITY);
        }
        integrate_scaled(
            |t| (t - m) * (t - m) * self.pdf(t),
            0.0,
            f64::INFINITY,
            self.time_scale(),
            &self.quad,
        )
    }

    /// Smallest `t` in the evaluation window with `P(T ≤ t) ≥ p`, by bisection
    /// on `ln t`. Returns `∞` if the window never reaches `p`.
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= 0.0 {
            return 0.0;
        }
        if self.cdf(T_MAX) < p {
            return f64::INFINITY;
        }
        let (mut lo, mut hi) = (T_MIN.ln(), T_MAX.ln());
        for _ in 0..90 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid.exp()) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi.exp()
    }

    /// Inverse-transform sample.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.quantile(u.max(f64::MIN_POSITIVE))
    }
}

/// Distribution of `min(A, B)` for independent `A`, `B`:
/// `f = f_A(1 − F_B) + f_B(1 − F_A)`, `1 − F = (1 − F_A)(1 − F_B)`.
pub fn min_of_two(a: FptDistribution, b: FptDistribution) -> FptDistribution {
    let quad = a.quad;
    FptDistribution::from_repr(Repr::Min(Arc::new(a), Arc::new(b)), quad)
}

fn min_of_available(parts: Vec<FptDistribution>) -> Option<FptDistribution> {
    let mut it = parts.into_iter();
    let first = it.next()?;
    Some(it.fold(first, min_of_two))
}

// Minimum of up to four lognormal axes written out in one expression: each
// pair (x, y) and (φ, θ) contributes its min-density times the survival of
// the other pair. An absent axis has zero density and unit survival.
fn lognormal_aggregate_pdf(t: f64, c: &Components) -> f64 {
    let lt = t.ln();
    let norm = 2.0 * (2.0 * PI).sqrt() * t;
    // kernel e^{−(ln t − μ)²/2σ²}/σ and 2 − erfc((μ − ln t)/√2σ) = 2·S(t)
    let kernel = |p: &Option<LognormalParams>| match p {
        Some(p) => exp_or_zero(-(lt - p.mu).powi(2) / (2.0 * p.sigma * p.sigma)) / p.sigma,
        None => 0.0,
    };
    let twice_surv = |p: &Option<LognormalParams>| match p {
        Some(p) => 2.0 - erfc((p.mu - lt) / (SQRT_2 * p.sigma)),
        None => 2.0,
    };
    let pair_density = |a: &Option<LognormalParams>, b: &Option<LognormalParams>| {
        (kernel(a) * twice_surv(b) + kernel(b) * twice_surv(a)) / norm
    };
    let pair_survival = |a: &Option<LognormalParams>, b: &Option<LognormalParams>| {
        (1.0 - 0.5 * (2.0 - twice_surv(a))) * (1.0 - 0.5 * (2.0 - twice_surv(b)))
    };
    let [x, y, phi, theta] = c;
    pair_density(x, y) * pair_survival(phi, theta) + pair_density(phi, theta) * pair_survival(x, y)
}

/// Builds the distribution of `T_A`, the first exit of any active axis.
/// Axes with zero displacement scale never exit and are left out.
pub fn aggregate_distribution(
    mobility: &MobilityParams,
    bounds: &Boundaries,
    opts: &FptOptions,
) -> Result<FptDistribution> {
    mobility.validate()?;
    if !(bounds.linear_m > 0.0) || !(bounds.angular_rad > 0.0) {
        return Err(Error::Domain(format!(
            "boundaries must be positive: {bounds:?}"
        )));
    }
    let mut leaves: [Option<FptDistribution>; 4] = Default::default();
    let mut surrogates: Components = [None; 4];
    for (i, (axis, delta)) in mobility.axes().into_iter().enumerate() {
        if delta == 0.0 {
            continue;
        }
        let boundary = axis.boundary(bounds);
        leaves[i] = Some(match opts.mode {
            AggregateMode::ExactSeries => {
                FptDistribution::exact(boundary, 0.5 * delta * delta, opts.series)?
            }
            AggregateMode::LognormalApprox => {
                let mu_boundary = match (axis.is_angular(), opts.angular_mu_boundary) {
                    (true, AngularMuBoundary::Linear) => bounds.linear_m,
                    _ => boundary,
                };
                let p = lognormal_surrogate(mu_boundary, delta, opts.mu)?;
                surrogates[i] = Some(p);
                FptDistribution::lognormal(p)
            }
        });
    }
    let [x, y, phi, theta] = leaves;
    let lateral = min_of_available(x.into_iter().chain(y).collect());
    let angular = min_of_available(phi.into_iter().chain(theta).collect());
    let composed = min_of_available(lateral.into_iter().chain(angular).collect())
        .ok_or_else(|| Error::DegenerateInput("no active mobility axis".into()))?
        .with_quadrature(opts.quad);
    let closed_form = match opts.mode {
        AggregateMode::LognormalApprox => Some(surrogates),
        AggregateMode::ExactSeries => None,
    };
    Ok(FptDistribution::from_repr(
        Repr::Aggregate {
            composed: Arc::new(composed),
            closed_form,
        },
        opts.quad,
    ))
}

/// Mean time to the first misalignment, `∫ t f_{T_A}(t) dt`.
pub fn mean_time(dist: &FptDistribution) -> Result<f64> {
    dist.mean()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate;

    const M: f64 = 0.089_012;
    const D: f64 = 0.005;

    fn spec() -> SeriesSpec {
        SeriesSpec::default()
    }

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    // One-sided image sum only, written independently of the production branches.
    fn brute_force_pdf(m: f64, d: f64, t: f64) -> f64 {
        (-60i64..=60)
            .map(|n| {
                let k = (4 * n + 1) as f64;
                m * k * (-(k * k) * m * m / (4.0 * d * t)).exp() / (PI * d * t.powi(3)).sqrt()
            })
            .sum()
    }

    #[test]
    fn both_branches_match_the_image_sum() {
        let mean = M * M / (2.0 * D);
        for i in 1..60 {
            let t = mean * 10f64.powf(-2.0 + 3.0 * i as f64 / 60.0);
            let reference = brute_force_pdf(M, D, t);
            let got = fpt_pdf_exact(M, D, t, &spec()).unwrap();
            assert!(
                (got - reference).abs() < 1e-9 * (1.0 + reference),
                "t={t} {got} vs {reference}"
            );
        }
    }

    #[test]
    fn pdf_normalizes() {
        let mass = integrate_scaled(
            |t| fpt_pdf_exact(M, D, t, &spec()).unwrap(),
            0.0,
            f64::INFINITY,
            0.8,
            &quad(),
        )
        .unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "{mass}");
    }

    #[test]
    fn mean_from_quadrature_matches_closed_form() {
        let (mean, var) = fpt_moments(M, D);
        assert!((mean - 0.792_314).abs() < 1e-5);
        assert!((var - 0.418_51).abs() < 1e-4);
        let m = integrate_scaled(
            |t| t * fpt_pdf_exact(M, D, t, &spec()).unwrap(),
            0.0,
            f64::INFINITY,
            mean,
            &quad(),
        )
        .unwrap();
        assert!(((m - mean) / mean).abs() < 1e-6, "{m}");
    }

    #[test]
    fn moments_unit_case() {
        let (mean, var) = fpt_moments(1.0, 0.5);
        assert_eq!(mean, 1.0);
        assert!((var - 2.0 / 3.0).abs() < 1e-15);
        for (m, d) in [(0.3, 0.01), (2.0, 7.0)] {
            let (mean, var) = fpt_moments(m, d);
            assert!((var / (mean * mean) - 2.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn scaling_law() {
        for &t in &[0.05, 0.3, 1.0, 4.0] {
            let a = fpt_pdf_exact(M, D, t, &spec()).unwrap();
            let b = fpt_pdf_exact(1.0, D / (M * M), t, &spec()).unwrap();
            assert!((a - b).abs() < 1e-12 * (1.0 + a));
        }
    }

    #[test]
    fn pdf_vanishes_at_both_ends() {
        assert_eq!(fpt_pdf_exact(M, D, 1e-6, &spec()).unwrap(), 0.0);
        assert!(fpt_pdf_exact(M, D, 1e4, &spec()).unwrap() < 1e-300);
    }

    #[test]
    fn cdf_edges_and_quadrature_oracle() {
        assert_eq!(fpt_cdf_exact(M, D, 0.0, &spec()).unwrap(), 0.0);
        assert_eq!(fpt_cdf_exact(M, D, f64::INFINITY, &spec()).unwrap(), 1.0);
        assert!((fpt_cdf_exact(M, D, 1e3, &spec()).unwrap() - 1.0).abs() < 1e-15);
        let mean = fpt_moments(M, D).0;
        for &t in &[0.1 * mean, mean, 3.0 * mean] {
            let oracle = integrate(
                |s| fpt_pdf_exact(M, D, s, &spec()).unwrap(),
                0.0,
                t,
                &quad(),
            )
            .unwrap();
            let c = fpt_cdf_exact(M, D, t, &spec()).unwrap();
            assert!(c > 0.0 && c < 1.0);
            assert!((c - oracle).abs() < 1e-6, "{c} vs {oracle}");
        }
    }

    #[test]
    fn series_spec_too_small_is_rejected() {
        let tiny = SeriesSpec {
            term_tol: 1e-14,
            max_terms: 1,
        };
        assert!(matches!(
            FptDistribution::exact(M, D, tiny),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn lognormal_surrogate_moments() {
        let p = lognormal_surrogate(M, 0.1, MuConvention::MomentMatched).unwrap();
        assert!((p.sigma - 0.714_721).abs() < 1e-6);
        assert!((p.mean() - M * M / 0.01).abs() < 1e-12);
        assert!((p.mean() - 0.792_31).abs() < 1e-5);
        let (mean, var) = fpt_moments(M, D);
        assert!((p.variance() - var).abs() < 1e-12 * var.max(1.0));
        assert!((p.mean() - mean).abs() < 1e-12);
        let lit = lognormal_surrogate(M, 0.1, MuConvention::PaperLiteral).unwrap();
        assert!((lit.mean() - 2.0 * M / 0.1).abs() < 1e-12);
    }

    #[test]
    fn min_of_identical_pair() {
        let a = FptDistribution::exact(M, D, spec()).unwrap();
        let m = min_of_two(a.clone(), a.clone());
        for &t in &[0.05, 0.2, 0.7, 2.0] {
            let expected = 1.0 - (1.0 - a.cdf(t)).powi(2);
            assert!((m.cdf(t) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn never_is_identity_for_min() {
        let a = FptDistribution::lognormal(
            lognormal_surrogate(M, 0.1, MuConvention::MomentMatched).unwrap(),
        );
        let m = min_of_two(a.clone(), FptDistribution::never());
        for &t in &[0.05, 0.2, 0.7, 2.0] {
            assert_eq!(m.pdf(t), a.pdf(t));
            assert_eq!(m.cdf(t), a.cdf(t));
        }
    }

    #[test]
    fn min_is_commutative() {
        let a = FptDistribution::exact(M, D, spec()).unwrap();
        let b = FptDistribution::exact(0.0534, 0.5 * 0.0524f64.powi(2), spec()).unwrap();
        let ab = min_of_two(a.clone(), b.clone());
        let ba = min_of_two(b, a);
        for i in 0..200 {
            let t = 1e-3 * 1.05f64.powi(i);
            assert!((ab.pdf(t) - ba.pdf(t)).abs() <= 1e-12);
        }
    }

    #[test]
    fn single_active_axis_reduces_to_that_axis() {
        let mob = MobilityParams::new(0.1, 0.0, 0.0, 0.0).unwrap();
        let b = Boundaries {
            linear_m: M,
            angular_rad: 0.0534,
        };
        for mode in [AggregateMode::ExactSeries, AggregateMode::LognormalApprox] {
            let opts = FptOptions {
                mode,
                ..FptOptions::default()
            };
            let agg = aggregate_distribution(&mob, &b, &opts).unwrap();
            let single = match mode {
                AggregateMode::ExactSeries => FptDistribution::exact(M, D, spec()).unwrap(),
                AggregateMode::LognormalApprox => FptDistribution::lognormal(
                    lognormal_surrogate(M, 0.1, MuConvention::MomentMatched).unwrap(),
                ),
            };
            for &t in &[0.05, 0.3, 1.0, 3.0] {
                assert!((agg.pdf(t) - single.pdf(t)).abs() < 1e-12);
                assert!((agg.cdf(t) - single.cdf(t)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn all_axes_disabled_is_degenerate() {
        let mob = MobilityParams {
            dx: 0.0,
            dy: 0.0,
            dphi: 0.0,
            dtheta: 0.0,
        };
        let b = Boundaries {
            linear_m: M,
            angular_rad: 0.05,
        };
        assert!(matches!(
            aggregate_distribution(&mob, &b, &FptOptions::default()),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn closed_form_matches_composition() {
        let mob = MobilityParams::symmetric(0.1, 3.0);
        let b = Boundaries {
            linear_m: M,
            angular_rad: 0.053_407,
        };
        let opts = FptOptions {
            mode: AggregateMode::LognormalApprox,
            ..FptOptions::default()
        };
        let agg = aggregate_distribution(&mob, &b, &opts).unwrap();
        let composed = agg.composed().unwrap();
        for i in 0..400 {
            let t = 1e-4 * 1.04f64.powi(i);
            assert!((agg.pdf(t) - composed.pdf(t)).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn lognormal_mean_is_closed_form() {
        let d = FptDistribution::lognormal(
            lognormal_surrogate(M, 0.1, MuConvention::MomentMatched).unwrap(),
        );
        assert!((mean_time(&d).unwrap() - 0.792_31).abs() < 1e-5);
        assert_eq!(mean_time(&FptDistribution::never()).unwrap(), f64::INFINITY);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let d = FptDistribution::exact(M, D, spec()).unwrap();
        for &p in &[0.01, 0.25, 0.5, 0.9, 0.999] {
            let t = d.quantile(p);
            assert!((d.cdf(t) - p).abs() < 1e-9);
        }
    }
}
