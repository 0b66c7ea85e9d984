//! Adaptive Gauss–Kronrod (7/15) quadrature on finite and semi-infinite ranges.
//!
//! A semi-infinite range `(a, ∞)` is mapped onto `(0, 1)` with
//! `t = a + s·u/(1 − u)`, where `s` is a characteristic scale of the integrand
//! (`s = 1` for [`integrate`]). The Kronrod nodes never touch `u = 1`, so the
//! integrand is only ever evaluated at finite `t`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::validation("abs_tol", "must be positive"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::validation("rel_tol", "must be positive"));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::validation("max_subdivisions", "must be at least 1"));
        }
        Ok(())
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut finite = fc.is_finite();
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        finite &= pair.is_finite();
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    if !finite {
        return Err(Error::Domain(format!(
            "integrand is not finite on [{a:e}, {b:e}]"
        )));
    }
    let value = kronrod * half;
    let raw = ((kronrod - gauss) * half).abs();
    // QUADPACK-style scaling of the embedded error estimate.
    let err = if raw > 0.0 {
        let scaled = (200.0 * raw / value.abs().max(f64::MIN_POSITIVE)).powf(1.5) * value.abs();
        raw.min(scaled).max(50.0 * f64::EPSILON * value.abs())
    } else {
        0.0
    };
    Ok(Segment {
        a,
        b,
        value,
        error: err,
    })
}

fn adapt<F: FnMut(f64) -> f64>(f: &mut F, breaks: &[f64], spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let mut segments = Vec::with_capacity(breaks.len() + 16);
    for w in breaks.windows(2) {
        segments.push(gauss_kronrod(f, w[0], w[1])?);
    }
    let mut splits = 0usize;
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let tol = spec.abs_tol.max(spec.rel_tol * value.abs());
        if error <= tol {
            return Ok(value);
        }
        if splits >= spec.max_subdivisions {
            return Err(Error::NonConvergence {
                what: "adaptive quadrature",
                estimate: value,
                error,
            });
        }
        let (worst, seg) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, s)| (i, *s))
            .expect("at least one segment");
        let mid = 0.5 * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            // Interval exhausted at machine precision; accept what we have.
            segments[worst].error = 0.0;
            continue;
        }
        segments[worst] = gauss_kronrod(f, seg.a, mid)?;
        segments.push(gauss_kronrod(f, mid, seg.b)?);
        splits += 1;
    }
}

/// Integrates `f` over `(a, b)`; `b` may be `f64::INFINITY`.
pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate_scaled(f, a, b, 1.0, spec)
}

/// Like [`integrate`], with a hint `scale > 0` for where the integrand lives
/// relative to `a`. Finite ranges are pre-split at `a + scale·10^k`; the
/// semi-infinite map uses `scale` as its unit.
pub fn integrate_scaled<F>(
    mut f: F,
    a: f64,
    b: f64,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !a.is_finite() || b.is_nan() || !(a < b) {
        return Err(Error::Domain(format!(
            "empty or invalid interval ({a}, {b})"
        )));
    }
    let scale = if scale.is_finite() && scale > 0.0 {
        scale
    } else {
        1.0
    };
    if b.is_infinite() {
        let mut g = |u: f64| {
            let one_minus = 1.0 - u;
            let t = a + scale * u / one_minus;
            let jac = scale / (one_minus * one_minus);
            let v = f(t);
            if v == 0.0 {
                0.0
            } else {
                v * jac
            }
        };
        let breaks = [0.0, 0.01, 0.1, 0.5, 0.9, 0.99, 0.999, 1.0];
        return adapt(&mut g, &breaks, spec);
    }
    let mut breaks = vec![a];
    for k in -3..=9 {
        let p = a + scale * 10f64.powi(k);
        if p < b && p > *breaks.last().unwrap() {
            breaks.push(p);
        }
    }
    breaks.push(b);
    adapt(&mut f, &breaks, spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn constant_on_unit_interval() {
        let v = integrate(|_| 1.0, 0.0, 1.0, &spec()).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exponential_tail() {
        let v = integrate(|t: f64| (-t).exp(), 0.0, f64::INFINITY, &spec()).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lognormal_density_normalizes() {
        let sigma = 0.7147_f64;
        let pdf = |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            let z = t.ln() / sigma;
            (-0.5 * z * z).exp() / (t * sigma * (2.0 * std::f64::consts::PI).sqrt())
        };
        let v = integrate(pdf, 0.0, f64::INFINITY, &spec()).unwrap();
        assert!((v - 1.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn scale_hint_finds_narrow_mass() {
        // Mass concentrated near t = 1e-3 inside a long interval.
        let w = 1e-4;
        let g = |t: f64| {
            (-(t - 1e-3).powi(2) / (2.0 * w * w)).exp() / (w * (2.0 * std::f64::consts::PI).sqrt())
        };
        let v = integrate_scaled(g, 0.0, 1e4, 1e-3, &spec()).unwrap();
        assert!((v - 1.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn empty_interval_is_domain_error() {
        assert!(matches!(
            integrate(|t| t, 1.0, 1.0, &spec()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            integrate(|t| t, 2.0, 1.0, &spec()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn exhausted_subdivisions_report_nonconvergence() {
        let tight = QuadratureSpec {
            abs_tol: 1e-15,
            rel_tol: 1e-15,
            max_subdivisions: 2,
        };
        let r = integrate(|t: f64| (1.0 / t).sin() / t.sqrt(), 1e-6, 1.0, &tight);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }
}
