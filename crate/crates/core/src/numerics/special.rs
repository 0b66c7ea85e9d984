//! Error function and its complement.
//!
//! Backed by `libm`, which ports the FreeBSD msun implementation (error below
//! one ulp over the whole real line, including the far `erfc` tail).

/// Error function.
#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Complementary error function, accurate where `1 - erf(x)` would cancel.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Maclaurin series, fine for |x| <= 3 in double precision.
    fn erf_series(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        let x2 = x * x;
        for n in 1..200 {
            term *= -x2 / n as f64;
            let add = term / (2 * n + 1) as f64;
            sum += add;
            if add.abs() < 1e-18 {
                break;
            }
        }
        sum * 2.0 / std::f64::consts::PI.sqrt()
    }

    // Lentz continued fraction for erfc, valid for x >= 2.
    fn erfc_cf(x: f64) -> f64 {
        // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + 1/2/(x + 1/(x + 3/2/(x + ...))))
        let mut f = x;
        let tiny = 1e-300;
        let mut c = f;
        let mut d = 0.0;
        for n in 1..500 {
            let a = n as f64 / 2.0;
            d = x + a * d;
            if d == 0.0 {
                d = tiny;
            }
            c = x + a / c;
            if c == 0.0 {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x * x).exp() / std::f64::consts::PI.sqrt() / f
    }

    #[test]
    fn values_at_origin() {
        assert_eq!(erf(0.0), 0.0);
        assert_eq!(erfc(0.0), 1.0);
    }

    #[test]
    fn erf_one_matches_series_oracle() {
        let oracle = erf_series(1.0);
        assert!((oracle - 0.842_700_792_949_714_9).abs() < 1e-15);
        assert!((erf(1.0) - oracle).abs() < 1e-12);
    }

    #[test]
    fn matches_oracles_on_a_grid() {
        for i in -300..=300 {
            let x = i as f64 / 100.0;
            assert!((erf(x) - erf_series(x)).abs() < 1e-12, "erf({x})");
            assert!((erf(x) + erfc(x) - 1.0).abs() < 1e-15);
            assert_eq!(erf(-x), -erf(x));
        }
        for i in 0..=48 {
            let x = 2.0 + i as f64 / 2.0;
            let oracle = erfc_cf(x);
            assert!(((erfc(x) - oracle) / oracle).abs() < 1e-12, "erfc({x})");
        }
    }
}
