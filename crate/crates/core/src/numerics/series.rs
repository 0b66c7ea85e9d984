use crate::error::{Error, Result};

/// Truncation control for [`sum_symmetric_series`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSpec {
    /// Stop once the pair `term(n) + term(-n)` is below this in magnitude.
    pub term_tol: f64,
    /// Largest `|n|` visited before giving up.
    pub max_terms: usize,
}

impl Default for SeriesSpec {
    fn default() -> Self {
        SeriesSpec {
            term_tol: 1e-14,
            max_terms: 200,
        }
    }
}

impl SeriesSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.term_tol > 0.0) {
            return Err(Error::validation("term_tol", "must be positive"));
        }
        if self.max_terms < 1 {
            return Err(Error::validation("max_terms", "must be at least 1"));
        }
        Ok(())
    }
}

/// Sums `term(n)` over all integers `n`, expanding outwards from `n = 0`.
///
/// Terms must eventually decay in `|n|`. Summation stops after the first
/// pair `(n, -n)` whose combined magnitude falls below `spec.term_tol`.
pub fn sum_symmetric_series<F>(mut term: F, spec: &SeriesSpec) -> Result<f64>
where
    F: FnMut(i64) -> f64,
{
    let mut sum = term(0);
    for n in 1..=spec.max_terms as i64 {
        let pos = term(n);
        let neg = term(-n);
        sum += pos + neg;
        if pos.abs() + neg.abs() < spec.term_tol {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        what: "symmetric series",
        estimate: sum,
        error: f64::NAN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_nonzero_term() {
        let s = sum_symmetric_series(|n| if n == 0 { 1.0 } else { 0.0 }, &SeriesSpec::default());
        assert_eq!(s.unwrap(), 1.0);
    }

    #[test]
    fn gaussian_series_matches_brute_force() {
        let oracle: f64 = (-50..=50).map(|n: i64| (-(n * n) as f64).exp()).sum();
        assert!((oracle - 1.772_637_204_826_652).abs() < 1e-12);
        let s = sum_symmetric_series(|n| (-(n * n) as f64).exp(), &SeriesSpec::default()).unwrap();
        assert!((s - oracle).abs() < 1e-14);
    }

    #[test]
    fn slow_decay_is_reported() {
        let spec = SeriesSpec {
            term_tol: 1e-14,
            max_terms: 50,
        };
        let r = sum_symmetric_series(|n| 1.0 / (1.0 + (n * n) as f64), &spec);
        assert!(matches!(r, Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn doubling_max_terms_leaves_converged_sum_unchanged() {
        let term = |n: i64| (-(n as f64).powi(2) / 30.0).exp();
        let a = sum_symmetric_series(term, &SeriesSpec::default()).unwrap();
        let b = sum_symmetric_series(
            term,
            &SeriesSpec {
                max_terms: 400,
                ..SeriesSpec::default()
            },
        )
        .unwrap();
        assert!((a - b).abs() <= 1e-14);
    }
}
