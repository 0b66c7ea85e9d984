use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMinimum {
    pub x: f64,
    pub value: f64,
    /// The coarse scan put the minimum on an end of the search interval.
    pub at_boundary: bool,
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Coarse scan of `grid` equally spaced points on `[lo, hi]`, then golden-section
/// refinement inside the bracket around the best grid point until the bracket
/// is narrower than `1e-3` relative to the minimizer. Non-finite values of `f`
/// are treated as `+∞`.
pub fn argmin_scalar<F>(mut f: F, lo: f64, hi: f64, grid: usize) -> Result<ScalarMinimum>
where
    F: FnMut(f64) -> f64,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain(format!("empty search interval [{lo}, {hi}]")));
    }
    if grid < 3 {
        return Err(Error::Domain(format!(
            "grid of {grid} points is too coarse"
        )));
    }
    let mut eval = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let step = (hi - lo) / (grid - 1) as f64;
    let xs: Vec<f64> = (0..grid)
        .map(|i| {
            if i == grid - 1 {
                hi
            } else {
                lo + step * i as f64
            }
        })
        .collect();
    let vs: Vec<f64> = xs.iter().map(|&x| eval(x)).collect();
    let best = vs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("grid is non-empty");
    if best == 0 || best == grid - 1 {
        return Ok(ScalarMinimum {
            x: xs[best],
            value: vs[best],
            at_boundary: true,
        });
    }

    let (mut a, mut b) = (xs[best - 1], xs[best + 1]);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    let mut best_x = xs[best];
    let mut best_v = vs[best];
    for _ in 0..200 {
        let width_tol = 5e-4 * best_x.abs().max(1e-3 * (hi - lo));
        if (b - a) <= width_tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = eval(d);
        }
        for (x, v) in [(c, fc), (d, fd)] {
            if v < best_v {
                best_v = v;
                best_x = x;
            }
        }
    }
    Ok(ScalarMinimum {
        x: best_x,
        value: best_v,
        at_boundary: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_quadratic() {
        let m = argmin_scalar(|x| (x - 2.0) * (x - 2.0), 0.0, 5.0, 11).unwrap();
        assert!((m.x - 2.0).abs() < 2e-3, "{m:?}");
        assert!(!m.at_boundary);
    }

    #[test]
    fn boundary_minimum_is_flagged() {
        let m = argmin_scalar(|x| x, 0.0, 1.0, 11).unwrap();
        assert_eq!(m.x, 0.0);
        assert!(m.at_boundary);
    }

    #[test]
    fn rejects_empty_interval_and_tiny_grid() {
        assert!(matches!(
            argmin_scalar(|x| x, 1.0, 1.0, 5),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            argmin_scalar(|x| x, 0.0, 1.0, 2),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn doubling_grid_is_stable_for_unimodal() {
        let f = |x: f64| (x - 0.37).powi(2) + 0.1 * (x - 0.37).powi(4);
        let a = argmin_scalar(f, -3.0, 4.0, 15).unwrap();
        let b = argmin_scalar(f, -3.0, 4.0, 30).unwrap();
        assert!(((a.x - b.x) / b.x).abs() < 1e-3);
        assert!((a.x - 0.37).abs() < 1e-3);
    }
}
