//! Limit extrapolation on geometric ladders.

use crate::error::{Error, Result};

/// Richardson combination of results at steps `h` and `h/2` for a method of
/// the given order. Returns `(extrapolated, error_estimate)`.
pub fn richardson_step(coarse: f64, fine: f64, order: u32) -> (f64, f64) {
    let k = f64::from(2u32.pow(order));
    let diff = (fine - coarse) / (k - 1.0);
    (fine + diff, diff.abs())
}

/// Value at `x = 0` of `L + x·(a·ln x + b)` through three samples `(x, f(x))`.
pub fn limit_log_linear(samples: &[(f64, f64); 3]) -> Result<f64> {
    let mut m = [[0.0; 4]; 3];
    for (row, &(x, y)) in m.iter_mut().zip(samples) {
        if !(x > 0.0) || !y.is_finite() {
            return Err(Error::Extrapolation { samples: samples.to_vec() });
        }
        *row = [1.0, x * x.ln(), x, y];
    }
    let sol = solve3(m).ok_or_else(|| Error::Extrapolation { samples: samples.to_vec() })?;
    Ok(sol[0])
}

/// Value at `x = 0` of `L + b·x` through two samples.
pub fn limit_linear(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.1 - a.0 * (b.1 - a.1) / (b.0 - a.0)
}

fn solve3(mut m: [[f64; 4]; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col] == 0.0 {
            return None;
        }
        m.swap(col, pivot);
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= factor * m[col][k];
            }
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (m[row][3] - tail) / m[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_log_linear_model() {
        let f = |x: f64| 3.0 + x * (0.7 * x.ln() - 2.0);
        let s = [1e-4, 1e-5, 1e-6].map(|x| (x, f(x)));
        let l = limit_log_linear(&s).unwrap();
        assert!((l - 3.0).abs() < 1e-12);
    }

    #[test]
    fn richardson_removes_quadratic_error() {
        let exact = 1.0;
        let approx = |h: f64| exact + 0.3 * h * h;
        let (v, e) = richardson_step(approx(0.1), approx(0.05), 2);
        assert!((v - exact).abs() < 1e-14);
        assert!(e > 0.0);
    }

    #[test]
    fn linear_limit() {
        assert!((limit_linear((1.0, 3.0), (2.0, 5.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bad_samples_are_reported() {
        let e = limit_log_linear(&[(0.0, 1.0), (1e-5, 1.0), (1e-6, 1.0)]).unwrap_err();
        assert!(matches!(e, Error::Extrapolation { .. }));
    }
}
