use serde::{Deserialize, Serialize};

use super::roots::find_root_bracketed;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointOptions {
    /// Weight of the new image in `x ← (1−λ)x + λF(x)`.
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Measure the residual relative to `|x|` instead of absolutely.
    pub relative: bool,
    /// Interval on which `x − F(x)` changes sign; enables the root-finding
    /// fallback when the iteration cycles or stalls.
    pub bracket: Option<(f64, f64)>,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self { damping: 0.5, tol: 1e-10, max_iter: 10_000, relative: false, bracket: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub x: f64,
    /// `|x − F(x)|` at the returned point.
    pub residual: f64,
    pub iterations: usize,
    pub used_fallback: bool,
}

/// Consecutive residual increases with alternating step direction treated as a cycle.
const GROWTH_LIMIT: usize = 8;

/// Damped fixed-point iteration with a bracketed fallback.
pub fn fixed_point<F: FnMut(f64) -> f64>(mut f: F, x0: f64, opts: &FixedPointOptions) -> Result<FixedPoint> {
    if !(opts.damping > 0.0 && opts.damping <= 1.0) || !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "fixed point needs damping in (0, 1] and tol > 0, got {} and {}",
            opts.damping, opts.tol
        )));
    }
    let accept = |x: f64, r: f64| r <= if opts.relative { opts.tol * x.abs() } else { opts.tol };

    let mut x = x0;
    let mut previous = f64::INFINITY;
    let mut growth = 0;
    let mut previous_step = 0.0f64;
    let mut last_residual = f64::NAN;
    for n in 0..opts.max_iter {
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::Iteration { iterations: n, last: x, residual: f64::NAN });
        }
        let r = (x - fx).abs();
        last_residual = r;
        if accept(x, r) {
            return Ok(FixedPoint { x, residual: r, iterations: n, used_fallback: false });
        }
        // A monotone drift with growing steps is progress, not a cycle.
        let step = fx - x;
        let flipped = step.signum() != previous_step.signum();
        growth = if r >= previous && flipped { growth + 1 } else { 0 };
        previous = r;
        previous_step = step;
        if growth >= GROWTH_LIMIT {
            break;
        }
        x = (1.0 - opts.damping) * x + opts.damping * fx;
    }

    let Some((lo, hi)) = opts.bracket else {
        return Err(Error::Iteration { iterations: opts.max_iter, last: x, residual: last_residual });
    };
    let width_tol = if opts.relative { opts.tol * lo.abs().max(f64::MIN_POSITIVE) } else { opts.tol };
    let root = find_root_bracketed(|y| y - f(y), lo, hi, width_tol * 1e-2)?;
    let residual = (root - f(root)).abs();
    if !accept(root, residual) {
        return Err(Error::Iteration { iterations: opts.max_iter, last: root, residual });
    }
    Ok(FixedPoint { x: root, residual, iterations: opts.max_iter, used_fallback: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dottie_number() {
        let p = fixed_point(f64::cos, 1.0, &FixedPointOptions::default()).unwrap();
        assert!((p.x - 0.739_085_133_215_160_6).abs() < 1e-9);
        assert!(p.residual <= 1e-10);
    }

    #[test]
    fn constant_map_converges_at_once() {
        let opts = FixedPointOptions { damping: 1.0, ..Default::default() };
        let p = fixed_point(|_| 0.5, 3.0, &opts).unwrap();
        assert_eq!(p.x, 0.5);
        assert_eq!(p.iterations, 1);
    }

    #[test]
    fn oscillating_map_uses_bracket() {
        // Undamped, x ↦ 3 − 2x overshoots with growing amplitude.
        let opts = FixedPointOptions { damping: 1.0, bracket: Some((-10.0, 10.0)), ..Default::default() };
        let p = fixed_point(|x| 3.0 - 2.0 * x, 0.0, &opts).unwrap();
        assert!(p.used_fallback);
        assert!((p.x - 1.0).abs() < 1e-10);
    }

    #[test]
    fn exhaustion_without_bracket_errors() {
        let opts = FixedPointOptions { max_iter: 3, ..Default::default() };
        let e = fixed_point(|x| x + 1.0, 0.0, &opts).unwrap_err();
        assert!(matches!(e, Error::Iteration { .. }));
    }
}
