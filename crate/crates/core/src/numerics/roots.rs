use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Brent's method on a sign-changing bracket.
///
/// Returns once the bracket is narrower than `tol` (or `g` hits an exact zero).
pub fn find_root_bracketed<G: FnMut(f64) -> f64>(mut g: G, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (g(a), g(b));
    try_root(&mut g, &mut a, &mut b, &mut fa, &mut fb, tol)
}

/// Same as [`find_root_bracketed`] when `g(lo)`, `g(hi)` are already known.
pub fn find_root_with_values<G: FnMut(f64) -> f64>(
    mut g: G,
    lo: f64,
    hi: f64,
    g_lo: f64,
    g_hi: f64,
    tol: f64,
) -> Result<f64> {
    let (mut a, mut b, mut fa, mut fb) = (lo, hi, g_lo, g_hi);
    try_root(&mut g, &mut a, &mut b, &mut fa, &mut fb, tol)
}

fn try_root<G: FnMut(f64) -> f64>(
    g: &mut G,
    a: &mut f64,
    b: &mut f64,
    fa: &mut f64,
    fb: &mut f64,
    tol: f64,
) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("root tolerance must be positive, got {tol}")));
    }
    if fa.is_nan() || fb.is_nan() || *fa * *fb > 0.0 {
        return Err(Error::NoSignChange { lo: *a, hi: *b, g_lo: *fa, g_hi: *fb });
    }
    if *fa == 0.0 {
        return Ok(*a);
    }
    if *fb == 0.0 {
        return Ok(*b);
    }
    let (mut c, mut fc) = (*a, *fa);
    let mut d = *b - *a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if (*fb > 0.0) == (fc > 0.0) {
            c = *a;
            fc = *fa;
            d = *b - *a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            *a = *b;
            *b = c;
            c = *a;
            *fa = *fb;
            *fb = fc;
            fc = *fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - *b);
        if xm.abs() <= tol1 || *fb == 0.0 {
            return Ok(*b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = *fb / *fa;
            let (mut p, mut q);
            if *a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = *fa / fc;
                let r = *fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (*b - *a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        *a = *b;
        *fa = *fb;
        *b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        *fb = g(*b);
        if fb.is_nan() {
            return Err(Error::Iteration { iterations: MAX_ITER, last: *b, residual: f64::NAN });
        }
    }
    Err(Error::Iteration { iterations: MAX_ITER, last: *b, residual: *fb })
}

/// Largest-`x` sign change of a monotone predicate: bisection of `pred` on
/// `[lo, hi]` where `pred(lo)` is true and `pred(hi)` is false.
pub fn bisect_predicate<P: FnMut(f64) -> Result<bool>>(mut pred: P, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_root() {
        let r = find_root_bracketed(|x| x - 0.3, 0.0, 1.0, 1e-14).unwrap();
        assert!((r - 0.3).abs() < 1e-14);
    }

    #[test]
    fn cosine_root() {
        let r = find_root_bracketed(f64::cos, 1.0, 2.0, 1e-14).unwrap();
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
    }

    #[test]
    fn no_sign_change_is_an_error() {
        let e = find_root_bracketed(|x| x * x + 1.0, -1.0, 1.0, 1e-10).unwrap_err();
        assert!(matches!(e, Error::NoSignChange { .. }));
    }

    #[test]
    fn evaluation_count_is_superlinear() {
        let mut calls = 0;
        find_root_bracketed(
            |x| {
                calls += 1;
                x.exp() - 2.0
            },
            0.0,
            1.0,
            1e-14,
        )
        .unwrap();
        assert!(calls < 15, "{calls} evaluations");
    }

    #[test]
    fn predicate_bisection() {
        let x = bisect_predicate(|x| Ok(x < 0.7), 0.0, 1.0, 1e-9).unwrap();
        assert!((x - 0.7).abs() < 1e-9);
    }
}
