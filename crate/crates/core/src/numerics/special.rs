//! Sine and cosine integrals.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_LIMIT: f64 = 2.0;

/// Power series of `Si(x)` and `Cin(x) = ∫₀ˣ (1 − cos u)/u du`, `x ≥ 0`.
fn series(x: f64) -> (f64, f64) {
    let (mut si, mut cin) = (0.0, 0.0);
    let mut fact = 1.0;
    for k in 1..60 {
        fact *= x / k as f64;
        let term = fact / k as f64;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            si += sign * term;
        } else {
            cin -= sign * term;
        }
        if term < 1e-17 * si.abs().max(cin.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
    }
    (si, cin)
}

/// Continued fraction for `E₁(ix)`, giving `(Si(x), Ci(x))` for `x ≥ 2`.
fn continued_fraction(x: f64) -> (f64, f64) {
    let tiny = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 2..200 {
        let a = -((i - 1) as f64).powi(2);
        b += 2.0;
        d = (d * a + b).inv();
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < 1e-16 {
            break;
        }
    }
    h *= Complex64::new(x.cos(), -x.sin());
    (FRAC_PI_2 + h.im, -h.re)
}

/// `(Si(x), Ci(x))`. `Ci` is `-∞` at 0 and `NaN` for negative `x`.
pub fn sici(x: f64) -> (f64, f64) {
    let t = x.abs();
    let (si, ci) = if t == 0.0 {
        (0.0, f64::NEG_INFINITY)
    } else if t < SERIES_LIMIT {
        let (si, cin) = series(t);
        (si, EULER_GAMMA + t.ln() - cin)
    } else {
        continued_fraction(t)
    };
    if x < 0.0 {
        (-si, f64::NAN)
    } else {
        (si, ci)
    }
}

pub fn si(x: f64) -> f64 {
    sici(x).0
}

/// `Cin(x) = γ + ln x − Ci(x)`, entire and even.
pub fn cin(x: f64) -> f64 {
    let t = x.abs();
    if t < SERIES_LIMIT {
        series(t).1
    } else {
        EULER_GAMMA + t.ln() - continued_fraction(t).1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn reference_values() {
        // (x, Si, Ci) to 16 digits
        let table = [
            (0.5, 0.493_107_418_043_066_7, -0.177_784_078_806_612_9),
            (1.0, 0.946_083_070_367_183, 0.337_403_922_900_968_1),
            (1.999, 1.604_958_110_393_612_9, 0.423_188_726_794_006_2),
            (2.001, 1.605_867_407_814_021_5, 0.422_772_580_143_687_6),
            (5.0, 1.549_931_244_944_674, -0.190_029_749_656_643_9),
            (10.0, 1.658_347_594_218_874, -0.045_456_433_004_455_37),
            (100.0, 1.562_225_466_889_056, -0.005_148_825_142_610_493),
        ];
        for (x, s, c) in table {
            let (si, ci) = sici(x);
            assert!(close(si, s, 1e-12), "Si({x}) = {si}");
            assert!(close(ci, c, 1e-12), "Ci({x}) = {ci}");
        }
    }

    #[test]
    fn cin_is_continuous_across_switch() {
        let below = cin(SERIES_LIMIT * (1.0 - 1e-12));
        let above = cin(SERIES_LIMIT * (1.0 + 1e-12));
        assert!((below - above).abs() < 1e-11);
    }

    #[test]
    fn small_argument_limits() {
        assert_eq!(sici(0.0).0, 0.0);
        assert!((cin(1e-4) - (0.25e-8 - 1e-16 / 96.0)).abs() < 1e-22);
        assert!((si(1e-6) - (1e-6 - 1e-18 / 18.0)).abs() < 1e-24);
    }

    #[test]
    fn odd_symmetry() {
        assert_eq!(si(-3.0), -si(3.0));
        assert_eq!(cin(-3.0), cin(3.0));
    }
}
