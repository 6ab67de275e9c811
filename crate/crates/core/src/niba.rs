//! Noninteracting-blip reference dynamics.
//!
//! P(t) solves `dP/dt = −∫₀ᵗ K(t−s)P(s) ds` with `K = Δ²cos(Q₁)e^{−Q₂}`.
//! Both phases are linear in α, so they are tabulated once per unit α and
//! rescaled while scanning the coupling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Method, TimeSeries};
use crate::error::{Error, Result, ResultExt};
use crate::model::{check_alpha, check_delta, check_temperature, BathKind, ModelParams};
use crate::numerics::quadrature::interior_points;
use crate::numerics::special::{cin, si};
use crate::numerics::{integrate_oscillatory, volterra_step, FilonOptions, FilonRule, Oscillation, QuadratureSpec};

#[derive(Debug, Clone)]
pub struct NibaKernel {
    pub bath: BathKind,
    pub alpha: f64,
    pub temperature: f64,
    /// Spin: `tanh(ω/2T)/ω`. Boson: `[ω·coth(ω/2T) − 2T]/ω²`. Absent at T = 0.
    thermal: Option<FilonRule>,
    thermal_total: f64,
}

/// `[ω·coth(ω/2T) − 2T]/ω²`, regular at ω = 0.
///
/// With y = ω/2T this is `(y·coth y − 1)/(2T·y²)`. Below y = 1 the numerator
/// `y·cosh y − sinh y` is summed as a positive series to avoid cancellation.
fn coth_remainder(w: f64, temperature: f64) -> f64 {
    let y = w / (2.0 * temperature);
    if y >= 1.0 {
        return (y / y.tanh() - 1.0) / (2.0 * temperature * y * y);
    }
    // (y·cosh y − sinh y)/y³ = Σ_{k≥1} 2k·y^{2k−2}/(2k+1)!
    let y2 = y * y;
    let (mut sum, mut power, mut fact) = (0.0, 1.0, 6.0);
    for k in 1..20 {
        let term = 2.0 * k as f64 * power / fact;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
        power *= y2;
        fact *= ((2 * k + 2) * (2 * k + 3)) as f64;
    }
    let y_over_sinh = if y < 1e-8 { 1.0 } else { y / y.sinh() };
    sum * y_over_sinh / (2.0 * temperature)
}

fn tanh_over_omega(w: f64, temperature: f64) -> f64 {
    let y = w / (2.0 * temperature);
    if y < 1e-4 {
        (1.0 - y * y / 3.0) / (2.0 * temperature)
    } else {
        y.tanh() / w
    }
}

impl NibaKernel {
    pub fn new(bath: BathKind, alpha: f64, temperature: f64) -> Result<Self> {
        check_alpha(alpha)?;
        check_temperature(temperature)?;
        let mut kernel = Self { bath, alpha, temperature, thermal: None, thermal_total: 0.0 };
        if temperature > 0.0 {
            let t = temperature;
            let points = interior_points(0.0, 1.0, [0.01, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0].into_iter().map(|k| k * t));
            let opts = FilonOptions { tol: 1e-11, ..FilonOptions::default() };
            let rule = match bath {
                BathKind::Spin => FilonRule::build(|w| tanh_over_omega(w, t), 0.0, 1.0, &points, &opts),
                BathKind::Boson => FilonRule::build(|w| coth_remainder(w, t), 0.0, 1.0, &points, &opts),
            }
            .context(|| format!("NIBA phase tables for the {bath} bath at T = {t}"))?;
            kernel.thermal_total = rule.integral();
            kernel.thermal = Some(rule);
        }
        Ok(kernel)
    }

    pub fn spin(alpha: f64, temperature: f64) -> Result<Self> {
        Self::new(BathKind::Spin, alpha, temperature)
    }

    pub fn boson(alpha: f64, temperature: f64) -> Result<Self> {
        Self::new(BathKind::Boson, alpha, temperature)
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { alpha, ..self.clone() })
    }

    /// `(Q₁, Q₂)/α` at time t.
    pub fn unit_phases(&self, t: f64) -> Result<(f64, f64)> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain { quantity: "t", value: t, reason: "time must be non-negative and finite" });
        }
        let spin_q2 = 2.0 * cin(t);
        Ok(match (self.bath, &self.thermal) {
            (_, None) => (2.0 * si(t), spin_q2),
            (BathKind::Spin, Some(rule)) => (2.0 * rule.sin_transform(t), spin_q2),
            (BathKind::Boson, Some(rule)) => {
                let pole = 2.0 * self.temperature * (t * si(t) - 1.0 + t.cos());
                (2.0 * si(t), 2.0 * (pole + self.thermal_total - rule.cos_transform(t)))
            }
        })
    }

    pub fn q1(&self, t: f64) -> Result<f64> {
        Ok(self.alpha * self.unit_phases(t)?.0)
    }

    pub fn q2(&self, t: f64) -> Result<f64> {
        Ok(self.alpha * self.unit_phases(t)?.1)
    }

    pub fn value(&self, t: f64, delta: f64) -> Result<f64> {
        let (q1, q2) = self.unit_phases(t)?;
        Ok(kernel_from_phases(delta, self.alpha, q1, q2))
    }
}

fn kernel_from_phases(delta: f64, alpha: f64, q1: f64, q2: f64) -> f64 {
    delta * delta * (alpha * q1).cos() * (-alpha * q2).exp()
}

pub fn q1(t: f64, kernel: &NibaKernel) -> Result<f64> {
    kernel.q1(t)
}

pub fn q2(t: f64, kernel: &NibaKernel) -> Result<f64> {
    kernel.q2(t)
}

/// `Δ²·cos(Q₁(t))·e^{−Q₂(t)}`.
pub fn niba_kernel(t: f64, delta: f64, kernel: &NibaKernel) -> Result<f64> {
    check_delta(delta)?;
    kernel.value(t, delta)
}

/// `∫₀¹ J(ω)·sin(ωt)/ω² dω` for an arbitrary spectrum.
pub fn q1_from_spectrum<J: Fn(f64) -> f64>(t: f64, spectrum: J, spec: &QuadratureSpec) -> Result<f64> {
    let f = |w: f64| {
        let w = w.max(1e-12);
        spectrum(w) / (w * w)
    };
    Ok(integrate_oscillatory(f, 0.0, 1.0, t, Oscillation::Sin, spec)?.value)
}

/// Unit-α phases on `t_k = k·h`.
struct PhaseTable {
    q1: Vec<f64>,
    q2: Vec<f64>,
}

impl PhaseTable {
    fn build(kernel: &NibaKernel, h: f64, n: usize) -> Result<Self> {
        let (q1, q2) = (0..n)
            .into_par_iter()
            .map(|k| kernel.unit_phases(k as f64 * h))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        Ok(Self { q1, q2 })
    }

    fn kernel(&self, delta: f64, alpha: f64, stride: usize) -> Vec<f64> {
        self.q1.iter().zip(&self.q2).step_by(stride).map(|(&a, &b)| kernel_from_phases(delta, alpha, a, b)).collect()
    }
}

fn uniform_step(times: &[f64]) -> Result<f64> {
    let bad = |why: &str| Err(Error::InvalidParameter(format!("NIBA grid {why}")));
    match times {
        [] | [_] => bad("needs at least two points"),
        [first, second, ..] => {
            if *first != 0.0 {
                return bad("must start at t = 0");
            }
            let h = second - first;
            if !(h > 0.0) {
                return bad("must be strictly increasing");
            }
            let uniform = times.iter().enumerate().all(|(k, &t)| (t - k as f64 * h).abs() <= 1e-9 * h.max(t));
            if uniform {
                Ok(h)
            } else {
                bad("must be uniform")
            }
        }
    }
}

/// NIBA P(t) on a uniform grid from 0, checked against the half-step solution.
///
/// The returned values are the half-step ones. Fails when the Richardson
/// estimate `max|P_{h/2} − P_h|/3` exceeds `tol`.
pub fn niba_population(times: &[f64], delta: f64, kernel: &NibaKernel, tol: f64) -> Result<TimeSeries> {
    check_delta(delta)?;
    let h = uniform_step(times)?;
    let n = times.len();
    let table = PhaseTable::build(kernel, 0.5 * h, 2 * n - 1)?;
    let (coarse, fine) = rayon::join(
        || crate::numerics::solve_convolution(&table.kernel(delta, kernel.alpha, 2), h),
        || crate::numerics::solve_convolution(&table.kernel(delta, kernel.alpha, 1), 0.5 * h),
    );
    let values: Vec<f64> = fine.iter().step_by(2).copied().collect();
    let estimate = coarse.iter().zip(&values).map(|(c, f)| (f - c).abs() / 3.0).fold(0.0, f64::max);
    if estimate > tol {
        return Err(Error::StepConvergence { estimate, tol, step: h });
    }
    Ok(TimeSeries {
        times: times.to_vec(),
        values,
        method: Method::Niba,
        params: ModelParams { bath: kernel.bath, delta, alpha: kernel.alpha, temperature: kernel.temperature },
        abs_tol: tol,
        rel_tol: 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryOptions {
    /// Volterra step in units of 1/ωc.
    pub step: f64,
    /// Scan horizon in units of 1/Δ.
    pub horizon: f64,
    /// P below this value counts as a coherent lobe.
    pub lobe: f64,
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub tol: f64,
}

impl Default for BoundaryOptions {
    fn default() -> Self {
        Self { step: 0.1, horizon: 50.0, lobe: -0.01, alpha_lo: 0.05, alpha_hi: 1.5, tol: 1e-3 }
    }
}

/// Steps the NIBA equation until P drops below `lobe` or the table ends.
fn has_lobe(table: &PhaseTable, delta: f64, alpha: f64, h: f64, lobe: f64) -> (bool, f64) {
    let kernel = table.kernel(delta, alpha, 1);
    let mut p = Vec::with_capacity(kernel.len());
    p.push(1.0);
    let (mut slope, mut min) = (0.0, 1.0f64);
    while p.len() < kernel.len() {
        let (next, s) = volterra_step(&p, slope, &kernel, h);
        if next < lobe {
            return (true, next);
        }
        min = min.min(next);
        p.push(next);
        slope = s;
    }
    (false, min)
}

pub fn niba_boundary(bath: BathKind, temperature: f64, delta: f64) -> Result<f64> {
    niba_boundary_with(bath, temperature, delta, &BoundaryOptions::default())
}

/// Smallest α whose NIBA P(t) no longer dips below `opts.lobe` within the horizon.
pub fn niba_boundary_with(bath: BathKind, temperature: f64, delta: f64, opts: &BoundaryOptions) -> Result<f64> {
    check_delta(delta)?;
    let unit = NibaKernel::new(bath, 1.0, temperature)?;
    let n = (opts.horizon / (delta * opts.step)).ceil() as usize + 1;
    let table = PhaseTable::build(&unit, opts.step, n)?;
    let probe = |alpha: f64| has_lobe(&table, delta, alpha, opts.step, opts.lobe);

    let (lo_lobe, lo_min) = probe(opts.alpha_lo);
    let (hi_lobe, hi_min) = probe(opts.alpha_hi);
    if !lo_lobe || hi_lobe {
        return Err(Error::Bracket {
            lo: opts.alpha_lo,
            hi: opts.alpha_hi,
            detail: format!(
                "{bath} bath at T = {temperature}, delta = {delta}: min P is {lo_min} at the lower edge and {hi_min} at the upper edge, lobe threshold {}",
                opts.lobe
            ),
        });
    }
    crate::numerics::roots::bisect_predicate(|a| Ok(probe(a).0), opts.alpha_lo, opts.alpha_hi, opts.tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_adaptive;
    use crate::numerics::special::EULER_GAMMA;

    #[test]
    fn phases_vanish_at_origin() {
        for k in [NibaKernel::spin(0.3, 0.0), NibaKernel::spin(0.3, 0.05), NibaKernel::boson(0.3, 0.05)] {
            let k = k.unwrap();
            assert_eq!(k.q1(0.0).unwrap(), 0.0);
            assert!(k.q2(0.0).unwrap().abs() < 1e-12);
            assert!((niba_kernel(0.0, 0.1, &k).unwrap() - 0.01).abs() < 1e-14);
        }
    }

    #[test]
    fn boson_q1_is_sine_integral() {
        let k = NibaKernel::boson(0.1, 0.05).unwrap();
        assert!((k.q1(1.0).unwrap() - 0.2 * 0.946_083_070_367_183).abs() < 1e-14);
    }

    #[test]
    fn spin_q2_cosine_integral_oracle() {
        // Ci(10) = −0.0454564330044554
        let ci10 = -0.045_456_433_004_455_4;
        let expected = 0.2 * (10f64.ln() + EULER_GAMMA - ci10);
        let k = NibaKernel::spin(0.1, 0.0).unwrap();
        assert!((k.q2(10.0).unwrap() - expected).abs() < 1e-13);
        assert!((expected - 0.585_043).abs() < 1e-5);
    }

    #[test]
    fn zero_temperature_baths_agree() {
        let s = NibaKernel::spin(0.2, 0.0).unwrap();
        let b = NibaKernel::boson(0.2, 0.0).unwrap();
        for t in [0.0, 0.5, 3.0, 40.0, 900.0] {
            assert_eq!(s.unit_phases(t).unwrap(), b.unit_phases(t).unwrap());
        }
    }

    #[test]
    fn thermal_phases_match_direct_quadrature() {
        let temp = 0.05;
        let spec = QuadratureSpec::scalar().with_tolerances(1e-12, 1e-12).with_breakpoints_in(0.0, 1.0, [temp]);
        let spin = NibaKernel::spin(1.0, temp).unwrap();
        let boson = NibaKernel::boson(1.0, temp).unwrap();
        for t in [0.3, 4.0, 25.0] {
            let q1 = integrate_adaptive(|w| 2.0 * (w * t).sin() * (w / (2.0 * temp)).tanh() / w, 1e-300, 1.0, &spec)
                .unwrap()
                .value;
            assert!((spin.q1(t).unwrap() - q1).abs() < 1e-9, "q1 at {t}");
            let q2 = integrate_adaptive(
                |w| 2.0 * (1.0 - (w * t).cos()) / ((w / (2.0 * temp)).tanh() * w),
                1e-300,
                1.0,
                &spec,
            )
            .unwrap()
            .value;
            assert!(
                (boson.q2(t).unwrap() - q2).abs() < 1e-8 * q2.max(1.0),
                "q2 at {t}: {} vs {q2}",
                boson.q2(t).unwrap()
            );
        }
    }

    #[test]
    fn coth_remainder_is_smooth() {
        let t = 0.01;
        assert!((coth_remainder(0.0, t) - 1.0 / (6.0 * t)).abs() < 1e-12);
        for w in [1e-6, 1e-3, 0.0199, 0.0201, 0.3] {
            let direct = (w / (2.0 * t) / (w / (2.0 * t)).tanh() - 1.0) * 2.0 * t / (w * w);
            assert!((coth_remainder(w, t) - direct).abs() < 1e-7 * direct.max(1.0), "{w}");
        }
        let (a, b) = (coth_remainder(0.02 * (1.0 - 1e-12), t), coth_remainder(0.02 * (1.0 + 1e-12), t));
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn q2_is_non_decreasing() {
        for k in [NibaKernel::spin(0.2, 0.0), NibaKernel::boson(0.2, 0.1)] {
            let k = k.unwrap();
            let mut last = 0.0;
            for i in 1..400 {
                let q = k.q2(i as f64 * 0.25).unwrap();
                assert!(q >= last - 1e-12);
                last = q;
            }
        }
    }

    #[test]
    fn effective_spectrum_identity() {
        let (alpha, temp) = (0.2, 0.03);
        let k = NibaKernel::spin(alpha, temp).unwrap();
        let spec = QuadratureSpec::scalar().with_tolerances(1e-12, 1e-12).with_breakpoints_in(0.0, 1.0, [temp]);
        for t in [2.0, 17.0, 300.0] {
            let eff = q1_from_spectrum(t, |w| 2.0 * alpha * w * (w / (2.0 * temp)).tanh(), &spec).unwrap();
            assert!((eff - k.q1(t).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn kernel_composes_closed_forms() {
        let k = NibaKernel::spin(0.1, 0.0).unwrap();
        let t = 5.0;
        let expected = 0.01 * (0.2 * si(t)).cos() * (-0.2 * cin(t)).exp();
        assert!((niba_kernel(t, 0.1, &k).unwrap() - expected).abs() < 1e-17);
        let free = NibaKernel::spin(0.0, 0.0).unwrap();
        assert!((niba_kernel(7.0, 0.1, &free).unwrap() - 0.01).abs() < 1e-17);
    }

    #[test]
    fn free_population_is_cosine() {
        let k = NibaKernel::spin(0.0, 0.0).unwrap();
        let times: Vec<f64> = (0..=2000).map(|i| i as f64 * 0.05).collect();
        let p = niba_population(&times, 0.1, &k, 1e-5).unwrap();
        for (t, v) in p.iter() {
            assert!((v - (0.1 * t).cos()).abs() < 1e-5);
        }
    }

    #[test]
    fn spin_and_boson_series_agree_at_zero_temperature() {
        let times: Vec<f64> = (0..=1500).map(|i| i as f64 * 0.1).collect();
        let s = niba_population(&times, 0.1, &NibaKernel::spin(0.2, 0.0).unwrap(), 1e-4).unwrap();
        let b = niba_population(&times, 0.1, &NibaKernel::boson(0.2, 0.0).unwrap(), 1e-4).unwrap();
        for (x, y) in s.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-8);
        }
        assert_eq!(s.method, Method::Niba);
    }

    #[test]
    fn coarse_grid_fails_step_check() {
        let times: Vec<f64> = (0..=50).map(|i| i as f64 * 4.0).collect();
        let e = niba_population(&times, 0.5, &NibaKernel::spin(0.1, 0.0).unwrap(), 1e-8).unwrap_err();
        assert!(matches!(e, Error::StepConvergence { .. }));
    }

    #[test]
    fn grid_validation() {
        let k = NibaKernel::spin(0.1, 0.0).unwrap();
        assert!(niba_population(&[0.0, 1.0, 3.0], 0.1, &k, 1e-3).is_err());
        assert!(niba_population(&[1.0, 2.0], 0.1, &k, 1e-3).is_err());
    }

    #[test]
    fn boundary_bracket_error() {
        let opts = BoundaryOptions { alpha_lo: 1.2, ..BoundaryOptions::default() };
        let e = niba_boundary_with(BathKind::Spin, 0.0, 0.2, &opts).unwrap_err();
        assert!(matches!(e, Error::Bracket { .. }));
    }

    #[test]
    fn boundary_at_zero_temperature() {
        let b = niba_boundary(BathKind::Spin, 0.0, 0.2).unwrap();
        assert!(b > 0.3 && b < 0.8, "{b}");
    }
}
