//! Nonequilibrium observables: P(t), ⟨τx(t)⟩, the pole approximation and the
//! coherent-incoherent boundary.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::{SpectralWeight, RULE_TOL};
use crate::error::{Error, Result, ResultExt};
use crate::guard::ErrorSlot;
use crate::model::{check_delta, check_temperature, BathKind, ModelParams};
use crate::numerics::quadrature::interior_points;
use crate::numerics::{find_root_bracketed, FilonOptions, FilonRule, QuadratureSpec};
use crate::renorm::{solve_eta_spin, RenormalizedSystem};
use crate::spectral::{gamma_spin, pole_frequency, BosonSelfEnergy, SelfEnergy, SpinSelfEnergy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    FullQuadrature,
    Wwa,
    Niba,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::FullQuadrature => "full",
            Method::Wwa => "wwa",
            Method::Niba => "niba",
        }
    }
}

/// Sampled observable with the settings that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub method: Method,
    pub params: ModelParams,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsResult {
    pub series: TimeSeries,
    pub method: Method,
    pub quadrature_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleData {
    /// Real root of `ω − ηΔ − R(ω) = 0`; zero when absent.
    pub omega0: f64,
    /// `γ(ηΔ) = ½απηΔ`.
    pub gamma_wwa: f64,
    pub exists: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Coherent,
    Incoherent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub alpha: f64,
    pub delta: f64,
    pub temperature: f64,
    pub classification: Classification,
    pub alpha_c: f64,
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { quantity: "t", value: t, reason: "time must be non-negative and finite" })
    }
}

fn spin_system(sys: &RenormalizedSystem) -> Result<()> {
    if sys.params.bath != BathKind::Spin {
        return Err(Error::InvalidParameter("expected a spin-bath system".into()));
    }
    sys.require_delocalized()
}

/// Uniform grid of `points` times covering `ηΔ·t ∈ [0, span]`.
pub fn scaled_time_grid(eta_delta: f64, span: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|k| span * k as f64 / ((n - 1) as f64 * eta_delta)).collect(),
    }
}

/// Uniform grid of `points` times on `[0, tmax]`.
pub fn time_grid(tmax: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|k| tmax * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Evaluates P(t) for many times against one shared spectral weight.
pub struct Population<S> {
    weight: Option<SpectralWeight<S>>,
    delta: f64,
    spec: QuadratureSpec,
}

impl<S: SelfEnergy> Population<S> {
    fn new(se: S, delta: f64, spec: QuadratureSpec) -> Result<Self> {
        let weight = if se.alpha() == 0.0 { None } else { Some(SpectralWeight::new(se, RULE_TOL)?) };
        Ok(Self { weight, delta, spec })
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        match &self.weight {
            None => Ok((self.delta * t).cos()),
            Some(w) => Ok(w.cos_transform(t, &self.spec).context(|| format!("P(t) at t = {t}"))?.value),
        }
    }

    /// `∫ C(ω) sin(ωt) dω`.
    pub fn sine_companion(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        match &self.weight {
            None => Ok((self.delta * t).sin()),
            Some(w) => Ok(w.sin_transform(t, &self.spec)?.value),
        }
    }

    pub fn series(&self, times: &[f64]) -> Result<Vec<f64>> {
        times.par_iter().map(|&t| self.at(t)).collect()
    }
}

pub fn spin_population(sys: &RenormalizedSystem, spec: QuadratureSpec) -> Result<Population<SpinSelfEnergy>> {
    spin_system(sys)?;
    Population::new(SpinSelfEnergy::from_system(sys), sys.params.delta, spec)
}

pub fn boson_population(sys_b: &RenormalizedSystem, spec: QuadratureSpec) -> Result<Population<BosonSelfEnergy>> {
    if sys_b.params.bath != BathKind::Boson {
        return Err(Error::InvalidParameter("expected a boson-bath system".into()));
    }
    sys_b.require_delocalized()?;
    Population::new(BosonSelfEnergy::from_system(sys_b), sys_b.params.delta, spec)
}

/// `P(t) = (1/π)∫₀¹ γ(ω)cos(ωt) / ([ω−ηΔ−R(ω)]² + γ(ω)²) dω` for the spin bath.
pub fn population_difference(t: f64, sys: &RenormalizedSystem) -> Result<f64> {
    spin_population(sys, QuadratureSpec::series())?.at(t)
}

pub fn population_series(times: &[f64], sys: &RenormalizedSystem, spec: &QuadratureSpec) -> Result<DynamicsResult> {
    let values = spin_population(sys, spec.clone())?.series(times)?;
    Ok(result(times, values, Method::FullQuadrature, sys.params, spec))
}

fn result(
    times: &[f64],
    values: Vec<f64>,
    method: Method,
    params: ModelParams,
    spec: &QuadratureSpec,
) -> DynamicsResult {
    DynamicsResult {
        series: TimeSeries {
            times: times.to_vec(),
            values,
            method,
            params,
            abs_tol: spec.abs_tol,
            rel_tol: spec.rel_tol,
        },
        method,
        quadrature_tol: spec.abs_tol,
    }
}

/// Boson-bath P(t) with the thermal self-energy.
pub fn population_boson(t: f64, temperature: f64, sys_b: &RenormalizedSystem) -> Result<f64> {
    boson_at(sys_b, temperature)?;
    boson_population(sys_b, QuadratureSpec::series())?.at(t)
}

fn boson_at(sys_b: &RenormalizedSystem, temperature: f64) -> Result<()> {
    check_temperature(temperature)?;
    if sys_b.params.temperature != temperature {
        return Err(Error::InvalidParameter(format!(
            "boson system was solved at T = {}, not T = {temperature}",
            sys_b.params.temperature
        )));
    }
    Ok(())
}

pub fn population_boson_series(
    times: &[f64],
    sys_b: &RenormalizedSystem,
    spec: &QuadratureSpec,
) -> Result<DynamicsResult> {
    let values = boson_population(sys_b, spec.clone())?.series(times)?;
    Ok(result(times, values, Method::FullQuadrature, sys_b.params, spec))
}

pub fn pole_data(sys: &RenormalizedSystem) -> Result<PoleData> {
    sys.require_delocalized()?;
    let (alpha, a) = (sys.params.alpha, sys.effective_tunneling);
    let gamma_wwa = gamma_spin(a, alpha, a);
    Ok(match pole_frequency(alpha, a)? {
        Some(omega0) => PoleData { omega0, gamma_wwa, exists: true },
        None => PoleData { omega0: 0.0, gamma_wwa, exists: false },
    })
}

/// `cos(ω₀t)·e^{−γt}`.
pub fn wwa_population(t: f64, pole: &PoleData) -> Result<f64> {
    if !pole.exists {
        return Err(Error::Domain {
            quantity: "omega0",
            value: pole.omega0,
            reason: "no real pole: the dynamics is incoherent",
        });
    }
    check_time(t)?;
    Ok((pole.omega0 * t).cos() * (-pole.gamma_wwa * t).exp())
}

pub fn wwa_series(times: &[f64], sys: &RenormalizedSystem) -> Result<DynamicsResult> {
    let pole = pole_data(sys)?;
    let values = times.iter().map(|&t| wwa_population(t, &pole)).collect::<Result<Vec<_>>>()?;
    Ok(result(times, values, Method::Wwa, sys.params, &QuadratureSpec::series()))
}

/// Solution of `α_c = ½(1 + η(α_c)Δ)`.
pub fn critical_coupling(delta: f64) -> Result<f64> {
    check_delta(delta)?;
    let slot = ErrorSlot::default();
    let h = slot.wrap(|alpha| Ok(alpha - 0.5 * (1.0 + solve_eta_spin(delta, alpha, 1e-13)?.effective_tunneling)));
    let root = find_root_bracketed(h, 0.5, 0.5 * (1.0 + delta), 1e-12);
    slot.finish(root).context(|| format!("critical coupling at delta = {delta}"))
}

pub fn classify_dynamics(delta: f64, alpha: f64, temperature: f64) -> Result<PhasePoint> {
    check_temperature(temperature)?;
    let alpha_c = critical_coupling(delta)?;
    let classification = if alpha < alpha_c { Classification::Coherent } else { Classification::Incoherent };
    Ok(PhasePoint { alpha, delta, temperature, classification, alpha_c })
}

/// `tanh(x/2T)` with the T → 0 limit `sgn(x)`.
fn thermal_tanh(x: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        x.signum() * if x == 0.0 { 0.0 } else { 1.0 }
    } else {
        (x / (2.0 * temperature)).tanh()
    }
}

/// `[tanh(ω/2T) − tanh(a/2T)] / (ω − a)` without cancellation near ω = a.
fn tanh_slope(w: f64, a: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 0.0;
    }
    let (x, y) = (w / (2.0 * temperature), a / (2.0 * temperature));
    let d = x - y;
    if x.max(y) > 300.0 {
        return if d.abs() < 1e-12 { 0.0 } else { (x.tanh() - y.tanh()) / (w - a) };
    }
    let sinhc = if d.abs() < 1e-4 { 1.0 + d * d / 6.0 } else { d.sinh() / d };
    sinhc / (2.0 * temperature * x.cosh() * y.cosh())
}

/// `η·tanh(ηΔ/2T)`, the equilibrium value of ⟨τx⟩.
pub fn tau_x_equilibrium(temperature: f64, sys: &RenormalizedSystem) -> f64 {
    sys.eta * thermal_tanh(sys.effective_tunneling, temperature)
}

/// ⟨τx(t)⟩ evaluator with the mode sums mapped onto sampled rules.
pub struct TauX {
    eta: f64,
    delta: f64,
    a: f64,
    gamma: f64,
    th_a: f64,
    sine_rule: Option<FilonRule>,
    thermal_rule: Option<FilonRule>,
    thermal_total: f64,
    lorentz_rule: Option<FilonRule>,
    lorentz_x_rule: Option<FilonRule>,
    lorentz_x_total: f64,
}

impl TauX {
    pub fn new(temperature: f64, sys: &RenormalizedSystem) -> Result<Self> {
        check_temperature(temperature)?;
        sys.require_delocalized()?;
        let (alpha, a, delta) = (sys.params.alpha, sys.effective_tunneling, sys.params.delta);
        let gamma = gamma_spin(a, alpha, a);
        let th_a = thermal_tanh(a, temperature);
        let mut out = Self {
            eta: sys.eta,
            delta,
            a,
            gamma,
            th_a,
            sine_rule: None,
            thermal_rule: None,
            thermal_total: 0.0,
            lorentz_rule: None,
            lorentz_x_rule: None,
            lorentz_x_total: 0.0,
        };
        if alpha == 0.0 {
            return Ok(out);
        }

        let mut points: Vec<f64> = vec![a];
        for k in [0.25, 1.0, 4.0, 16.0, 64.0, 256.0] {
            points.push(a - k * gamma);
            points.push(a + k * gamma);
        }
        points.extend((1..=10).map(|j| a * 10f64.powi(-j)));
        if temperature > 0.0 {
            points.extend([0.1 * temperature, temperature, 10.0 * temperature]);
        }
        let points = interior_points(0.0, 1.0, points);
        let opts = FilonOptions { tol: RULE_TOL, ..FilonOptions::default() };
        let build = |f: &dyn Fn(f64) -> f64, term: u8| {
            FilonRule::build(f, 0.0, 1.0, &points, &opts).context(|| format!("⟨τx⟩ term {term}"))
        };

        let v2 = |w: f64| 2.0 * alpha * w * a * a / (w + a).powi(2);
        out.sine_rule = Some(build(&|w| 2.0 * alpha * w / (w + a).powi(2) * thermal_tanh(w, temperature), 2)?);
        if temperature > 0.0 {
            let rule = build(&|w| v2(w) * tanh_slope(w, a, temperature), 3)?;
            out.thermal_total = rule.integral();
            out.thermal_rule = Some(rule);
        }
        let lorentz = move |w: f64| v2(w) / ((w - a).powi(2) + 4.0 * gamma * gamma);
        out.lorentz_rule = Some(build(&lorentz, 4)?);
        let rule = build(&|w| lorentz(w) * (w - a), 4)?;
        out.lorentz_x_total = rule.integral();
        out.lorentz_x_rule = Some(rule);
        Ok(out)
    }

    /// The four contributions at time `t`, in order.
    pub fn terms(&self, t: f64) -> Result<[f64; 4]> {
        check_time(t)?;
        let Some(sine) = &self.sine_rule else {
            return Ok([0.0; 4]);
        };
        let decay = (-2.0 * self.gamma * t).exp();
        let shift = Complex64::new((self.a * t).cos(), -(self.a * t).sin());
        let term1 = self.eta * self.th_a * (1.0 - decay);
        let term2 = -self.eta * (self.a * t).sin() * sine.sin_transform(t);
        let term3 = match &self.thermal_rule {
            Some(rule) => (self.thermal_total - (shift * rule.fourier(t)).re) / self.delta,
            None => 0.0,
        };
        let fl = shift * self.lorentz_rule.as_ref().expect("built with the sine rule").fourier(t);
        let flx = shift * self.lorentz_x_rule.as_ref().expect("built with the sine rule").fourier(t);
        let term4 = self.th_a / self.delta * (decay * self.lorentz_x_total + 2.0 * self.gamma * fl.im - flx.re);
        Ok([term1, term2, term3, term4])
    }

    pub fn at(&self, t: f64) -> Result<f64> {
        Ok(self.terms(t)?.iter().sum())
    }

    /// Limit of [`Self::at`] as t → ∞: the relaxation term plus the
    /// non-oscillating part of the thermal term.
    pub fn long_time_limit(&self) -> f64 {
        self.eta * self.th_a + self.thermal_total / self.delta
    }

    pub fn series(&self, times: &[f64]) -> Result<Vec<f64>> {
        times.par_iter().map(|&t| self.at(t)).collect()
    }
}

pub fn tau_x_expectation(t: f64, temperature: f64, sys: &RenormalizedSystem) -> Result<f64> {
    TauX::new(temperature, sys)?.at(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceElements {
    /// ρ′₁₁ − ρ′₂₂.
    pub diag_diff: f64,
    /// ρ′₁₂ + ρ′₂₁.
    pub offdiag_sum: f64,
    /// ρ′₁₂ − ρ′₂₁ with the imaginary unit absorbed into the sign convention.
    pub offdiag_diff: f64,
    /// ρ′₁₁ + ρ′₂₂.
    pub trace: f64,
}

pub fn coherence_elements(t: f64, temperature: f64, sys: &RenormalizedSystem) -> Result<CoherenceElements> {
    Ok(coherence_series(&[t], temperature, sys, &QuadratureSpec::series())?[0])
}

pub fn coherence_series(
    times: &[f64],
    temperature: f64,
    sys: &RenormalizedSystem,
    spec: &QuadratureSpec,
) -> Result<Vec<CoherenceElements>> {
    check_temperature(temperature)?;
    let pop = spin_population(sys, spec.clone())?;
    let a = sys.effective_tunneling;
    let gamma = gamma_spin(a, sys.params.alpha, a);
    let th = thermal_tanh(a, temperature);
    times
        .par_iter()
        .map(|&t| {
            Ok(CoherenceElements {
                diag_diff: pop.at(t)?,
                offdiag_sum: th * (1.0 - (-2.0 * gamma * t).exp()),
                offdiag_diff: -pop.sine_companion(t)?,
                trace: 1.0,
            })
        })
        .collect()
}

/// Interior local extrema `(index, value)` of a sampled curve.
pub fn extrema(values: &[f64]) -> Vec<(usize, f64)> {
    values
        .windows(3)
        .enumerate()
        .filter(|(_, w)| (w[1] > w[0] && w[1] >= w[2]) || (w[1] < w[0] && w[1] <= w[2]))
        .map(|(i, w)| (i + 1, w[1]))
        .collect()
}

/// `2π/ω₀`, the oscillation period of the pole approximation.
pub fn pole_period(pole: &PoleData) -> Option<f64> {
    pole.exists.then(|| 2.0 * PI / pole.omega0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(delta: f64, alpha: f64) -> RenormalizedSystem {
        solve_eta_spin(delta, alpha, 1e-12).unwrap()
    }

    #[test]
    fn initial_and_final_population() {
        let s = sys(0.1, 0.1);
        assert!((population_difference(0.0, &s).unwrap() - 1.0).abs() < 1e-5);
        let late = population_difference(2000.0 / s.effective_tunneling, &s).unwrap();
        assert!(late.abs() < 1e-4, "{late}");
    }

    #[test]
    fn free_limit() {
        let s = sys(0.1, 0.0);
        for t in [0.0, 3.0, 40.0] {
            assert_eq!(population_difference(t, &s).unwrap(), (0.1 * t).cos());
        }
        let p = pole_data(&s).unwrap();
        assert_eq!(p.omega0, 0.1);
        assert_eq!(p.gamma_wwa, 0.0);
        let c = coherence_elements(7.0, 0.0, &s).unwrap();
        let phase = 0.1 * 7.0f64;
        assert_eq!((c.diag_diff, c.offdiag_sum, c.offdiag_diff), (phase.cos(), 0.0, -phase.sin()));
        assert_eq!(tau_x_expectation(5.0, 0.0, &s).unwrap(), 0.0);
    }

    #[test]
    fn wwa_reference_points() {
        let s = sys(0.1, 0.05);
        let pole = pole_data(&s).unwrap();
        assert!(pole.exists);
        assert_eq!(wwa_population(0.0, &pole).unwrap(), 1.0);
        let half = PI / pole.omega0;
        let expected = -(-pole.gamma_wwa * half).exp();
        assert!((wwa_population(half, &pole).unwrap() - expected).abs() < 1e-12);

        // Reference values from a 25-digit quadrature of the same integral.
        let period = pole_period(&pole).unwrap();
        let full = population_difference(period, &s).unwrap();
        assert!((full - 0.611_699_659_028_862_8).abs() < 1e-6, "{full}");
        let at50 = population_difference(50.0, &s).unwrap();
        assert!((at50 + 0.210_434_729_503_810_1).abs() < 1e-6, "{at50}");

        // The pole carries weight 1/(1 − R'(ω₀)) ≈ 1.056, so the pole form
        // trails the full curve by about 0.015 at these times.
        assert!((wwa_population(period, &pole).unwrap() - (-pole.gamma_wwa * period).exp()).abs() < 1e-12);
        for t in [period, 50.0] {
            let gap = population_difference(t, &s).unwrap() - wwa_population(t, &pole).unwrap();
            assert!(gap.abs() < 0.02, "{gap}");
        }
    }

    #[test]
    fn wwa_requires_pole() {
        let p = PoleData { omega0: 0.0, gamma_wwa: 0.1, exists: false };
        assert!(wwa_population(1.0, &p).is_err());
    }

    #[test]
    fn pole_shrinks_with_coupling() {
        let s = sys(0.1, 0.1);
        let p = pole_data(&s).unwrap();
        assert!(p.omega0 < s.effective_tunneling);
        assert_eq!(p.gamma_wwa, gamma_spin(s.effective_tunneling, 0.1, s.effective_tunneling));
        let near = pole_data(&sys(0.1, 0.5115)).unwrap();
        assert!(near.exists && near.omega0 < 5e-3, "{}", near.omega0);
    }

    #[test]
    fn critical_coupling_grows_with_delta() {
        let c1 = critical_coupling(0.1).unwrap();
        let c2 = critical_coupling(0.2).unwrap();
        assert!(c2 > 0.5 && c2 > c1);
        let eta = solve_eta_spin(0.1, c1, 1e-13).unwrap().effective_tunneling;
        assert!((c1 - 0.5 * (1.0 + eta)).abs() < 1e-10);
    }

    #[test]
    fn classification() {
        assert_eq!(classify_dynamics(0.1, 0.25, 0.0).unwrap().classification, Classification::Coherent);
        assert_eq!(classify_dynamics(0.1, 0.6, 0.0).unwrap().classification, Classification::Incoherent);
        assert_eq!(classify_dynamics(1e-4, 0.499, 0.0).unwrap().classification, Classification::Coherent);
        assert_eq!(classify_dynamics(1e-4, 0.501, 0.0).unwrap().classification, Classification::Incoherent);
        let hot = classify_dynamics(0.1, 0.3, 5.0).unwrap();
        assert_eq!(hot.alpha_c, classify_dynamics(0.1, 0.3, 0.0).unwrap().alpha_c);
    }

    #[test]
    fn tau_x_starts_at_zero() {
        let s = sys(0.1, 0.1);
        for t_bath in [0.0, 0.05] {
            assert!(tau_x_expectation(0.0, t_bath, &s).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn tau_x_zero_temperature_relaxes_to_equilibrium() {
        let s = sys(0.1, 0.1);
        let tau = TauX::new(0.0, &s).unwrap();
        let late = tau.at(3000.0 / s.effective_tunneling).unwrap();
        assert!((late - tau_x_equilibrium(0.0, &s)).abs() < 1e-3, "{late} vs {}", s.eta);
        assert_eq!(tau.long_time_limit(), s.eta);
    }

    #[test]
    fn tau_x_direct_quadrature_oracle() {
        // Terms 2 and 3 recomputed with adaptive quadrature at moderate t.
        use crate::numerics::integrate_adaptive;
        let (s, temp, t) = (sys(0.1, 0.1), 0.05, 37.0);
        let (alpha, a) = (0.1, s.effective_tunneling);
        let tau = TauX::new(temp, &s).unwrap();
        let terms = tau.terms(t).unwrap();
        let spec = QuadratureSpec::scalar().with_breakpoints_in(0.0, 1.0, [a, temp]);
        let i2 = integrate_adaptive(
            |w| 2.0 * alpha * w / (w + a).powi(2) * (w / (2.0 * temp)).tanh() * (w * t).sin(),
            0.0,
            1.0,
            &spec,
        )
        .unwrap()
        .value;
        assert!((terms[1] + s.eta * (a * t).sin() * i2).abs() < 1e-8);
        let i3 = integrate_adaptive(
            |w| {
                let v2 = 2.0 * alpha * w * a * a / (w + a).powi(2);
                let dq = ((w / (2.0 * temp)).tanh() - (a / (2.0 * temp)).tanh()) / (w - a);
                v2 * dq * (1.0 - ((w - a) * t).cos())
            },
            0.0,
            1.0,
            &spec,
        )
        .unwrap()
        .value;
        assert!((terms[2] - i3 / 0.1).abs() < 1e-8);
    }

    #[test]
    fn offdiagonal_sum_is_bounded() {
        let s = sys(0.1, 0.1);
        let cap = (s.effective_tunneling / 0.1).tanh();
        for t in [0.0, 10.0, 100.0, 1e4] {
            let c = coherence_elements(t, 0.05, &s).unwrap();
            assert!(c.offdiag_sum >= 0.0 && c.offdiag_sum <= cap);
            assert_eq!(c.trace, 1.0);
        }
        let late = coherence_elements(1e5, 0.05, &s).unwrap();
        assert!(late.diag_diff.abs() < 1e-4 && late.offdiag_diff.abs() < 1e-4);
        assert!((late.offdiag_sum - cap).abs() < 1e-12);
    }

    #[test]
    fn boson_population_has_thermal_decay() {
        let spin = sys(0.1, 0.1);
        let hot = crate::renorm::solve_eta_boson(0.1, 0.1, 0.1, 1e-12).unwrap();
        let a_hot = hot.effective_tunneling;
        let g_cold = gamma_spin(spin.effective_tunneling, 0.1, spin.effective_tunneling);
        assert!(crate::spectral::gamma_boson(a_hot, 0.1, a_hot, 0.1) / a_hot > g_cold / spin.effective_tunneling);
        assert!(population_boson(0.0, 0.2, &hot).is_err());
        // No positive fixed point survives at T = 0.2.
        assert!(crate::renorm::solve_eta_boson(0.1, 0.1, 0.2, 1e-12).unwrap().localized);
    }

    #[test]
    fn boson_population_matches_spin_at_zero_temperature() {
        let spin = sys(0.1, 0.1);
        let cold = crate::renorm::solve_eta_boson(0.1, 0.1, 0.0, 1e-12).unwrap();
        for t in [0.0, 5.0, 60.0, 400.0] {
            let a = population_difference(t, &spin).unwrap();
            let b = population_boson(t, 0.0, &cold).unwrap();
            assert!((a - b).abs() < 1e-6, "{t}: {a} {b}");
        }
    }

    #[test]
    fn grids() {
        let g = scaled_time_grid(0.05, 20.0, 5);
        assert_eq!(g.len(), 5);
        assert!((g[4] - 400.0).abs() < 1e-12);
        assert_eq!(time_grid(2.0, 3), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn tanh_slope_limits() {
        let (a, t) = (0.085, 0.05);
        let exact = |w: f64| ((w / (2.0 * t)).tanh() - (a / (2.0 * t)).tanh()) / (w - a);
        for w in [0.01, 0.08, 0.3] {
            assert!((tanh_slope(w, a, t) - exact(w)).abs() < 1e-12);
        }
        let deriv = 1.0 / ((a / (2.0 * t)).cosh().powi(2) * 2.0 * t);
        assert!((tanh_slope(a, a, t) - deriv).abs() < 1e-12);
    }
}
