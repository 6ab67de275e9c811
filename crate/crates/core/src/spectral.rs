//! Second-order self-energy: level shift R(ω) and decay rate γ(ω).

use std::f64::consts::PI;

use crate::error::{Error, Result, ResultExt};
use crate::model::{omega_coth, thermal_occupation_weight, BathKind};
use crate::numerics::roots::find_root_with_values;
use crate::numerics::{integrate_principal_value, QuadratureSpec};
use crate::renorm::RenormalizedSystem;

/// Below this frequency `r_spin` uses its two-term expansion.
const SERIES_BELOW: f64 = 1e-8;

fn check_below_cutoff(omega: f64) -> Result<()> {
    if (0.0..1.0).contains(&omega) {
        Ok(())
    } else {
        Err(Error::Domain {
            quantity: "omega",
            value: omega,
            reason: "level shift is defined on [0, 1); it diverges logarithmically at the cutoff",
        })
    }
}

/// Spin-bath level shift
/// `R(ω) = −2α(ηΔ)²/(ω+ηΔ) · {1/(1+ηΔ) − ω/(ω+ηΔ)·ln[ω(1+ηΔ)/(ηΔ(1−ω))]}`.
pub fn r_spin(omega: f64, alpha: f64, eta_delta: f64) -> Result<f64> {
    check_below_cutoff(omega)?;
    let a = eta_delta;
    if alpha == 0.0 {
        return Ok(0.0);
    }
    if omega < SERIES_BELOW {
        let r0 = -2.0 * alpha * a / (1.0 + a);
        if omega == 0.0 {
            return Ok(r0);
        }
        let log = (omega * (1.0 + a) / a).ln();
        return Ok(r0 + 2.0 * alpha * omega * (1.0 / (1.0 + a) + log));
    }
    let s = omega + a;
    let log = (omega / a).ln() + a.ln_1p() - (-omega).ln_1p();
    Ok(-2.0 * alpha * a * a / s * (1.0 / (1.0 + a) - omega / s * log))
}

/// Spin-bath decay rate `γ(ω) = 2απω(ηΔ)²/(ω+ηΔ)²`, zero outside [0, 1].
pub fn gamma_spin(omega: f64, alpha: f64, eta_delta: f64) -> f64 {
    if !(0.0..=1.0).contains(&omega) {
        return 0.0;
    }
    let a = eta_delta;
    2.0 * alpha * PI * omega * a * a / (omega + a).powi(2)
}

/// Boson-bath decay rate, `γ(ω)·coth(ω/2T)`; tends to `4απT` as ω → 0.
pub fn gamma_boson(omega: f64, alpha: f64, eta_delta: f64, temperature: f64) -> f64 {
    if !(0.0..=1.0).contains(&omega) {
        return 0.0;
    }
    if temperature == 0.0 {
        return gamma_spin(omega, alpha, eta_delta);
    }
    let a = eta_delta;
    if a == 0.0 {
        return 0.0;
    }
    2.0 * alpha * PI * a * a * omega_coth(omega, temperature) / (omega + a).powi(2)
}

/// Boson-bath level shift: the spin-bath form plus the thermal principal value
/// `−PV∫₀¹ 2α(ηΔ)² x·2n(x) / [(x+ηΔ)²(x−ω)] dx`.
pub fn r_boson(omega: f64, alpha: f64, eta_delta: f64, temperature: f64) -> Result<f64> {
    r_boson_with(omega, alpha, eta_delta, temperature, &thermal_shift_spec())
}

fn thermal_shift_spec() -> QuadratureSpec {
    QuadratureSpec::scalar().with_tolerances(1e-8, 1e-10)
}

pub fn r_boson_with(omega: f64, alpha: f64, eta_delta: f64, temperature: f64, spec: &QuadratureSpec) -> Result<f64> {
    let zero_t = r_spin(omega, alpha, eta_delta)?;
    if temperature == 0.0 || alpha == 0.0 {
        return Ok(zero_t);
    }
    if omega == 0.0 {
        return Err(Error::Domain {
            quantity: "omega",
            value: omega,
            reason: "thermal level shift diverges logarithmically at ω = 0 for T > 0",
        });
    }
    let a = eta_delta;
    let h = |x: f64| 2.0 * alpha * a * a * thermal_occupation_weight(x, temperature) / (x + a).powi(2);
    let spec = spec.clone().with_breakpoints_in(0.0, 1.0, [a, temperature, 10.0 * temperature]);
    let pv = integrate_principal_value(h, 0.0, 1.0, omega, &spec)
        .context(|| format!("thermal level shift at omega = {omega}, T = {temperature}"))?;
    Ok(zero_t - pv.value)
}

/// `ηΔ(1 − 2α/(1+ηΔ))`, the distance of `ω − ηΔ − R(ω)` below zero at ω = 0.
pub fn static_gap(alpha: f64, eta_delta: f64) -> f64 {
    eta_delta * (1.0 - 2.0 * alpha / (1.0 + eta_delta))
}

/// Lowest real root of `ω − ηΔ − R(ω)` on (0, 1), or `None` when the
/// spin-bath resonance has no real solution.
pub fn pole_frequency(alpha: f64, eta_delta: f64) -> Result<Option<f64>> {
    if alpha == 0.0 {
        return Ok(Some(eta_delta));
    }
    if !(static_gap(alpha, eta_delta) > 0.0) {
        return Ok(None);
    }
    let g = |w: f64| -> Result<f64> { Ok(w - eta_delta - r_spin(w, alpha, eta_delta)?) };
    let mut grid: Vec<f64> = (1..=12).rev().map(|k| eta_delta * 10f64.powi(-k)).collect();
    grid.extend((1..2000).map(|i| i as f64 / 2000.0));
    grid.sort_by(f64::total_cmp);

    let (mut lo, mut g_lo) = (0.0, g(0.0)?);
    for w in grid {
        let g_w = g(w)?;
        if g_w >= 0.0 {
            let slot = crate::guard::ErrorSlot::default();
            let root = find_root_with_values(slot.wrap(g), lo, w, g_lo, g_w, 1e-15);
            return slot.finish(root).map(Some);
        }
        (lo, g_lo) = (w, g_w);
    }
    Ok(None)
}

/// Level shift and rate entering the spectral weight.
pub trait SelfEnergy: Send + Sync {
    fn level_shift(&self, omega: f64) -> Result<f64>;
    fn rate(&self, omega: f64) -> f64;
    fn eta_delta(&self) -> f64;
    fn alpha(&self) -> f64;
    fn bath(&self) -> BathKind;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinSelfEnergy {
    pub alpha: f64,
    pub eta_delta: f64,
}

impl SpinSelfEnergy {
    pub fn new(alpha: f64, eta_delta: f64) -> Self {
        Self { alpha, eta_delta }
    }

    pub fn from_system(sys: &RenormalizedSystem) -> Self {
        Self::new(sys.params.alpha, sys.effective_tunneling)
    }
}

impl SelfEnergy for SpinSelfEnergy {
    fn level_shift(&self, omega: f64) -> Result<f64> {
        r_spin(omega, self.alpha, self.eta_delta)
    }

    fn rate(&self, omega: f64) -> f64 {
        gamma_spin(omega, self.alpha, self.eta_delta)
    }

    fn eta_delta(&self) -> f64 {
        self.eta_delta
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn bath(&self) -> BathKind {
        BathKind::Spin
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BosonSelfEnergy {
    pub alpha: f64,
    pub eta_delta: f64,
    pub temperature: f64,
    pub spec: QuadratureSpec,
}

impl BosonSelfEnergy {
    pub fn new(alpha: f64, eta_delta: f64, temperature: f64) -> Self {
        Self { alpha, eta_delta, temperature, spec: thermal_shift_spec() }
    }

    pub fn from_system(sys: &RenormalizedSystem) -> Self {
        Self::new(sys.params.alpha, sys.effective_tunneling, sys.params.temperature)
    }
}

impl SelfEnergy for BosonSelfEnergy {
    fn level_shift(&self, omega: f64) -> Result<f64> {
        r_boson_with(omega, self.alpha, self.eta_delta, self.temperature, &self.spec)
    }

    fn rate(&self, omega: f64) -> f64 {
        gamma_boson(omega, self.alpha, self.eta_delta, self.temperature)
    }

    fn eta_delta(&self) -> f64 {
        self.eta_delta
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn bath(&self) -> BathKind {
        BathKind::Boson
    }
}

impl<S: SelfEnergy + ?Sized> SelfEnergy for &S {
    fn level_shift(&self, omega: f64) -> Result<f64> {
        (**self).level_shift(omega)
    }

    fn rate(&self, omega: f64) -> f64 {
        (**self).rate(omega)
    }

    fn eta_delta(&self) -> f64 {
        (**self).eta_delta()
    }

    fn alpha(&self) -> f64 {
        (**self).alpha()
    }

    fn bath(&self) -> BathKind {
        (**self).bath()
    }
}
