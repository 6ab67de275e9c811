//! Model parameters, the Ohmic spectral density and the continuum bath limit.
//!
//! Energies are measured in units of the cutoff ωc, so ωc = 1 throughout.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ResultExt};
use crate::numerics::{integrate_adaptive, Quadrature, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BathKind {
    /// Bath of non-interacting two-level modes.
    #[serde(alias = "spinbath")]
    Spin,
    /// Bath of harmonic oscillators.
    #[serde(alias = "bosonbath")]
    Boson,
}

impl fmt::Display for BathKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BathKind::Spin => "spin",
            BathKind::Boson => "boson",
        })
    }
}

impl std::str::FromStr for BathKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spin" | "spinbath" | "spin-bath" => Ok(BathKind::Spin),
            "boson" | "bosonbath" | "boson-bath" => Ok(BathKind::Boson),
            other => Err(Error::InvalidParameter(format!("unknown bath kind {other:?}, expected spin or boson"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub bath: BathKind,
    /// Bare tunneling Δ/ωc.
    pub delta: f64,
    /// Dimensionless coupling α.
    pub alpha: f64,
    /// T/ωc; zero is the exact ground-state limit.
    #[serde(default)]
    pub temperature: f64,
}

impl ModelParams {
    pub fn new(bath: BathKind, delta: f64, alpha: f64, temperature: f64) -> Result<Self> {
        let p = Self { bath, delta, alpha, temperature };
        p.validate()?;
        Ok(p)
    }

    pub fn spin(delta: f64, alpha: f64) -> Result<Self> {
        Self::new(BathKind::Spin, delta, alpha, 0.0)
    }

    pub fn boson(delta: f64, alpha: f64, temperature: f64) -> Result<Self> {
        Self::new(BathKind::Boson, delta, alpha, temperature)
    }

    pub fn validate(&self) -> Result<()> {
        check_delta(self.delta)?;
        check_alpha(self.alpha)?;
        check_temperature(self.temperature)
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { quantity: "delta", value: delta, reason: "bare tunneling must be positive and finite" })
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { quantity: "alpha", value: alpha, reason: "coupling must be non-negative and finite" })
    }
}

pub(crate) fn check_temperature(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { quantity: "temperature", value: t, reason: "temperature must be non-negative and finite" })
    }
}

/// Ohmic density `J(ω) = 2αω` below the cutoff, zero at and above it.
pub fn spectral_density(omega: f64, alpha: f64) -> f64 {
    if (0.0..1.0).contains(&omega) {
        2.0 * alpha * omega
    } else {
        0.0
    }
}

/// Thermodynamic limit of a mode sum `Σ_l f(ω_l, g_l²)`.
///
/// With a flat density of states ρ0 and `g_l² = 2αω_l/ρ0`, a sum holding one
/// factor of `g_l²` becomes `∫₀¹ f(ω, 2αω) dω`; terms of higher order in
/// `g_l²` vanish as ρ0 → ∞. `f` must therefore be linear in its second
/// argument for the result to be ρ0-independent.
pub fn continuum_sum<F: Fn(f64, f64) -> f64>(f: F, alpha: f64, spec: &QuadratureSpec) -> Result<Quadrature> {
    check_alpha(alpha)?;
    integrate_adaptive(|w| f(w, 2.0 * alpha * w), 0.0, 1.0, spec).context(|| {
        "continuum mode sum: integrand is not integrable on (0, 1], check its behaviour near ω = 0".to_string()
    })
}

/// Discrete bath of `n` modes `ω_l = (l − ½)/n` with `g_l² = 2αω_l/n`,
/// the finite-ρ0 counterpart of [`continuum_sum`].
pub fn discrete_bath(n: usize, alpha: f64) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|l| {
            let w = (l as f64 - 0.5) / n as f64;
            (w, 2.0 * alpha * w / n as f64)
        })
        .collect()
}

/// `x·2n(x) = 2x/(e^{x/T} − 1)`, finite (→ 2T) at x = 0 and zero at T = 0.
pub(crate) fn thermal_occupation_weight(x: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 0.0;
    }
    2.0 * temperature * bernoulli_function(x / temperature)
}

/// `y/(e^y − 1)`, equal to 1 at y = 0.
pub(crate) fn bernoulli_function(y: f64) -> f64 {
    if y.abs() < 1e-8 {
        1.0 - 0.5 * y
    } else if y > 700.0 {
        0.0
    } else {
        y / y.exp_m1()
    }
}

/// `ω·coth(ω/2T)`, which tends to `2T` at ω = 0 and to `|ω|` at T = 0.
pub(crate) fn omega_coth(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        omega.abs()
    } else {
        omega + thermal_occupation_weight(omega, temperature)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_values() {
        assert!((spectral_density(0.5, 0.1) - 0.1).abs() < 1e-16);
        assert_eq!(spectral_density(1.5, 0.1), 0.0);
        assert_eq!(spectral_density(1.0, 0.1), 0.0);
        assert_eq!(spectral_density(0.0, 0.3), 0.0);
        assert_eq!(spectral_density(-0.2, 0.3), 0.0);
    }

    #[test]
    fn continuum_sum_of_couplings() {
        let q = continuum_sum(|_, g2| g2, 0.5, &QuadratureSpec::scalar()).unwrap();
        assert!((q.value - 0.5).abs() < 1e-14);
        let zero = continuum_sum(|_, _| 0.0, 0.5, &QuadratureSpec::scalar()).unwrap();
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn continuum_sum_renormalization_exponent() {
        let a = 0.1;
        let q = continuum_sum(|w, g2| 0.5 * g2 / (w + a).powi(2), 0.1, &QuadratureSpec::scalar()).unwrap();
        let exact = 0.1 * (11f64.ln() - 10.0 / 11.0);
        assert!((q.value - exact).abs() < 1e-12);
    }

    #[test]
    fn discrete_bath_converges_to_continuum() {
        let f = |w: f64, g2: f64| g2 * (3.0 * w).cos() / (w + 0.2);
        let exact = continuum_sum(f, 0.3, &QuadratureSpec::scalar()).unwrap().value;
        let sum: f64 = discrete_bath(1000, 0.3).into_iter().map(|(w, g2)| f(w, g2)).sum();
        assert!(((sum - exact) / exact).abs() < 1e-3);
    }

    #[test]
    fn non_integrable_integrand_names_the_singularity() {
        let e = continuum_sum(|w, _| 1.0 / (w * w), 0.1, &QuadratureSpec::scalar()).unwrap_err();
        assert!(e.to_string().contains("ω = 0"));
        assert!(matches!(e.root(), Error::Integration { .. }));
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::spin(0.1, 0.2).is_ok());
        assert!(ModelParams::spin(0.0, 0.2).is_err());
        assert!(ModelParams::spin(0.1, -0.1).is_err());
        assert!(ModelParams::boson(0.1, 0.1, -1.0).is_err());
        assert!(ModelParams::boson(0.1, 0.1, f64::NAN).is_err());
    }

    #[test]
    fn bath_kind_parsing() {
        assert_eq!("Spin".parse::<BathKind>().unwrap(), BathKind::Spin);
        assert_eq!("boson".parse::<BathKind>().unwrap(), BathKind::Boson);
        assert!("phonon".parse::<BathKind>().is_err());
    }

    #[test]
    fn thermal_weights() {
        assert_eq!(thermal_occupation_weight(0.3, 0.0), 0.0);
        assert!((thermal_occupation_weight(0.0, 0.05) - 0.1).abs() < 1e-15);
        let (w, t) = (0.3, 0.1);
        assert!((omega_coth(w, t) - w / (w / (2.0 * t)).tanh()).abs() < 1e-14);
    }
}
