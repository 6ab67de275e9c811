//! Self-consistent tunneling renormalization η.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ResultExt};
use crate::model::{check_alpha, check_delta, check_temperature, thermal_occupation_weight, BathKind, ModelParams};
use crate::numerics::{fixed_point, integrate_adaptive, FixedPointOptions, QuadratureSpec};

/// Thermal boson exponents beyond this drive η_B to zero.
pub const BOSON_EXPONENT_FLOOR: f64 = 50.0;

/// Smallest η still treated as delocalized.
const ETA_UNDERFLOW: f64 = 1e-280;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenormalizedSystem {
    pub params: ModelParams,
    pub eta: f64,
    /// ηΔ in units of ωc.
    pub effective_tunneling: f64,
    /// Final `|η − F(η)|`.
    pub residual: f64,
    pub iterations: usize,
    /// η = 0: the tunneling is fully suppressed.
    pub localized: bool,
}

impl RenormalizedSystem {
    pub fn eta_delta(&self) -> f64 {
        self.effective_tunneling
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha
    }

    pub fn delta(&self) -> f64 {
        self.params.delta
    }

    fn localized(params: ModelParams) -> Self {
        Self { params, eta: 0.0, effective_tunneling: 0.0, residual: 0.0, iterations: 0, localized: true }
    }

    fn free(params: ModelParams) -> Self {
        Self { params, eta: 1.0, effective_tunneling: params.delta, residual: 0.0, iterations: 0, localized: false }
    }

    /// Fails with a domain error when η = 0.
    pub fn require_delocalized(&self) -> Result<()> {
        if self.localized {
            Err(Error::Domain {
                quantity: "eta",
                value: 0.0,
                reason: "the system is localized, no renormalized tunneling",
            })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundEnergy {
    /// Upper bound on E_g/ωc.
    pub value: f64,
}

fn default_options(tol: f64) -> FixedPointOptions {
    FixedPointOptions { tol, relative: true, ..FixedPointOptions::default() }
}

/// `ln F(η)` for the spin bath, where `F(η) = (ηΔ/(1+ηΔ))^α · e^{α/(1+ηΔ)}`.
pub fn spin_log_map(eta: f64, delta: f64, alpha: f64) -> f64 {
    let a = eta * delta;
    alpha * (a.ln() - a.ln_1p() + 1.0 / (1.0 + a))
}

/// `(eΔ)^{α/(1−α)}`, the Δ ≪ ωc solution of the spin-bath equation.
pub fn scaling_limit_eta(delta: f64, alpha: f64) -> f64 {
    (std::f64::consts::E * delta).powf(alpha / (1.0 - alpha))
}

pub fn solve_eta_spin(delta: f64, alpha: f64, tol: f64) -> Result<RenormalizedSystem> {
    solve_eta_spin_with(delta, alpha, &default_options(tol))
}

pub fn solve_eta_spin_with(delta: f64, alpha: f64, opts: &FixedPointOptions) -> Result<RenormalizedSystem> {
    let params = ModelParams::spin(delta, alpha)?;
    if alpha == 0.0 {
        return Ok(RenormalizedSystem::free(params));
    }
    if alpha >= 1.0 {
        return Ok(RenormalizedSystem::localized(params));
    }
    let map = |eta: f64| spin_log_map(eta, delta, alpha).exp();

    // x − F(x) is negative for small x whenever α < 1; find such a point
    // to bracket the positive solution for the fallback.
    let mut lo = scaling_limit_eta(delta, alpha).min(0.5);
    while lo > ETA_UNDERFLOW && lo >= map(lo) {
        lo *= 1e-3;
    }
    if lo <= ETA_UNDERFLOW {
        return Ok(RenormalizedSystem::localized(params));
    }
    let opts = FixedPointOptions { bracket: Some((lo, 1.0)), ..opts.clone() };
    let fp = fixed_point(map, 1.0, &opts).context(|| format!("solving η for delta = {delta}, alpha = {alpha}"))?;
    if fp.x <= ETA_UNDERFLOW {
        return Ok(RenormalizedSystem::localized(params));
    }
    Ok(RenormalizedSystem {
        params,
        eta: fp.x,
        effective_tunneling: fp.x * delta,
        residual: fp.residual,
        iterations: fp.iterations,
        localized: false,
    })
}

/// `∫₀¹ x·2n(x)/(x+a)² dx`, the thermal part of the boson exponent per unit α.
pub fn boson_thermal_exponent(eta_delta: f64, temperature: f64) -> Result<f64> {
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let spec = QuadratureSpec::scalar().with_breakpoints_in(0.0, 1.0, [eta_delta, temperature, 10.0 * temperature]);
    let q =
        integrate_adaptive(|x| thermal_occupation_weight(x, temperature) / (x + eta_delta).powi(2), 0.0, 1.0, &spec)?;
    Ok(q.value)
}

pub fn solve_eta_boson(delta: f64, alpha: f64, temperature: f64, tol: f64) -> Result<RenormalizedSystem> {
    solve_eta_boson_with(delta, alpha, temperature, &default_options(tol))
}

/// Boson-bath η_B. Identical to the spin bath at T = 0.
pub fn solve_eta_boson_with(
    delta: f64,
    alpha: f64,
    temperature: f64,
    opts: &FixedPointOptions,
) -> Result<RenormalizedSystem> {
    check_temperature(temperature)?;
    let mut sys = solve_eta_spin_with(delta, alpha, opts)?;
    sys.params.bath = BathKind::Boson;
    sys.params.temperature = temperature;
    if temperature == 0.0 || alpha == 0.0 || sys.localized {
        return Ok(sys);
    }

    // The thermal term only lowers F, so iterate down from the spin solution.
    // Iterates stay above the largest fixed point, so reaching the floor means
    // there is none and the iteration can stop.
    let floor_hit = std::cell::Cell::new(false);
    let failure = std::cell::RefCell::new(None);
    let map = |eta: f64| {
        let mut exponent = -spin_log_map(eta, delta, alpha);
        if exponent <= BOSON_EXPONENT_FLOOR {
            match boson_thermal_exponent(eta * delta, temperature) {
                Ok(v) => exponent += alpha * v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    return f64::NAN;
                }
            }
        }
        if exponent > BOSON_EXPONENT_FLOOR {
            floor_hit.set(true);
            f64::NAN
        } else {
            (-exponent).exp()
        }
    };
    let opts = FixedPointOptions { bracket: None, ..opts.clone() };
    let outcome = fixed_point(&map, sys.eta, &opts);
    if let Some(e) = failure.into_inner() {
        return Err(e).context(|| format!("thermal exponent for delta = {delta}, alpha = {alpha}, T = {temperature}"));
    }
    match outcome {
        Ok(fp) if fp.x > ETA_UNDERFLOW => Ok(RenormalizedSystem {
            eta: fp.x,
            effective_tunneling: fp.x * delta,
            residual: fp.residual,
            iterations: fp.iterations,
            ..sys
        }),
        Ok(_) => Ok(RenormalizedSystem::localized(sys.params)),
        Err(_) if floor_hit.get() => Ok(RenormalizedSystem::localized(sys.params)),
        Err(e) => Err(e).context(|| format!("solving η_B for delta = {delta}, alpha = {alpha}, T = {temperature}")),
    }
}

/// Solve η for the bath named in `params`.
pub fn solve(params: &ModelParams, tol: f64) -> Result<RenormalizedSystem> {
    params.validate()?;
    match params.bath {
        BathKind::Spin => {
            let mut sys = solve_eta_spin(params.delta, params.alpha, tol)?;
            sys.params.temperature = params.temperature;
            Ok(sys)
        }
        BathKind::Boson => solve_eta_boson(params.delta, params.alpha, params.temperature, tol),
    }
}

/// Dressed bath frequency `[ω(ω+ηΔ) + g²] / √((ω+ηΔ)² + g²)`.
pub fn renormalized_frequency(omega: f64, g2: f64, eta_delta: f64) -> f64 {
    let s = omega + eta_delta;
    (omega * s + g2) / (s * s + g2).sqrt()
}

/// `−ηΔ/2 − (α/2)/(1+ηΔ)`, an upper bound on the ground-state energy.
pub fn ground_state_energy(delta: f64, alpha: f64) -> Result<GroundEnergy> {
    check_delta(delta)?;
    check_alpha(alpha)?;
    let sys = solve_eta_spin(delta, alpha, 1e-12)?;
    Ok(ground_state_energy_of(&sys))
}

pub fn ground_state_energy_of(sys: &RenormalizedSystem) -> GroundEnergy {
    let a = sys.effective_tunneling;
    GroundEnergy { value: -0.5 * a - 0.5 * sys.params.alpha / (1.0 + a) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{continuum_sum, discrete_bath};

    #[test]
    fn zero_coupling_is_free() {
        let s = solve_eta_spin(0.37, 0.0, 1e-10).unwrap();
        assert_eq!(s.eta, 1.0);
        assert_eq!(s.effective_tunneling, 0.37);
    }

    #[test]
    fn residual_is_self_consistent() {
        let s = solve_eta_spin(0.1, 0.1, 1e-10).unwrap();
        let image = spin_log_map(s.eta, 0.1, 0.1).exp();
        assert!((s.eta - image).abs() <= 1e-10 * s.eta);
        assert!(s.residual <= 1e-10 * s.eta);
        assert!((s.eta - 0.850_015_259_4).abs() < 1e-9);
    }

    #[test]
    fn closed_form_matches_continuum_integral() {
        // η = exp(−α∫₀¹ x/(x+ηΔ)² dx), integrated independently
        let s = solve_eta_spin(0.2, 0.3, 1e-12).unwrap();
        let a = s.effective_tunneling;
        let q = continuum_sum(|w, g2| 0.5 * g2 / (w + a).powi(2), 0.3, &QuadratureSpec::scalar()).unwrap();
        assert!((s.eta - (-q.value).exp()).abs() < 1e-9);
    }

    #[test]
    fn discrete_product_form_converges() {
        // η = exp(−½ Σ ln[1 + g²/(ω+ηΔ)²]) on a finite bath
        let (delta, alpha) = (0.1, 0.2);
        let s = solve_eta_spin(delta, alpha, 1e-12).unwrap();
        let a = s.effective_tunneling;
        let bath = discrete_bath(200_000, alpha);
        let sum: f64 = bath.iter().map(|(w, g2)| (g2 / (w + a).powi(2)).ln_1p()).sum();
        assert!(((-0.5 * sum).exp() / s.eta - 1.0).abs() < 1e-3);
    }

    #[test]
    fn localized_regime_is_tagged() {
        let s = solve_eta_spin(0.1, 1.2, 1e-10).unwrap();
        assert!(s.localized);
        assert_eq!(s.eta, 0.0);
        assert!(s.require_delocalized().is_err());
    }

    #[test]
    fn scaling_limit() {
        for alpha in [0.1, 0.3, 0.5] {
            let s = solve_eta_spin(1e-3, alpha, 1e-12).unwrap();
            let closed = scaling_limit_eta(1e-3, alpha);
            assert!((s.eta / closed - 1.0).abs() < 1e-2, "alpha {alpha}");
        }
    }

    #[test]
    fn boson_at_zero_temperature_is_bitwise_spin() {
        for &(d, a) in &[(0.1, 0.1), (0.05, 0.4), (0.3, 0.02)] {
            let s = solve_eta_spin(d, a, 1e-10).unwrap();
            let b = solve_eta_boson(d, a, 0.0, 1e-10).unwrap();
            assert_eq!(s.eta.to_bits(), b.eta.to_bits());
        }
    }

    #[test]
    fn boson_eta_decreases_with_temperature() {
        let spin = solve_eta_spin(0.1, 0.1, 1e-10).unwrap().eta;
        let mut last = spin;
        for t in [0.01, 0.05, 0.1] {
            let b = solve_eta_boson(0.1, 0.1, t, 1e-10).unwrap();
            assert!(b.eta < last, "T = {t}");
            last = b.eta;
        }
        assert!((solve_eta_boson(0.1, 0.1, 0.05, 1e-10).unwrap().eta - 0.8026).abs() < 1e-3);
    }

    #[test]
    fn boson_hot_bath_localizes() {
        let b = solve_eta_boson(0.1, 0.3, 1.0, 1e-10).unwrap();
        assert!(b.localized);
        assert_eq!(solve_eta_boson(0.1, 0.0, 1.0, 1e-10).unwrap().eta, 1.0);
    }

    #[test]
    fn frequency_renormalization() {
        assert_eq!(renormalized_frequency(0.5, 0.0, 0.1), 0.5);
        assert!((renormalized_frequency(0.5, 0.01, 0.1) - 0.31 / 0.37f64.sqrt()).abs() < 1e-15);
        let g2: f64 = 0.01;
        let at_zero = renormalized_frequency(0.0, g2, 0.1);
        assert!((at_zero - g2 / (0.01 + g2).sqrt()).abs() < 1e-15);
        assert!((renormalized_frequency(1e-12, g2, 0.1) - at_zero).abs() < 1e-11);
    }

    #[test]
    fn ground_energy() {
        assert!((ground_state_energy(0.1, 0.0).unwrap().value + 0.05).abs() < 1e-15);
        assert!((ground_state_energy(1e-12, 0.3).unwrap().value + 0.15).abs() < 1e-6);
    }

    #[test]
    fn ground_energy_from_discrete_frequency_shifts() {
        // −ηΔ/2 − ½ Σ (ω′ − ω) on a large finite bath
        let (delta, alpha) = (0.1, 0.1);
        let s = solve_eta_spin(delta, alpha, 1e-12).unwrap();
        let a = s.effective_tunneling;
        let shift: f64 =
            discrete_bath(100_000, alpha).iter().map(|&(w, g2)| renormalized_frequency(w, g2, a) - w).sum();
        let direct = -0.5 * a - 0.5 * shift;
        let e = ground_state_energy(delta, alpha).unwrap().value;
        assert!((direct - e).abs() < 1e-4 * e.abs());
        assert!(e <= -0.5 * a);
    }
}
