//! Spectral weight C(ω), the correlation function, susceptibilities and the
//! Shiba-relation check.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ResultExt};
use crate::guard::ErrorSlot;
use crate::model::{check_delta, spectral_density, BathKind};
use crate::numerics::quadrature::interior_points;
use crate::numerics::richardson::{limit_linear, limit_log_linear};
use crate::numerics::{integrate_adaptive, FilonOptions, FilonRule, Quadrature, QuadratureSpec};
use crate::renorm::{solve_eta_spin, RenormalizedSystem};
use crate::spectral::{pole_frequency, static_gap, SelfEnergy, SpinSelfEnergy};

/// Largest `ηΔ·t` evaluated by direct adaptive quadrature; beyond it the
/// sampled Filon rule takes over.
pub const DIRECT_PHASE_LIMIT: f64 = 30.0;

/// The weight `C(ω) = (1/π) γ(ω) / ([ω − ηΔ − R(ω)]² + γ(ω)²)` on [0, 1).
pub struct SpectralWeight<S> {
    se: S,
    peak: f64,
    width: f64,
    breakpoints: Vec<f64>,
    rule: OnceLock<std::result::Result<FilonRule, Error>>,
    rule_tol: f64,
}

impl<S: SelfEnergy> SpectralWeight<S> {
    /// `rule_tol` bounds the interpolation error of the sampled weight used
    /// for large-time transforms.
    pub fn new(se: S, rule_tol: f64) -> Result<Self> {
        let a = se.eta_delta();
        if !(a > 0.0) {
            return Err(Error::Domain {
                quantity: "eta_delta",
                value: a,
                reason: "spectral weight needs a positive renormalized tunneling",
            });
        }
        let peak = pole_frequency(se.alpha(), a)?.unwrap_or(a);
        let width = se.rate(peak).max(1e-9 * peak);
        let mut points = vec![a];
        for k in [0.0, 0.25, 1.0, 4.0, 16.0, 64.0, 256.0] {
            points.push(peak - k * width);
            points.push(peak + k * width);
        }
        points.extend((1..=12).map(|j| peak * 10f64.powi(-j)));
        points.extend((1..=6).map(|j| 1.0 - 10f64.powi(-j)));
        if se.bath() == BathKind::Boson {
            points.extend(boson_scales(&se));
        }
        let breakpoints = interior_points(0.0, 1.0, points);
        Ok(Self { se, peak, width, breakpoints, rule: OnceLock::new(), rule_tol })
    }

    pub fn self_energy(&self) -> &S {
        &self.se
    }

    /// Resonance position (the pole if one exists, ηΔ otherwise).
    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn density(&self, omega: f64) -> Result<f64> {
        let g = self.se.rate(omega);
        let d = omega - self.se.eta_delta() - self.se.level_shift(omega)?;
        Ok(g / (PI * (d * d + g * g)))
    }

    fn spec(&self, base: &QuadratureSpec) -> QuadratureSpec {
        base.clone().with_breakpoints_in(0.0, 1.0, self.breakpoints.iter().copied())
    }

    /// `∫₀¹ w(ω)·C(ω) dω` by adaptive quadrature.
    pub fn integrate<W: Fn(f64) -> f64>(&self, weight: W, spec: &QuadratureSpec) -> Result<Quadrature> {
        let slot = ErrorSlot::default();
        let q = integrate_adaptive(slot.wrap(|w| Ok(weight(w) * self.density(w)?)), 0.0, 1.0, &self.spec(spec));
        slot.finish(q)
    }

    /// Sampled rule for `C(ω)`, built on first use.
    pub fn rule(&self) -> Result<&FilonRule> {
        self.rule
            .get_or_init(|| {
                let slot = ErrorSlot::default();
                let opts = FilonOptions { tol: self.rule_tol, ..FilonOptions::default() };
                let rule = FilonRule::build(slot.wrap(|w| self.density(w)), 0.0, 1.0, &self.breakpoints, &opts);
                slot.finish(rule)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `∫₀¹ C(ω) e^{iωt} dω` from the sampled rule.
    pub fn fourier(&self, t: f64) -> Result<(Complex64, f64)> {
        let rule = self.rule()?;
        Ok((rule.fourier(t), rule.error_bound()))
    }

    /// `∫₀¹ C(ω) cos(ωt) dω`: direct quadrature for moderate phase (spin
    /// bath), the sampled rule otherwise.
    pub fn cos_transform(&self, t: f64, spec: &QuadratureSpec) -> Result<Quadrature> {
        if self.se.bath() == BathKind::Spin && self.se.eta_delta() * t <= DIRECT_PHASE_LIMIT {
            return self.integrate(|w| (w * t).cos(), spec);
        }
        let (z, err) = self.fourier(t)?;
        Ok(Quadrature { value: z.re, error: err, subdivisions: self.rule()?.panel_count() })
    }

    /// `∫₀¹ C(ω) sin(ωt) dω`, same switching as [`Self::cos_transform`].
    pub fn sin_transform(&self, t: f64, spec: &QuadratureSpec) -> Result<Quadrature> {
        if self.se.bath() == BathKind::Spin && self.se.eta_delta() * t <= DIRECT_PHASE_LIMIT {
            return self.integrate(|w| (w * t).sin(), spec);
        }
        let (z, err) = self.fourier(t)?;
        Ok(Quadrature { value: z.im, error: err, subdivisions: self.rule()?.panel_count() })
    }
}

fn boson_scales<S: SelfEnergy>(se: &S) -> Vec<f64> {
    // The thermal shift varies on the scale T; probe it through γ_B(0) = 4απT.
    let t = se.rate(0.0) / (4.0 * PI * se.alpha().max(f64::MIN_POSITIVE));
    if t > 0.0 {
        vec![0.1 * t, t, 10.0 * t]
    } else {
        Vec::new()
    }
}

/// Default tolerance of the sampled weight.
pub const RULE_TOL: f64 = 1e-9;

fn spin_weight(sys: &RenormalizedSystem) -> Result<SpectralWeight<SpinSelfEnergy>> {
    sys.require_delocalized()?;
    SpectralWeight::new(SpinSelfEnergy::from_system(sys), RULE_TOL)
}

/// `C(ω)` for a solved spin-bath system.
pub fn spectral_weight_c(omega: f64, sys: &RenormalizedSystem) -> Result<f64> {
    sys.require_delocalized()?;
    let se = SpinSelfEnergy::from_system(sys);
    let g = se.rate(omega);
    let d = omega - se.eta_delta - se.level_shift(omega)?;
    Ok(g / (PI * (d * d + g * g)))
}

/// `C(t) = ∫₀¹ C(ω) cos(ωt) dω`; for α = 0 the free result `cos(Δt)`.
pub fn correlation_function(t: f64, sys: &RenormalizedSystem) -> Result<f64> {
    if sys.params.alpha == 0.0 {
        return Ok((sys.params.delta * t).cos());
    }
    Ok(spin_weight(sys)?.cos_transform(t, &QuadratureSpec::series())?.value)
}

/// χ″(ω), odd in ω, equal to `π·C(|ω|)·sgn(ω)`.
pub fn susceptibility_im(omega: f64, sys: &RenormalizedSystem) -> Result<f64> {
    if omega.abs() >= 1.0 {
        return Err(Error::Domain { quantity: "omega", value: omega, reason: "beyond the cutoff" });
    }
    if omega == 0.0 {
        return Ok(0.0);
    }
    Ok(PI * spectral_weight_c(omega.abs(), sys)? * omega.signum())
}

/// χ0 = (2/π)∫₀¹ χ″(ω)/ω dω = 2∫₀¹ C(ω)/ω dω.
pub fn static_susceptibility(sys: &RenormalizedSystem) -> Result<f64> {
    let weight = spin_weight(sys)?;
    Ok(2.0 * static_half(&weight, &QuadratureSpec::scalar())?)
}

fn static_half<S: SelfEnergy>(weight: &SpectralWeight<S>, spec: &QuadratureSpec) -> Result<f64> {
    Ok(weight.integrate(|w| 1.0 / w, spec).context(|| "static susceptibility".to_string())?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShibaReport {
    pub delta: f64,
    pub alpha: f64,
    pub eta: f64,
    pub chi0_half: f64,
    /// `lim_{ω→0} C(ω)/J(ω)`.
    pub c_over_j_limit: f64,
    /// `c_over_j_limit / chi0_half²`.
    pub ratio: f64,
    /// `∫₀¹ C(ω) dω`, i.e. C(t = 0).
    pub sum_rule: f64,
    pub in_coherent_regime: bool,
}

impl ShibaReport {
    pub const CSV_HEADER: &'static str = "delta,alpha,chi0_half,c_over_j,ratio,sum_rule";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.delta, self.alpha, self.chi0_half, self.c_over_j_limit, self.ratio, self.sum_rule
        )
    }
}

/// One published row: (Δ, α, χ0/2, C/J limit, ratio, C(t=0)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub delta: f64,
    pub alpha: f64,
    pub chi0_half: f64,
    pub c_over_j: f64,
    pub ratio: f64,
    pub sum_rule: f64,
}

const fn row(delta: f64, alpha: f64, chi0_half: f64, c_over_j: f64, ratio: f64, sum_rule: f64) -> TableRow {
    TableRow { delta, alpha, chi0_half, c_over_j, ratio, sum_rule }
}

/// Reference Shiba-relation values for the Ohmic spin bath.
pub const REFERENCE_TABLE: [TableRow; 13] = [
    row(0.01, 0.1, 186.5516, 34801.53, 1.0, 1.0),
    row(0.01, 0.3, 1170.505, 1370082.0, 1.0, 1.0),
    row(0.05, 0.01, 20.82378, 433.6306, 1.0, 1.0),
    row(0.05, 0.2, 54.64956, 2986.575, 1.0, 1.0),
    row(0.05, 0.3, 116.1330, 13486.87, 0.9999997, 1.0),
    row(0.05, 0.4, 366.0538, 133995.4, 1.0, 1.0),
    row(0.1, 0.1, 14.42314, 208.0271, 0.9999999, 0.9999992),
    row(0.1, 0.2, 22.86603, 522.8555, 1.0, 1.0),
    row(0.1, 0.3, 42.4048, 1798.168, 1.0000005, 1.0),
    row(0.1, 0.4, 108.7866, 11834.51, 0.9999978, 1.0),
    row(0.1, 0.5, 1536.489, 2360800.0, 1.0, 1.0),
    row(0.2, 0.5, 130.1218, 16931.70, 1.000001, 1.000003),
    row(0.3, 0.5, 37.01318, 1369.976, 1.0, 0.9999995),
];

/// Smallest frequency used on the extrapolation ladder.
const LADDER_FLOOR: f64 = 1e-12;

/// `lim_{ω→0} C(ω)/J(ω)` from a geometric ladder.
///
/// The ratio behaves as `L + ω(a ln ω + b) + O(ω² ln² ω)`; the top rung starts
/// at 1e-4 and moves down until the first-order correction is small against
/// the static gap, so the neglected second-order term stays below ~1e-8.
pub fn c_over_j_limit<S: SelfEnergy>(weight: &SpectralWeight<S>) -> Result<f64> {
    let alpha = weight.self_energy().alpha();
    let gap = static_gap(alpha, weight.self_energy().eta_delta()).abs();
    let mut top = 1e-4;
    while top > LADDER_FLOOR * 1e3 && 2.0 * alpha * top * top.ln().abs() > 1e-4 * gap {
        top /= 10.0;
    }
    let ladder: Vec<f64> = (0..4).map(|k| top * 10f64.powi(-k)).collect();
    let samples =
        ladder.iter().map(|&w| Ok((w, weight.density(w)? / spectral_density(w, alpha)))).collect::<Result<Vec<_>>>()?;
    let first = limit_log_linear(&[samples[0], samples[1], samples[2]])?;
    let second = limit_log_linear(&[samples[1], samples[2], samples[3]])?;
    let crude = limit_linear(samples[2], samples[3]);
    let settled = (first - second).abs() <= 1e-7 * second.abs() && (crude - second).abs() <= 1e-3 * second.abs();
    if !settled || !second.is_finite() {
        return Err(Error::Extrapolation { samples });
    }
    Ok(second)
}

/// Static susceptibility, Shiba limit and sum rule for the spin bath.
pub fn shiba_check(delta: f64, alpha: f64) -> Result<ShibaReport> {
    check_delta(delta)?;
    let sys = solve_eta_spin(delta, alpha, 1e-12)?;
    sys.require_delocalized()?;
    shiba_check_with(&sys, SpinSelfEnergy::from_system(&sys), &QuadratureSpec::scalar())
}

/// [`shiba_check`] for an arbitrary self-energy (used for fault injection).
pub fn shiba_check_with<S: SelfEnergy>(sys: &RenormalizedSystem, se: S, spec: &QuadratureSpec) -> Result<ShibaReport> {
    if sys.params.alpha == 0.0 {
        return Err(Error::Domain {
            quantity: "alpha",
            value: 0.0,
            reason: "the Shiba limit C(ω)/J(ω) is undefined without coupling",
        });
    }
    let ctx = || format!("Shiba check at delta = {}, alpha = {}", sys.params.delta, sys.params.alpha);
    let weight = SpectralWeight::new(se, RULE_TOL).context(ctx)?;
    let chi0_half = static_half(&weight, spec).context(ctx)?;
    let sum_rule = weight.integrate(|_| 1.0, spec).context(ctx)?.value;
    let c_over_j_limit = c_over_j_limit(&weight).context(ctx)?;
    Ok(ShibaReport {
        delta: sys.params.delta,
        alpha: sys.params.alpha,
        eta: sys.eta,
        chi0_half,
        c_over_j_limit,
        ratio: c_over_j_limit / (chi0_half * chi0_half),
        sum_rule,
        in_coherent_regime: static_gap(sys.params.alpha, sys.effective_tunneling) > 0.0,
    })
}

/// All reference rows, computed in parallel, in table order.
pub fn shiba_table() -> Vec<Result<ShibaReport>> {
    use rayon::prelude::*;
    REFERENCE_TABLE.par_iter().map(|r| shiba_check(r.delta, r.alpha)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(delta: f64, alpha: f64) -> RenormalizedSystem {
        solve_eta_spin(delta, alpha, 1e-12).unwrap()
    }

    #[test]
    fn weight_is_normalized() {
        let s = sys(0.1, 0.1);
        let w = spin_weight(&s).unwrap();
        let total = w.integrate(|_| 1.0, &QuadratureSpec::scalar()).unwrap().value;
        assert!((total - 1.0).abs() < 1e-5);
    }

    #[test]
    fn weak_coupling_concentrates_at_delta() {
        let delta = 0.1;
        let s = sys(delta, 1e-4);
        let w = spin_weight(&s).unwrap();
        let near = w.integrate(|x| if (x - delta).abs() < 1e-3 { 1.0 } else { 0.0 }, &QuadratureSpec::scalar());
        let near = near.unwrap().value;
        assert!(near > 0.95, "{near}");
    }

    #[test]
    fn small_frequency_ratio_is_inverse_gap_squared() {
        let s = sys(0.1, 0.1);
        let w = spin_weight(&s).unwrap();
        let limit = c_over_j_limit(&w).unwrap();
        let d0 = static_gap(0.1, s.effective_tunneling);
        assert!((limit * d0 * d0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn susceptibility_is_odd() {
        let s = sys(0.1, 0.2);
        for w in [0.01, 0.05, 0.3, 0.7] {
            let p = susceptibility_im(w, &s).unwrap();
            assert!(p > 0.0);
            assert_eq!(susceptibility_im(-w, &s).unwrap(), -p);
            assert!((p - PI * spectral_weight_c(w, &s).unwrap()).abs() < 1e-15);
        }
        assert!(susceptibility_im(1.2, &s).is_err());
    }

    #[test]
    fn weak_coupling_static_susceptibility() {
        let chi0 = static_susceptibility(&sys(0.1, 1e-6)).unwrap();
        assert!((chi0 / 2.0 - 10.0).abs() < 0.1);
    }

    #[test]
    fn correlation_equals_free_limit_without_coupling() {
        let s = sys(0.1, 0.0);
        assert_eq!(correlation_function(3.0, &s).unwrap(), (0.3f64).cos());
    }

    #[test]
    fn direct_and_sampled_transforms_agree() {
        let s = sys(0.1, 0.1);
        let w = spin_weight(&s).unwrap();
        for t in [5.0, 60.0, 200.0] {
            let direct = w.integrate(|x| (x * t).cos(), &QuadratureSpec::series()).unwrap().value;
            let (z, _) = w.fourier(t).unwrap();
            assert!((direct - z.re).abs() < 1e-7, "t = {t}: {direct} vs {}", z.re);
        }
    }

    #[test]
    fn report_row_format() {
        let r = shiba_check(0.1, 0.1).unwrap();
        assert!(r.in_coherent_regime);
        let line = r.csv_row();
        assert_eq!(line.split(',').count(), 6);
        assert!(line.starts_with("1.0000000000000001e-1,1.0000000000000001e-1,"));
        assert!(((r.chi0_half - 14.42314) / 14.42314).abs() < 1e-3);
    }

    #[test]
    fn missing_coupling_is_rejected() {
        assert!(shiba_check(0.1, 0.0).is_err());
    }
}
