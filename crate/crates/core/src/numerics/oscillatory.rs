//! Filon-type quadrature for Fourier integrals `∫_a^b f(ω) e^{iωt} dω`.
//!
//! `f` is replaced on each panel by its Chebyshev interpolant, and the product
//! with the exponential is integrated exactly (moment recurrence for large
//! phase per panel, 32-point Gauss-Legendre otherwise). Panels are bisected
//! until the interpolant matches `f` at interleaved check points, so the
//! sampled rule is independent of `t` and can be reused for a whole series.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::quadrature::{integrate_adaptive, interior_points, Quadrature, QuadratureSpec};
use crate::error::{Error, Result};

/// Panel phase `t·h` above which the moment recurrence is used.
const THETA_SWITCH: f64 = 20.0;
const GL_POINTS: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct FilonOptions {
    /// Chebyshev interpolation nodes per panel.
    pub nodes: usize,
    /// Largest accepted interpolation error of `f` on a panel.
    pub tol: f64,
    pub max_panels: usize,
    pub max_depth: usize,
}

impl Default for FilonOptions {
    fn default() -> Self {
        Self { nodes: 10, tol: 1e-10, max_panels: 50_000, max_depth: 48 }
    }
}

#[derive(Debug, Clone)]
struct Panel {
    center: f64,
    half: f64,
    /// Interpolant in the local variable u ∈ [-1, 1], monomial basis.
    monomial: Vec<f64>,
    /// Interpolant sampled at the Gauss-Legendre nodes.
    at_gauss: Vec<f64>,
}

/// Sampled Filon rule for one function on one interval.
#[derive(Debug, Clone)]
pub struct FilonRule {
    panels: Vec<Panel>,
    error_bound: f64,
    evaluations: usize,
}

fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_rule(GL_POINTS))
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                x
            } else {
                p1
            };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn chebyshev_nodes(m: usize) -> Vec<f64> {
    (0..m).map(|j| (PI * (j as f64 + 0.5) / m as f64).cos()).collect()
}

fn chebyshev_coefficients(samples: &[f64], nodes: &[f64]) -> Vec<f64> {
    let m = samples.len();
    (0..m)
        .map(|k| {
            let s: f64 = samples.iter().zip(nodes).map(|(f, u)| f * (k as f64 * u.acos()).cos()).sum();
            let c = 2.0 * s / m as f64;
            if k == 0 {
                0.5 * c
            } else {
                c
            }
        })
        .collect()
}

fn clenshaw(coeffs: &[f64], u: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = 2.0 * u * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + u * b1 - b2
}

fn chebyshev_to_monomial(coeffs: &[f64]) -> Vec<f64> {
    let m = coeffs.len();
    let mut out = vec![0.0; m];
    let mut t_prev = vec![0.0; m];
    let mut t_cur = vec![0.0; m];
    t_prev[0] = 1.0;
    if m > 0 {
        out[0] += coeffs[0];
    }
    if m > 1 {
        t_cur[1] = 1.0;
        out[1] += coeffs[1];
    }
    for k in 2..m {
        let mut t_next = vec![0.0; m];
        for j in 0..m {
            let shifted = if j > 0 { 2.0 * t_cur[j - 1] } else { 0.0 };
            t_next[j] = shifted - t_prev[j];
        }
        for j in 0..m {
            out[j] += coeffs[k] * t_next[j];
        }
        t_prev = std::mem::replace(&mut t_cur, t_next);
    }
    out
}

impl FilonRule {
    /// Sample `f` on `[a, b]`, splitting first at `breakpoints`.
    pub fn build<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breakpoints: &[f64], opts: &FilonOptions) -> Result<Self> {
        if !(b > a) {
            return Err(Error::InvalidParameter(format!("empty Filon interval [{a}, {b}]")));
        }
        if opts.nodes < 2 || !(opts.tol > 0.0) {
            return Err(Error::InvalidParameter("Filon rule needs >= 2 nodes and a positive tolerance".into()));
        }
        let m = opts.nodes;
        let nodes = chebyshev_nodes(m);
        let checks = chebyshev_nodes(m + 1);
        let (gl_nodes, _) = gauss_legendre();

        let mut edges = vec![a];
        edges.extend(interior_points(a, b, breakpoints.iter().copied()));
        edges.push(b);
        let mut stack: Vec<(f64, f64, usize)> = edges.windows(2).rev().map(|w| (w[0], w[1], 0)).collect();

        let mut panels = Vec::new();
        let mut error_bound = 0.0;
        let mut evaluations = 0;
        while let Some((lo, hi, depth)) = stack.pop() {
            let center = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            let samples: Vec<f64> = nodes.iter().map(|u| f(center + half * u)).collect();
            evaluations += m;
            if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
                return Err(Error::Integration {
                    a: lo,
                    b: hi,
                    value: *bad,
                    error: f64::INFINITY,
                    subdivisions: panels.len(),
                });
            }
            let coeffs = chebyshev_coefficients(&samples, &nodes);
            let mut err: f64 = 0.0;
            for u in &checks {
                let exact = f(center + half * u);
                err = err.max((exact - clenshaw(&coeffs, *u)).abs());
            }
            evaluations += m + 1;
            let splittable = depth < opts.max_depth && half > 1e-12 * center.abs().max(1.0);
            if err > opts.tol && splittable {
                if panels.len() + stack.len() + 2 > opts.max_panels {
                    return Err(Error::Integration { a, b, value: f64::NAN, error: err, subdivisions: panels.len() });
                }
                stack.push((center, hi, depth + 1));
                stack.push((lo, center, depth + 1));
                continue;
            }
            error_bound += err * 2.0 * half;
            panels.push(Panel {
                center,
                half,
                at_gauss: gl_nodes.iter().map(|u| clenshaw(&coeffs, *u)).collect(),
                monomial: chebyshev_to_monomial(&coeffs),
            });
        }
        Ok(Self { panels, error_bound, evaluations })
    }

    /// `∫ f(ω) e^{iωt} dω` over the sampled interval.
    pub fn fourier(&self, t: f64) -> Complex64 {
        let (gl_nodes, gl_weights) = gauss_legendre();
        let mut total = Complex64::new(0.0, 0.0);
        for p in &self.panels {
            let theta = t * p.half;
            let local = if theta.abs() <= THETA_SWITCH {
                let mut acc = Complex64::new(0.0, 0.0);
                for ((u, w), v) in gl_nodes.iter().zip(gl_weights).zip(&p.at_gauss) {
                    let (s, c) = (theta * u).sin_cos();
                    acc += Complex64::new(c, s) * (w * v);
                }
                acc
            } else {
                moment_sum(&p.monomial, theta)
            };
            let (s, c) = (t * p.center).sin_cos();
            total += Complex64::new(c, s) * local * p.half;
        }
        total
    }

    pub fn cos_transform(&self, t: f64) -> f64 {
        self.fourier(t).re
    }

    pub fn sin_transform(&self, t: f64) -> f64 {
        self.fourier(t).im
    }

    /// Plain integral of the sampled function.
    pub fn integral(&self) -> f64 {
        self.fourier(0.0).re
    }

    /// Bound on `∫ |f − p|`, valid for every `t`.
    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }
}

/// `Σ_k a_k ∫_{-1}^{1} u^k e^{iθu} du` by upward recurrence (stable for |θ| > degree).
fn moment_sum(monomial: &[f64], theta: f64) -> Complex64 {
    let i_theta = Complex64::new(0.0, theta);
    let e_plus = Complex64::new(theta.cos(), theta.sin());
    let e_minus = e_plus.conj();
    let mut mu = Complex64::new(2.0 * theta.sin() / theta, 0.0);
    let mut acc = mu * monomial[0];
    for (k, a) in monomial.iter().enumerate().skip(1) {
        let boundary = if k % 2 == 0 { e_plus - e_minus } else { e_plus + e_minus };
        mu = (boundary - mu * k as f64) / i_theta;
        acc += mu * *a;
    }
    acc
}

/// Which trigonometric weight multiplies the integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oscillation {
    Cos,
    Sin,
}

/// `∫_a^b f(ω)·cos(ωt)` or `·sin(ωt)`, switching to the Filon rule when the
/// interval holds more than a few oscillations.
pub fn integrate_oscillatory<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    t: f64,
    kind: Oscillation,
    spec: &QuadratureSpec,
) -> Result<Quadrature> {
    let phase = (t * (b - a)).abs();
    if phase <= 8.0 * PI {
        return match kind {
            Oscillation::Cos => integrate_adaptive(|w| f(w) * (w * t).cos(), a, b, spec),
            Oscillation::Sin => integrate_adaptive(|w| f(w) * (w * t).sin(), a, b, spec),
        };
    }
    let opts = FilonOptions { tol: spec.abs_tol / (b - a).abs(), ..FilonOptions::default() };
    let rule = FilonRule::build(f, a, b, &spec.breakpoints, &opts)?;
    let z = rule.fourier(t);
    let value = match kind {
        Oscillation::Cos => z.re,
        Oscillation::Sin => z.im,
    };
    Ok(Quadrature { value, error: rule.error_bound(), subdivisions: rule.panel_count() })
}
