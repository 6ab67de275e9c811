//! Globally adaptive Gauss-Kronrod quadrature and a principal-value wrapper.
//!
//! The 10/21-point Gauss-Kronrod pair is used on every subinterval. The
//! interval with the largest error estimate is bisected until the total
//! estimate meets `max(abs_tol, rel_tol * |value|)`. Subdivision order is
//! fully deterministic, so identical inputs give bitwise identical results.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and panelization for a quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Interior breakpoints; each must lie strictly inside the interval.
    #[serde(default)]
    pub breakpoints: Vec<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self::scalar()
    }
}

impl QuadratureSpec {
    /// Tolerances used for scalar results (η, χ0, α_c, sum rules).
    pub fn scalar() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-8, max_subdivisions: 4000, breakpoints: Vec::new() }
    }

    /// Tolerances used for individual points of a time series.
    pub fn series() -> Self {
        Self { abs_tol: 1e-6, rel_tol: 1e-8, max_subdivisions: 4000, breakpoints: Vec::new() }
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    /// Replace the breakpoints, keeping only those strictly inside `(a, b)`.
    pub fn with_breakpoints_in(mut self, a: f64, b: f64, points: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints = interior_points(a, b, points);
        self
    }

    /// Scale both tolerances by `factor`.
    pub fn loosened(mut self, factor: f64) -> Self {
        self.abs_tol *= factor;
        self.rel_tol *= factor;
        self
    }

    pub fn validate(&self, a: f64, b: f64) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "quadrature tolerances must be positive (abs {}, rel {})",
                self.abs_tol, self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidParameter("max_subdivisions must be positive".into()));
        }
        if let Some(&p) = self.breakpoints.iter().find(|&&p| !(p > a && p < b)) {
            return Err(Error::InvalidParameter(format!("breakpoint {p} is not strictly inside [{a}, {b}]")));
        }
        Ok(())
    }
}

/// Sort, deduplicate and keep the points strictly inside `(a, b)`.
pub fn interior_points(a: f64, b: f64, points: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let width = b - a;
    let mut out: Vec<f64> =
        points.into_iter().filter(|p| p.is_finite() && *p > a + 1e-14 * width && *p < b - 1e-14 * width).collect();
    out.sort_by(|x, y| x.total_cmp(y));
    out.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * width);
    out
}

/// Integral value together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208067625742,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    // insertion order, used to break ties deterministically
    id: usize,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error).then_with(|| other.id.cmp(&self.id))
    }
}

/// One 21-point Kronrod evaluation on `[a, b]`; returns (value, error estimate).
fn gauss_kronrod_21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    let mut abs = WGK[10] * fc.abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
        abs += WGK[j] * (fv1[j].abs() + fv2[j].abs());
    }
    let value = kronrod * half;
    let res_abs = abs * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

/// Adaptive integral of `f` over `[a, b]`.
///
/// Integrable endpoint singularities are tolerated because the Kronrod nodes
/// never touch the endpoints of a subinterval.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature { value: 0.0, error: 0.0, subdivisions: 0 });
    }
    if b < a {
        let q = integrate_adaptive(f, b, a, &spec.clone().with_breakpoints_in(b, a, spec.breakpoints.clone()))?;
        return Ok(Quadrature { value: -q.value, ..q });
    }
    spec.validate(a, b)?;

    let mut edges = Vec::with_capacity(spec.breakpoints.len() + 2);
    edges.push(a);
    edges.extend_from_slice(&spec.breakpoints);
    edges.push(b);

    let mut heap = BinaryHeap::new();
    let mut next_id = 0;
    let mut total = 0.0;
    let mut total_err = 0.0;
    // Segments too narrow to split further; kept out of the heap.
    let mut frozen_err = 0.0;
    for w in edges.windows(2) {
        let (value, error) = gauss_kronrod_21(&f, w[0], w[1]);
        total += value;
        total_err += error;
        heap.push(Segment { a: w[0], b: w[1], value, error, id: next_id });
        next_id += 1;
    }
    if !total.is_finite() {
        return Err(Error::Integration { a, b, value: total, error: total_err, subdivisions: 0 });
    }

    let mut subdivisions = 0;
    loop {
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if subdivisions >= spec.max_subdivisions {
            heap.push(worst);
            break;
        }
        if !(mid > worst.a && mid < worst.b)
            || (worst.b - worst.a) < 4.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs())
        {
            frozen_err += worst.error;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let (v1, e1) = gauss_kronrod_21(&f, worst.a, mid);
        let (v2, e2) = gauss_kronrod_21(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1, id: next_id });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2, id: next_id + 1 });
        next_id += 2;
        subdivisions += 1;
        if !total.is_finite() {
            break;
        }
    }

    // Re-sum from the segments to avoid drift from the running updates.
    let mut segments: Vec<Segment> = heap.into_vec();
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value: f64 = segments.iter().map(|s| s.value).sum();
    let error: f64 = segments.iter().map(|s| s.error).sum::<f64>() + frozen_err;
    let tol = spec.abs_tol.max(spec.rel_tol * value.abs());
    if !value.is_finite() || error > tol {
        return Err(Error::Integration { a, b, value, error, subdivisions });
    }
    Ok(Quadrature { value, error, subdivisions })
}

/// Cauchy principal value of `∫_a^b h(x) / (x - c) dx` for `a < c < b`.
///
/// The symmetric neighbourhood `[c - d, c + d]` is folded onto `[0, d]` as
/// `∫_0^d [h(c + u) - h(c - u)] / u du`; the remainder is a regular integral.
pub fn integrate_principal_value<F: Fn(f64) -> f64>(
    h: F,
    a: f64,
    b: f64,
    c: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature> {
    if !(c > a && c < b) {
        return Err(Error::Domain {
            quantity: "pole",
            value: c,
            reason: "must lie strictly inside the integration interval",
        });
    }
    let d = (c - a).min(b - c);
    let inner_spec = QuadratureSpec { breakpoints: Vec::new(), ..spec.clone() };
    let folded = integrate_adaptive(|u| (h(c + u) - h(c - u)) / u, 0.0, d, &inner_spec)?;
    let (lo, hi) = if c - a > b - c { (a, c - d) } else { (c + d, b) };
    let rest = if hi > lo {
        let outer = inner_spec.with_breakpoints_in(lo, hi, spec.breakpoints.iter().copied());
        integrate_adaptive(|x| h(x) / (x - c), lo, hi, &outer)?
    } else {
        Quadrature { value: 0.0, error: 0.0, subdivisions: 0 }
    };
    Ok(Quadrature {
        value: folded.value + rest.value,
        error: folded.error + rest.error,
        subdivisions: folded.subdivisions + rest.subdivisions,
    })
}
