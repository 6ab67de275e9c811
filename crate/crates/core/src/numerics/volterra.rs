//! Trapezoidal product integration for `dP/dt = −∫₀ᵗ K(t−s) P(s) ds`.

/// Advance one step.
///
/// `history` holds `P_0..=P_n`, `slope` is `dP/dt` at `t_n`, and `kernel`
/// holds at least `K_0..=K_{n+1}`. Returns `(P_{n+1}, dP/dt at t_{n+1})`.
pub fn volterra_step(history: &[f64], slope: f64, kernel: &[f64], h: f64) -> (f64, f64) {
    let n = history.len() - 1;
    let mut memory = 0.5 * kernel[n + 1] * history[0];
    for j in 1..=n {
        memory += kernel[n + 1 - j] * history[j];
    }
    let next = (history[n] + 0.5 * h * slope - 0.5 * h * h * memory) / (1.0 + 0.25 * h * h * kernel[0]);
    let next_slope = -h * (memory + 0.5 * kernel[0] * next);
    (next, next_slope)
}

/// Solution on the grid `t_k = k·h`, `k < kernel.len()`, with `P(0) = 1`.
pub fn solve_convolution(kernel: &[f64], h: f64) -> Vec<f64> {
    let mut p = Vec::with_capacity(kernel.len());
    if kernel.is_empty() {
        return p;
    }
    p.push(1.0);
    let mut slope = 0.0;
    while p.len() < kernel.len() {
        let (next, s) = volterra_step(&p, slope, kernel, h);
        p.push(next);
        slope = s;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::richardson::richardson_step;

    fn sample(k: impl Fn(f64) -> f64, h: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| k(i as f64 * h)).collect()
    }

    #[test]
    fn constant_kernel_gives_cosine() {
        let c: f64 = 0.04;
        let (h, n) = (0.05, 2001);
        let coarse = solve_convolution(&sample(|_| c, h, n), h);
        let fine = solve_convolution(&sample(|_| c, h / 2.0, 2 * n - 1), h / 2.0);
        for i in (0..n).step_by(100) {
            let t = i as f64 * h;
            let (v, _) = richardson_step(coarse[i], fine[2 * i], 2);
            assert!((v - (c.sqrt() * t).cos()).abs() < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn exponential_kernel_matches_laplace_inverse() {
        // K = 2e^{-t}: P(s) = (s+1)/(s²+s+2)
        let w = 7f64.sqrt() / 2.0;
        let exact = |t: f64| (-t / 2.0).exp() * ((w * t).cos() + (w * t).sin() / (2.0 * w));
        let k = |t: f64| 2.0 * (-t).exp();
        let h = 0.01;
        let coarse = solve_convolution(&sample(k, h, 1001), h);
        let fine = solve_convolution(&sample(k, h / 2.0, 2001), h / 2.0);
        for i in (0..1001).step_by(50) {
            let (v, _) = richardson_step(coarse[i], fine[2 * i], 2);
            assert!((v - exact(i as f64 * h)).abs() < 1e-6);
        }
    }

    #[test]
    fn second_order_convergence() {
        let k = |t: f64| 0.01 * (-t).exp();
        let t_end = 20.0;
        let err = |h: f64| {
            let n = (t_end / h).round() as usize + 1;
            let p = solve_convolution(&sample(k, h, n), h);
            p[n - 1]
        };
        let (a, b, c) = (err(0.2), err(0.1), err(0.05));
        let order = ((a - b) / (b - c)).abs().log2();
        assert!((order - 2.0).abs() < 0.1, "observed order {order}");
    }
}
