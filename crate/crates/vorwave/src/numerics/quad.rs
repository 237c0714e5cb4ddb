//! Composite Gauss-Legendre quadrature with panel-doubling error control.

use crate::error::{Error, Result};
use std::sync::OnceLock;

const NODES: usize = 64;

fn rule() -> &'static [(f64, f64); NODES] {
    static RULE: OnceLock<[(f64, f64); NODES]> = OnceLock::new();
    RULE.get_or_init(|| {
        // Nodes of P_64 on (-1, 1) by Newton iteration on the Legendre recurrence.
        let mut out = [(0.0, 0.0); NODES];
        let n = NODES;
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            out[n - 1 - i] = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        out
    })
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0f64, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn panels(f: &impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let w = (b - a) / n as f64;
    let mut total = 0.0;
    for p in 0..n {
        let (lo, hi) = (a + p as f64 * w, a + (p + 1) as f64 * w);
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let mut acc = 0.0;
        for &(x, wt) in rule().iter() {
            acc += wt * f(mid + half * x);
        }
        total += acc * half;
    }
    total
}

/// Integrates a smooth `f` over `[a, b]`, doubling the panel count until two
/// successive composite 64-node estimates agree to `tol` (relative to the
/// larger of 1 and the estimate).
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let mut prev = panels(&f, a, b, 1);
    let mut n = 2;
    while n <= 1 << 12 {
        let cur = panels(&f, a, b, n);
        if (cur - prev).abs() <= tol * cur.abs().max(1.0) {
            return Ok(cur);
        }
        prev = cur;
        n *= 2;
    }
    Err(Error::Quadrature { a, b, estimate: prev })
}

/// Integrates `g(tau) = f(tau)` over `[a, b]` where `f` carries an
/// inverse-square-root singularity at the endpoint `b`: the substitution
/// `u = sqrt(b - tau)` linearizes it, and the caller's integrand is invoked
/// only at interior points `tau < b`.
pub fn integrate_sqrt_upper(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let span = b - a;
    if span.is_nan() || span <= 0.0 {
        return Ok(0.0);
    }
    let umax = span.sqrt();
    integrate(|u| 2.0 * u * f(b - u * u), 0.0, umax, tol)
}

/// Same as [`integrate_sqrt_upper`] with the singular endpoint at `a`.
pub fn integrate_sqrt_lower(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let span = b - a;
    if span.is_nan() || span <= 0.0 {
        return Ok(0.0);
    }
    let umax = span.sqrt();
    integrate(|u| 2.0 * u * f(a + u * u), 0.0, umax, tol)
}
