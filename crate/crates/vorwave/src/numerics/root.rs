//! Bracketed scalar root finding and one-dimensional minimization.

use crate::error::{Error, Result};

/// Bisection on a sign-changing bracket `[a, b]` down to `|b - a| <= tol_x`.
pub fn bisect(f: impl Fn(f64) -> f64, a: f64, b: f64, tol_x: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Search(format!(
            "no sign change on [{a}, {b}] (f = {fa}, {fb})"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= tol_x || mid == a || mid == b {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization on `[a, b]`, refined by one parabolic fit.
pub fn golden_min(f: impl Fn(f64) -> f64, a: f64, b: f64, tol_x: f64) -> (f64, f64) {
    let (mut a, mut b) = (a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol_x {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x0 = 0.5 * (a + b);
    let f0 = f(x0);
    // Parabolic polish around the golden-section result.
    let dh = (b - a).abs().max(tol_x);
    let (fm, fp) = (f(x0 - dh), f(x0 + dh));
    let denom = fm - 2.0 * f0 + fp;
    if denom > 0.0 {
        let shift = 0.5 * dh * (fm - fp) / denom;
        if shift.abs() < dh {
            let x1 = x0 + shift;
            let f1 = f(x1);
            if f1 < f0 {
                return (x1, f1);
            }
        }
    }
    (x0, f0)
}

/// Scans `f` over `grid` and returns all adjacent pairs with a sign change.
pub fn sign_change_brackets(f: &impl Fn(f64) -> f64, grid: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &x in grid {
        let fx = f(x);
        if let Some((px, pfx)) = prev {
            if pfx == 0.0 || (fx != 0.0 && pfx.signum() != fx.signum()) {
                out.push((px, x));
            }
        }
        prev = Some((x, fx));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bisect_rejects_same_sign() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn golden_finds_quartic_min() {
        let (x, _) = golden_min(|x| (x - 0.3).powi(4) + 1.0, -2.0, 2.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-3);
        let (x2, _) = golden_min(|x| (x - 0.3).powi(2), -2.0, 2.0, 1e-12);
        assert!((x2 - 0.3).abs() < 1e-7);
    }

    #[test]
    fn brackets_on_grid() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let br = sign_change_brackets(&|x| (x - 2.5).sin(), &grid);
        assert_eq!(br.len(), 3); // roots at 2.5, 2.5 + pi, 2.5 + 2pi within [0, 10]
    }
}
