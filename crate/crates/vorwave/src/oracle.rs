//! Closed-form oracles for the solvable vorticity families, sharing no
//! numerical machinery with the generic pipeline; they exist to
//! differential-test it.
//!
//! Two conventions worth noting:
//! - the sub-`b` dispersion form carries `cos^2`, which makes its
//!   `tau^2 -> b` limit agree with the super-`b` form;
//! - the critical shear of the linear family solves `x^3 - b x^2 - 1 = 0`
//!   with `x = s_c^2`, the stationarity condition of the lowest Bernoulli
//!   curve.

use crate::error::{Error, Result};

/// Plain bisection local to the oracles.
fn oracle_bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> Result<f64> {
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Search(format!("oracle bracket [{a}, {b}] has no sign change")));
    }
    let fa_sign = fa.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || (b - a).abs() < 1e-15 * b.abs().max(1.0) {
            return Ok(m);
        }
        if fm.signum() == fa_sign {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Closed forms for constant vorticity `omega = b > 0`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantOracle {
    pub b: f64,
    pub s: f64,
    pub s0: f64,
    /// `h_0^{(+)} = (s - sqrt(s^2 - 2b)) / b`.
    pub h0: f64,
    /// `h_1^{(+)} = (s + sqrt(s^2 - 2b)) / b`.
    pub h1: f64,
    pub r0_curve: f64,
    pub r1_curve: f64,
    /// `r_0 = (2/3) sqrt(2/b)`, the shared endpoint value.
    pub r0_limit: f64,
    /// Root of `(s_c b)^2 - 2 b^3 = (s_c b / (1 + s_c b))^2`.
    pub s_c: f64,
}

pub fn constant_vorticity_oracle(b: f64, s: f64) -> Result<ConstantOracle> {
    if b.is_nan() || b <= 0.0 {
        return Err(Error::Domain(format!("constant oracle needs b > 0, got {b}")));
    }
    let s0 = (2.0 * b).sqrt();
    if s < s0 {
        return Err(Error::Domain(format!("constant oracle needs s >= sqrt(2b) = {s0}")));
    }
    let root = (s * s - 2.0 * b).sqrt();
    let (h0, h1) = ((s - root) / b, (s + root) / b);
    let r = |h: f64| (s * s - 2.0 * b + 2.0 * h) / 3.0;
    let s_c = oracle_bisect(
        |x: f64| (x * b) * (x * b) - 2.0 * b * b * b - (x * b / (1.0 + x * b)).powi(2),
        s0,
        s0 + 10.0 * (1.0 + b),
    )?;
    Ok(ConstantOracle {
        b,
        s,
        s0,
        h0,
        h1,
        r0_curve: r(h0),
        r1_curve: r(h1),
        r0_limit: 2.0 / 3.0 * (2.0 / b).sqrt(),
        s_c,
    })
}

/// Dispersion function for constant vorticity:
/// `sigma = kappa tau coth(tau h) - 1/kappa + b` with `kappa = -(b h - s)`.
pub fn constant_sigma_closed(b: f64, s: f64, h: f64, tau: f64) -> f64 {
    let kappa = -(b * h - s);
    let t = tau.abs();
    let coth = if t * h > 1e-12 { ((t * h).tanh()).recip() } else { f64::INFINITY };
    if t * h > 1e-12 {
        kappa * t * coth - 1.0 / kappa + b
    } else {
        kappa / h - 1.0 / kappa + b
    }
}

/// Unique positive root of the constant-vorticity dispersion equation for
/// the given depth branch.
pub fn constant_dispersion_root(b: f64, s: f64, h: f64) -> Result<f64> {
    let f = |tau: f64| constant_sigma_closed(b, s, h, tau);
    let mut hi = 1.0 / h;
    let lo = 1e-9;
    let mut guard = 0;
    while f(lo).signum() == f(hi).signum() {
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return Err(Error::Search("constant oracle found no dispersion root".into()));
        }
    }
    oracle_bisect(f, lo, hi)
}

/// Closed forms for linear vorticity `omega = b tau`, `b > 0`.
#[derive(Debug, Clone)]
pub struct LinearOracle {
    pub b: f64,
    pub s: f64,
    pub j: u32,
    pub plus_branch: bool,
    /// Depth per the printed sequences.
    pub h: f64,
    /// Bernoulli value of the same branch.
    pub r: f64,
    /// Positive Dirichlet eigenvalues `tau_k = sqrt(b - (pi k / h)^2)`,
    /// ascending.
    pub eigenvalues: Vec<f64>,
}

pub fn linear_vorticity_oracle(b: f64, s: f64, j: u32, plus_branch: bool) -> Result<LinearOracle> {
    if b.is_nan() || b <= 0.0 {
        return Err(Error::Domain(format!("linear oracle needs b > 0, got {b}")));
    }
    let sb = b.sqrt();
    if s <= sb {
        return Err(Error::Domain(format!("linear oracle needs s > sqrt(b) = {sb}")));
    }
    let arc = (sb / s).asin() / sb;
    let sign_j = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut h = sign_j * arc + j as f64 * std::f64::consts::PI / sb;
    if !plus_branch {
        h += std::f64::consts::PI / sb;
    }
    let shift = if plus_branch { j as f64 } else { j as f64 + 1.0 };
    let r = (s * s - b
        + 2.0 * sign_j / sb * (sb / s).asin()
        + 2.0 * std::f64::consts::PI / sb * shift)
        / 3.0;
    let mut eigenvalues = Vec::new();
    let mut k = 1.0;
    loop {
        let t2 = b - (std::f64::consts::PI * k / h).powi(2);
        if t2 <= 0.0 {
            break;
        }
        eigenvalues.push(t2.sqrt());
        k += 1.0;
    }
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(LinearOracle { b, s, j, plus_branch, h, r, eigenvalues })
}

impl LinearOracle {
    /// Left-hand side of the dispersion equation,
    /// `s^2 cos^2(sqrt(b) h) G(tau) - 1 +/- b s cos(sqrt(b) h)` with
    /// `G = sqrt(tau^2-b) coth(sqrt(tau^2-b) h)` above `b`,
    /// `G = sqrt(b-tau^2) cot(sqrt(b-tau^2) h)` below, and the common limit
    /// `1/h` at `tau^2 = b`.  Equals `kappa sigma(tau)`.
    pub fn dispersion_lhs(&self, tau: f64) -> f64 {
        let (b, s, h) = (self.b, self.s, self.h);
        let sb = b.sqrt();
        let cos = (sb * h).cos();
        let g = {
            let d = tau * tau - b;
            if d.abs() < 1e-14 {
                1.0 / h
            } else if d > 0.0 {
                let mu = d.sqrt();
                mu / (mu * h).tanh()
            } else {
                let mu = (-d).sqrt();
                mu * (mu * h).cos() / (mu * h).sin()
            }
        };
        let pm = if self.plus_branch { 1.0 } else { -1.0 };
        s * s * cos * cos * g - 1.0 + pm * b * s * cos
    }

    /// `kappa = +/- s cos(sqrt(b) h)`.
    pub fn kappa(&self) -> f64 {
        let pm = if self.plus_branch { 1.0 } else { -1.0 };
        pm * self.s * (self.b.sqrt() * self.h).cos()
    }
}

/// Critical shear of the linear family: stationarity of `R_0^{(+)}` gives
/// `s^2 sqrt(s^2 - b) = 1`, i.e. `x^3 - b x^2 - 1 = 0` for `x = s_c^2`.
pub fn linear_s_c(b: f64) -> Result<f64> {
    let x = oracle_bisect(|x: f64| x * x * x - b * x * x - 1.0, b.max(1e-9), b + 3.0)?;
    Ok(x.sqrt())
}

/// `r_0 = pi / (3 sqrt(b))` for the linear family.
pub fn linear_r0(b: f64) -> f64 {
    std::f64::consts::PI / (3.0 * b.sqrt())
}

/// Unique positive root of `tau coth(h tau) = h^2` for subcritical `h > 1`;
/// `None` in the supercritical regime where the left side stays above the
/// right.
pub fn irrotational_oracle(h: f64) -> Option<f64> {
    if h <= 1.0 {
        return None;
    }
    let f = |tau: f64| tau / (h * tau).tanh() - h * h;
    let mut hi = h * h;
    let mut guard = 0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            return None;
        }
    }
    oracle_bisect(f, 1e-12, hi).ok()
}

/// Constants of the large-`s` law `tau(s) = sqrt(3b)/2 + a/s` on the first
/// minus branch: `(level, a)` with `a = -b sqrt(3) / (2 pi)`.
pub fn asymptote_oracle(b: f64) -> (f64, f64) {
    ((3.0 * b).sqrt() / 2.0, -b * 3f64.sqrt() / (2.0 * std::f64::consts::PI))
}
