//! Shooting integrator for the Schroedinger-form equation `v'' = q(Y) v`.
//!
//! Uses a fourth-order Magnus scheme built from two-point Gauss collocation:
//! each panel is propagated with the exact transfer matrix of a constant
//! coefficient plus the leading commutator correction.  The scheme is exact
//! when `q` is constant, which covers the hyperbolic/trigonometric solutions
//! arising for constant and linear vorticity, and the per-panel exponential
//! scaling keeps the state representable for arbitrarily large `q`.

use crate::error::{Error, Result};

/// Outcome of a shooting run with Cauchy data `v(0) = 0`, `v'(0) = 1`.
#[derive(Debug, Clone, Copy)]
pub struct ShootOutcome {
    /// Scaled terminal value: `v(h) = v_end * exp(log_scale)`.
    pub v_end: f64,
    /// Scaled terminal derivative: `v'(h) = dv_end * exp(log_scale)`.
    pub dv_end: f64,
    /// Logarithm of the accumulated rescaling factor (always >= 0 here).
    pub log_scale: f64,
    /// Logarithmic derivative `v'(h) / v(h)`.
    pub ratio: f64,
    /// `ln max_Y |v(Y)|` over the panel nodes.
    pub max_log_abs: f64,
    /// Sign changes of `v` across panel nodes on `(0, h)`.
    pub interior_zeros: usize,
    /// Panels used by the converged pass.
    pub panels: usize,
}

impl ShootOutcome {
    /// `ln |v(h)|`, comparable against `max_log_abs`.
    pub fn log_abs_end(&self) -> f64 {
        self.v_end.abs().ln() + self.log_scale
    }

    /// True when `|v(h)| < guard * max_Y |v(Y)|`.
    pub fn near_pole(&self, guard: f64) -> bool {
        self.log_abs_end() < self.max_log_abs + guard.ln()
    }
}

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Propagates `(v, v')` across one panel of width `dt` starting at `y`,
/// returning the scaled 2x2 transfer matrix and the log of its scale.
fn panel_matrix(q: &impl Fn(f64) -> f64, y: f64, dt: f64) -> ([[f64; 2]; 2], f64) {
    let g1 = q(y + dt * (0.5 - SQRT3 / 6.0));
    let g2 = q(y + dt * (0.5 + SQRT3 / 6.0));
    let qbar = 0.5 * (g1 + g2);
    let d = SQRT3 / 12.0 * dt * dt * (g1 - g2);
    let theta2 = d * d + dt * dt * qbar;
    if theta2 > 0.0 {
        let theta = theta2.sqrt();
        // cosh/sinh scaled by exp(-theta); exp_m1 keeps sinh(theta)/theta
        // accurate down to theta -> 0 (panels straddling a turning point).
        let em2m1 = (-2.0 * theta).exp_m1();
        let ch = 1.0 + 0.5 * em2m1;
        let sh = if theta > 1e-300 { -0.5 * em2m1 / theta } else { 1.0 };
        ([[ch + sh * d, sh * dt], [sh * dt * qbar, ch - sh * d]], theta)
    } else {
        let phi = (-theta2).sqrt();
        let ch = phi.cos();
        let sh = if phi > 1e-8 { phi.sin() / phi } else { 1.0 - phi * phi / 6.0 };
        ([[ch + sh * d, sh * dt], [sh * dt * qbar, ch - sh * d]], 0.0)
    }
}

fn run_pass(q: &impl Fn(f64) -> f64, h: f64, n: usize) -> ShootOutcome {
    let dt = h / n as f64;
    let (mut a, mut c) = (0.0f64, 1.0f64);
    let mut log_scale = 0.0f64;
    let mut max_log_abs = f64::NEG_INFINITY;
    let mut zeros = 0usize;
    let mut prev_sign = 0i8;
    for i in 0..n {
        let (m, theta) = panel_matrix(q, i as f64 * dt, dt);
        let (na, nc) = (m[0][0] * a + m[0][1] * c, m[1][0] * a + m[1][1] * c);
        a = na;
        c = nc;
        log_scale += theta;
        let mag = a.abs().max(c.abs());
        if mag > 1e100 || (mag < 1e-100 && mag > 0.0) {
            a /= mag;
            c /= mag;
            log_scale += mag.ln();
        }
        if a != 0.0 {
            max_log_abs = max_log_abs.max(a.abs().ln() + log_scale);
        }
        // Interior nodes only: the endpoint value is not an interior zero.
        let sign = if a > 0.0 {
            1
        } else if a < 0.0 {
            -1
        } else {
            0
        };
        if i + 1 < n {
            if prev_sign != 0 && sign != 0 && sign != prev_sign {
                zeros += 1;
            }
            if sign != 0 {
                prev_sign = sign;
            }
        } else if prev_sign != 0 && sign != 0 && sign != prev_sign {
            // A sign change into the final node means a zero inside (0, h).
            zeros += 1;
        }
    }
    let ratio = c / a;
    ShootOutcome { v_end: a, dv_end: c, log_scale, ratio, max_log_abs, interior_zeros: zeros, panels: n }
}

/// Shoots `v'' = q(Y) v`, `v(0) = 0`, `v'(0) = 1` across `[0, h]`, doubling
/// the panel count until the terminal logarithmic derivative and magnitude
/// stabilize to `tol`.
///
/// When `count_zeros` is set the initial resolution is chosen fine enough
/// (at most a quarter oscillation per panel) that nodal sign changes count
/// every interior zero of `v`.
pub fn shoot(q: &impl Fn(f64) -> f64, h: f64, tol: f64, count_zeros: bool) -> Result<ShootOutcome> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Numeric(format!("shooting interval of length {h}")));
    }
    let mut n0 = 16usize;
    if count_zeros {
        let mut qmin = f64::INFINITY;
        for i in 0..=128 {
            qmin = qmin.min(q(h * i as f64 / 128.0));
        }
        if qmin < 0.0 {
            let mu = (-qmin).sqrt();
            n0 = n0.max(((2.0 * h * mu / std::f64::consts::PI).ceil() as usize + 1).next_power_of_two());
        }
    }

    // Convergence is judged on the scale-normalized terminal state plus the
    // total log magnitude; the normalized state stays meaningful arbitrarily
    // close to a Dirichlet eigenvalue where v(h) crosses zero, and only the
    // relative pole guard consumes the magnitude, so its gate is loose.
    //
    // Near turning points of q the half-power kink limits refinement to
    // roughly O(panels^{-3/2}), and near-degenerate wells converge with a
    // large prefactor; the target therefore relaxes with the panel count
    // instead of failing a well-converged state at the budget.  The zero
    // count is not part of the gate: the initial panel bound already
    // resolves every oscillation, and demanding pass-to-pass equality
    // livelocks when a zero sits within rounding of Y = h.
    let mut prev = run_pass(q, h, n0);
    let mut prev_defect = f64::INFINITY;
    let mut last_defect = (f64::INFINITY, f64::INFINITY);
    let mut n = n0 * 2;
    while n <= 1 << 15 {
        let cur = run_pass(q, h, n);
        let m_prev = prev.v_end.abs().max(prev.dv_end.abs());
        let m_cur = cur.v_end.abs().max(cur.dv_end.abs());
        let da = (cur.v_end / m_cur - prev.v_end / m_prev).abs();
        let dc = (cur.dv_end / m_cur - prev.dv_end / m_prev).abs();
        let lg_cur = m_cur.ln() + cur.log_scale;
        let lg_prev = m_prev.ln() + prev.log_scale;
        let defect = da.max(dc);
        let mag_defect = (lg_cur - lg_prev).abs() / lg_cur.abs().max(1.0);
        let effective_tol = if n >= 1 << 14 {
            tol.max(1e-9)
        } else if n >= 1 << 13 {
            tol.max(1e-10)
        } else {
            tol
        };
        let strict = defect <= effective_tol && mag_defect <= 1e-7;
        // A stalled plateau marks the noise floor of an interpolated q.
        let stalled = defect <= 1e-8 && defect >= 0.5 * prev_defect && mag_defect <= 1e-5;
        if strict || stalled {
            return Ok(cur);
        }
        last_defect = (defect, mag_defect);
        prev_defect = defect;
        prev = cur;
        n *= 2;
    }
    if last_defect.0 <= 1e-6 && last_defect.1 <= 1e-4 {
        // Conditioning-limited, but the state still carries ~6 digits.
        return Ok(prev);
    }
    Err(Error::Numeric(format!(
        "shooting did not converge on [0, {h}] (ratio {} at {} panels; defect {:.3e}, mag defect {:.3e})",
        prev.ratio, prev.panels, last_defect.0, last_defect.1
    )))
}

/// Interior zero count alone: accepts as soon as two consecutive panel
/// refinements agree.  The count is an integer observable and stays stable
/// even where the terminal state is conditioning-limited.
pub fn shoot_count(q: &impl Fn(f64) -> f64, h: f64) -> Result<usize> {
    if h.is_nan() || h <= 0.0 {
        return Err(Error::Numeric(format!("shooting interval of length {h}")));
    }
    let mut qmin = f64::INFINITY;
    for i in 0..=128 {
        qmin = qmin.min(q(h * i as f64 / 128.0));
    }
    let mut n = 16usize;
    if qmin < 0.0 {
        let mu = (-qmin).sqrt();
        n = n.max(((2.0 * h * mu / std::f64::consts::PI).ceil() as usize + 1).next_power_of_two());
    }
    let mut prev = run_pass(q, h, n).interior_zeros;
    for _ in 0..12 {
        n *= 2;
        let cur = run_pass(q, h, n).interior_zeros;
        if cur == prev {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Numeric(format!("oscillation count kept flickering on [0, {h}]")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_positive_q_matches_sinh() {
        // v = sinh(2 Y) / 2, h = 1.5.
        let out = shoot(&|_| 4.0, 1.5, 1e-12, false).unwrap();
        let v = (2.0f64 * 1.5).sinh() / 2.0;
        let dv = (2.0f64 * 1.5).cosh();
        assert!((out.ratio - dv / v).abs() < 1e-12);
        assert!((out.log_abs_end() - v.ln()).abs() < 1e-12);
    }

    #[test]
    fn constant_negative_q_matches_sin_and_counts_zeros() {
        // v = sin(3 Y) / 3 on [0, 2.5]: interior zeros at pi/3, 2pi/3 (2 of them).
        let out = shoot(&|_| -9.0, 2.5, 1e-12, true).unwrap();
        let v = (3.0f64 * 2.5).sin() / 3.0;
        let dv = (3.0f64 * 2.5).cos();
        assert!((out.ratio - dv / v).abs() < 1e-10);
        assert_eq!(out.interior_zeros, 2);
    }

    #[test]
    fn huge_q_does_not_overflow() {
        // tau = 1e4 over h = 4: exp(4e4) is far beyond f64 range.
        let tau = 1e4f64;
        let out = shoot(&|_| tau * tau, 4.0, 1e-12, false).unwrap();
        // v'(h)/v(h) -> tau coth(tau h) ~ tau.
        assert!((out.ratio / tau - 1.0).abs() < 1e-10);
        assert!((out.log_abs_end() - (tau * 4.0 - (2.0 * tau).ln())).abs() < 1e-6);
    }

    #[test]
    fn variable_q_converges_against_rk() {
        // q(Y) = 1 + Y^2; compare with a fine RK4 reference.
        let q = |y: f64| 1.0 + y * y;
        let out = shoot(&q, 2.0, 1e-12, false).unwrap();
        let (mut v, mut dv) = (0.0f64, 1.0f64);
        let n = 200_000;
        let dt = 2.0 / n as f64;
        for i in 0..n {
            let y = i as f64 * dt;
            let f = |y: f64, v: f64, dv: f64| (dv, q(y) * v);
            let (k1v, k1d) = f(y, v, dv);
            let (k2v, k2d) = f(y + dt / 2.0, v + dt / 2.0 * k1v, dv + dt / 2.0 * k1d);
            let (k3v, k3d) = f(y + dt / 2.0, v + dt / 2.0 * k2v, dv + dt / 2.0 * k2d);
            let (k4v, k4d) = f(y + dt, v + dt * k3v, dv + dt * k3d);
            v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            dv += dt / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        }
        assert!((out.ratio - dv / v).abs() < 1e-9 * (dv / v).abs());
    }
}
