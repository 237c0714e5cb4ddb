//! Stream solutions of the steady problem: Cauchy integration of
//! `U'' + omega(U) = 0`, the auxiliary quantities `tau_+/-(s)` and
//! `y_+/-(s)`, the depth sequences `h_j^{(+/-)}(s)`, Bernoulli curves,
//! critical values and counter-current classification.

use crate::error::{Error, Result};
use crate::numerics::ode::{integrate, OdeOptions, OdeSolution};
use crate::numerics::quad;
use crate::numerics::root::{bisect, golden_min};
use crate::numerics::tol;
use crate::vorticity::VorticitySpec;
use std::fmt;

/// Sign of the Cauchy datum `U'(0) = +s` or `-s`, i.e. the superscript of
/// the depth sequence the branch belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlowSign {
    Plus,
    Minus,
}

impl FlowSign {
    pub fn factor(self) -> f64 {
        match self {
            FlowSign::Plus => 1.0,
            FlowSign::Minus => -1.0,
        }
    }
}

impl fmt::Display for FlowSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlowSign::Plus => "+",
            FlowSign::Minus => "-",
        })
    }
}

/// Branch label `(j, +/-)` of a stream solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Branch {
    pub j: u32,
    pub sign: FlowSign,
}

impl Branch {
    pub fn new(j: u32, sign: FlowSign) -> Self {
        Self { j, sign }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.j, self.sign)
    }
}

/// Dense solution of the Cauchy problem `U'' + omega(U) = 0`, `U(0) = 0`,
/// `U'(0) = +/- s`.
///
/// Dense evaluation is quintic Hermite: the equation supplies the exact
/// second derivative `U'' = -omega(U)` at every node, so interpolation
/// noise stays far below the shooting tolerances even for deep
/// harmonic-like flows.
#[derive(Debug, Clone)]
pub struct Trajectory {
    ys: Vec<f64>,
    us: Vec<f64>,
    ups: Vec<f64>,
    upps: Vec<f64>,
}

impl Trajectory {
    fn from_solution(sol: &OdeSolution<2>, spec: &VorticitySpec) -> Self {
        let n = sol.samples.len();
        let mut ys = Vec::with_capacity(n);
        let mut us = Vec::with_capacity(n);
        let mut ups = Vec::with_capacity(n);
        let mut upps = Vec::with_capacity(n);
        for p in &sol.samples {
            ys.push(p.t);
            us.push(p.y[0]);
            ups.push(p.y[1]);
            upps.push(-spec.omega(p.y[0]));
        }
        Self { ys, us, ups, upps }
    }

    fn segment(&self, y: f64) -> (usize, f64, f64) {
        let n = self.ys.len();
        let idx = self.ys.partition_point(|&t| t <= y).clamp(1, n - 1);
        let (y0, y1) = (self.ys[idx - 1], self.ys[idx]);
        let dt = y1 - y0;
        let t = if dt > 0.0 { ((y - y0) / dt).clamp(0.0, 1.0) } else { 0.0 };
        (idx - 1, t, dt)
    }

    pub fn u(&self, y: f64) -> f64 {
        let (i, t, dt) = self.segment(y);
        let (t2, t3) = (t * t, t * t * t);
        let (t4, t5) = (t3 * t, t3 * t * t);
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h5 = 0.5 * (t3 - 2.0 * t4 + t5);
        self.us[i] * h0
            + self.ups[i] * dt * h1
            + self.upps[i] * dt * dt * h2
            + self.us[i + 1] * h3
            + self.ups[i + 1] * dt * h4
            + self.upps[i + 1] * dt * dt * h5
    }

    pub fn u_prime(&self, y: f64) -> f64 {
        let (i, t, dt) = self.segment(y);
        if dt == 0.0 {
            return self.ups[i];
        }
        let (t2, t3, t4) = (t * t, t * t * t, t * t * t * t);
        let d0 = -30.0 * t2 + 60.0 * t3 - 30.0 * t4;
        let d1 = 1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4;
        let d2 = 0.5 * (2.0 * t - 9.0 * t2 + 12.0 * t3 - 5.0 * t4);
        let d3 = 30.0 * t2 - 60.0 * t3 + 30.0 * t4;
        let d4 = -12.0 * t2 + 28.0 * t3 - 15.0 * t4;
        let d5 = 0.5 * (3.0 * t2 - 8.0 * t3 + 5.0 * t4);
        (self.us[i] * d0
            + self.ups[i] * dt * d1
            + self.upps[i] * dt * dt * d2
            + self.us[i + 1] * d3
            + self.ups[i + 1] * dt * d4
            + self.upps[i + 1] * dt * dt * d5)
            / dt
    }

    pub fn y_end(&self) -> f64 {
        *self.ys.last().expect("trajectory has samples")
    }

    /// Accepted integration nodes as `(Y, U, U')`.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.ys
            .iter()
            .zip(self.us.iter())
            .zip(self.ups.iter())
            .map(|((&y, &u), &up)| (y, u, up))
    }
}

/// Integrates the Cauchy problem on `[0, y_max]` with local tolerance 1e-12
/// and a dense sampling step.
pub fn integrate_cauchy(
    spec: &VorticitySpec,
    s: f64,
    sign: FlowSign,
    y_max: f64,
) -> Result<Trajectory> {
    if y_max.is_nan() || y_max <= 0.0 {
        return Err(Error::Domain(format!("non-positive integration span {y_max}")));
    }
    let t = tol::ode();
    let opts = OdeOptions { rtol: t, atol: t / 10.0, max_step: y_max / 400.0, ..Default::default() };
    let sol = integrate(
        |_, y: &[f64; 2]| [y[1], -spec.omega(y[0])],
        0.0,
        y_max,
        [0.0, sign.factor() * s],
        &opts,
    )?;
    Ok(Trajectory::from_solution(&sol, spec))
}

/// Maximum defect of the first integral `U'^2 + 2 Omega(U) - s^2` over the
/// trajectory samples; an a-posteriori error control.
pub fn first_integral_residual(traj: &Trajectory, spec: &VorticitySpec, s: f64) -> f64 {
    traj.samples()
        .map(|(_, u, up)| (up * up + 2.0 * spec.big_omega(u) - s * s).abs())
        .fold(0.0, f64::max)
}

/// `tau_+(s)` / `tau_-(s)`: smallest positive and largest negative roots of
/// `2 Omega(tau) = s^2`, with infinite sentinels when the scan cap finds no
/// root.
#[derive(Debug, Clone, Copy)]
pub struct TauBounds {
    pub tau_plus: f64,
    pub tau_minus: f64,
    /// Set when the corresponding infinity was declared by scan cap rather
    /// than by proof.
    pub plus_by_cap: bool,
    pub minus_by_cap: bool,
}

const TAU_SCAN_CAP: f64 = 1e3;

fn tau_scan_grid(cap: f64) -> Vec<f64> {
    let mut grid = Vec::with_capacity(2402);
    grid.push(0.0);
    for i in 0..=1200 {
        grid.push(1e-9 * (cap / 1e-9_f64).powf(i as f64 / 1200.0));
    }
    for i in 1..=1200 {
        grid.push(cap * i as f64 / 1200.0);
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid
}

pub fn compute_tau_bounds(spec: &VorticitySpec, s: f64) -> TauBounds {
    let target = s * s;
    let scan = |mirror: f64| -> Option<f64> {
        let f = |t: f64| 2.0 * spec.big_omega(mirror * t) - target;
        let mut cap = TAU_SCAN_CAP;
        for _ in 0..2 {
            // First crossing from a strictly negative anchor to a positive
            // value; the root of 2 Omega = s^2 at tau = 0 (when s = 0) is
            // not a positive root and is skipped.
            let mut neg_anchor: Option<f64> = None;
            for &t in &tau_scan_grid(cap) {
                let ft = f(t);
                if ft > 0.0 {
                    if let Some(a) = neg_anchor {
                        if let Ok(r) = bisect(f, a, t, 1e-14 * t.abs().max(1.0)) {
                            if r > 0.0 {
                                return Some(mirror * r);
                            }
                        }
                    }
                } else if ft < 0.0 {
                    neg_anchor = Some(t);
                }
            }
            cap *= 2.0;
        }
        None
    };
    let plus = scan(1.0);
    let minus = scan(-1.0);
    TauBounds {
        tau_plus: plus.unwrap_or(f64::INFINITY),
        tau_minus: minus.unwrap_or(f64::NEG_INFINITY),
        plus_by_cap: plus.is_none(),
        minus_by_cap: minus.is_none(),
    }
}

/// `y_+(s)` / `y_-(s)`: the extent of the maximal interval on which
/// `U(Y; s)` increases.
#[derive(Debug, Clone, Copy)]
pub struct YBounds {
    pub y_plus: f64,
    pub y_minus: f64,
    pub plus_by_cap: bool,
    pub minus_by_cap: bool,
}

const DOUBLE_ROOT_TOL: f64 = 1e-8;
fn quad_tol() -> f64 {
    tol::quad()
}

/// Integral `int_0^T dtau / sqrt(s^2 - 2 Omega(tau))` for `0 < T <= tau_+`,
/// removing the inverse-square-root endpoint singularities by the
/// substitution `u = sqrt(tau_+ - tau)` (and its mirror at `tau = 0` when
/// `s = 0`).
fn flow_time(spec: &VorticitySpec, s: f64, t_upper: f64, tau_plus: Option<f64>) -> Result<f64> {
    flow_time_generic(&|t| spec.omega(t), &|t| spec.big_omega(t), s, t_upper, tau_plus)
}

/// Three-point Gauss mean of `omega` over `[a, b]`; stable evaluation of
/// `int_a^b omega / (b - a)` for thin windows.
fn gauss3_mean(omega: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let off = half * (0.6f64).sqrt();
    (5.0 * omega(mid - off) + 8.0 * omega(mid) + 5.0 * omega(mid + off)) / 18.0
}

fn flow_time_generic(
    omega: &dyn Fn(f64) -> f64,
    big_omega: &dyn Fn(f64) -> f64,
    s: f64,
    t_upper: f64,
    tau_plus: Option<f64>,
) -> Result<f64> {
    // Near the turning value the subtraction s^2 - 2 Omega cancels
    // catastrophically; switch to the window integral
    // 2 int_tau^{tau_+} omega, which vanishes at tau_+ by construction.
    let deficit = move |tau: f64| -> f64 {
        if let Some(tp) = tau_plus {
            let w = tp - tau;
            if w < 1e-2 * tp.abs().max(1.0) {
                return (2.0 * w * gauss3_mean(omega, tau, tp)).max(f64::MIN_POSITIVE);
            }
        }
        (s * s - 2.0 * big_omega(tau)).max(f64::MIN_POSITIVE)
    };
    let g = move |tau: f64| 1.0 / deficit(tau).sqrt();
    let lower_singular = s * s <= 1e-14;
    match tau_plus {
        Some(tp) if t_upper >= tp * (1.0 - 1e-12) => {
            // Up to the turning value itself.
            let umax = tp.sqrt();
            let f = move |u: f64| 2.0 * u * g(tp - u * u);
            if lower_singular {
                let mid = umax / 2.0_f64.sqrt();
                let a = quad::integrate(f, 0.0, mid, quad_tol())?;
                let b = quad::integrate_sqrt_upper(f, mid, umax, quad_tol())?;
                Ok(a + b)
            } else {
                quad::integrate(f, 0.0, umax, quad_tol())
            }
        }
        Some(tp) => {
            let (ulo, uhi) = ((tp - t_upper).sqrt(), tp.sqrt());
            let f = move |u: f64| 2.0 * u * g(tp - u * u);
            if lower_singular {
                quad::integrate_sqrt_upper(f, ulo, uhi, quad_tol())
            } else {
                quad::integrate(f, ulo, uhi, quad_tol())
            }
        }
        None => {
            if lower_singular {
                quad::integrate_sqrt_lower(g, 0.0, t_upper, quad_tol())
            } else {
                quad::integrate(g, 0.0, t_upper, quad_tol())
            }
        }
    }
}

pub fn compute_y_bounds(spec: &VorticitySpec, s: f64) -> Result<YBounds> {
    let tb = compute_tau_bounds(spec, s);
    compute_y_bounds_with(spec, s, &tb)
}

fn compute_y_bounds_with(spec: &VorticitySpec, s: f64, tb: &TauBounds) -> Result<YBounds> {
    let y_plus = if tb.tau_plus.is_infinite() || spec.omega(tb.tau_plus).abs() <= DOUBLE_ROOT_TOL {
        f64::INFINITY
    } else {
        flow_time(spec, s, tb.tau_plus, Some(tb.tau_plus))?
    };
    // Mirror side: substitute tau -> -t, so the turning value is an upper
    // endpoint again (the mirrored primitive is Omega(-t), with slope
    // -omega(-t)).
    let y_minus = if tb.tau_minus.is_infinite() || spec.omega(tb.tau_minus).abs() <= DOUBLE_ROOT_TOL
    {
        f64::NEG_INFINITY
    } else {
        let mag = -tb.tau_minus;
        let value = flow_time_generic(
            &|t| -spec.omega(-t),
            &|t| spec.big_omega(-t),
            s,
            mag,
            Some(mag),
        )?;
        -value
    };
    Ok(YBounds {
        y_plus,
        y_minus,
        plus_by_cap: tb.plus_by_cap,
        minus_by_cap: tb.minus_by_cap,
    })
}

/// `h_0(s) = int_0^1 dtau / sqrt(s^2 - 2 Omega(tau))`, the smallest depth
/// with `U(h_0; s) = 1`.
pub fn depth_h0(spec: &VorticitySpec, s: f64) -> Result<f64> {
    let tb = compute_tau_bounds(spec, s);
    depth_h0_with(spec, s, &tb)
}

fn depth_h0_with(spec: &VorticitySpec, s: f64, tb: &TauBounds) -> Result<f64> {
    let (s0, tau_hat) = spec.s0_and_maximizer();
    if s < s0 * (1.0 - 1e-12) - 1e-15 {
        return Err(Error::Domain(format!("s = {s} below s0 = {s0}")));
    }
    let at_s0 = s <= s0 * (1.0 + 1e-12);
    if at_s0 && s0 > 0.0 && tau_hat < 1.0 - 1e-9 {
        return Err(Error::Domain(format!(
            "s = s0 = {s0} with interior maximizer tau = {tau_hat}: integrand singular inside [0, 1]"
        )));
    }
    let tau_plus = if tb.tau_plus.is_finite() { Some(tb.tau_plus) } else { None };
    flow_time(spec, s, 1.0, tau_plus)
}

/// Per-`s` catalog of turning values, monotonicity bounds and depth
/// sequences.
#[derive(Debug, Clone)]
pub struct DepthCatalog {
    pub s: f64,
    pub tau_plus: f64,
    pub tau_minus: f64,
    pub y_plus: f64,
    pub y_minus: f64,
    /// Finite depths `h_j^{(+)}(s)` for `j = 0..`, truncated at the first
    /// infinite value or at the truncation bound.
    pub depths_plus: Vec<f64>,
    pub depths_minus: Vec<f64>,
    /// Requested enumeration cap `j_max`.
    pub truncation_bound: u32,
    /// Infinity declared by scan cap on the corresponding turning value.
    pub plus_by_cap: bool,
    pub minus_by_cap: bool,
    /// `tau_+ = 1` (equivalently `y_+ = h_0`): formulas for consecutive even
    /// and odd depths coincide.
    pub degenerate_coincidence: bool,
}

impl DepthCatalog {
    pub fn depth(&self, branch: Branch) -> Option<f64> {
        let list = match branch.sign {
            FlowSign::Plus => &self.depths_plus,
            FlowSign::Minus => &self.depths_minus,
        };
        list.get(branch.j as usize).copied()
    }
}

/// Builds the depth sequences
/// `h_{2k}^{(+)} = h_0 + 2k (y_+ - y_-)`,
/// `h_{2k+1}^{(+)} = h_0 + 2 (y_+ - h_0) + 2k (y_+ - y_-)` and
/// `h_j^{(-)} = h_j^{(+)} - 2 y_-`.
pub fn depth_sequences(spec: &VorticitySpec, s: f64, j_max: u32) -> Result<DepthCatalog> {
    let tb = compute_tau_bounds(spec, s);
    let h0 = depth_h0_with(spec, s, &tb)?;
    let yb = compute_y_bounds_with(spec, s, &tb)?;
    let period = yb.y_plus - yb.y_minus; // infinite unless both finite
    let mut depths_plus = Vec::new();
    for j in 0..=j_max {
        let h = if j % 2 == 0 {
            let k = (j / 2) as f64;
            if j == 0 {
                h0
            } else if period.is_finite() {
                h0 + 2.0 * k * period
            } else {
                f64::INFINITY
            }
        } else {
            let k = ((j - 1) / 2) as f64;
            if !yb.y_plus.is_finite() {
                f64::INFINITY
            } else if j == 1 {
                h0 + 2.0 * (yb.y_plus - h0)
            } else if period.is_finite() {
                h0 + 2.0 * (yb.y_plus - h0) + 2.0 * k * period
            } else {
                f64::INFINITY
            }
        };
        if h.is_finite() {
            depths_plus.push(h);
        } else {
            break;
        }
    }
    let depths_minus: Vec<f64> = if yb.y_minus.is_finite() {
        depths_plus.iter().map(|h| h - 2.0 * yb.y_minus).collect()
    } else {
        Vec::new()
    };
    let degenerate = yb.y_plus.is_finite() && (yb.y_plus - h0).abs() <= 1e-12 * h0.max(1.0);
    Ok(DepthCatalog {
        s,
        tau_plus: tb.tau_plus,
        tau_minus: tb.tau_minus,
        y_plus: yb.y_plus,
        y_minus: yb.y_minus,
        depths_plus,
        depths_minus,
        truncation_bound: j_max,
        plus_by_cap: yb.plus_by_cap,
        minus_by_cap: yb.minus_by_cap,
        degenerate_coincidence: degenerate,
    })
}

/// Bernoulli curve value `R_j^{(+/-)}(s) = [s^2 - 2 Omega(1) + 2 h_j^{(+/-)}(s)] / 3`.
pub fn bernoulli_r(spec: &VorticitySpec, s: f64, branch: Branch) -> Result<f64> {
    let catalog = depth_sequences(spec, s, branch.j)?;
    match catalog.depth(branch) {
        Some(h) => Ok((s * s - 2.0 * spec.big_omega(1.0) + 2.0 * h) / 3.0),
        None => Err(Error::BranchUnavailable {
            branch: branch.to_string(),
            s,
            reason: "depth is infinite".into(),
        }),
    }
}

/// Default scan range for `s`: `(s0 + 1e-6, s0 + 50]` seeded with 2000
/// points, log-spaced near `s0` to resolve the vertical tangent of the
/// Bernoulli curves.
pub fn default_s_grid(s0: f64) -> Vec<f64> {
    s_grid(s0, 1e-6, 50.0, 2000)
}

pub fn s_grid(s0: f64, min_offset: f64, span: f64, seeds: usize) -> Vec<f64> {
    let n_log = seeds / 4;
    let n_lin = seeds - n_log;
    let mut out = Vec::with_capacity(seeds + 1);
    let knee = span.min(1.0);
    for i in 0..n_log {
        out.push(s0 + min_offset * (knee / min_offset).powf(i as f64 / n_log as f64));
    }
    for i in 0..=n_lin {
        out.push(s0 + knee + (span - knee) * i as f64 / n_lin as f64);
    }
    out
}

/// Critical values of the lowest Bernoulli curve.
#[derive(Debug, Clone, Copy)]
pub struct CriticalValues {
    pub s_c: f64,
    pub r_c: f64,
    /// `lim_{s -> s0+} R_0^{(+)}(s)`; `+inf` when the limit diverges.
    pub r0: f64,
}

/// Locates `r_c = min_{s > s0} R_0^{(+)}(s)` by scan plus golden-section,
/// and the limit `r0` by extrapolation along `s0 + 2^{-k} delta`.
pub fn critical_values(spec: &VorticitySpec) -> Result<CriticalValues> {
    let s0 = spec.s0();
    let r0_of = |s: f64| -> Result<f64> {
        let h0 = depth_h0(spec, s)?;
        Ok((s * s - 2.0 * spec.big_omega(1.0) + 2.0 * h0) / 3.0)
    };
    let grid = default_s_grid(s0);
    let mut vals = Vec::with_capacity(grid.len());
    for &s in &grid {
        vals.push(r0_of(s)?);
    }
    let mut imin = 0;
    for (i, &v) in vals.iter().enumerate() {
        if v < vals[imin] {
            imin = i;
        }
    }
    if imin == 0 || imin == grid.len() - 1 {
        return Err(Error::Search(format!(
            "no interior minimum of R_0^(+) within the scan range (edge at s = {})",
            grid[imin]
        )));
    }
    let (s_c, r_c) = golden_min(
        |s| r0_of(s).unwrap_or(f64::INFINITY),
        grid[imin - 1],
        grid[imin + 1],
        tol::root() * grid[imin].abs().max(1.0),
    );

    // Limit toward s0 along a geometric sequence, accelerated by Aitken.
    // Divergence shows up as non-contracting successive differences.
    let delta = 1e-2 * s0.max(1.0);
    let mut seq = Vec::with_capacity(15);
    for k in 0..15 {
        let s = s0 + delta * 0.5f64.powi(k);
        seq.push(r0_of(s)?);
    }
    let mut ratios = Vec::new();
    for w in seq.windows(3) {
        let (d0, d1) = (w[1] - w[0], w[2] - w[1]);
        if d0.abs() > 1e-12 * w[1].abs().max(1.0) {
            ratios.push((d1 / d0).abs());
        }
    }
    let tail_diverges = ratios.iter().rev().take(4).all(|&r| r > 0.95);
    let r0 = if (tail_diverges && !ratios.is_empty()) || seq.last().unwrap().abs() > 1e9 {
        f64::INFINITY
    } else {
        aitken(&seq)
    };
    Ok(CriticalValues { s_c, r_c, r0 })
}

fn aitken(seq: &[f64]) -> f64 {
    let mut cur = seq.to_vec();
    for _ in 0..3 {
        if cur.len() < 3 {
            break;
        }
        let mut next = Vec::with_capacity(cur.len() - 2);
        for w in cur.windows(3) {
            let denom = w[2] - 2.0 * w[1] + w[0];
            if denom.abs() < 1e-14 * w[2].abs().max(1.0) {
                next.push(w[2]);
            } else {
                next.push(w[2] - (w[2] - w[1]) * (w[2] - w[1]) / denom);
            }
        }
        cur = next;
    }
    *cur.last().unwrap()
}

/// All roots of `R_branch(s) = r` on the default scan range (empty list
/// allowed).
pub fn solve_bernoulli_for_s(spec: &VorticitySpec, branch: Branch, r: f64) -> Result<Vec<f64>> {
    solve_bernoulli_for_s_on(spec, branch, r, &default_s_grid(spec.s0()))
}

/// Same on a caller-supplied seed grid (ascending in `s`).
pub fn solve_bernoulli_for_s_on(
    spec: &VorticitySpec,
    branch: Branch,
    r: f64,
    grid: &[f64],
) -> Result<Vec<f64>> {
    let mut defined: Vec<(f64, f64)> = Vec::with_capacity(grid.len());
    for &s in grid {
        match bernoulli_r(spec, s, branch) {
            Ok(v) => defined.push((s, v - r)),
            Err(Error::BranchUnavailable { .. }) => defined.push((s, f64::NAN)),
            Err(e) => return Err(e),
        }
    }
    let mut roots = Vec::new();
    for w in defined.windows(2) {
        let ((a, fa), (b, fb)) = (w[0], w[1]);
        if !fa.is_finite() || !fb.is_finite() {
            continue;
        }
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa.signum() != fb.signum() {
            let root = bisect(
                |s| bernoulli_r(spec, s, branch).map(|v| v - r).unwrap_or(f64::NAN),
                a,
                b,
                tol::root() * b.abs().max(1.0),
            )?;
            roots.push(root);
        }
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * a.abs().max(1.0));
    Ok(roots)
}

/// One shear flow: parameter `s`, branch label, depth `h`, dense `U`
/// samples, surface slope `kappa = U'(h)` and total head `r`.
#[derive(Debug, Clone)]
pub struct StreamSolution {
    pub spec: VorticitySpec,
    pub s: f64,
    pub branch: Branch,
    pub h: f64,
    pub kappa: f64,
    pub r: f64,
    traj: Trajectory,
}

impl StreamSolution {
    pub fn u(&self, y: f64) -> f64 {
        self.traj.u(y)
    }

    pub fn u_prime(&self, y: f64) -> f64 {
        self.traj.u_prime(y)
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.traj
    }

    /// `omega'(U(Y))`, the potential entering the dispersion problem.
    pub fn omega_prime_at(&self, y: f64) -> f64 {
        self.spec.omega_prime(self.u(y))
    }
}

/// Assembles the stream solution for `(s, branch)`: integrates the Cauchy
/// problem with the branch's datum sign up to the branch depth, polishes
/// the depth against `U(h) = 1`, and enforces the first-integral and
/// Bernoulli invariants.
pub fn build_stream_solution(
    spec: &VorticitySpec,
    s: f64,
    branch: Branch,
) -> Result<StreamSolution> {
    let catalog = depth_sequences(spec, s, branch.j)?;
    let h_quad = catalog.depth(branch).ok_or_else(|| Error::BranchUnavailable {
        branch: branch.to_string(),
        s,
        reason: "depth is infinite".into(),
    })?;
    let margin = h_quad * 1e-6 + 1e-9;
    let traj = integrate_cauchy(spec, s, branch.sign, h_quad + margin)?;

    // One Newton step pins U(h) = 1 to machine precision; the quadrature
    // depth is already accurate to ~1e-10.
    let mut h = h_quad;
    for _ in 0..3 {
        let (u, up) = (traj.u(h), traj.u_prime(h));
        if up.abs() < 1e-12 {
            break;
        }
        let step = (1.0 - u) / up;
        h += step;
        if step.abs() < 1e-15 * h {
            break;
        }
    }
    if (traj.u(h) - 1.0).abs() > 1e-9 {
        return Err(Error::Consistency(format!(
            "assembled stream violates U(h) = 1: U({h}) = {} (branch {branch}, s = {s}, quadrature depth {h_quad})",
            traj.u(h)
        )));
    }
    if (h - h_quad).abs() > 1e-6 * h_quad.max(1.0) {
        return Err(Error::Consistency(format!(
            "ODE depth {h} and quadrature depth {h_quad} disagree (branch {branch}, s = {s})"
        )));
    }

    let kappa = traj.u_prime(h);
    let r = (s * s - 2.0 * spec.big_omega(1.0) + 2.0 * h) / 3.0;
    let scale = s.mul_add(s, 0.0).max(1.0);
    let fi = first_integral_residual(&traj, spec, s);
    if fi > 1e-8 * scale {
        return Err(Error::Consistency(format!(
            "first-integral residual {fi} exceeds tolerance (branch {branch}, s = {s})"
        )));
    }
    let ber = (kappa * kappa - (3.0 * r - 2.0 * h)).abs();
    if ber > 1e-8 * scale {
        return Err(Error::Consistency(format!(
            "kappa^2 = 3r - 2h violated by {ber} (branch {branch}, s = {s})"
        )));
    }
    Ok(StreamSolution { spec: spec.clone(), s, branch, h, kappa, r, traj })
}

/// `dh/ds` for the branch depth, from the variational equation
/// `w'' + omega'(U) w = 0`, `w(0) = 0`, `w'(0) = 1`:
/// differentiating `U(h(s); +/- s) = 1` gives `dh/ds = -/+ w(h) / U'(h)`.
pub fn h_derivative(stream: &StreamSolution) -> Result<f64> {
    if stream.kappa.abs() < 1e-10 {
        return Err(Error::Degenerate(format!(
            "U'(h) = {} at s = {}: free surface is degenerate",
            stream.kappa, stream.s
        )));
    }
    let spec = stream.spec.clone();
    let t = tol::ode();
    let opts = OdeOptions { rtol: t, atol: t / 10.0, ..Default::default() };
    let sol = integrate(
        |_, y: &[f64; 4]| {
            [y[1], -spec.omega(y[0]), y[3], -spec.omega_prime(y[0]) * y[2]]
        },
        0.0,
        stream.h,
        [0.0, stream.branch.sign.factor() * stream.s, 0.0, 1.0],
        &opts,
    )?;
    let w_h = sol.last().y[2];
    Ok(-stream.branch.sign.factor() * w_h / stream.kappa)
}

/// Central finite difference of the depth formulas, Richardson-extrapolated;
/// used as the independent cross-check of [`h_derivative`].
pub fn h_derivative_fd(spec: &VorticitySpec, s: f64, branch: Branch, delta: f64) -> Result<f64> {
    let d = |dd: f64| -> Result<f64> {
        let hp = depth_sequences(spec, s + dd, branch.j)?
            .depth(branch)
            .ok_or_else(|| Error::BranchUnavailable {
                branch: branch.to_string(),
                s: s + dd,
                reason: "depth is infinite".into(),
            })?;
        let hm = depth_sequences(spec, s - dd, branch.j)?
            .depth(branch)
            .ok_or_else(|| Error::BranchUnavailable {
                branch: branch.to_string(),
                s: s - dd,
                reason: "depth is infinite".into(),
            })?;
        Ok((hp - hm) / (2.0 * dd))
    };
    let d1 = d(delta)?;
    let d2 = d(delta / 2.0)?;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Counter-current structure of a stream solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterCurrents {
    /// Number of layers with alternating flow direction.
    pub layers: u32,
    /// Direction of the near-bottom layer matches the critical flow.
    pub near_bottom_matches_critical: bool,
    /// Sign of `U'` just below the free surface.
    pub near_surface_sign: i8,
}

/// Counts directional layers: branch `(j, +)` carries `j + 1` layers with
/// the near-bottom direction of the critical flow, `(j, -)` carries `j + 2`
/// reversed ones; the formula is verified against the sampled sign changes
/// of `U'`.
pub fn classify_counter_currents(stream: &StreamSolution) -> Result<CounterCurrents> {
    let mut changes = 0u32;
    let mut prev = 0i8;
    for (y, _, up) in stream.traj.samples() {
        if y > stream.h {
            break;
        }
        let sign = if up > 1e-12 {
            1
        } else if up < -1e-12 {
            -1
        } else {
            0
        };
        if sign != 0 {
            if prev != 0 && sign != prev {
                changes += 1;
            }
            prev = sign;
        }
    }
    let sampled_layers = changes + 1;
    let expected = match stream.branch.sign {
        FlowSign::Plus => stream.branch.j + 1,
        FlowSign::Minus => stream.branch.j + 2,
    };
    if sampled_layers != expected {
        return Err(Error::Classification(format!(
            "branch {} predicts {expected} layers but samples show {sampled_layers}",
            stream.branch
        )));
    }
    Ok(CounterCurrents {
        layers: expected,
        near_bottom_matches_critical: stream.branch.sign == FlowSign::Plus,
        near_surface_sign: if stream.kappa > 0.0 { 1 } else { -1 },
    })
}
