//! Vorticity distributions and their derived quantities.
//!
//! A [`VorticitySpec`] packages a distribution `omega(t)` together with its
//! derivative and its primitive `Omega(t) = int_0^t omega`, normalized so
//! that `Omega(0) = 0` exactly.  Stream solutions exist only for shear
//! parameters `s >= s0 = sqrt(2 max_{[0,1]} Omega)`.

use crate::error::{Error, Result};
use crate::numerics::root::golden_min;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, OnceLock};

/// Structured description of a vorticity distribution, as ingested from a
/// run configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum VorticityDescriptor {
    Zero,
    Constant { b: f64 },
    Linear { b: f64 },
    /// `omega(t) = sum coeffs[k] t^k`.
    Polynomial { coeffs: Vec<f64> },
    /// Strictly increasing abscissae with at least 4 nodes.
    Tabulated { grid: Vec<(f64, f64)> },
}

#[derive(Debug, Clone)]
enum Kind {
    Zero,
    Constant(f64),
    Linear(f64),
    Polynomial(Vec<f64>),
    Tabulated(Arc<Spline>),
}

/// An immutable vorticity distribution; all evaluators are pure and the
/// type is `Send + Sync`, so concurrent scans may share one instance.
#[derive(Debug, Clone)]
pub struct VorticitySpec {
    kind: Kind,
    lipschitz_bound: f64,
    extrapolated: Arc<AtomicBool>,
    s0_cache: Arc<OnceLock<(f64, f64)>>,
}

impl VorticitySpec {
    pub fn new(descriptor: VorticityDescriptor) -> Result<Self> {
        let kind = match descriptor {
            VorticityDescriptor::Zero => Kind::Zero,
            VorticityDescriptor::Constant { b } => {
                require_finite("b", b)?;
                Kind::Constant(b)
            }
            VorticityDescriptor::Linear { b } => {
                require_finite("b", b)?;
                Kind::Linear(b)
            }
            VorticityDescriptor::Polynomial { coeffs } => {
                if coeffs.is_empty() {
                    return Err(Error::Config {
                        field: "coeffs",
                        message: "polynomial vorticity needs at least one coefficient".into(),
                    });
                }
                for &c in &coeffs {
                    require_finite("coeffs", c)?;
                }
                Kind::Polynomial(coeffs)
            }
            VorticityDescriptor::Tabulated { grid } => {
                if grid.len() < 4 {
                    return Err(Error::Config {
                        field: "grid",
                        message: format!("tabulated vorticity needs >= 4 nodes, got {}", grid.len()),
                    });
                }
                for &(t, w) in &grid {
                    require_finite("grid", t)?;
                    require_finite("grid", w)?;
                }
                for w in grid.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(Error::Config {
                            field: "grid",
                            message: format!(
                                "abscissae must be strictly increasing ({} then {})",
                                w[0].0, w[1].0
                            ),
                        });
                    }
                }
                Kind::Tabulated(Arc::new(Spline::natural(&grid)))
            }
        };
        let lipschitz_bound = lipschitz_bound(&kind);
        Ok(Self {
            kind,
            lipschitz_bound,
            extrapolated: Arc::new(AtomicBool::new(false)),
            s0_cache: Arc::new(OnceLock::new()),
        })
    }

    pub fn zero() -> Self {
        Self::new(VorticityDescriptor::Zero).expect("zero descriptor is valid")
    }

    pub fn constant(b: f64) -> Result<Self> {
        Self::new(VorticityDescriptor::Constant { b })
    }

    pub fn linear(b: f64) -> Result<Self> {
        Self::new(VorticityDescriptor::Linear { b })
    }

    /// `omega(t)`.
    pub fn omega(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Zero => 0.0,
            Kind::Constant(b) => *b,
            Kind::Linear(b) => b * t,
            Kind::Polynomial(c) => horner(c, t),
            Kind::Tabulated(sp) => {
                self.flag_if_outside(sp, t);
                sp.value(t)
            }
        }
    }

    /// `omega'(t)`; analytic for polynomial kinds, spline-consistent for
    /// tabulated ones.
    pub fn omega_prime(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Zero | Kind::Constant(_) => 0.0,
            Kind::Linear(b) => *b,
            Kind::Polynomial(c) => horner_derivative(c, t),
            Kind::Tabulated(sp) => {
                self.flag_if_outside(sp, t);
                sp.derivative(t)
            }
        }
    }

    /// The primitive `Omega(t) = int_0^t omega`, with `Omega(0) = 0` exactly.
    pub fn big_omega(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Zero => 0.0,
            Kind::Constant(b) => b * t,
            Kind::Linear(b) => 0.5 * b * t * t,
            Kind::Polynomial(c) => {
                let mut acc = 0.0;
                for (k, &ck) in c.iter().enumerate().rev() {
                    acc = acc * t + ck / (k + 1) as f64;
                }
                acc * t
            }
            Kind::Tabulated(sp) => {
                self.flag_if_outside(sp, t);
                sp.primitive(t) - sp.primitive(0.0)
            }
        }
    }

    /// Bound on `|omega'|` over the probe range.
    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz_bound
    }

    /// Sticky flag: set when a tabulated distribution was evaluated beyond
    /// its grid (linear extrapolation).
    pub fn extrapolation_seen(&self) -> bool {
        self.extrapolated.load(Ordering::Relaxed)
    }

    /// `s0 = sqrt(2 max_{0 <= tau <= 1} Omega(tau))`, zero when `Omega <= 0`
    /// on `[0, 1]`.  The maximum is located by a dense scan refined by
    /// golden-section on the bracketing cell.
    pub fn s0(&self) -> f64 {
        self.s0_and_maximizer().0
    }

    /// `(s0, tau_hat)` where `tau_hat` is the located maximizer of `Omega`
    /// on `[0, 1]`.
    pub fn s0_and_maximizer(&self) -> (f64, f64) {
        *self.s0_cache.get_or_init(|| {
            let n = 4096usize;
            let mut best = (0usize, f64::NEG_INFINITY);
            for i in 0..=n {
                let t = i as f64 / n as f64;
                let v = self.big_omega(t);
                if v > best.1 {
                    best = (i, v);
                }
            }
            let lo = if best.0 == 0 { 0.0 } else { (best.0 - 1) as f64 / n as f64 };
            let hi = if best.0 == n { 1.0 } else { (best.0 + 1) as f64 / n as f64 };
            let (tau_hat, neg_max) = golden_min(|t| -self.big_omega(t), lo, hi, 1e-12);
            let max = (-neg_max).max(best.1);
            let s0 = if max > 0.0 { (2.0 * max).sqrt() } else { 0.0 };
            (s0, tau_hat)
        })
    }

    fn flag_if_outside(&self, sp: &Spline, t: f64) {
        if t < sp.x[0] || t > *sp.x.last().unwrap() {
            self.extrapolated.store(true, Ordering::Relaxed);
        }
    }
}

fn require_finite(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config { field, message: format!("non-finite value {v}") })
    }
}

fn horner(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck)
}

fn horner_derivative(c: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    for (k, &ck) in c.iter().enumerate().skip(1).rev() {
        acc = acc * t + k as f64 * ck;
    }
    acc
}

fn lipschitz_bound(kind: &Kind) -> f64 {
    match kind {
        Kind::Zero | Kind::Constant(_) => 0.0,
        Kind::Linear(b) => b.abs(),
        Kind::Polynomial(c) => {
            let mut m = 0.0f64;
            for i in 0..=1024 {
                let t = -1.0 + 3.0 * i as f64 / 1024.0;
                m = m.max(horner_derivative(c, t).abs());
            }
            m
        }
        Kind::Tabulated(sp) => {
            let (a, b) = (sp.x[0], *sp.x.last().unwrap());
            let mut m = 0.0f64;
            for i in 0..=1024 {
                let t = a + (b - a) * i as f64 / 1024.0;
                m = m.max(sp.derivative(t).abs());
            }
            m
        }
    }
}

/// Natural cubic spline with cached node primitives.  Outside the grid the
/// spline continues linearly (value and slope of the nearest endpoint).
#[derive(Debug)]
struct Spline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the nodes.
    m: Vec<f64>,
    /// Primitive at the nodes, anchored at the first node.
    cum: Vec<f64>,
}

impl Spline {
    fn natural(grid: &[(f64, f64)]) -> Self {
        let n = grid.len();
        let x: Vec<f64> = grid.iter().map(|g| g.0).collect();
        let y: Vec<f64> = grid.iter().map(|g| g.1).collect();
        // Tridiagonal system for the natural spline moments.
        let mut m = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let mut upper = vec![0.0; n];
        diag[0] = 1.0;
        diag[n - 1] = 1.0;
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            diag[i] = 2.0 * (h0 + h1);
            upper[i] = h1;
            rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
        }
        // Thomas algorithm (lower diagonal equals h0, zero in rows 0 and n-1).
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let lower = if i == 1 { 0.0 } else { h0 };
            let w = lower / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        for i in (1..n - 1).rev() {
            m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
        }

        let mut cum = vec![0.0; n];
        for i in 0..n - 1 {
            let h = x[i + 1] - x[i];
            // Exact integral of the cubic over the cell (equals Simpson on it).
            let cell = 0.5 * h * (y[i] + y[i + 1]) - h * h * h * (m[i] + m[i + 1]) / 24.0;
            cum[i + 1] = cum[i] + cell;
        }
        Self { x, y, m, cum }
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.x.len();
        self.x.partition_point(|&xi| xi <= t).clamp(1, n - 1) - 1
    }

    fn value(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t < self.x[0] {
            return self.y[0] + self.edge_slope(0) * (t - self.x[0]);
        }
        if t > self.x[n - 1] {
            return self.y[n - 1] + self.edge_slope(n - 1) * (t - self.x[n - 1]);
        }
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    fn derivative(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t < self.x[0] {
            return self.edge_slope(0);
        }
        if t > self.x[n - 1] {
            return self.edge_slope(n - 1);
        }
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h
            + ((3.0 * b * b - 1.0) * self.m[i + 1] - (3.0 * a * a - 1.0) * self.m[i]) * h / 6.0
    }

    fn edge_slope(&self, node: usize) -> f64 {
        let n = self.x.len();
        let i = if node == 0 { 0 } else { n - 2 };
        let h = self.x[i + 1] - self.x[i];
        let t = self.x[node];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h
            + ((3.0 * b * b - 1.0) * self.m[i + 1] - (3.0 * a * a - 1.0) * self.m[i]) * h / 6.0
    }

    /// Primitive anchored at the first node; quadratic continuation past the
    /// grid ends.
    fn primitive(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t < self.x[0] {
            let dt = t - self.x[0];
            return self.y[0] * dt + 0.5 * self.edge_slope(0) * dt * dt;
        }
        if t > self.x[n - 1] {
            let dt = t - self.x[n - 1];
            return self.cum[n - 1] + self.y[n - 1] * dt + 0.5 * self.edge_slope(n - 1) * dt * dt;
        }
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        // Antiderivative of the cell cubic, zero at the left node.
        let quartic = |u: f64| u * u * u * u / 4.0 - u * u / 2.0;
        self.cum[i]
            + h * (1.0 - a * a) / 2.0 * self.y[i]
            + h * b * b / 2.0 * self.y[i + 1]
            + h * h * h / 6.0
                * ((quartic(1.0) - quartic(a)) * self.m[i] + quartic(b) * self.m[i + 1])
    }
}
