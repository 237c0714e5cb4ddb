//! Process-wide tolerance knobs.
//!
//! The library defaults match the documented accuracy targets (local ODE
//! tolerance 1e-12, quadrature panel agreement 1e-11, root bisection
//! 1e-12).  A front end may override them once at startup, before any
//! computation; all evaluators read them atomically, so concurrent scans
//! observe one consistent set.

use std::sync::atomic::{AtomicU64, Ordering};

static ODE: AtomicU64 = AtomicU64::new(0);
static QUAD: AtomicU64 = AtomicU64::new(0);
static ROOT: AtomicU64 = AtomicU64::new(0);

fn load(cell: &AtomicU64, default: f64) -> f64 {
    let bits = cell.load(Ordering::Relaxed);
    if bits == 0 {
        default
    } else {
        f64::from_bits(bits)
    }
}

/// Local error tolerance of the adaptive ODE integrators (also governs the
/// shooting engine's panel convergence).
pub fn ode() -> f64 {
    load(&ODE, 1e-12)
}

/// Agreement threshold for quadrature panel doubling.
pub fn quad() -> f64 {
    load(&QUAD, 1e-11)
}

/// Bisection tolerance for scalar root finding (relative to the abscissa
/// scale).
pub fn root() -> f64 {
    load(&ROOT, 1e-12)
}

/// Installs overrides; `None` keeps the default.  Values must be positive.
pub fn set_overrides(ode: Option<f64>, quad: Option<f64>, root: Option<f64>) {
    if let Some(v) = ode {
        ODE.store(v.to_bits(), Ordering::Relaxed);
    }
    if let Some(v) = quad {
        QUAD.store(v.to_bits(), Ordering::Relaxed);
    }
    if let Some(v) = root {
        ROOT.store(v.to_bits(), Ordering::Relaxed);
    }
}
