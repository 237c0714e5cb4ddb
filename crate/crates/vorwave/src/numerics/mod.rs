//! Shared numerical kernels: adaptive Runge-Kutta integration, scaled
//! shooting for Schroedinger-form equations, composite Gauss-Legendre
//! quadrature and bracketed root finding.

pub mod ode;
pub mod quad;
pub mod root;
pub mod shoot;
pub mod tol;
