//! Horizontal shear flows of the steady water-wave problem with vorticity,
//! their dispersion equations and the bifurcation wavelengths of
//! small-amplitude Stokes waves.
//!
//! Given a vorticity distribution `omega(psi)` the crate computes, in
//! non-dimensional variables:
//!
//! - all stream solutions `(U(Y; s), h)` parameterized by the surface shear
//!   `s >= s0`, including the depth sequences `h_j^{(+/-)}(s)`, Bernoulli
//!   curves `R_j^{(+/-)}(s)` and counter-current structure ([`stream`]);
//! - the dispersion function `sigma(tau) = kappa gamma'(h, tau) - 1/kappa
//!   + omega(1)` by Sturm-Liouville shooting, its poles (Dirichlet
//!   eigenvalues), and its simple positive roots, each of which defines a
//!   bifurcation wavelength `Lambda0 = 2 pi / tau0` ([`dispersion`]);
//! - the linearized bifurcation kernel `W(z)`, the leading-order Stokes-wave
//!   field, and the fixed-wavelength dispersion `sigma*(tau; s)` with its
//!   transversality diagnostic ([`wave`]);
//! - independent closed-form oracles for the irrotational, constant- and
//!   linear-vorticity families, used for differential testing ([`oracle`]).

pub mod dispersion;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod stream;
pub mod vorticity;
pub mod wave;

pub use dispersion::{DispersionProfile, PoleData, RootRecord};
pub use error::{Error, Result};
pub use stream::{Branch, DepthCatalog, FlowSign, StreamSolution};
pub use vorticity::{VorticityDescriptor, VorticitySpec};
pub use wave::BifurcationReport;
