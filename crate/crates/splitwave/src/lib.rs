//! Pseudospectral operator-splitting solver for the family
//! `u_t + u u_x = K u` on the periodic torus, where `K` is a Fourier
//! multiplier with symbol `k(xi)` (KdV, Benjamin-Ono, Burgers and
//! Whitham-type dispersion all fit this mold).
//!
//! The crate provides the two substep flows (exact multiplier propagator,
//! over-resolved inviscid-Burgers integrator), their Godunov and Strang
//! compositions in both substep orders, an unsplit integrating-factor
//! reference solver, and a measurement harness for convergence orders,
//! symbol conditions and the Sobolev inequalities behind the error
//! estimates.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod reference;
pub mod spectral;
pub mod splitting;
pub mod substeps;
pub mod symbols;

pub use error::{Error, Result};
pub use spectral::{Grid, RealField, SpectralField};
pub use splitting::{evolve, Scheme, SchemeConfig, StepOrder, Trajectory};
pub use substeps::{burgers_step, linear_step, BurgersConfig};
pub use symbols::{verify_conditions, ConditionReport, Symbol, SymbolParams};
