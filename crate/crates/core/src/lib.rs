//! Event-driven wave-front tracking for one-dimensional strictly hyperbolic
//! balance laws `u_t + f(u)_x = g(x, u)`, with the source localized as
//! stationary zero-waves on a lattice, plus the diagnostics needed to study
//! Glimm functionals and the decay of positive waves.

pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod log;
pub mod newton;
pub mod oracle;
pub mod profile;
pub mod quad;
pub mod riemann;
pub mod source;
pub mod system;
pub mod tracker;

pub use error::{Error, Result};
pub use source::{Omega, SourceSpec, SourceTerm};
pub use system::{
    validate_assumptions, DomainBox, Eigen, FieldKind, Flux, State, SystemSpec, ValidationReport,
};
