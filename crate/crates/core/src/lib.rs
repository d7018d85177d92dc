//! Structure-factor entanglement witnesses for spin-½ particles whose
//! positions are quantum degrees of freedom.
//!
//! The crate covers three witness flavors:
//!
//! * classical scatterer positions ([`witness::witness_classical`]),
//! * Gaussian-delocalized positions on a discretized grid
//!   ([`witness::witness_gaussian`]),
//! * trapped-ion chains whose positions fluctuate through normal modes
//!   ([`witness::witness_bc`]),
//!
//! together with the closed-form expectation values for the exemplary
//! states and an [`oracle`] layer that checks every closed form against
//! brute-force contractions in truncated or discretized spaces.
//!
//! Composite spaces are always ordered spins first, then bosonic modes or
//! particle positions.

pub mod chain;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod numeric;
pub mod oracle;
pub mod sampling;
pub mod spin;
pub mod tensor;
pub mod tolerance;
pub mod witness;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
