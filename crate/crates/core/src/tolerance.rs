//! Numerical tolerances used by validation checks across the crate.
//!
//! Every threshold that decides whether an object is a valid state, a
//! Hermitian operator or a real expectation value lives here so that checks
//! in different modules cannot drift apart.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Allowed deviation of a state vector's 2-norm from one.
    pub normalization: f64,
    /// Allowed deviation of a density matrix trace from one.
    pub trace: f64,
    /// Largest `|ρ - ρ†|` entry accepted for a density matrix.
    pub state_hermiticity: f64,
    /// Most negative eigenvalue accepted for a density matrix.
    pub positivity: f64,
    /// Largest `|W - W†|` entry accepted for an assembled witness.
    pub operator_hermiticity: f64,
    /// Largest imaginary part tolerated when reading a Hermitian expectation
    /// value as a real number.
    pub imaginary_residue: f64,
    /// Largest tail population tolerated beyond a Fock truncation.
    pub truncation_tail: f64,
}

pub const TOLERANCES: Tolerances = Tolerances {
    normalization: 1e-12,
    trace: 1e-12,
    state_hermiticity: 1e-12,
    positivity: -1e-10,
    operator_hermiticity: 1e-10,
    imaginary_residue: 1e-10,
    truncation_tail: 1e-10,
};
