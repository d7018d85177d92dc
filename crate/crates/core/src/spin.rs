//! Pauli algebra, pair correlators, named two-spin states and the Wootters
//! concurrence.
//!
//! Single-spin basis: |↑⟩ = (1, 0), |↓⟩ = (0, 1), so σ^z|↑⟩ = +|↑⟩.
//! Two-spin basis order is (↑↑, ↑↓, ↓↑, ↓↓).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::tensor::{
    embed, kron, real_part_checked, ComplexMatrix, DensityMatrix, HilbertSpec, QuantumState,
    StateVector,
};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    pub fn symbol(self) -> char {
        match self {
            PauliAxis::X => 'x',
            PauliAxis::Y => 'y',
            PauliAxis::Z => 'z',
        }
    }
}

impl fmt::Display for PauliAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn pauli(axis: PauliAxis) -> ComplexMatrix {
    let entries = match axis {
        PauliAxis::X => [ZERO, ONE, ONE, ZERO],
        PauliAxis::Y => [ZERO, -I, I, ZERO],
        PauliAxis::Z => [ONE, ZERO, ZERO, -ONE],
    };
    ComplexMatrix::new(DMatrix::from_row_slice(2, 2, &entries)).expect("Pauli matrices are valid")
}

/// σ^α ⊗ σ^α on two spins.
pub fn pauli_pair(axis: PauliAxis) -> ComplexMatrix {
    let s = pauli(axis);
    kron(&s, &s)
}

/// Pair correlators ⟨σ_i^α σ_j^α⟩ for i < j.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelatorTable {
    n_spins: usize,
    entries: BTreeMap<(usize, usize, PauliAxis), f64>,
}

impl CorrelatorTable {
    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    /// Order of `i` and `j` does not matter.
    pub fn get(&self, i: usize, j: usize, axis: PauliAxis) -> Option<f64> {
        let key = if i < j { (i, j, axis) } else { (j, i, axis) };
        self.entries.get(&key).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize, PauliAxis), &f64)> {
        self.entries.iter()
    }

    /// Σ_{i<j} ⟨σ_i^α σ_j^α⟩.
    pub fn axis_sum(&self, axis: PauliAxis) -> f64 {
        self.entries
            .iter()
            .filter(|((_, _, a), _)| *a == axis)
            .map(|(_, v)| v)
            .sum()
    }
}

/// All pair correlators of the first `n` factors, which must be spins.
/// Any further factors (modes, positions) are traced out first.
pub fn correlators<S: QuantumState + ?Sized>(state: &S, n: usize) -> Result<CorrelatorTable> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least two spins, got {n}")));
    }
    let dims = state.spec().factor_dims();
    if dims.len() < n || dims[..n].iter().any(|&d| d != 2) {
        return Err(Error::InvalidParameter(format!(
            "first {n} factors of {} are not all spins",
            state.spec()
        )));
    }
    let keep: Vec<usize> = (0..n).collect();
    let spins = state.reduce(&keep)?;
    let spec = spins.spec().clone();
    let mut entries = BTreeMap::new();
    for axis in PauliAxis::ALL {
        let s = pauli(axis);
        let lifted: Vec<ComplexMatrix> = (0..n).map(|k| embed(&s, k, &spec)).collect::<Result<_>>()?;
        for i in 0..n {
            for j in i + 1..n {
                let op = &lifted[i] * &lifted[j];
                let value = real_part_checked(spins.expectation_of(&op)?)?;
                entries.insert((i, j, axis), value);
            }
        }
    }
    Ok(CorrelatorTable { n_spins: n, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalState {
    Singlet,
    PsiPlus,
    UpUp,
    UpDown,
    DownUp,
    DownDown,
}

impl CanonicalState {
    pub const ALL: [CanonicalState; 6] = [
        CanonicalState::Singlet,
        CanonicalState::PsiPlus,
        CanonicalState::UpUp,
        CanonicalState::UpDown,
        CanonicalState::DownUp,
        CanonicalState::DownDown,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CanonicalState::Singlet => "singlet",
            CanonicalState::PsiPlus => "psi_plus",
            CanonicalState::UpUp => "up_up",
            CanonicalState::UpDown => "up_down",
            CanonicalState::DownUp => "down_up",
            CanonicalState::DownDown => "down_down",
        }
    }
}

impl FromStr for CanonicalState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::UnknownState(s.to_string()))
    }
}

impl fmt::Display for CanonicalState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn canonical_state(which: CanonicalState) -> StateVector {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let amps = match which {
        CanonicalState::Singlet => vec![ZERO, h, -h, ZERO],
        CanonicalState::PsiPlus => vec![ZERO, h, h, ZERO],
        CanonicalState::UpUp => vec![ONE, ZERO, ZERO, ZERO],
        CanonicalState::UpDown => vec![ZERO, ONE, ZERO, ZERO],
        CanonicalState::DownUp => vec![ZERO, ZERO, ONE, ZERO],
        CanonicalState::DownDown => vec![ZERO, ZERO, ZERO, ONE],
    };
    StateVector::new(HilbertSpec::qubits(2).expect("two qubits"), amps)
        .expect("canonical states are normalized")
}

/// Lookup by name, e.g. `"psi_plus"`.
pub fn canonical_state_by_name(name: &str) -> Result<StateVector> {
    Ok(canonical_state(name.parse()?))
}

/// Single-qubit state from Bloch vector `r` (|r| ≤ 1).
pub fn qubit_from_bloch(r: [f64; 3]) -> Result<DensityMatrix> {
    let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if len > 1.0 + 1e-12 {
        return Err(Error::InvalidState(format!("Bloch vector length {len} > 1")));
    }
    let half = C64::new(0.5, 0.0);
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            half * (1.0 + r[2]),
            half * C64::new(r[0], -r[1]),
            half * C64::new(r[0], r[1]),
            half * (1.0 - r[2]),
        ],
    );
    DensityMatrix::new(HilbertSpec::qubits(1)?, ComplexMatrix::new(m)?)
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.spec().factor_dims() != [2, 2] {
        return Err(Error::InvalidState(format!(
            "concurrence needs two qubits, got {}",
            rho.spec()
        )));
    }
    // Re-validate: the caller may hold a matrix built by trusted paths that
    // accumulated rounding.
    let rho = DensityMatrix::new(rho.spec().clone(), rho.matrix().clone())?;
    // With ρ = W W†, the Wootters numbers are the singular values of the
    // complex-symmetric Wᵀ(σʸ⊗σʸ)W. Taking them directly avoids square
    // roots of rounding-level eigenvalues for nearly pure states.
    let eig = SymmetricEigen::new(rho.matrix().matrix().clone());
    let mut w = eig.eigenvectors;
    for (k, &p) in eig.eigenvalues.iter().enumerate() {
        let root = C64::new(p.max(0.0).sqrt(), 0.0);
        w.column_mut(k).iter_mut().for_each(|z| *z *= root);
    }
    let yy = pauli_pair(PauliAxis::Y).into_inner();
    let tau = w.transpose() * yy * &w;
    let mut s: Vec<f64> = tau.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok((s[0] - s[1] - s[2] - s[3]).clamp(0.0, 1.0))
}
