//! Dense complex linear algebra on small tensor-product spaces.
//!
//! Basis states of a composite space are enumerated with the first factor
//! most significant, so `kron(a, b)` acts with `a` on factor 0 and `b` on
//! factor 1. Spins always come before bosonic modes or grid positions.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use nalgebra::{DMatrix, DVector};

use crate::tolerance::TOLERANCES;
use crate::{Error, Result, C64};

/// Ordered list of local dimensions of a composite Hilbert space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HilbertSpec {
    factor_dims: Vec<usize>,
}

impl HilbertSpec {
    pub fn new(factor_dims: Vec<usize>) -> Result<Self> {
        if factor_dims.is_empty() {
            return Err(Error::InvalidSpace("no factors".into()));
        }
        if let Some(&d) = factor_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidSpace(format!("factor dimension {d} < 2")));
        }
        factor_dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::InvalidSpace("total dimension overflows".into()))?;
        Ok(Self { factor_dims })
    }

    /// `n` spin-½ factors.
    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn factor_dims(&self) -> &[usize] {
        &self.factor_dims
    }

    pub fn n_factors(&self) -> usize {
        self.factor_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.factor_dims.iter().product()
    }

    /// Stride of each factor in the flattened basis index.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.factor_dims.len()];
        for k in (0..self.factor_dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.factor_dims[k + 1];
        }
        strides
    }

    /// Space of `self ⊗ other`.
    pub fn tensor(&self, other: &HilbertSpec) -> HilbertSpec {
        let mut dims = self.factor_dims.clone();
        dims.extend_from_slice(&other.factor_dims);
        HilbertSpec { factor_dims: dims }
    }

    fn check_factor_set(&self, set: &[usize]) -> Result<Vec<usize>> {
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != set.len() {
            return Err(Error::InvalidParameter("repeated factor index".into()));
        }
        if let Some(&k) = sorted.iter().find(|&&k| k >= self.n_factors()) {
            return Err(Error::FactorOutOfRange {
                index: k,
                len: self.n_factors(),
            });
        }
        Ok(sorted)
    }

    /// Flattened offsets of every basis state of the listed factors, with the
    /// other factors held at index zero. The last listed factor runs fastest.
    fn offsets(&self, factors: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut offsets = vec![0usize];
        for &f in factors {
            let mut next = Vec::with_capacity(offsets.len() * self.factor_dims[f]);
            for &o in &offsets {
                for i in 0..self.factor_dims[f] {
                    next.push(o + i * strides[f]);
                }
            }
            offsets = next;
        }
        offsets
    }
}

impl fmt::Display for HilbertSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<String> = self.factor_dims.iter().map(|d| d.to_string()).collect();
        write!(f, "[{}]", dims.join("x"))
    }
}

/// Square complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidOperator(format!(
                "matrix is {}x{}, not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidOperator("empty matrix".into()));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidOperator("non-finite entry".into()));
        }
        Ok(Self(matrix))
    }

    /// Row-major entries.
    pub fn from_row_slice(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_fn<F: FnMut(usize, usize) -> C64>(dim: usize, f: F) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "max_abs_diff on different dimensions");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - self†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Spectral norm bound `max |entry|`; used for commutator checks.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.0.clone().singular_values().max()
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.0 * v
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.0.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Lift a single-factor operator to the full space, identity elsewhere.
pub fn embed(op: &ComplexMatrix, site: usize, spec: &HilbertSpec) -> Result<ComplexMatrix> {
    let dims = spec.factor_dims();
    if site >= dims.len() {
        return Err(Error::FactorOutOfRange {
            index: site,
            len: dims.len(),
        });
    }
    if op.dim() != dims[site] {
        return Err(Error::DimensionMismatch {
            expected: dims[site],
            found: op.dim(),
        });
    }
    let before: usize = dims[..site].iter().product();
    let after: usize = dims[site + 1..].iter().product();
    let mut out = op.clone();
    if before > 1 {
        out = kron(&ComplexMatrix::identity(before), &out);
    }
    if after > 1 {
        out = kron(&out, &ComplexMatrix::identity(after));
    }
    Ok(out)
}

/// Normalized pure state on a composite space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    spec: HilbertSpec,
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(spec: HilbertSpec, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != spec.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.total_dim(),
                found: amplitudes.len(),
            });
        }
        let amplitudes = DVector::from_vec(amplitudes);
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > TOLERANCES.normalization {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(Self { spec, amplitudes })
    }

    /// Rescale arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(spec: HilbertSpec, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != spec.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.total_dim(),
                found: amplitudes.len(),
            });
        }
        let mut amplitudes = DVector::from_vec(amplitudes);
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        amplitudes.unscale_mut(norm);
        Ok(Self { spec, amplitudes })
    }

    pub fn basis(spec: HilbertSpec, index: usize) -> Result<Self> {
        let dim = spec.total_dim();
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} >= dimension {dim}"
            )));
        }
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { spec, amplitudes })
    }

    pub fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn as_slice(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        StateVector {
            spec: self.spec.tensor(&other.spec),
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.spec != other.spec {
            return Err(Error::DimensionMismatch {
                expected: self.spec.total_dim(),
                found: other.spec.total_dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn density(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix::trusted(self.spec.clone(), ComplexMatrix(m))
    }
}

/// Mixed state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    spec: HilbertSpec,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validated constructor (Hermiticity, trace and spectrum).
    pub fn new(spec: HilbertSpec, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != spec.total_dim() {
            return Err(Error::DimensionMismatch {
                expected: spec.total_dim(),
                found: matrix.dim(),
            });
        }
        let defect = matrix.hermiticity_defect();
        if defect > TOLERANCES.state_hermiticity {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TOLERANCES.trace || tr.im.abs() > TOLERANCES.trace {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_ev = matrix.hermitian_eigenvalues()[0];
        if min_ev < TOLERANCES.positivity {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_ev:e}")));
        }
        Ok(Self { spec, matrix })
    }

    /// For matrices that are valid by construction (projectors, tensor
    /// products and mixtures of valid states, partial traces).
    pub(crate) fn trusted(spec: HilbertSpec, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(matrix.dim(), spec.total_dim());
        Self { spec, matrix }
    }

    pub fn maximally_mixed(spec: HilbertSpec) -> Self {
        let dim = spec.total_dim();
        let matrix = ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0));
        Self { spec, matrix }
    }

    /// Convex combination of states on the same space.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        let spec = first.1.spec.clone();
        let mut total = 0.0;
        let mut acc = DMatrix::zeros(spec.total_dim(), spec.total_dim());
        for (w, rho) in parts {
            if *w < 0.0 || !w.is_finite() {
                return Err(Error::InvalidParameter(format!("mixture weight {w}")));
            }
            if rho.spec != spec {
                return Err(Error::DimensionMismatch {
                    expected: spec.total_dim(),
                    found: rho.spec.total_dim(),
                });
            }
            total += w;
            acc += &rho.matrix.0 * C64::new(*w, 0.0);
        }
        if (total - 1.0).abs() > TOLERANCES.trace {
            return Err(Error::InvalidParameter(format!("mixture weights sum to {total}")));
        }
        Ok(Self::trusted(spec, ComplexMatrix(acc)))
    }

    pub fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self::trusted(self.spec.tensor(&other.spec), kron(&self.matrix, &other.matrix))
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ.
        self.matrix.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.hermitian_eigenvalues()
    }
}

/// Anything an operator expectation value can be taken on.
pub trait QuantumState {
    fn spec(&self) -> &HilbertSpec;

    /// `⟨ψ|op|ψ⟩` or `Tr[op ρ]`.
    fn expectation_of(&self, op: &ComplexMatrix) -> Result<C64>;

    /// Reduced state on the listed factors.
    fn reduce(&self, keep: &[usize]) -> Result<DensityMatrix>;
}

fn check_op_dim(op: &ComplexMatrix, spec: &HilbertSpec) -> Result<()> {
    if op.dim() != spec.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: spec.total_dim(),
            found: op.dim(),
        });
    }
    Ok(())
}

impl QuantumState for StateVector {
    fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    fn expectation_of(&self, op: &ComplexMatrix) -> Result<C64> {
        check_op_dim(op, &self.spec)?;
        Ok(self.amplitudes.dotc(&(&op.0 * &self.amplitudes)))
    }

    fn reduce(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace_pure(self, keep)
    }
}

impl QuantumState for DensityMatrix {
    fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    fn expectation_of(&self, op: &ComplexMatrix) -> Result<C64> {
        check_op_dim(op, &self.spec)?;
        let n = op.dim();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            for i in 0..n {
                acc += op.0[(i, j)] * self.matrix.0[(j, i)];
            }
        }
        Ok(acc)
    }

    fn reduce(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }
}

/// `⟨op⟩` on a pure or mixed state.
pub fn expectation<S: QuantumState + ?Sized>(op: &ComplexMatrix, state: &S) -> Result<C64> {
    state.expectation_of(op)
}

/// Expectation of a Hermitian operator as a real number, rejecting results
/// whose imaginary part exceeds the configured residue.
pub fn real_expectation<S: QuantumState + ?Sized>(op: &ComplexMatrix, state: &S) -> Result<f64> {
    let z = state.expectation_of(op)?;
    real_part_checked(z)
}

pub(crate) fn real_part_checked(z: C64) -> Result<f64> {
    if z.im.abs() > TOLERANCES.imaginary_residue {
        return Err(Error::ImaginaryResidue {
            residue: z.im.abs(),
            tolerance: TOLERANCES.imaginary_residue,
        });
    }
    Ok(z.re)
}

fn split_factors(spec: &HilbertSpec, keep: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    if keep.is_empty() {
        return Err(Error::EmptyKeepSet);
    }
    let keep = spec.check_factor_set(keep)?;
    let traced: Vec<usize> = (0..spec.n_factors()).filter(|k| !keep.contains(k)).collect();
    Ok((keep, traced))
}

fn reduced_spec(spec: &HilbertSpec, keep: &[usize]) -> HilbertSpec {
    HilbertSpec {
        factor_dims: keep.iter().map(|&k| spec.factor_dims[k]).collect(),
    }
}

/// Trace out every factor not listed in `keep`. Kept factors stay in their
/// original relative order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let (keep, traced) = split_factors(&rho.spec, keep)?;
    let keep_off = rho.spec.offsets(&keep);
    let trace_off = rho.spec.offsets(&traced);
    let m = &rho.matrix.0;
    let out = DMatrix::from_fn(keep_off.len(), keep_off.len(), |a, b| {
        trace_off
            .iter()
            .map(|&t| m[(keep_off[a] + t, keep_off[b] + t)])
            .sum()
    });
    Ok(DensityMatrix::trusted(reduced_spec(&rho.spec, &keep), ComplexMatrix(out)))
}

/// Reduced state of a pure state without forming the full projector.
pub fn partial_trace_pure(psi: &StateVector, keep: &[usize]) -> Result<DensityMatrix> {
    let (keep, traced) = split_factors(&psi.spec, keep)?;
    let keep_off = psi.spec.offsets(&keep);
    let trace_off = psi.spec.offsets(&traced);
    let amps = psi.amplitudes.as_slice();
    let n = keep_off.len();
    let mut out = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let z: C64 = trace_off
                .iter()
                .map(|&t| amps[keep_off[a] + t] * amps[keep_off[b] + t].conj())
                .sum();
            out[(a, b)] = z;
            out[(b, a)] = z.conj();
        }
    }
    Ok(DensityMatrix::trusted(reduced_spec(&psi.spec, &keep), ComplexMatrix(out)))
}
