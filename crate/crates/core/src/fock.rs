//! Truncated Fock space of a single bosonic mode: ladder operators,
//! displacement operators, coherent/thermal/Fock states and the
//! characteristic function `C(α) = Tr[ρ D(α)]`.
//!
//! Two displacement constructions are provided. [`displacement`] evaluates
//! the closed-form matrix elements
//!
//! ```text
//! ⟨m|D(α)|n⟩ = √(n!/m!) α^(m-n) e^(-|α|²/2) L_n^(m-n)(|α|²)      (m ≥ n)
//! ```
//!
//! with a normalized three-term recurrence along each diagonal, so every
//! retained element is exact up to rounding. [`displacement_exp`]
//! exponentiates the truncated generator `αa† − ᾱa` in an enlarged working
//! space and crops the result; it is only used as an independent check.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::numeric::{ln_factorial, poisson_tail_above};
use crate::tensor::{ComplexMatrix, DensityMatrix, HilbertSpec, QuantumState, StateVector};
use crate::tolerance::TOLERANCES;
use crate::{Error, Result, C64};

/// Default truncation for the trapped-ion scenarios.
pub const DEFAULT_N_MAX: usize = 60;

/// Largest population allowed beyond `n_max` for displaced and thermal
/// states before a truncation error is raised.
pub const TRUNCATION_TAIL: f64 = TOLERANCES.truncation_tail;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationGuard {
    /// Reject amplitudes and temperatures whose tail beyond `n_max` exceeds
    /// [`TRUNCATION_TAIL`].
    Enforced,
    /// The caller accepts truncation error (convergence studies).
    Acknowledged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockSpace {
    n_max: usize,
    guard: TruncationGuard,
}

impl FockSpace {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidSpace("Fock space needs n_max >= 1".into()));
        }
        Ok(Self {
            n_max,
            guard: TruncationGuard::Enforced,
        })
    }

    /// Same space with the truncation guard switched off.
    pub fn with_acknowledged_truncation(self) -> Self {
        Self {
            guard: TruncationGuard::Acknowledged,
            ..self
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn guard(&self) -> TruncationGuard {
        self.guard
    }

    pub fn spec(&self) -> HilbertSpec {
        HilbertSpec::new(vec![self.dim()]).expect("n_max >= 1")
    }

    /// Smallest truncation whose coherent-state tail at `|α|` is below
    /// [`TRUNCATION_TAIL`].
    pub fn required_for_amplitude(abs_alpha: f64) -> usize {
        let mean = abs_alpha * abs_alpha;
        let mut n = 1usize.max(mean as usize);
        while poisson_tail_above(mean, n) >= TRUNCATION_TAIL {
            n += 1;
        }
        n
    }

    /// Smallest truncation whose thermal tail `e^{-(n_max+1)Δ}` is below
    /// [`TRUNCATION_TAIL`].
    pub fn required_for_thermal(delta: f64) -> usize {
        let n = (-TRUNCATION_TAIL.ln() / delta).floor() as usize;
        n.max(1)
    }

    pub fn check_amplitude(&self, alpha: C64) -> Result<()> {
        if !alpha.re.is_finite() || !alpha.im.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite amplitude {alpha}")));
        }
        if self.guard == TruncationGuard::Acknowledged {
            return Ok(());
        }
        let tail = poisson_tail_above(alpha.norm_sqr(), self.n_max);
        if tail >= TRUNCATION_TAIL {
            return Err(Error::Truncation {
                what: format!("displacement by |alpha| = {:.6}", alpha.norm()),
                n_max: self.n_max,
                required_n_max: Self::required_for_amplitude(alpha.norm()),
            });
        }
        Ok(())
    }

    pub fn check_thermal(&self, delta: f64) -> Result<()> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("thermal delta {delta} must be > 0")));
        }
        if self.guard == TruncationGuard::Acknowledged {
            return Ok(());
        }
        if thermal_tail(delta, self.n_max) >= TRUNCATION_TAIL {
            return Err(Error::Truncation {
                what: format!("thermal state with delta = {delta}"),
                n_max: self.n_max,
                required_n_max: Self::required_for_thermal(delta),
            });
        }
        Ok(())
    }
}

fn thermal_tail(delta: f64, n_max: usize) -> f64 {
    (-(n_max as f64 + 1.0) * delta).exp()
}

pub fn annihilation(space: FockSpace) -> ComplexMatrix {
    ComplexMatrix::from_fn(space.dim(), |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

pub fn creation(space: FockSpace) -> ComplexMatrix {
    annihilation(space).adjoint()
}

pub fn number_operator(space: FockSpace) -> ComplexMatrix {
    let diag: Vec<C64> = (0..space.dim()).map(|n| C64::new(n as f64, 0.0)).collect();
    ComplexMatrix::from_diagonal(&diag)
}

/// Values `√(j!/(j+k)!) r^k e^{-r²/2} L_j^(k)(r²)` for `j = 0..len`.
///
/// The recurrence runs on normalized values with a separate log-scale so
/// that far off-diagonal bands neither underflow at the start nor overflow
/// later.
fn laguerre_band(abs_alpha: f64, k: usize, len: usize) -> Vec<f64> {
    let x = abs_alpha * abs_alpha;
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    let kf = k as f64;
    let mut log_scale = if k == 0 {
        -0.5 * x
    } else {
        kf * abs_alpha.ln() - 0.5 * x - 0.5 * ln_factorial(k)
    };
    let push = |out: &mut Vec<f64>, u: f64, log_scale: f64| {
        let v = if log_scale < -745.0 { 0.0 } else { u * log_scale.exp() };
        out.push(v);
    };
    let mut prev = 1.0;
    push(&mut out, prev, log_scale);
    if len == 1 {
        return out;
    }
    let mut cur = (1.0 / (kf + 1.0)).sqrt() * (1.0 + kf - x);
    push(&mut out, cur, log_scale);
    for j in 1..len - 1 {
        let jf = j as f64;
        let r = ((jf + 1.0) / (jf + kf + 1.0)).sqrt();
        let back = (jf * (jf + 1.0) * (jf + kf) / (jf + kf + 1.0)).sqrt();
        let next = ((2.0 * jf + 1.0 + kf - x) * r * cur - back * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
        let mag = cur.abs().max(prev.abs());
        if mag > 1e100 || (mag < 1e-100 && mag > 0.0) {
            let s = mag.ln();
            prev /= mag;
            cur /= mag;
            log_scale += s;
        }
        push(&mut out, cur, log_scale);
    }
    out
}

/// Closed-form displacement matrix on the truncated space.
pub fn displacement(alpha: C64, space: FockSpace) -> Result<ComplexMatrix> {
    space.check_amplitude(alpha)?;
    let dim = space.dim();
    if alpha == C64::new(0.0, 0.0) {
        return Ok(ComplexMatrix::identity(dim));
    }
    let r = alpha.norm();
    let theta = alpha.arg();
    let minus_conj_arg = (-alpha.conj()).arg();
    let mut m = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let band = laguerre_band(r, k, dim - k);
        let up = C64::from_polar(1.0, k as f64 * theta);
        let down = C64::from_polar(1.0, k as f64 * minus_conj_arg);
        for (j, &u) in band.iter().enumerate() {
            m[(j + k, j)] = up * u;
            if k > 0 {
                m[(j, j + k)] = down * u;
            }
        }
    }
    Ok(ComplexMatrix::new(m).expect("finite by construction"))
}

/// Diagonal elements `⟨n|D(α)|n⟩ = e^{-|α|²/2} L_n(|α|²)`.
pub fn displacement_diagonal(alpha: C64, space: FockSpace) -> Result<Vec<f64>> {
    space.check_amplitude(alpha)?;
    Ok(laguerre_band(alpha.norm(), 0, space.dim()))
}

/// Working dimension for [`displacement_exp`]: wide enough that the edge of
/// the enlarged space is many coherent-state widths beyond what the
/// retained block can reach.
fn exp_working_dim(n_max: usize, abs_alpha: f64) -> usize {
    let reach = (n_max as f64).sqrt() + abs_alpha + 6.0;
    (reach * reach).ceil() as usize + 1
}

/// Displacement via the matrix exponential of the truncated generator.
pub fn displacement_exp(alpha: C64, space: FockSpace) -> Result<ComplexMatrix> {
    space.check_amplitude(alpha)?;
    let dim = space.dim();
    if alpha == C64::new(0.0, 0.0) {
        return Ok(ComplexMatrix::identity(dim));
    }
    let work = exp_working_dim(space.n_max(), alpha.norm()).max(dim);
    // K = -i(αa† − ᾱa) is Hermitian and D = exp(iK).
    let minus_i = C64::new(0.0, -1.0);
    let k = DMatrix::from_fn(work, work, |i, j| {
        if i == j + 1 {
            minus_i * alpha * (i as f64).sqrt()
        } else if j == i + 1 {
            minus_i * (-alpha.conj()) * (j as f64).sqrt()
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let eig = SymmetricEigen::new(k);
    let phases: Vec<C64> = eig
        .eigenvalues
        .iter()
        .map(|&l| C64::from_polar(1.0, l))
        .collect();
    let v = eig.eigenvectors.rows(0, dim).into_owned();
    let vp = DMatrix::from_fn(dim, work, |i, j| v[(i, j)] * phases[j]);
    ComplexMatrix::new(vp * v.adjoint())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModeKind {
    Fock { n: usize },
    Coherent { re: f64, im: f64 },
    Thermal { delta: f64 },
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
enum ModeRepr {
    Pure(StateVector),
    Mixed(DensityMatrix),
    /// Populations of a state diagonal in the Fock basis.
    Diagonal(Vec<f64>),
}

/// State of a single truncated mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    space: FockSpace,
    kind: ModeKind,
    repr: ModeRepr,
    leakage: f64,
}

impl ModeState {
    pub fn fock(n: usize, space: FockSpace) -> Result<Self> {
        if n > space.n_max() {
            return Err(Error::Truncation {
                what: format!("Fock state |{n}>"),
                n_max: space.n_max(),
                required_n_max: n,
            });
        }
        let mut pops = vec![0.0; space.dim()];
        pops[n] = 1.0;
        Ok(Self {
            space,
            kind: ModeKind::Fock { n },
            repr: ModeRepr::Diagonal(pops),
            leakage: 0.0,
        })
    }

    /// Arbitrary pure state given by its (not necessarily normalized)
    /// Fock amplitudes.
    pub fn custom_pure(amplitudes: Vec<C64>, space: FockSpace) -> Result<Self> {
        let sv = StateVector::normalized(space.spec(), amplitudes)?;
        Ok(Self {
            space,
            kind: ModeKind::Custom,
            repr: ModeRepr::Pure(sv),
            leakage: 0.0,
        })
    }

    pub fn custom_mixed(rho: DensityMatrix, space: FockSpace) -> Result<Self> {
        if rho.spec() != &space.spec() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: rho.spec().total_dim(),
            });
        }
        Ok(Self {
            space,
            kind: ModeKind::Custom,
            repr: ModeRepr::Mixed(rho),
            leakage: 0.0,
        })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn kind(&self) -> ModeKind {
        self.kind
    }

    /// Population that fell outside the truncated space before
    /// renormalization.
    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    /// Fock-basis populations if the state is diagonal.
    pub fn populations(&self) -> Option<&[f64]> {
        match &self.repr {
            ModeRepr::Diagonal(p) => Some(p),
            _ => None,
        }
    }

    pub fn pure_state(&self) -> Option<&StateVector> {
        match &self.repr {
            ModeRepr::Pure(sv) => Some(sv),
            _ => None,
        }
    }

    /// Density matrix in the truncated space.
    pub fn density(&self) -> DensityMatrix {
        match &self.repr {
            ModeRepr::Pure(sv) => sv.density(),
            ModeRepr::Mixed(rho) => rho.clone(),
            ModeRepr::Diagonal(p) => {
                let diag: Vec<C64> = p.iter().map(|&x| C64::new(x, 0.0)).collect();
                DensityMatrix::trusted(self.space.spec(), ComplexMatrix::from_diagonal(&diag))
            }
        }
    }

    /// Pure states and Fock states as a state vector.
    pub fn as_state_vector(&self) -> Option<StateVector> {
        match (&self.repr, self.kind) {
            (ModeRepr::Pure(sv), _) => Some(sv.clone()),
            (_, ModeKind::Fock { n }) => Some(StateVector::basis(self.space.spec(), n).ok()?),
            _ => None,
        }
    }

    pub fn mean_occupation(&self) -> f64 {
        match &self.repr {
            ModeRepr::Diagonal(p) => p.iter().enumerate().map(|(n, x)| n as f64 * x).sum(),
            ModeRepr::Pure(sv) => sv
                .as_slice()
                .iter()
                .enumerate()
                .map(|(n, z)| n as f64 * z.norm_sqr())
                .sum(),
            ModeRepr::Mixed(rho) => (0..self.space.dim())
                .map(|n| n as f64 * rho.matrix()[(n, n)].re)
                .sum(),
        }
    }

    /// `Tr[ρ op]` for an operator on this mode.
    pub fn expectation_of(&self, op: &ComplexMatrix) -> Result<C64> {
        if op.dim() != self.space.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                found: op.dim(),
            });
        }
        match &self.repr {
            ModeRepr::Diagonal(p) => Ok(p
                .iter()
                .enumerate()
                .map(|(n, &x)| op[(n, n)] * x)
                .sum()),
            ModeRepr::Pure(sv) => sv.expectation_of(op),
            ModeRepr::Mixed(rho) => rho.expectation_of(op),
        }
    }
}

/// Coherent state `|α⟩`, renormalized after truncation.
pub fn coherent_state(alpha: C64, space: FockSpace) -> Result<ModeState> {
    space.check_amplitude(alpha)?;
    let dim = space.dim();
    let r = alpha.norm();
    let theta = alpha.arg();
    let x = r * r;
    let amps: Vec<C64> = (0..dim)
        .map(|n| {
            if r == 0.0 {
                return C64::new(if n == 0 { 1.0 } else { 0.0 }, 0.0);
            }
            let ln_mag = -0.5 * x + n as f64 * r.ln() - 0.5 * ln_factorial(n);
            C64::from_polar(ln_mag.exp(), n as f64 * theta)
        })
        .collect();
    let leakage = poisson_tail_above(x, space.n_max());
    let sv = StateVector::normalized(space.spec(), amps)?;
    Ok(ModeState {
        space,
        kind: ModeKind::Coherent {
            re: alpha.re,
            im: alpha.im,
        },
        repr: ModeRepr::Pure(sv),
        leakage,
    })
}

/// Gibbs state with populations ∝ e^{-nΔ}, Δ = ħω/k_BT.
pub fn thermal_state(delta: f64, space: FockSpace) -> Result<ModeState> {
    space.check_thermal(delta)?;
    let weights: Vec<f64> = (0..space.dim()).map(|n| (-(n as f64) * delta).exp()).collect();
    let total: f64 = weights.iter().sum();
    let pops = weights.into_iter().map(|w| w / total).collect();
    Ok(ModeState {
        space,
        kind: ModeKind::Thermal { delta },
        repr: ModeRepr::Diagonal(pops),
        leakage: thermal_tail(delta, space.n_max()),
    })
}

/// Thermal state with mean occupation `n̄`, i.e. Δ = ln(1 + 1/n̄).
pub fn thermal_state_from_mean(mean: f64, space: FockSpace) -> Result<ModeState> {
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(Error::InvalidParameter(format!("mean occupation {mean} must be > 0")));
    }
    thermal_state((1.0 / mean).ln_1p(), space)
}

/// Mean occupation `1/(e^Δ − 1)` of an untruncated thermal state.
pub fn thermal_mean_occupation(delta: f64) -> f64 {
    1.0 / delta.exp_m1()
}

/// Characteristic function `Tr[ρ D(α)]`.
pub fn char_fn(state: &ModeState, alpha: C64) -> Result<C64> {
    match &state.repr {
        ModeRepr::Diagonal(p) => {
            let diag = displacement_diagonal(alpha, state.space)?;
            Ok(C64::new(p.iter().zip(&diag).map(|(a, b)| a * b).sum(), 0.0))
        }
        _ => {
            let d = displacement(alpha, state.space)?;
            state.expectation_of(&d)
        }
    }
}

/// Overlap `⟨a|b⟩` of two pure mode states.
pub fn mode_overlap(a: &ModeState, b: &ModeState) -> Result<C64> {
    match (a.as_state_vector(), b.as_state_vector()) {
        (Some(x), Some(y)) => x.inner(&y),
        _ => Err(Error::InvalidState("overlap needs pure mode states".into())),
    }
}
