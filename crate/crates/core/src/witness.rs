//! Structure-factor witnesses.
//!
//! For `N` spins with coefficients `|c_α| ≤ 1`,
//!
//! ```text
//! W = 1 − ½[Σ(q) + Σ(−q)],   Σ(q) = (1/B(N,2)) Σ_{i<j} Σ_α c_α σ_i^α σ_j^α e^{iq(x_j − x_i)}
//! ```
//!
//! with `B(N,2) = N(N−1)/2`. The positions `x_i` are classical numbers
//! ([`witness_classical`]), diagonal operators on a position grid
//! ([`witness_gaussian`]), or equilibrium sites plus normal-mode
//! fluctuations, in which case `e^{iq'(x_n − x_m)}` becomes
//! `e^{iq'(n−m)} ⊗_k D(iq' g_k(n,m))` ([`witness_bc`]).
//!
//! Operators that would be too large to store densely are kept in factored
//! form; [`WitnessOperator::to_dense`] materializes them when they fit.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chain::ModeCouplings;
use crate::fock::{char_fn, coherent_state, displacement, FockSpace, ModeState};
use crate::gaussian::{GaussianWavepacket, PositionGrid};
use crate::spin::{canonical_state, correlators, pauli, CanonicalState, PauliAxis};
use crate::tensor::{
    embed, kron, partial_trace, partial_trace_pure, real_part_checked, ComplexMatrix,
    DensityMatrix, HilbertSpec, QuantumState, StateVector,
};
use crate::{Error, Result, C64};

/// Largest composite dimension [`WitnessOperator::to_dense`] will build.
pub const DENSE_LIMIT: usize = 4096;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessCoefficients {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl WitnessCoefficients {
    /// Optimal choice for the singlet at zero wavevector.
    pub const ALL_MINUS: Self = Self { x: -1.0, y: -1.0, z: -1.0 };
    /// Optimal choice for |Ψ⁺⟩ at zero wavevector.
    pub const PLUS_PLUS_MINUS: Self = Self { x: 1.0, y: 1.0, z: -1.0 };
    pub const ZERO: Self = Self { x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let c = Self { x, y, z };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for axis in PauliAxis::ALL {
            let v = self.get(axis);
            if !(v.abs() <= 1.0) {
                return Err(Error::InvalidCoefficient {
                    axis: axis.symbol(),
                    value: v,
                });
            }
        }
        Ok(())
    }

    pub fn get(&self, axis: PauliAxis) -> f64 {
        match axis {
            PauliAxis::X => self.x,
            PauliAxis::Y => self.y,
            PauliAxis::Z => self.z,
        }
    }

    pub fn unit(axis: PauliAxis) -> Self {
        let mut c = Self::ZERO;
        match axis {
            PauliAxis::X => c.x = 1.0,
            PauliAxis::Y => c.y = 1.0,
            PauliAxis::Z => c.z = 1.0,
        }
        c
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// `λ·self + (1 − λ)·other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Self {
        let m = |a: f64, b: f64| lambda * a + (1.0 - lambda) * b;
        Self {
            x: m(self.x, other.x),
            y: m(self.y, other.y),
            z: m(self.z, other.z),
        }
    }
}

impl FromStr for WitnessCoefficients {
    type Err = Error;

    /// `"cx,cy,cz"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::InvalidParameter(format!("expected cx,cy,cz, got '{s}'")));
        }
        let mut v = [0.0; 3];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad coefficient '{p}'")))?;
        }
        Self::new(v[0], v[1], v[2])
    }
}

impl fmt::Display for WitnessCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.x, self.y, self.z)
    }
}

/// Vertex of `[−1, 1]³` maximizing `Σ_α c_α T_α` (ties go to `+1`).
///
/// `⟨W⟩` is affine in `c`, so with `T_α` the per-axis weight of `⟨Σ⟩` this
/// vertex minimizes the witness.
pub fn optimal_coefficients(aggregates: [f64; 3]) -> WitnessCoefficients {
    let s = |t: f64| if t < 0.0 { -1.0 } else { 1.0 };
    WitnessCoefficients {
        x: s(aggregates[0]),
        y: s(aggregates[1]),
        z: s(aggregates[2]),
    }
}

/// Per-axis aggregates `T_α = ⟨W(0)⟩ − ⟨W(e_α)⟩` from any evaluator of `⟨W⟩`.
pub fn axis_aggregates<F>(eval: F) -> Result<[f64; 3]>
where
    F: Fn(WitnessCoefficients) -> Result<f64>,
{
    let base = eval(WitnessCoefficients::ZERO)?;
    let mut t = [0.0; 3];
    for (slot, axis) in t.iter_mut().zip(PauliAxis::ALL) {
        *slot = base - eval(WitnessCoefficients::unit(axis))?;
    }
    Ok(t)
}

/// `B(N, 2) = N(N−1)/2`.
pub fn pair_count(n: usize) -> f64 {
    (n * (n - 1)) as f64 / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessFlavor {
    Classical,
    Gaussian,
    TrappedIon,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessMetadata {
    pub flavor: WitnessFlavor,
    /// `q` (classical, gaussian) or `q'` (trapped ion).
    pub wavevector: f64,
    pub coefficients: WitnessCoefficients,
    pub n_spins: usize,
    pub detail: BTreeMap<String, String>,
}

/// One product term `A ⊗ M_1 ⊗ … ⊗ M_K`; `None` stands for the identity.
#[derive(Debug, Clone, PartialEq)]
struct SpinModeTerm {
    spin: ComplexMatrix,
    modes: Vec<Option<ComplexMatrix>>,
}

/// Position-diagonal witness on `N` spins ⊗ `N` particles on a grid.
#[derive(Debug, Clone, PartialEq)]
struct GridWitness {
    grid_len: usize,
    spacing: f64,
    q: f64,
    c: WitnessCoefficients,
    /// `(i, j, Σ_α c_α σ_i^α σ_j^α)` for every pair.
    pairs: Vec<(usize, usize, ComplexMatrix)>,
}

#[derive(Debug, Clone, PartialEq)]
enum WitnessRepr {
    /// Acts on the spins only.
    Spin(ComplexMatrix),
    SpinMode {
        identity_weight: f64,
        terms: Vec<SpinModeTerm>,
    },
    PositionDiagonal(GridWitness),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessOperator {
    spec: HilbertSpec,
    n_spins: usize,
    repr: WitnessRepr,
    metadata: WitnessMetadata,
}

/// Pure, mixed, spin ⊗ mode product, or an ensemble of pure states.
#[derive(Debug, Clone, PartialEq)]
pub enum CompositeState {
    Pure(StateVector),
    Mixed(DensityMatrix),
    /// `σ_spins ⊗ ρ_1 ⊗ … ⊗ ρ_K`.
    Product {
        spins: DensityMatrix,
        modes: Vec<ModeState>,
    },
    /// `Σ_i p_i |ψ_i⟩⟨ψ_i|`.
    Ensemble(Vec<(f64, StateVector)>),
}

impl CompositeState {
    pub fn spec(&self) -> HilbertSpec {
        match self {
            CompositeState::Pure(sv) => sv.spec().clone(),
            CompositeState::Mixed(rho) => rho.spec().clone(),
            CompositeState::Product { spins, modes } => modes
                .iter()
                .fold(spins.spec().clone(), |acc, m| acc.tensor(&m.space().spec())),
            CompositeState::Ensemble(parts) => parts
                .first()
                .map(|(_, sv)| sv.spec().clone())
                .expect("ensembles are never empty"),
        }
    }

    /// Dense density matrix of the whole state.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        let dim = self.spec().total_dim();
        if dim > DENSE_LIMIT {
            return Err(Error::Unsupported(format!(
                "dense density matrix of dimension {dim} exceeds {DENSE_LIMIT}"
            )));
        }
        Ok(match self {
            CompositeState::Pure(sv) => sv.density(),
            CompositeState::Mixed(rho) => rho.clone(),
            CompositeState::Product { spins, modes } => modes
                .iter()
                .fold(spins.clone(), |acc, m| acc.tensor(&m.density())),
            CompositeState::Ensemble(parts) => {
                let rhos: Vec<DensityMatrix> = parts.iter().map(|(_, sv)| sv.density()).collect();
                let weighted: Vec<(f64, &DensityMatrix)> =
                    parts.iter().zip(&rhos).map(|((p, _), r)| (*p, r)).collect();
                DensityMatrix::mixture(&weighted)?
            }
        })
    }

    /// Reduced state of the first `n` factors.
    fn reduce_leading(&self, n: usize) -> Result<DensityMatrix> {
        let keep: Vec<usize> = (0..n).collect();
        match self {
            CompositeState::Pure(sv) => partial_trace_pure(sv, &keep),
            CompositeState::Mixed(rho) => partial_trace(rho, &keep),
            CompositeState::Product { spins, .. } => {
                if spins.spec().n_factors() == n {
                    Ok(spins.clone())
                } else {
                    partial_trace(spins, &keep)
                }
            }
            CompositeState::Ensemble(parts) => {
                let reduced: Vec<DensityMatrix> = parts
                    .iter()
                    .map(|(_, sv)| partial_trace_pure(sv, &keep))
                    .collect::<Result<_>>()?;
                let weighted: Vec<(f64, &DensityMatrix)> =
                    parts.iter().zip(&reduced).map(|((p, _), r)| (*p, r)).collect();
                DensityMatrix::mixture(&weighted)
            }
        }
    }
}

fn check_coefficients_and_spins(c: &WitnessCoefficients, n: usize) -> Result<()> {
    c.validate()?;
    if n < 2 {
        return Err(Error::InvalidParameter(format!("witness needs >= 2 spins, got {n}")));
    }
    Ok(())
}

/// `σ_i^α σ_j^α` on `n` spins.
fn pair_operator(axis: PauliAxis, i: usize, j: usize, n: usize) -> Result<ComplexMatrix> {
    let spec = HilbertSpec::qubits(n)?;
    let s = pauli(axis);
    Ok(&embed(&s, i, &spec)? * &embed(&s, j, &spec)?)
}

/// `Σ_α c_α σ_i^α σ_j^α`.
fn weighted_pair(c: &WitnessCoefficients, i: usize, j: usize, n: usize) -> Result<ComplexMatrix> {
    let mut acc = ComplexMatrix::zeros(1 << n);
    for axis in PauliAxis::ALL {
        let w = c.get(axis);
        if w != 0.0 {
            acc = &acc + &pair_operator(axis, i, j, n)?.scale(C64::new(w, 0.0));
        }
    }
    Ok(acc)
}

/// Witness for spins at fixed classical positions.
pub fn witness_classical(
    q: f64,
    positions: &[f64],
    c: WitnessCoefficients,
    n: usize,
) -> Result<WitnessOperator> {
    check_coefficients_and_spins(&c, n)?;
    if positions.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: positions.len(),
        });
    }
    let b = pair_count(n);
    let mut w = ComplexMatrix::identity(1 << n);
    for i in 0..n {
        for j in i + 1..n {
            // ½[e^{iqΔ} + e^{−iqΔ}]
            let phase = (q * (positions[j] - positions[i])).cos();
            let term = weighted_pair(&c, i, j, n)?.scale(C64::new(phase / b, 0.0));
            w = &w - &term;
        }
    }
    let mut detail = BTreeMap::new();
    detail.insert("positions".into(), format!("{positions:?}"));
    Ok(WitnessOperator {
        spec: HilbertSpec::qubits(n)?,
        n_spins: n,
        repr: WitnessRepr::Spin(w),
        metadata: WitnessMetadata {
            flavor: WitnessFlavor::Classical,
            wavevector: q,
            coefficients: c,
            n_spins: n,
            detail,
        },
    })
}

/// Witness for spins whose positions are quantum and represented on
/// `grid`, one grid copy per particle. Each packet must be resolved by the
/// grid.
pub fn witness_gaussian(
    q: f64,
    packets: &[GaussianWavepacket],
    c: WitnessCoefficients,
    grid: &PositionGrid,
) -> Result<WitnessOperator> {
    let n = packets.len();
    check_coefficients_and_spins(&c, n)?;
    for p in packets {
        grid.check_resolution(&[p.center], p.sigma, q)?;
    }
    witness_on_grid(q, n, c, grid)
}

/// Grid witness without reference to particular packets.
pub fn witness_on_grid(
    q: f64,
    n: usize,
    c: WitnessCoefficients,
    grid: &PositionGrid,
) -> Result<WitnessOperator> {
    check_coefficients_and_spins(&c, n)?;
    let mut dims = vec![2; n];
    dims.extend(std::iter::repeat(grid.len()).take(n));
    let spec = HilbertSpec::new(dims)?;
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((i, j, weighted_pair(&c, i, j, n)?));
        }
    }
    let mut detail = BTreeMap::new();
    detail.insert("grid_points".into(), grid.len().to_string());
    detail.insert("grid_spacing".into(), format!("{:e}", grid.spacing()));
    Ok(WitnessOperator {
        spec,
        n_spins: n,
        repr: WitnessRepr::PositionDiagonal(GridWitness {
            grid_len: grid.len(),
            spacing: grid.spacing(),
            q,
            c,
            pairs,
        }),
        metadata: WitnessMetadata {
            flavor: WitnessFlavor::Gaussian,
            wavevector: q,
            coefficients: c,
            n_spins: n,
            detail,
        },
    })
}

/// Trapped-ion witness on spins ⊗ the selected normal modes.
pub fn witness_bc(
    qprime: f64,
    couplings: &ModeCouplings,
    space: FockSpace,
    c: WitnessCoefficients,
) -> Result<WitnessOperator> {
    let n = couplings.n_ions();
    check_coefficients_and_spins(&c, n)?;
    let n_modes = couplings.n_modes();
    let b = pair_count(n);
    let mut terms = Vec::new();
    for (i, j) in couplings.pairs() {
        let s = weighted_pair(&c, i, j, n)?;
        let g = couplings.amplitudes(i, j)?;
        let theta = qprime * (i as f64 - j as f64);
        for sign in [1.0, -1.0] {
            let spin = s.scale(C64::from_polar(-0.5 / b, sign * theta));
            let modes = g
                .iter()
                .map(|&gk| {
                    let amp = C64::new(0.0, sign * qprime * gk);
                    if amp == ZERO {
                        Ok(None)
                    } else {
                        displacement(amp, space).map(Some)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            terms.push(SpinModeTerm { spin, modes });
        }
    }
    let mut dims = vec![2; n];
    dims.extend(std::iter::repeat(space.dim()).take(n_modes));
    let mut detail = BTreeMap::new();
    detail.insert("n_max".into(), space.n_max().to_string());
    detail.insert("modes".into(), format!("{:?}", couplings.modes()));
    Ok(WitnessOperator {
        spec: HilbertSpec::new(dims)?,
        n_spins: n,
        repr: WitnessRepr::SpinMode {
            identity_weight: 1.0,
            terms,
        },
        metadata: WitnessMetadata {
            flavor: WitnessFlavor::TrappedIon,
            wavevector: qprime,
            coefficients: c,
            n_spins: n,
            detail,
        },
    })
}

/// `op` applied along one axis of a row-major tensor with shape `dims`.
fn apply_axis(amps: &[C64], dims: &[usize], axis: usize, op: &DMatrix<C64>) -> Vec<C64> {
    let d = dims[axis];
    let inner: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    let mut out = vec![ZERO; amps.len()];
    for o in 0..outer {
        let base = o * d * inner;
        for row in 0..d {
            let dst = base + row * inner;
            for col in 0..d {
                let w = op[(row, col)];
                if w == ZERO {
                    continue;
                }
                let src = base + col * inner;
                for r in 0..inner {
                    out[dst + r] += w * amps[src + r];
                }
            }
        }
    }
    out
}

/// Decoded (spin index, position indices) of a grid basis state.
fn decode_grid(index: usize, n: usize, g: usize) -> (usize, Vec<usize>) {
    let block = g.pow(n as u32);
    let mut rest = index % block;
    let mut k = vec![0; n];
    for p in (0..n).rev() {
        k[p] = rest % g;
        rest /= g;
    }
    (index / block, k)
}

impl WitnessOperator {
    pub fn spec(&self) -> &HilbertSpec {
        &self.spec
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    pub fn metadata(&self) -> &WitnessMetadata {
        &self.metadata
    }

    pub fn flavor(&self) -> WitnessFlavor {
        self.metadata.flavor
    }

    /// Dense spin matrix of a classical witness.
    pub fn spin_matrix(&self) -> Option<&ComplexMatrix> {
        match &self.repr {
            WitnessRepr::Spin(m) => Some(m),
            _ => None,
        }
    }

    fn mode_dims(&self) -> Vec<usize> {
        let mut dims = vec![1usize << self.n_spins];
        dims.extend_from_slice(&self.spec.factor_dims()[self.n_spins..]);
        dims
    }

    /// Matrix element `⟨i|W|j⟩`.
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        match &self.repr {
            WitnessRepr::Spin(m) => m[(i, j)],
            WitnessRepr::SpinMode { identity_weight, terms } => {
                let dims = self.mode_dims();
                let (mut ri, mut rj) = (i, j);
                let mut idx_i = vec![0; dims.len()];
                let mut idx_j = vec![0; dims.len()];
                for a in (0..dims.len()).rev() {
                    idx_i[a] = ri % dims[a];
                    idx_j[a] = rj % dims[a];
                    ri /= dims[a];
                    rj /= dims[a];
                }
                let mut acc = if i == j {
                    C64::new(*identity_weight, 0.0)
                } else {
                    ZERO
                };
                for t in terms {
                    let mut v = t.spin[(idx_i[0], idx_j[0])];
                    for (k, m) in t.modes.iter().enumerate() {
                        if v == ZERO {
                            break;
                        }
                        v *= match m {
                            Some(m) => m[(idx_i[k + 1], idx_j[k + 1])],
                            None if idx_i[k + 1] == idx_j[k + 1] => C64::new(1.0, 0.0),
                            None => ZERO,
                        };
                    }
                    acc += v;
                }
                acc
            }
            WitnessRepr::PositionDiagonal(gw) => {
                let n = self.n_spins;
                let (si, ki) = decode_grid(i, n, gw.grid_len);
                let (sj, kj) = decode_grid(j, n, gw.grid_len);
                if ki != kj {
                    return ZERO;
                }
                let mut acc = if si == sj { C64::new(1.0, 0.0) } else { ZERO };
                let b = pair_count(n);
                for (p, r, o) in &gw.pairs {
                    let cosine = (gw.q * gw.spacing * (ki[*r] as f64 - ki[*p] as f64)).cos();
                    acc -= o[(si, sj)] * (cosine / b);
                }
                acc
            }
        }
    }

    /// Dense matrix on the full composite space.
    pub fn to_dense(&self) -> Result<ComplexMatrix> {
        let dim = self.spec.total_dim();
        if dim > DENSE_LIMIT {
            return Err(Error::Unsupported(format!(
                "dense witness of dimension {dim} exceeds {DENSE_LIMIT}"
            )));
        }
        match &self.repr {
            WitnessRepr::Spin(m) => Ok(m.clone()),
            WitnessRepr::SpinMode { identity_weight, terms } => {
                let mut w = ComplexMatrix::identity(dim).scale(C64::new(*identity_weight, 0.0));
                for t in terms {
                    let mut op = t.spin.clone();
                    for (k, m) in t.modes.iter().enumerate() {
                        let d = self.spec.factor_dims()[self.n_spins + k];
                        op = match m {
                            Some(m) => kron(&op, m),
                            None => kron(&op, &ComplexMatrix::identity(d)),
                        };
                    }
                    w = &w + &op;
                }
                Ok(w)
            }
            WitnessRepr::PositionDiagonal(gw) => {
                let n = self.n_spins;
                let g = gw.grid_len;
                let b = pair_count(n);
                let npos = g.pow(n as u32);
                let mut w = ComplexMatrix::identity(dim);
                for (p, r, o) in &gw.pairs {
                    let diag: Vec<C64> = (0..npos)
                        .map(|idx| {
                            let (_, k) = decode_grid(idx, n, g);
                            let cosine = (gw.q * gw.spacing * (k[*r] as f64 - k[*p] as f64)).cos();
                            C64::new(cosine / b, 0.0)
                        })
                        .collect();
                    w = &w - &kron(o, &ComplexMatrix::from_diagonal(&diag));
                }
                Ok(w)
            }
        }
    }

    /// Largest entry of `|W − W†|`, evaluated entry by entry so that it
    /// also works for operators too large to store.
    pub fn hermiticity_defect(&self) -> f64 {
        match &self.repr {
            WitnessRepr::Spin(m) => m.hermiticity_defect(),
            WitnessRepr::PositionDiagonal(gw) => {
                // Only position-diagonal blocks are non-zero.
                let n = self.n_spins;
                let ns = 1usize << n;
                let block = gw.grid_len.pow(n as u32);
                let mut worst: f64 = 0.0;
                for k in 0..block {
                    for s in 0..ns {
                        for t in s..ns {
                            let a = self.entry(s * block + k, t * block + k);
                            let b = self.entry(t * block + k, s * block + k);
                            worst = worst.max((a - b.conj()).norm());
                        }
                    }
                }
                worst
            }
            WitnessRepr::SpinMode { .. } => {
                let dim = self.spec.total_dim();
                let mut worst: f64 = 0.0;
                for i in 0..dim {
                    for j in i..dim {
                        worst = worst.max((self.entry(i, j) - self.entry(j, i).conj()).norm());
                    }
                }
                worst
            }
        }
    }

    fn check_state_spec(&self, spec: &HilbertSpec) -> Result<()> {
        if spec != &self.spec {
            return Err(Error::DimensionMismatch {
                expected: self.spec.total_dim(),
                found: spec.total_dim(),
            });
        }
        Ok(())
    }

    /// `⟨ψ|W|ψ⟩` without the residue check.
    fn pure_expectation(&self, psi: &StateVector) -> Result<C64> {
        match &self.repr {
            WitnessRepr::Spin(m) => {
                if psi.spec() == &self.spec {
                    psi.expectation_of(m)
                } else {
                    let spins = partial_trace_pure(psi, &(0..self.n_spins).collect::<Vec<_>>())?;
                    spins.expectation_of(m)
                }
            }
            WitnessRepr::SpinMode { identity_weight, terms } => {
                self.check_state_spec(psi.spec())?;
                let dims = self.mode_dims();
                let amps = psi.as_slice();
                let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
                let mut acc = C64::new(identity_weight * norm, 0.0);
                for t in terms {
                    let mut v = apply_axis(amps, &dims, 0, t.spin.matrix());
                    for (k, m) in t.modes.iter().enumerate() {
                        if let Some(m) = m {
                            v = apply_axis(&v, &dims, k + 1, m.matrix());
                        }
                    }
                    acc += amps.iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<C64>();
                }
                Ok(acc)
            }
            WitnessRepr::PositionDiagonal(gw) => {
                self.check_state_spec(psi.spec())?;
                let profile = GridProfile::new(psi, self.n_spins, gw.grid_len)?;
                Ok(C64::new(profile.expectation(gw.q * gw.spacing, &gw.c)?, 0.0))
            }
        }
    }

    /// `Tr[Wρ]` for a dense density matrix.
    fn mixed_expectation(&self, rho: &DensityMatrix) -> Result<C64> {
        match &self.repr {
            WitnessRepr::Spin(m) => {
                if rho.spec() == &self.spec {
                    rho.expectation_of(m)
                } else {
                    partial_trace(rho, &(0..self.n_spins).collect::<Vec<_>>())?.expectation_of(m)
                }
            }
            WitnessRepr::SpinMode { identity_weight, terms } => {
                self.check_state_spec(rho.spec())?;
                let dims = self.mode_dims();
                let r = rho.matrix().matrix();
                let dim = r.nrows();
                let mut acc = C64::new(*identity_weight, 0.0) * rho.matrix().trace();
                for j in 0..dim {
                    let col: Vec<C64> = r.column(j).iter().copied().collect();
                    for t in terms {
                        let mut v = apply_axis(&col, &dims, 0, t.spin.matrix());
                        for (k, m) in t.modes.iter().enumerate() {
                            if let Some(m) = m {
                                v = apply_axis(&v, &dims, k + 1, m.matrix());
                            }
                        }
                        acc += v[j];
                    }
                }
                Ok(acc)
            }
            WitnessRepr::PositionDiagonal(_) => {
                self.check_state_spec(rho.spec())?;
                rho.expectation_of(&self.to_dense()?)
            }
        }
    }

    fn product_expectation(&self, spins: &DensityMatrix, modes: &[ModeState]) -> Result<C64> {
        match &self.repr {
            WitnessRepr::Spin(m) => {
                if spins.spec().total_dim() != m.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: m.dim(),
                        found: spins.spec().total_dim(),
                    });
                }
                spins.expectation_of(m)
            }
            WitnessRepr::SpinMode { identity_weight, terms } => {
                let spec = modes
                    .iter()
                    .fold(spins.spec().clone(), |acc, m| acc.tensor(&m.space().spec()));
                self.check_state_spec(&spec)?;
                let mut acc = C64::new(*identity_weight, 0.0);
                for t in terms {
                    let mut v = spins.expectation_of(&t.spin)?;
                    for (m, state) in t.modes.iter().zip(modes) {
                        if let Some(m) = m {
                            v *= state.expectation_of(m)?;
                        }
                    }
                    acc += v;
                }
                Ok(acc)
            }
            WitnessRepr::PositionDiagonal(_) => Err(Error::Unsupported(
                "position witnesses take pure or ensemble states".into(),
            )),
        }
    }

    /// `Tr[Wρ]` as a complex number (no residue check).
    pub fn expectation_complex(&self, state: &CompositeState) -> Result<C64> {
        match state {
            CompositeState::Pure(psi) => self.pure_expectation(psi),
            CompositeState::Mixed(rho) => self.mixed_expectation(rho),
            CompositeState::Product { spins, modes } => self.product_expectation(spins, modes),
            CompositeState::Ensemble(parts) => {
                let mut acc = ZERO;
                for (p, psi) in parts {
                    acc += self.pure_expectation(psi)? * *p;
                }
                Ok(acc)
            }
        }
    }

    /// `Tr[Wρ]`, rejecting results with an imaginary residue above the
    /// configured tolerance.
    pub fn expectation(&self, state: &CompositeState) -> Result<f64> {
        real_part_checked(self.expectation_complex(state)?)
    }

    /// Spin marginal of `state` (helper for spin-only evaluations).
    pub fn spin_marginal(&self, state: &CompositeState) -> Result<DensityMatrix> {
        state.reduce_leading(self.n_spins)
    }
}

/// Pair-difference profile of a grid state: for every spin pair `(p, r)`
/// and spin basis states `s, t` linked by `σ_p^α σ_r^α`, the weights
/// `Σ_k ψ*(s,k) ψ(t,k)` binned by `k_r − k_p`. With it, `⟨W⟩` for any `q`
/// and `c` costs `O(G)`.
#[derive(Debug, Clone)]
pub struct GridProfile {
    n_spins: usize,
    grid_len: usize,
    norm: f64,
    /// Indexed `[pair][s][same = 0 | flipped = 1][d + G − 1]`.
    bins: Vec<Vec<[Vec<C64>; 2]>>,
}

impl GridProfile {
    pub fn new(psi: &StateVector, n_spins: usize, grid_len: usize) -> Result<Self> {
        let mut dims = vec![2; n_spins];
        dims.extend(std::iter::repeat(grid_len).take(n_spins));
        if psi.spec().factor_dims() != dims.as_slice() {
            return Err(Error::DimensionMismatch {
                expected: dims.iter().product(),
                found: psi.spec().total_dim(),
            });
        }
        let ns = 1usize << n_spins;
        let block = grid_len.pow(n_spins as u32);
        let amps = psi.as_slice();
        let width = 2 * grid_len - 1;
        let mut bins = Vec::new();
        for p in 0..n_spins {
            for r in p + 1..n_spins {
                let mask = (1 << (n_spins - 1 - p)) | (1 << (n_spins - 1 - r));
                let mut per_spin = Vec::with_capacity(ns);
                for s in 0..ns {
                    let t = s ^ mask;
                    let mut same = vec![ZERO; width];
                    let mut flip = vec![ZERO; width];
                    for k in 0..block {
                        let a = amps[s * block + k];
                        if a == ZERO {
                            continue;
                        }
                        let kp = (k / grid_len.pow((n_spins - 1 - p) as u32)) % grid_len;
                        let kr = (k / grid_len.pow((n_spins - 1 - r) as u32)) % grid_len;
                        let d = kr + grid_len - 1 - kp;
                        same[d] += a.conj() * a;
                        flip[d] += a.conj() * amps[t * block + k];
                    }
                    per_spin.push([same, flip]);
                }
                bins.push(per_spin);
            }
        }
        let norm = amps.iter().map(|z| z.norm_sqr()).sum();
        Ok(Self {
            n_spins,
            grid_len,
            norm,
            bins,
        })
    }

    /// `⟨W⟩` with `qh` the wavevector times the grid spacing.
    pub fn expectation(&self, qh: f64, c: &WitnessCoefficients) -> Result<f64> {
        let n = self.n_spins;
        let g = self.grid_len as isize;
        let cosines: Vec<f64> = (0..(2 * g - 1)).map(|d| (qh * (d - (g - 1)) as f64).cos()).collect();
        let b = pair_count(n);
        let ns = 1usize << n;
        let mut acc = C64::new(self.norm, 0.0);
        let mut pair_index = 0;
        for p in 0..n {
            for r in p + 1..n {
                let mask = (1 << (n - 1 - p)) | (1 << (n - 1 - r));
                let o = weighted_pair(c, p, r, n)?;
                for s in 0..ns {
                    let t = s ^ mask;
                    let [same, flip] = &self.bins[pair_index][s];
                    let weigh = |v: &[C64]| -> C64 {
                        v.iter().zip(&cosines).map(|(z, cs)| z * cs).sum()
                    };
                    acc -= o[(s, s)] * weigh(same) / b;
                    acc -= o[(s, t)] * weigh(flip) / b;
                }
                pair_index += 1;
            }
        }
        real_part_checked(acc)
    }
}

/// Breakdown of the characteristic-function evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharFnExpectation {
    pub value: f64,
    /// Contribution of the `cos[q'(n−m)] Re C` terms to `⟨Σ⟩`.
    pub cosine_branch: f64,
    /// Contribution of the `−sin[q'(n−m)] Im C` terms to `⟨Σ⟩`.
    pub sine_branch: f64,
}

/// `⟨W_BC⟩` on a product `σ ⊗ ρ_1 ⊗ …` from spin correlators and the
/// characteristic functions of the mode states.
pub fn expect_via_charfn(
    qprime: f64,
    spins: &DensityMatrix,
    modes: &[ModeState],
    couplings: &ModeCouplings,
    c: WitnessCoefficients,
) -> Result<CharFnExpectation> {
    let n = couplings.n_ions();
    check_coefficients_and_spins(&c, n)?;
    if modes.len() != couplings.n_modes() {
        return Err(Error::DimensionMismatch {
            expected: couplings.n_modes(),
            found: modes.len(),
        });
    }
    let table = correlators(spins, n)?;
    let b = pair_count(n);
    let (mut cos_branch, mut sin_branch) = (0.0, 0.0);
    for (i, j) in couplings.pairs() {
        let g = couplings.amplitudes(i, j)?;
        let mut cw = C64::new(1.0, 0.0);
        for (state, &gk) in modes.iter().zip(g) {
            cw *= char_fn(state, C64::new(0.0, qprime * gk))?;
        }
        let theta = qprime * (i as f64 - j as f64);
        let spin: f64 = PauliAxis::ALL
            .iter()
            .map(|&a| c.get(a) * table.get(i, j, a).expect("pair present"))
            .sum();
        cos_branch += spin * theta.cos() * cw.re / b;
        sin_branch -= spin * theta.sin() * cw.im / b;
    }
    Ok(CharFnExpectation {
        value: 1.0 - cos_branch - sin_branch,
        cosine_branch: cos_branch,
        sine_branch: sin_branch,
    })
}

/// `1 − e^{−½q'²η²coth(Δ/2)}(c_x + c_y − c_z) cos q'` for |Ψ⁺⟩ ⊗ thermal(Δ).
pub fn closed_form_thermal(qprime: f64, eta: f64, delta: f64, c: WitnessCoefficients) -> f64 {
    let beta = qprime * eta;
    let coth = 1.0 / (0.5 * delta).tanh();
    1.0 - (-0.5 * beta * beta * coth).exp() * (c.x + c.y - c.z) * qprime.cos()
}

/// The three two-ion hybrid states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum HybridTag {
    /// `(|↑↓, α⟩ + |↓↑, −α⟩)/√2`.
    Phi1 { alpha_re: f64, alpha_im: f64 },
    /// `(|↑↓, 0⟩ + |↓↑, 1⟩)/√2`.
    Phi2,
    /// `p |Ψ⁺⟩⟨Ψ⁺| ⊗ |0⟩⟨0| + (1 − p) |↓↓⟩⟨↓↓| ⊗ |1⟩⟨1|`.
    Phi3 { p: f64 },
}

impl HybridTag {
    pub fn phi1(alpha: C64) -> Self {
        HybridTag::Phi1 {
            alpha_re: alpha.re,
            alpha_im: alpha.im,
        }
    }

    pub fn label(&self) -> String {
        match self {
            HybridTag::Phi1 { alpha_re, alpha_im } if *alpha_im == 0.0 => format!("phi1(alpha={alpha_re})"),
            HybridTag::Phi1 { alpha_re, alpha_im } => format!("phi1(alpha={alpha_re}{alpha_im:+}i)"),
            HybridTag::Phi2 => "phi2".into(),
            HybridTag::Phi3 { p } => format!("phi3(p={p})"),
        }
    }
}

/// Closed-form `⟨W_BC⟩` on the hybrid states (two ions, single mode with
/// amplitude `η`).
///
/// For `Phi1` with complex α this uses the factor `e^{−2|α|² − 2q'ηα_I}`,
/// which is odd in `q'` and therefore cannot equal the expectation of the
/// symmetrized operator; [`phi1_exact`] gives the value the operator
/// actually produces.
pub fn closed_form_hybrid(tag: &HybridTag, qprime: f64, eta: f64, c: WitnessCoefficients) -> Result<f64> {
    let beta = qprime * eta;
    let gauss = (-0.5 * beta * beta).exp();
    match *tag {
        HybridTag::Phi1 { alpha_re, alpha_im } => {
            let a2 = alpha_re * alpha_re + alpha_im * alpha_im;
            Ok(1.0
                + gauss
                    * (c.z * (2.0 * beta * alpha_re).cos()
                        - (c.x + c.y) * (-2.0 * a2 - 2.0 * beta * alpha_im).exp())
                    * qprime.cos())
        }
        HybridTag::Phi2 => Ok(1.0
            + 0.5
                * gauss
                * (c.z * (2.0 - beta * beta) * qprime.cos() - 2.0 * (c.x + c.y) * beta * qprime.sin())),
        HybridTag::Phi3 { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
            }
            Ok(1.0
                + gauss
                    * (c.z * (p * (2.0 - beta * beta) + beta * beta - 1.0) - p * (c.x + c.y))
                    * qprime.cos())
        }
    }
}

/// Exact `⟨W_BC⟩` on `Phi1` for complex α:
/// `1 + e^{−β²/2}[c_z cos(2βα_R) − (c_x + c_y) e^{−2|α|²} cosh(2βα_I)] cos q'`
/// with `β = q'η`.
pub fn phi1_exact(alpha: C64, qprime: f64, eta: f64, c: WitnessCoefficients) -> f64 {
    let beta = qprime * eta;
    1.0 + (-0.5 * beta * beta).exp()
        * (c.z * (2.0 * beta * alpha.re).cos()
            - (c.x + c.y) * (-2.0 * alpha.norm_sqr()).exp() * (2.0 * beta * alpha.im).cosh())
        * qprime.cos()
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridScenarioState {
    pub tag: HybridTag,
    pub state: CompositeState,
}

/// Build a hybrid state on 2 spins ⊗ one truncated mode.
pub fn build_hybrid_state(tag: HybridTag, space: FockSpace) -> Result<HybridScenarioState> {
    let spins = HilbertSpec::qubits(2)?;
    let spec = spins.tensor(&space.spec());
    let dim = space.dim();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let up_down = 1usize;
    let down_up = 2usize;
    let state = match tag {
        HybridTag::Phi1 { alpha_re, alpha_im } => {
            let alpha = C64::new(alpha_re, alpha_im);
            let plus = coherent_state(alpha, space)?;
            let minus = coherent_state(-alpha, space)?;
            let mut amps = vec![ZERO; 4 * dim];
            for n in 0..dim {
                amps[up_down * dim + n] = plus.pure_state().expect("pure").as_slice()[n] * h;
                amps[down_up * dim + n] = minus.pure_state().expect("pure").as_slice()[n] * h;
            }
            CompositeState::Pure(StateVector::new(spec, amps)?)
        }
        HybridTag::Phi2 => {
            let mut amps = vec![ZERO; 4 * dim];
            amps[up_down * dim] = C64::new(h, 0.0);
            amps[down_up * dim + 1] = C64::new(h, 0.0);
            CompositeState::Pure(StateVector::new(spec, amps)?)
        }
        HybridTag::Phi3 { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidParameter(format!("p = {p} outside [0, 1]")));
            }
            let vac = StateVector::basis(space.spec(), 0)?;
            let one = StateVector::basis(space.spec(), 1)?;
            let a = canonical_state(CanonicalState::PsiPlus).tensor(&vac).density();
            let b = canonical_state(CanonicalState::DownDown).tensor(&one).density();
            CompositeState::Mixed(DensityMatrix::mixture(&[(p, &a), (1.0 - p, &b)])?)
        }
    };
    Ok(HybridScenarioState { tag, state })
}
