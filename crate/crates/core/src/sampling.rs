//! Seeded random states for separability and factorization checks.
//!
//! Spins are drawn as Haar-random pure qubits mixed with a random
//! depolarizing weight; modes from Fock states `n ≤ 3`, coherent states
//! with `|α| ≤ 1`, or thermal states with `Δ ∈ [0.5, 5]`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fock::{coherent_state, thermal_state, FockSpace, ModeState};
use crate::gaussian::PositionGrid;
use crate::spin::qubit_from_bloch;
use crate::tensor::{DensityMatrix, HilbertSpec, StateVector};
use crate::witness::{CompositeState, WitnessCoefficients};
use crate::{Result, C64};

pub type SampleRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit_vector<R: Rng>(rng: &mut R) -> [f64; 3] {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi = rng.gen_range(0.0..2.0 * PI);
    let s = (1.0 - z * z).max(0.0).sqrt();
    [s * phi.cos(), s * phi.sin(), z]
}

/// Bloch vector of a Haar-random pure qubit shrunk by a uniform
/// depolarizing weight.
pub fn random_bloch_vector<R: Rng>(rng: &mut R) -> [f64; 3] {
    let n = unit_vector(rng);
    let keep = 1.0 - rng.gen::<f64>();
    n.map(|x| keep * x)
}

pub fn random_qubit<R: Rng>(rng: &mut R) -> Result<DensityMatrix> {
    qubit_from_bloch(random_bloch_vector(rng))
}

/// Pure qubit with Bloch vector along `n` (unit length).
pub fn qubit_along(n: [f64; 3]) -> StateVector {
    let theta = n[2].clamp(-1.0, 1.0).acos();
    let phi = n[1].atan2(n[0]);
    let amps = vec![
        C64::new((0.5 * theta).cos(), 0.0),
        C64::from_polar((0.5 * theta).sin(), phi),
    ];
    StateVector::normalized(HilbertSpec::new(vec![2]).expect("qubit"), amps).expect("unit vector")
}

/// Spectral decomposition `{(p, |ψ⟩)}` of the qubit with Bloch vector `r`.
pub fn qubit_ensemble(r: [f64; 3]) -> Vec<(f64, StateVector)> {
    let len = r.iter().map(|x| x * x).sum::<f64>().sqrt();
    if len < 1e-15 {
        return vec![(0.5, qubit_along([0.0, 0.0, 1.0])), (0.5, qubit_along([0.0, 0.0, -1.0]))];
    }
    let n = r.map(|x| x / len);
    vec![
        (0.5 * (1.0 + len), qubit_along(n)),
        (0.5 * (1.0 - len), qubit_along(n.map(|x| -x))),
    ]
}

pub fn tensor_all(parts: &[DensityMatrix]) -> DensityMatrix {
    let mut it = parts.iter();
    let first = it.next().expect("at least one factor").clone();
    it.fold(first, |acc, p| acc.tensor(p))
}

/// `σ_1 ⊗ … ⊗ σ_n` with independent random qubits.
pub fn random_product_spins<R: Rng>(rng: &mut R, n: usize) -> Result<DensityMatrix> {
    let qubits = (0..n).map(|_| random_qubit(rng)).collect::<Result<Vec<_>>>()?;
    Ok(tensor_all(&qubits))
}

pub fn random_coefficients<R: Rng>(rng: &mut R) -> WitnessCoefficients {
    WitnessCoefficients {
        x: rng.gen_range(-1.0..=1.0),
        y: rng.gen_range(-1.0..=1.0),
        z: rng.gen_range(-1.0..=1.0),
    }
}

/// Random Fock (`n ≤ 3`), coherent (`|α| ≤ 1`) or thermal (`Δ ∈ [0.5, 5]`)
/// state.
pub fn random_mode_state<R: Rng>(rng: &mut R, space: FockSpace) -> Result<ModeState> {
    match rng.gen_range(0..3) {
        0 => ModeState::fock(rng.gen_range(0..=3.min(space.n_max())), space),
        1 => {
            let r = rng.gen::<f64>().sqrt();
            let phase = rng.gen_range(0.0..2.0 * PI);
            coherent_state(C64::from_polar(r, phase), space)
        }
        _ => thermal_state(rng.gen_range(0.5..=5.0), space),
    }
}

/// Random normalized pure state of `n` particles on `grid`: a superposition
/// of two products of Gaussian packets with random centres, widths and
/// momentum kicks. The particles are generally entangled with each other.
pub fn random_position_state<R: Rng>(rng: &mut R, grid: &PositionGrid, n: usize) -> Vec<C64> {
    let g = grid.len();
    let span = grid.max() - grid.min();
    let h = grid.spacing();
    let mut total = vec![C64::new(0.0, 0.0); g.pow(n as u32)];
    for _ in 0..2 {
        let weight = C64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(0.0..2.0 * PI));
        let factors: Vec<Vec<C64>> = (0..n)
            .map(|_| {
                let center = grid.min() + span * rng.gen_range(0.3..0.7);
                let sigma = rng.gen_range(4.0 * h..(0.12 * span).max(6.0 * h));
                let kick = rng.gen_range(-1.0..1.0) / sigma;
                grid.points()
                    .iter()
                    .map(|&x| {
                        let u = (x - center) / sigma;
                        C64::from_polar((-0.25 * u * u).exp(), kick * x)
                    })
                    .collect()
            })
            .collect();
        for (idx, slot) in total.iter_mut().enumerate() {
            let mut rest = idx;
            let mut amp = weight;
            for f in factors.iter().rev() {
                amp *= f[rest % g];
                rest /= g;
            }
            *slot += amp;
        }
    }
    let norm = total.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    total.iter_mut().for_each(|z| *z /= norm);
    total
}

/// `σ_1 ⊗ … ⊗ σ_n ⊗ |χ⟩⟨χ|` on spins ⊗ grid positions, written as an
/// ensemble of pure product states.
pub fn random_spin_position_product<R: Rng>(
    rng: &mut R,
    grid: &PositionGrid,
    n: usize,
) -> Result<CompositeState> {
    let blochs: Vec<[f64; 3]> = (0..n).map(|_| random_bloch_vector(rng)).collect();
    let positions = random_position_state(rng, grid, n);
    let mut dims = vec![2; n];
    dims.extend(std::iter::repeat(grid.len()).take(n));
    let pos_spec = HilbertSpec::new(vec![grid.len(); n])?;
    let chi = StateVector::new(pos_spec, positions)?;
    let mut branches: Vec<(f64, Option<StateVector>)> = vec![(1.0, None)];
    for r in &blochs {
        let mut next = Vec::new();
        for (p, sv) in &branches {
            for (q, qubit) in qubit_ensemble(*r) {
                let v = match sv {
                    Some(sv) => sv.tensor(&qubit),
                    None => qubit,
                };
                next.push((p * q, Some(v)));
            }
        }
        branches = next;
    }
    let parts = branches
        .into_iter()
        .filter(|(p, _)| *p > 0.0)
        .map(|(p, sv)| (p, sv.expect("n >= 1").tensor(&chi)))
        .collect();
    Ok(CompositeState::Ensemble(parts))
}
