//! Normal modes of a uniform linear ion chain.
//!
//! Each ion sits in an on-site harmonic well of stiffness `k0` and couples to
//! the others through springs derived from a quadratic expansion of the
//! inter-ion interaction around equally spaced equilibrium positions `n·a`.
//! Diagonalizing the dynamical matrix gives the transformation `R`
//! (rows = ions, columns = modes), the frequencies `ω_k` and, from the
//! mode's behaviour under chain reversal, its parity.
//!
//! Displacement amplitudes follow
//! `φ_k(n, m) = √(ħ/(N m ω_k)) (R_{n,k} − R_{m,k})`.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Coupling {
    /// Springs of stiffness `k_c` between neighbours only.
    NearestNeighbor { k_c: f64 },
    /// Linearized Coulomb repulsion: `K_nm = 2·strength/(a|n−m|)³`.
    Coulomb { strength: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_ions: usize,
    pub mass: f64,
    pub spacing_a: f64,
    /// On-site trap stiffness `k0`.
    pub trap_stiffness: f64,
    pub coupling: Coupling,
    /// Value of ħ in the units of the other parameters.
    pub hbar: f64,
}

impl ChainConfig {
    pub fn new(
        n_ions: usize,
        mass: f64,
        spacing_a: f64,
        trap_stiffness: f64,
        coupling: Coupling,
    ) -> Result<Self> {
        let cfg = Self {
            n_ions,
            mass,
            spacing_a,
            trap_stiffness,
            coupling,
            hbar: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_hbar(mut self, hbar: f64) -> Result<Self> {
        self.hbar = hbar;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.n_ions < 2 {
            return Err(Error::InvalidParameter(format!("chain needs >= 2 ions, got {}", self.n_ions)));
        }
        let coupling = match self.coupling {
            Coupling::NearestNeighbor { k_c } => k_c,
            Coupling::Coulomb { strength } => strength,
        };
        for (name, v) in [
            ("mass", self.mass),
            ("spacing", self.spacing_a),
            ("coupling", coupling),
            ("hbar", self.hbar),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.trap_stiffness >= 0.0) || !self.trap_stiffness.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "trap stiffness must be non-negative, got {}",
                self.trap_stiffness
            )));
        }
        Ok(())
    }

    fn spring(&self, n: usize, m: usize) -> f64 {
        let d = n.abs_diff(m);
        match self.coupling {
            Coupling::NearestNeighbor { k_c } => {
                if d == 1 {
                    k_c
                } else {
                    0.0
                }
            }
            Coupling::Coulomb { strength } => 2.0 * strength / (self.spacing_a * d as f64).powi(3),
        }
    }

    /// Mass-weighted dynamical matrix.
    pub fn dynamical_matrix(&self) -> DMatrix<f64> {
        let n = self.n_ions;
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                let springs: f64 = (0..n).filter(|&k| k != i).map(|k| self.spring(i, k)).sum();
                (self.trap_stiffness + springs) / self.mass
            } else {
                -self.spring(i, j) / self.mass
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    /// Symmetric under chain reversal (μ = +).
    Even,
    /// Antisymmetric under chain reversal (μ = −).
    Odd,
}

impl Parity {
    pub fn symbol(self) -> char {
        match self {
            Parity::Even => '+',
            Parity::Odd => '-',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecomposition {
    r: DMatrix<f64>,
    omegas: Vec<f64>,
    parity: Vec<Parity>,
}

impl ModeDecomposition {
    /// Rows are ions, columns are modes.
    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    /// Ascending.
    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn parity(&self) -> &[Parity] {
        &self.parity
    }

    pub fn n_modes(&self) -> usize {
        self.omegas.len()
    }

    pub fn mode_vector(&self, k: usize) -> Vec<f64> {
        self.r.column(k).iter().copied().collect()
    }

    /// Mode whose amplitude pattern alternates most between neighbours,
    /// i.e. the one closest to wavevector π/a.
    pub fn zone_boundary_mode(&self) -> usize {
        let alternation = |k: usize| -> f64 {
            let v = self.r.column(k);
            (1..v.len()).map(|i| -v[i] * v[i - 1]).sum()
        };
        (0..self.n_modes())
            .max_by(|&a, &b| alternation(a).total_cmp(&alternation(b)).then(b.cmp(&a)))
            .expect("at least two modes")
    }

    /// `RᵀR − I`, largest entry.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.n_modes();
        let g = self.r.transpose() * &self.r - DMatrix::<f64>::identity(n, n);
        g.amax()
    }
}

fn orient(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn parity_of(v: &[f64]) -> Parity {
    let n = v.len();
    let overlap: f64 = (0..n).map(|i| v[i] * v[n - 1 - i]).sum();
    if overlap >= 0.0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// Diagonalize the dynamical matrix of a chain.
pub fn decompose(config: &ChainConfig) -> Result<ModeDecomposition> {
    config.validate()?;
    let n = config.n_ions;
    let eig = SymmetricEigen::new(config.dynamical_matrix());
    let mut modes: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|k| {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            orient(&mut v);
            (eig.eigenvalues[k], v)
        })
        .collect();
    let scale = modes.iter().map(|(l, _)| l.abs()).fold(0.0, f64::max);
    if let Some((l, _)) = modes.iter().find(|(l, _)| *l <= 1e-12 * scale) {
        return Err(Error::UnstableConfiguration(*l));
    }
    modes.sort_by(|(la, va), (lb, vb)| {
        if (la - lb).abs() <= 1e-12 * scale {
            va.iter()
                .zip(vb)
                .map(|(a, b)| a.total_cmp(b))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        } else {
            la.total_cmp(lb)
        }
    });
    let r = DMatrix::from_fn(n, n, |i, k| modes[k].1[i]);
    let omegas = modes.iter().map(|(l, _)| l.sqrt()).collect();
    let parity = modes.iter().map(|(_, v)| parity_of(v)).collect();
    Ok(ModeDecomposition { r, omegas, parity })
}

/// Per-mode displacement amplitudes for one ion pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiVector(pub Vec<f64>);

impl PhiVector {
    pub fn components(&self) -> &[f64] {
        &self.0
    }
}

/// `φ_k(n, m)` for every mode.
pub fn phi(decomp: &ModeDecomposition, config: &ChainConfig, n: usize, m: usize) -> Result<PhiVector> {
    let count = config.n_ions;
    if decomp.n_modes() != count {
        return Err(Error::DimensionMismatch {
            expected: count,
            found: decomp.n_modes(),
        });
    }
    for idx in [n, m] {
        if idx >= count {
            return Err(Error::FactorOutOfRange { index: idx, len: count });
        }
    }
    if n == m {
        return Err(Error::DegeneratePair(n));
    }
    let r = decomp.r();
    Ok(PhiVector(
        (0..count)
            .map(|k| {
                let prefactor = (config.hbar / (count as f64 * config.mass * decomp.omegas[k])).sqrt();
                prefactor * (r[(n, k)] - r[(m, k)])
            })
            .collect(),
    ))
}

/// Units in which [`eta_from_physical`] is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub name: String,
    pub hbar: f64,
}

impl UnitSystem {
    /// ħ = 1.
    pub fn natural() -> Self {
        Self {
            name: "natural".into(),
            hbar: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaParameter {
    pub eta: f64,
    /// Unit system the value was computed in; `None` when η is given
    /// directly.
    pub units: Option<String>,
}

impl EtaParameter {
    pub fn direct(eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !eta.is_finite() {
            return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
        }
        Ok(Self { eta, units: None })
    }
}

/// `η = a^{−1/4} √(ħ / (Q √(8m)))` evaluated as written in the given units.
pub fn eta_from_physical(spacing_a: f64, mass: f64, charge: f64, units: &UnitSystem) -> Result<EtaParameter> {
    for (name, v) in [("spacing", spacing_a), ("mass", mass), ("charge", charge), ("hbar", units.hbar)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    let eta = spacing_a.powf(-0.25) * (units.hbar / (charge * (8.0 * mass).sqrt())).sqrt();
    Ok(EtaParameter {
        eta,
        units: Some(units.name.clone()),
    })
}

/// Dimensionless displacement amplitudes `g_k(n, m) = φ_k(n, m)/a` for the
/// selected modes; the displacement entering the witness is `i q' g_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeCouplings {
    n_ions: usize,
    modes: Vec<usize>,
    g: BTreeMap<(usize, usize), Vec<f64>>,
}

impl ModeCouplings {
    pub fn from_decomposition(
        decomp: &ModeDecomposition,
        config: &ChainConfig,
        selection: &[usize],
    ) -> Result<Self> {
        if selection.is_empty() {
            return Err(Error::InvalidParameter("no modes selected".into()));
        }
        if let Some(&k) = selection.iter().find(|&&k| k >= decomp.n_modes()) {
            return Err(Error::ModeOutOfRange {
                index: k,
                n_modes: decomp.n_modes(),
            });
        }
        let n = config.n_ions;
        let mut g = BTreeMap::new();
        for a in 0..n {
            for b in a + 1..n {
                let full = phi(decomp, config, a, b)?;
                g.insert(
                    (a, b),
                    selection.iter().map(|&k| full.0[k] / config.spacing_a).collect(),
                );
            }
        }
        Ok(Self {
            n_ions: n,
            modes: selection.to_vec(),
            g,
        })
    }

    /// Two ions coupled through their stretch mode only, with `g(0, 1) = η`.
    pub fn two_ion_single_mode(eta: f64) -> Self {
        let mut g = BTreeMap::new();
        g.insert((0, 1), vec![eta]);
        Self {
            n_ions: 2,
            modes: vec![1],
            g,
        }
    }

    pub fn n_ions(&self) -> usize {
        self.n_ions
    }

    /// Indices of the selected modes in the full decomposition.
    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// `g(n, m)` for `n < m`, one entry per selected mode.
    pub fn amplitudes(&self, n: usize, m: usize) -> Result<&[f64]> {
        if n == m {
            return Err(Error::DegeneratePair(n));
        }
        self.g
            .get(&(n, m))
            .map(|v| v.as_slice())
            .ok_or(Error::FactorOutOfRange {
                index: n.max(m),
                len: self.n_ions,
            })
    }

    /// Pairs `(n, m)` with `n < m` in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.g.keys().copied()
    }
}
