//! Two spins in a symmetric double well whose positions are Gaussian
//! wavepackets.
//!
//! The wells sit at `x_A = +r/2` and `x_B = −r/2` with `r = 1`, every packet
//! has width `σ = r/y`, and the scattering wavevector is `q = x/r`. A packet
//! centred at `x_J` has amplitude `√f_J(x)` with
//! `f_J(x) = e^{−(x−x_J)²/2σ²}/√(2πσ²)`.
//!
//! Three states are considered:
//!
//! 1. the singlet with both particles pinned at the well centres;
//! 2. the singlet times `|f_A⟩|f_B⟩`;
//! 3. `(|↑↓⟩|f_A f_B⟩ − |↓↑⟩|f_B f_A⟩)/√2`, where the spin label follows
//!    the well rather than the particle.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::spin::{canonical_state, CanonicalState};
use crate::tensor::{HilbertSpec, StateVector};
use crate::witness::WitnessCoefficients;
use crate::{Error, Result, C64};

/// Well separation; all lengths are in units of `r`.
pub const WELL_SEPARATION: f64 = 1.0;

/// Default number of grid points for the discretized oracle.
pub const DEFAULT_GRID_POINTS: usize = 2048;

/// Half-width of the grid beyond each centre, in units of σ.
pub const GRID_HALF_WIDTH_SIGMAS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianWavepacket {
    pub center: f64,
    pub sigma: f64,
}

impl GaussianWavepacket {
    pub fn new(center: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() || !center.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "wavepacket center {center}, sigma {sigma}"
            )));
        }
        Ok(Self { center, sigma })
    }

    /// Probability density `f(x)`.
    pub fn density(&self, x: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        (-(x - self.center).powi(2) / (2.0 * s2)).exp() / (2.0 * PI * s2).sqrt()
    }

    /// Amplitude `√f(x)`.
    pub fn amplitude(&self, x: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        (-(x - self.center).powi(2) / (4.0 * s2)).exp() / (2.0 * PI * s2).powf(0.25)
    }
}

fn same_width(a: &GaussianWavepacket, b: &GaussianWavepacket) -> Result<f64> {
    if (a.sigma - b.sigma).abs() > 1e-12 * a.sigma.max(b.sigma) {
        return Err(Error::Unsupported(format!(
            "wavepackets of unequal width ({} vs {})",
            a.sigma, b.sigma
        )));
    }
    Ok(a.sigma)
}

/// `⟨f_A|f_B⟩ = e^{−(x_A−x_B)²/8σ²}`.
pub fn overlap(a: &GaussianWavepacket, b: &GaussianWavepacket) -> Result<f64> {
    let sigma = same_width(a, b)?;
    Ok((-(a.center - b.center).powi(2) / (8.0 * sigma * sigma)).exp())
}

/// `⟨f_A|e^{iqx̂}|f_B⟩`.
pub fn phase_element(a: &GaussianWavepacket, b: &GaussianWavepacket, q: f64) -> Result<C64> {
    let sigma = same_width(a, b)?;
    let envelope = overlap(a, b)? * (-0.5 * q * q * sigma * sigma).exp();
    Ok(C64::from_polar(envelope, 0.5 * q * (a.center + b.center)))
}

/// `∫ g(x) dx` of a smooth, rapidly decaying integrand over `[lo, hi]`,
/// split into panels of roughly one `width` each and integrated with
/// double-exponential quadrature.
fn integrate_panels<F: Fn(f64) -> f64>(g: F, lo: f64, hi: f64, width: f64, tol: f64) -> f64 {
    let panels = ((hi - lo) / width).ceil().max(1.0) as usize;
    let step = (hi - lo) / panels as f64;
    let per_panel = tol / panels as f64;
    (0..panels)
        .map(|p| {
            let a = lo + p as f64 * step;
            quadrature::integrate(&g, a, a + step, per_panel).integral
        })
        .sum()
}

fn quadrature_window(a: &GaussianWavepacket, b: &GaussianWavepacket) -> (f64, f64, f64) {
    let s = a.sigma.max(b.sigma);
    (
        a.center.min(b.center) - 14.0 * s,
        a.center.max(b.center) + 14.0 * s,
        s,
    )
}

/// `∫ √(f_A f_B) dx` by numerical quadrature (works for unequal widths).
pub fn quadrature_overlap(a: &GaussianWavepacket, b: &GaussianWavepacket) -> f64 {
    let (lo, hi, s) = quadrature_window(a, b);
    integrate_panels(|x| a.amplitude(x) * b.amplitude(x), lo, hi, s, 1e-13)
}

/// `∫ √(f_A f_B) e^{iqx} dx` by numerical quadrature.
pub fn quadrature_phase_element(a: &GaussianWavepacket, b: &GaussianWavepacket, q: f64) -> C64 {
    let (lo, hi, s) = quadrature_window(a, b);
    // Keep panels short against the oscillation as well.
    let width = if q == 0.0 { s } else { s.min(1.0 / q.abs()) };
    let re = integrate_panels(|x| a.amplitude(x) * b.amplitude(x) * (q * x).cos(), lo, hi, width, 1e-13);
    let im = integrate_panels(|x| a.amplitude(x) * b.amplitude(x) * (q * x).sin(), lo, hi, width, 1e-13);
    C64::new(re, im)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GaussianStateId {
    /// Singlet with pinned positions.
    One,
    /// Singlet times |f_A f_B⟩.
    Two,
    /// Spin label tied to the well.
    Three,
}

impl GaussianStateId {
    pub const ALL: [GaussianStateId; 3] = [Self::One, Self::Two, Self::Three];

    pub fn index(self) -> usize {
        match self {
            Self::One => 1,
            Self::Two => 2,
            Self::Three => 3,
        }
    }

    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Self::One),
            2 => Ok(Self::Two),
            3 => Ok(Self::Three),
            _ => Err(Error::UnknownState(format!("gaussian state {i}"))),
        }
    }
}

impl FromStr for GaussianStateId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.parse::<usize>()
            .map_err(|_| Error::UnknownState(format!("gaussian state {s}")))
            .and_then(Self::from_index)
    }
}

impl fmt::Display for GaussianStateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "psi{}", self.index())
    }
}

/// Rescaled wavevector `x = qr`, delocalization ratio `y = r/σ` and the
/// witness coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianScenario {
    pub x: f64,
    pub y: f64,
    pub c: WitnessCoefficients,
}

impl GaussianScenario {
    pub fn new(x: f64, y: f64, c: WitnessCoefficients) -> Result<Self> {
        if !(y > 0.0) || !y.is_finite() || !x.is_finite() {
            return Err(Error::InvalidParameter(format!("gaussian scenario x = {x}, y = {y}")));
        }
        Ok(Self { x, y, c })
    }

    pub fn sigma(&self) -> f64 {
        WELL_SEPARATION / self.y
    }

    pub fn q(&self) -> f64 {
        self.x / WELL_SEPARATION
    }

    pub fn packet_a(&self) -> GaussianWavepacket {
        GaussianWavepacket::new(0.5 * WELL_SEPARATION, self.sigma()).expect("y > 0")
    }

    pub fn packet_b(&self) -> GaussianWavepacket {
        GaussianWavepacket::new(-0.5 * WELL_SEPARATION, self.sigma()).expect("y > 0")
    }
}

/// Closed-form `⟨W⟩` for the three double-well states.
pub fn closed_form_w(state: GaussianStateId, s: &GaussianScenario) -> f64 {
    let (x, y) = (s.x, s.y);
    let c = s.c;
    let damp = (-(x * x) / (y * y)).exp();
    match state {
        GaussianStateId::One => 1.0 + (c.x + c.y + c.z) * x.cos(),
        GaussianStateId::Two => 1.0 + damp * (c.x + c.y + c.z) * x.cos(),
        GaussianStateId::Three => {
            1.0 + damp * ((c.x + c.y) * (-(y * y) / 4.0).exp() + c.z * x.cos())
        }
    }
}

/// Closed-form two-spin reduced state of state 3 in the basis
/// (↑↑, ↑↓, ↓↑, ↓↓).
pub fn reduced_state_three(y: f64) -> [[f64; 4]; 4] {
    let off = -0.5 * (-(y * y) / 4.0).exp();
    [
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 0.5, off, 0.0],
        [0.0, off, 0.5, 0.0],
        [0.0, 0.0, 0.0, 0.0],
    ]
}

/// Uniform position grid shared by both particles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionGrid {
    origin: f64,
    spacing: f64,
    len: usize,
}

impl PositionGrid {
    pub fn new(origin: f64, spacing: f64, len: usize) -> Result<Self> {
        if !(spacing > 0.0) || len < 2 || !origin.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid origin {origin}, spacing {spacing}, {len} points"
            )));
        }
        Ok(Self { origin, spacing, len })
    }

    /// Grid of about `target_points` nodes with both well centres on nodes
    /// and at least [`GRID_HALF_WIDTH_SIGMAS`]·σ beyond each centre.
    pub fn for_double_well(sigma: f64, target_points: usize) -> Result<Self> {
        let r = WELL_SEPARATION;
        let budget = target_points.saturating_sub(1) as f64;
        let per_r = (budget / (1.0 + 2.0 * GRID_HALF_WIDTH_SIGMAS * sigma / r)).floor();
        if per_r < 1.0 {
            return Err(Error::UnderResolvedGrid(format!(
                "{target_points} points cannot span the wells at sigma = {sigma}"
            )));
        }
        let m = per_r as usize;
        let h = r / m as f64;
        let k = (GRID_HALF_WIDTH_SIGMAS * sigma / h - 1e-9).ceil() as usize;
        Self::new(-0.5 * r - k as f64 * h, h, 2 * k + m + 1)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn point(&self, k: usize) -> f64 {
        self.origin + k as f64 * self.spacing
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.point(k)).collect()
    }

    pub fn min(&self) -> f64 {
        self.origin
    }

    pub fn max(&self) -> f64 {
        self.point(self.len - 1)
    }

    /// Index of the node at `x`, if `x` sits on one.
    pub fn node_of(&self, x: f64) -> Option<usize> {
        let t = (x - self.origin) / self.spacing;
        let k = t.round();
        if k < 0.0 || k as usize >= self.len || (t - k).abs() > 1e-9 {
            return None;
        }
        Some(k as usize)
    }

    /// Checks that the grid spans and resolves packets of width σ at
    /// wavevector `q`.
    pub fn check_resolution(&self, centers: &[f64], sigma: f64, q: f64) -> Result<()> {
        let h = self.spacing;
        if h > sigma / 4.0 {
            return Err(Error::UnderResolvedGrid(format!(
                "spacing {h:.3e} exceeds sigma/4 = {:.3e}",
                sigma / 4.0
            )));
        }
        if q.abs() * h > PI / 4.0 {
            return Err(Error::UnderResolvedGrid(format!(
                "spacing {h:.3e} too coarse for wavevector {q}"
            )));
        }
        let reach = GRID_HALF_WIDTH_SIGMAS * sigma * (1.0 - 1e-9);
        for &c in centers {
            if c - reach < self.min() - 1e-12 || c + reach > self.max() + 1e-12 {
                return Err(Error::UnderResolvedGrid(format!(
                    "grid [{:.4}, {:.4}] does not extend {GRID_HALF_WIDTH_SIGMAS} sigma beyond center {c}",
                    self.min(),
                    self.max()
                )));
            }
        }
        Ok(())
    }

    /// Discretely normalized samples of `√f` on the grid.
    pub fn sample(&self, packet: &GaussianWavepacket) -> Vec<f64> {
        let mut v: Vec<f64> = (0..self.len).map(|k| packet.amplitude(self.point(k))).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        v
    }
}

/// Spin ⊗ position state on the grid, factor layout `[2, 2, G, G]`.
pub fn discretized_state(
    state: GaussianStateId,
    scenario: &GaussianScenario,
    grid: &PositionGrid,
) -> Result<StateVector> {
    let a = scenario.packet_a();
    let b = scenario.packet_b();
    grid.check_resolution(&[a.center, b.center], scenario.sigma(), scenario.q())?;
    let g = grid.len();
    let spec = HilbertSpec::new(vec![2, 2, g, g])?;
    let block = g * g;
    let mut amps = vec![C64::new(0.0, 0.0); 4 * block];
    let singlet = canonical_state(CanonicalState::Singlet);
    match state {
        GaussianStateId::One => {
            let ka = grid
                .node_of(a.center)
                .ok_or_else(|| Error::UnderResolvedGrid("well centre not on a grid node".into()))?;
            let kb = grid
                .node_of(b.center)
                .ok_or_else(|| Error::UnderResolvedGrid("well centre not on a grid node".into()))?;
            for s in 0..4 {
                amps[s * block + ka * g + kb] = singlet.as_slice()[s];
            }
        }
        GaussianStateId::Two => {
            let va = grid.sample(&a);
            let vb = grid.sample(&b);
            for s in [1usize, 2] {
                let w = singlet.as_slice()[s].re;
                for k1 in 0..g {
                    let row = s * block + k1 * g;
                    for k2 in 0..g {
                        amps[row + k2] = C64::new(w * va[k1] * vb[k2], 0.0);
                    }
                }
            }
        }
        GaussianStateId::Three => {
            let va = grid.sample(&a);
            let vb = grid.sample(&b);
            let h = std::f64::consts::FRAC_1_SQRT_2;
            for k1 in 0..g {
                for k2 in 0..g {
                    amps[block + k1 * g + k2] = C64::new(h * va[k1] * vb[k2], 0.0);
                    amps[2 * block + k1 * g + k2] = C64::new(-h * vb[k1] * va[k2], 0.0);
                }
            }
        }
    }
    StateVector::normalized(spec, amps)
}
