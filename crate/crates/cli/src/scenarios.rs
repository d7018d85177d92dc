//! Figure sweeps: closed-form curves with optional oracle overlays.

use std::collections::BTreeMap;

use hybrid_witness::fock::{coherent_state, FockSpace};
use hybrid_witness::gaussian::{
    closed_form_w, discretized_state, GaussianScenario, GaussianStateId, PositionGrid, DEFAULT_GRID_POINTS,
};
use hybrid_witness::oracle::{
    dense_expectation, oracle_bc_operator, thermal_space, HybridOracle, PairMoments, QuadratureDisplacements,
    ThermalOracle,
};
use hybrid_witness::chain::ModeCouplings;
use hybrid_witness::spin::{canonical_state, CanonicalState};
use hybrid_witness::witness::{
    axis_aggregates, closed_form_hybrid, closed_form_thermal, expect_via_charfn, optimal_coefficients, phi1_exact,
    HybridTag, WitnessCoefficients,
};
use hybrid_witness::C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::request::{CoefficientChoice, Scenario, SweepRequest};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Oracle,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub parameter: f64,
    pub value: f64,
}

/// One curve of a sweep, in parameter order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub curve: String,
    pub method: Method,
    pub points: Vec<SweepPoint>,
    pub metadata: BTreeMap<String, String>,
}

impl SweepResult {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn value_at(&self, parameter: f64) -> Option<f64> {
        self.points
            .iter()
            .find(|p| (p.parameter - parameter).abs() < 1e-12)
            .map(|p| p.value)
    }

    fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.into(), value.to_string());
        self
    }
}

/// `⟨W⟩` for a fixed choice, or at the coefficient vertex minimizing it.
fn evaluate<F>(choice: CoefficientChoice, f: F) -> hybrid_witness::Result<f64>
where
    F: Fn(WitnessCoefficients) -> hybrid_witness::Result<f64>,
{
    match choice {
        CoefficientChoice::Fixed(c) => f(c),
        CoefficientChoice::Auto => f(optimal_coefficients(axis_aggregates(&f)?)),
    }
}

/// Evaluate `f` at every sweep point, concurrently, keeping order.
fn sweep<F>(req: &SweepRequest, curve: String, method: Method, f: F) -> Result<SweepResult, CliError>
where
    F: Fn(f64, WitnessCoefficients) -> hybrid_witness::Result<f64> + Sync,
{
    let xs = req.range.points();
    let values = xs
        .par_iter()
        .map(|&x| evaluate(req.c, |c| f(x, c)))
        .collect::<hybrid_witness::Result<Vec<f64>>>()?;
    if let Some((x, v)) = xs.iter().zip(&values).find(|(_, v)| !v.is_finite()) {
        return Err(CliError::Numerical(format!("{curve}: non-finite value {v} at {x}")));
    }
    let points = xs
        .into_iter()
        .zip(values)
        .map(|(parameter, value)| SweepPoint { parameter, value })
        .collect();
    Ok(SweepResult {
        curve,
        method,
        points,
        metadata: BTreeMap::new(),
    }
    .meta("coefficients", req.c))
}

/// The three double-well states at fixed `y` against `x`.
pub fn cmd_gaussian(req: &SweepRequest) -> Result<Vec<SweepResult>, CliError> {
    let y = req.y;
    let mut out = Vec::new();
    for id in GaussianStateId::ALL {
        let curve = sweep(req, id.to_string(), Method::ClosedForm, |x, c| {
            Ok(closed_form_w(id, &GaussianScenario::new(x, y, c)?))
        })?;
        out.push(curve.meta("y", y));
    }
    if req.oracle {
        let probe = GaussianScenario::new(req.range.reach(), y, WitnessCoefficients::ALL_MINUS)?;
        let grid = PositionGrid::for_double_well(probe.sigma(), DEFAULT_GRID_POINTS)?;
        for id in GaussianStateId::ALL {
            let moments = PairMoments::new(&discretized_state(id, &probe, &grid)?, &grid)?;
            let curve = sweep(req, id.to_string(), Method::Oracle, |x, c| moments.expectation(x, &c))?;
            out.push(curve.meta("y", y).meta("grid_points", grid.len()));
        }
    }
    Ok(out)
}

fn thermal_fock_space(req: &SweepRequest, delta: f64) -> Result<FockSpace, CliError> {
    Ok(match req.nmax {
        Some(n) => FockSpace::new(n)?,
        None => thermal_space(delta)?,
    })
}

/// `|Ψ⁺⟩ ⊗ thermal(Δ)` for each Δ against `q'`.
pub fn cmd_thermal(req: &SweepRequest) -> Result<Vec<SweepResult>, CliError> {
    let eta = req.eta;
    let mut out = Vec::new();
    for &delta in &req.deltas {
        let label = format!("delta={delta}");
        let curve = sweep(req, label.clone(), Method::ClosedForm, |q, c| Ok(closed_form_thermal(q, eta, delta, c)))?;
        out.push(curve.meta("eta", eta));
        if req.oracle {
            let space = thermal_fock_space(req, delta)?;
            let oracle = ThermalOracle::with_reach(delta, eta, space, req.range.reach())?;
            let curve = sweep(req, label, Method::Oracle, |q, c| oracle.eval(q, &c))?;
            out.push(
                curve
                    .meta("eta", eta)
                    .meta("n_max", space.n_max())
                    .meta("evaluation", oracle.method()),
            );
        }
    }
    Ok(out)
}

fn hybrid_closed_form(tag: &HybridTag, q: f64, eta: f64, c: WitnessCoefficients) -> hybrid_witness::Result<f64> {
    match *tag {
        HybridTag::Phi1 { alpha_re, alpha_im } => Ok(phi1_exact(C64::new(alpha_re, alpha_im), q, eta, c)),
        _ => closed_form_hybrid(tag, q, eta, c),
    }
}

/// The hybrid states: φ₁ at α = 0 and at the requested α, φ₂, φ₃(p).
pub fn cmd_hybrid(req: &SweepRequest) -> Result<Vec<SweepResult>, CliError> {
    let eta = req.eta;
    let space = FockSpace::new(req.nmax.unwrap_or(crate::request::DEFAULT_HYBRID_NMAX))?;
    let mut tags = vec![HybridTag::phi1(C64::new(0.0, 0.0))];
    if req.alpha() != C64::new(0.0, 0.0) {
        tags.push(HybridTag::phi1(req.alpha()));
    }
    tags.extend([HybridTag::Phi2, HybridTag::Phi3 { p: req.p }]);
    let mut out = Vec::new();
    for tag in tags {
        if let HybridTag::Phi1 { alpha_re, alpha_im } = tag {
            space.check_amplitude(C64::new(alpha_re, alpha_im))?;
        }
        let curve = sweep(req, tag.label(), Method::ClosedForm, |q, c| hybrid_closed_form(&tag, q, eta, c))?;
        out.push(curve.meta("eta", eta));
        if req.oracle {
            let oracle = HybridOracle::with_reach(tag, eta, space, req.range.reach())?;
            let curve = sweep(req, tag.label(), Method::Oracle, |q, c| oracle.eval(q, &c))?;
            out.push(curve.meta("eta", eta).meta("n_max", space.n_max()));
        }
    }
    Ok(out)
}

/// `|Ψ⁺⟩ ⊗ ρ` for two ions and one mode: ρ thermal at the first Δ if one
/// is given, otherwise coherent at α. The closed-form curve comes from the
/// characteristic function of ρ.
pub fn cmd_custom(req: &SweepRequest) -> Result<Vec<SweepResult>, CliError> {
    let eta = req.eta;
    let (space, mode, label) = match req.deltas.first() {
        Some(&delta) => {
            let space = thermal_fock_space(req, delta)?;
            (space, hybrid_witness::fock::thermal_state(delta, space)?, format!("custom(delta={delta})"))
        }
        None => {
            let alpha = req.alpha();
            let default = FockSpace::required_for_amplitude(alpha.norm()).max(crate::request::DEFAULT_HYBRID_NMAX);
            let space = FockSpace::new(req.nmax.unwrap_or(default))?;
            (space, coherent_state(alpha, space)?, format!("custom(alpha={}{:+}i)", alpha.re, alpha.im))
        }
    };
    let spins = canonical_state(CanonicalState::PsiPlus).density();
    let couplings = ModeCouplings::two_ion_single_mode(eta);
    let mut out = Vec::new();
    let curve = sweep(req, label.clone(), Method::ClosedForm, |q, c| {
        Ok(expect_via_charfn(q, &spins, std::slice::from_ref(&mode), &couplings, c)?.value)
    })?;
    out.push(curve.meta("eta", eta).meta("evaluation", "characteristic_function"));
    if req.oracle {
        if 4 * space.dim() > hybrid_witness::oracle::ORACLE_DENSE_LIMIT {
            return Err(CliError::Usage(format!(
                "oracle overlay needs 4·(n_max + 1) ≤ {}, got n_max = {}",
                hybrid_witness::oracle::ORACLE_DENSE_LIMIT,
                space.n_max()
            )));
        }
        let disp = QuadratureDisplacements::new(space, req.range.reach() * eta);
        let rho = spins.tensor(&mode.density());
        let curve = sweep(req, label, Method::Oracle, |q, c| {
            dense_expectation(&oracle_bc_operator(q, &couplings, &disp, &c, None)?, &rho)
        })?;
        out.push(curve.meta("eta", eta).meta("n_max", space.n_max()));
    }
    Ok(out)
}

/// Dispatch on the request's scenario.
pub fn cmd_sweep(req: &SweepRequest) -> Result<Vec<SweepResult>, CliError> {
    match req.scenario {
        Scenario::Gaussian => cmd_gaussian(req),
        Scenario::Thermal => cmd_thermal(req),
        Scenario::Hybrid => cmd_hybrid(req),
        Scenario::Custom => cmd_custom(req),
    }
}
