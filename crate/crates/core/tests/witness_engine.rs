use std::f64::consts::FRAC_PI_2;

use hybrid_witness::chain::{decompose, ChainConfig, Coupling, ModeCouplings};
use hybrid_witness::fock::{coherent_state, thermal_state, FockSpace, ModeState};
use hybrid_witness::oracle::{dense_expectation, oracle_bc_operator, QuadratureDisplacements};
use hybrid_witness::sampling::{random_coefficients, random_mode_state, random_product_spins, seeded_rng};
use hybrid_witness::spin::{canonical_state, concurrence, CanonicalState};
use hybrid_witness::tensor::{partial_trace, HilbertSpec, StateVector};
use hybrid_witness::witness::{
    axis_aggregates, build_hybrid_state, closed_form_hybrid, closed_form_thermal, expect_via_charfn,
    optimal_coefficients, phi1_exact, witness_bc, witness_classical, CompositeState, HybridTag,
    WitnessCoefficients, WitnessOperator,
};
use hybrid_witness::C64;
use proptest::prelude::*;
use rand::Rng;

const PPM: WitnessCoefficients = WitnessCoefficients::PLUS_PLUS_MINUS;
const ALL_MINUS: WitnessCoefficients = WitnessCoefficients::ALL_MINUS;

fn sweep(lo: f64, hi: f64, steps: usize) -> impl Iterator<Item = f64> {
    (0..steps).map(move |k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
}

fn space(n_max: usize) -> FockSpace {
    FockSpace::new(n_max).unwrap()
}

fn pure(which: CanonicalState) -> CompositeState {
    CompositeState::Pure(canonical_state(which))
}

fn psi_plus_thermal(delta: f64, n_max: usize) -> CompositeState {
    CompositeState::Product {
        spins: canonical_state(CanonicalState::PsiPlus).density(),
        modes: vec![thermal_state(delta, space(n_max)).unwrap()],
    }
}

/// Dense oracle value of `⟨W_BC(q')⟩` on `state`.
fn oracle_value(qprime: f64, couplings: &ModeCouplings, sp: FockSpace, c: &WitnessCoefficients, state: &CompositeState) -> f64 {
    let beta_max = couplings.pairs().flat_map(|(i, j)| couplings.amplitudes(i, j).unwrap().to_vec()).fold(0.0, |a: f64, g| a.max((qprime * g).abs()));
    let disp = QuadratureDisplacements::new(sp, beta_max);
    let op = oracle_bc_operator(qprime, couplings, &disp, c, None).unwrap();
    dense_expectation(&op, &state.to_density().unwrap()).unwrap()
}

#[test]
fn classical_examples() {
    let singlet = pure(CanonicalState::Singlet);
    let at = |x: f64| witness_classical(x, &[1.0, 0.0], ALL_MINUS, 2).unwrap().expectation(&singlet).unwrap();
    assert!((at(0.0) + 2.0).abs() < 1e-14);
    assert!((at(FRAC_PI_2) - 1.0).abs() < 1e-14);
    for x in sweep(-3.0, 3.0, 25) {
        assert!((at(x) - (1.0 - 3.0 * x.cos())).abs() < 1e-14);
    }
    let zero = witness_classical(1.7, &[0.0, 0.4, 2.0], WitnessCoefficients::ZERO, 3).unwrap();
    assert!(zero.to_dense().unwrap().max_abs_diff(&hybrid_witness::tensor::ComplexMatrix::identity(8)) == 0.0);
    assert!(witness_classical(0.0, &[0.0, 1.0], ALL_MINUS, 3).is_err());
}

#[test]
fn coefficient_bounds_enforced() {
    assert!(WitnessCoefficients::new(-1.01, 0.0, 0.0).is_err());
    let bad = WitnessCoefficients { x: 0.0, y: 2.0, z: 0.0 };
    assert!(witness_classical(0.0, &[0.0, 1.0], bad, 2).is_err());
    assert!(witness_bc(0.5, &ModeCouplings::two_ion_single_mode(1.0), space(20), bad).is_err());
}

#[test]
fn zero_wavevector_drops_the_bath() {
    let couplings = ModeCouplings::two_ion_single_mode(1.0);
    let op = witness_bc(0.0, &couplings, space(6), PPM).unwrap();
    let spin_only = witness_classical(0.0, &[0.0, 1.0], PPM, 2).unwrap();
    let expect = hybrid_witness::tensor::kron(spin_only.spin_matrix().unwrap(), &hybrid_witness::tensor::ComplexMatrix::identity(7));
    assert!(op.to_dense().unwrap().max_abs_diff(&expect) < 1e-15);
}

#[test]
fn operators_are_hermitian() {
    let classical = witness_classical(0.9, &[0.0, 0.7, 2.1], WitnessCoefficients::new(0.2, -0.5, 1.0).unwrap(), 3).unwrap();
    assert!(classical.hermiticity_defect() < 1e-10);
    let couplings = ModeCouplings::two_ion_single_mode(1.0);
    for q in [-2.5, 0.3, 1.9] {
        let op = witness_bc(q, &couplings, space(30), PPM).unwrap();
        assert!(op.hermiticity_defect() < 1e-10);
    }
    let cfg = ChainConfig::new(3, 1.0, 1.0, 1.0, Coupling::Coulomb { strength: 0.5 }).unwrap();
    let chain = ModeCouplings::from_decomposition(&decompose(&cfg).unwrap(), &cfg, &[0, 2]).unwrap();
    let op = witness_bc(1.4, &chain, space(5).with_acknowledged_truncation(), ALL_MINUS).unwrap();
    assert!(op.hermiticity_defect() < 1e-10);
}

fn check_thermal(delta: f64, n_max: usize, steps: usize) {
    let couplings = ModeCouplings::two_ion_single_mode(1.0);
    let state = psi_plus_thermal(delta, n_max);
    for q in sweep(-3.0, 3.0, steps) {
        let op = witness_bc(q, &couplings, space(n_max), PPM).unwrap();
        let got = op.expectation(&state).unwrap();
        let closed = closed_form_thermal(q, 1.0, delta, PPM);
        assert!((got - closed).abs() < 1e-6, "delta = {delta}, q' = {q}: {got} vs {closed}");
    }
}

#[test]
fn thermal_matches_closed_form_cold() {
    check_thermal(100.0, 60, 61);
}

#[test]
fn thermal_matches_closed_form_warm() {
    check_thermal(1.0, 60, 61);
}

#[test]
fn thermal_matches_closed_form_hot() {
    let n_max = FockSpace::required_for_thermal(0.01);
    check_thermal(0.01, n_max, 7);
}

#[test]
fn thermal_closed_form_examples() {
    for delta in [0.01, 1.0, 100.0] {
        for eta in [0.3, 1.0, 2.0] {
            assert_eq!(closed_form_thermal(0.0, eta, delta, PPM), -2.0);
        }
    }
    for q in sweep(-3.0, 3.0, 13) {
        let cold = closed_form_thermal(q, 1.0, 200.0, PPM);
        assert!((cold - (1.0 - 3.0 * (-0.5 * q * q).exp() * q.cos())).abs() < 1e-12);
    }
    let window = |delta: f64| sweep(-3.0, 3.0, 6001).filter(|&q| closed_form_thermal(q, 1.0, delta, PPM) < 0.0).count();
    let widths: Vec<usize> = [100.0, 1.0, 0.01].iter().map(|&d| window(d)).collect();
    assert!(widths[0] > widths[1] && widths[1] > widths[2], "{widths:?}");
}

#[test]
fn charfn_route_matches_full_operator() {
    let couplings = ModeCouplings::two_ion_single_mode(1.0);
    let sp = space(40);
    let thermal = thermal_state(1.0, sp).unwrap();
    let spins = canonical_state(CanonicalState::PsiPlus).density();
    let state = CompositeState::Product {
        spins: spins.clone(),
        modes: vec![thermal.clone()],
    };
    for q in sweep(-3.0, 3.0, 25) {
        let via = expect_via_charfn(q, &spins, &[thermal.clone()], &couplings, PPM).unwrap();
        let oracle = oracle_value(q, &couplings, sp, &PPM, &state);
        assert!((via.value - oracle).abs() < 1e-10, "q' = {q}");
        assert!(via.sine_branch.abs() < 1e-14);
    }
}

#[test]
fn charfn_route_with_complex_characteristic_function() {
    let couplings = ModeCouplings::two_ion_single_mode(0.8);
    let sp = space(40);
    let mode = coherent_state(C64::new(0.4, -0.6), sp).unwrap();
    let spins = hybrid_witness::sampling::random_product_spins(&mut seeded_rng(3), 2).unwrap();
    let state = CompositeState::Product {
        spins: spins.clone(),
        modes: vec![mode.clone()],
    };
    let c = WitnessCoefficients::new(0.3, -0.9, 0.6).unwrap();
    for q in sweep(-2.0, 2.0, 9) {
        let via = expect_via_charfn(q, &spins, &[mode.clone()], &couplings, c).unwrap();
        let oracle = oracle_value(q, &couplings, sp, &c, &state);
        assert!((via.value - oracle).abs() < 1e-10, "q' = {q}");
    }
}

#[test]
fn product_spins_stay_nonnegative() {
    let couplings = ModeCouplings::two_ion_single_mode(1.0);
    let mut rng = seeded_rng(9);
    let spins = canonical_state(CanonicalState::UpUp).density();
    for _ in 0..30 {
        let mode = random_mode_state(&mut rng, space(40)).unwrap();
        let c = random_coefficients(&mut rng);
        let q = rng.gen_range(-3.0..3.0);
        let via = expect_via_charfn(q, &spins, &[mode], &couplings, c).unwrap();
        assert!(via.value >= -1e-12);
    }
}

#[test]
fn hybrid_states_match_closed_forms() {
    let couplings = ModeCouplings::two_ion_single_mode(1.0);
    let sp = space(60);
    let mut tags = vec![HybridTag::Phi2];
    tags.extend([0.0, 0.5, 1.0, 1.5].map(|a| HybridTag::phi1(C64::new(a, 0.0))));
    tags.extend([0.0, 0.25, 0.5, 1.0].map(|p| HybridTag::Phi3 { p }));
    for tag in tags {
        let state = build_hybrid_state(tag, sp).unwrap().state;
        for q in sweep(-3.0, 3.0, 31) {
            let op = witness_bc(q, &couplings, sp, PPM).unwrap();
            let got = op.expectation(&state).unwrap();
            let closed = closed_form_hybrid(&tag, q, 1.0, PPM).unwrap();
            assert!((got - closed).abs() < 1e-6, "{} q' = {q}: {got} vs {closed}", tag.label());
        }
    }
}

#[test]
fn complex_alpha_follows_symmetrized_operator() {
    let couplings = ModeCouplings::two_ion_single_mode(1.0);
    let sp = space(60);
    let alpha = C64::new(0.5, 0.5);
    let tag = HybridTag::phi1(alpha);
    let state = build_hybrid_state(tag, sp).unwrap().state;
    let mut worst_printed: f64 = 0.0;
    for q in sweep(-3.0, 3.0, 31) {
        let got = witness_bc(q, &couplings, sp, PPM).unwrap().expectation(&state).unwrap();
        let mirrored = witness_bc(-q, &couplings, sp, PPM).unwrap().expectation(&state).unwrap();
        assert!((got - mirrored).abs() < 1e-10);
        assert!((got - phi1_exact(alpha, q, 1.0, PPM)).abs() < 1e-6);
        worst_printed = worst_printed.max((got - closed_form_hybrid(&tag, q, 1.0, PPM).unwrap()).abs());
    }
    // The printed line is odd in q' and cannot track the operator.
    assert!(worst_printed > 1e-2);
}

#[test]
fn hybrid_closed_form_examples() {
    let origin = closed_form_hybrid(&HybridTag::phi1(C64::new(0.0, 0.0)), 0.0, 1.0, PPM).unwrap();
    assert_eq!(origin, -2.0);
    for p in [0.0, 0.3, 0.5, 0.8, 1.0] {
        let v = closed_form_hybrid(&HybridTag::Phi3 { p }, 0.0, 1.0, PPM).unwrap();
        assert!((v - (2.0 - 4.0 * p)).abs() < 1e-15);
    }
    assert_eq!(closed_form_hybrid(&HybridTag::Phi3 { p: 0.5 }, 0.0, 1.0, PPM).unwrap(), 0.0);
    assert!(closed_form_hybrid(&HybridTag::Phi3 { p: 1.2 }, 0.0, 1.0, PPM).is_err());
    assert!((closed_form_hybrid(&HybridTag::Phi2, 0.0, 1.0, PPM).unwrap()).abs() < 1e-15);
}

/// Golden-section minimum of `f` on `[a, b]`.
fn minimize(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-10 {
        let (c, d) = (b - r * (b - a), a + r * (b - a));
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

#[test]
fn phi2_minima_are_symmetric_and_detecting() {
    let f = |q: f64| closed_form_hybrid(&HybridTag::Phi2, q, 1.0, PPM).unwrap();
    let coarse = |lo: f64, hi: f64| {
        sweep(lo, hi, 301).min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap()
    };
    let right = coarse(0.0, 3.0);
    let left = coarse(-3.0, 0.0);
    let right = minimize(f, right - 0.02, right + 0.02);
    let left = minimize(f, left - 0.02, left + 0.02);
    assert!(right > 0.1 && left < -0.1);
    assert!((right + left).abs() < 1e-6);
    assert!((f(right) - f(left)).abs() < 1e-12);
    assert!(f(right) < 0.0 && f(right) < f(0.0));

    let couplings = ModeCouplings::two_ion_single_mode(1.0);
    let sp = space(60);
    let state = build_hybrid_state(HybridTag::Phi2, sp).unwrap().state;
    for q in [left, right] {
        let got = witness_bc(q, &couplings, sp, PPM).unwrap().expectation(&state).unwrap();
        assert!(got < 0.0);
    }
    let at_origin = witness_bc(0.0, &couplings, sp, PPM).unwrap().expectation(&state).unwrap();
    assert!(at_origin.abs() < 1e-14);
}

#[test]
fn hybrid_state_examples() {
    let sp = space(20);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let CompositeState::Pure(phi2) = build_hybrid_state(HybridTag::Phi2, sp).unwrap().state else {
        panic!("phi2 is pure");
    };
    let dim = sp.dim();
    for (i, z) in phi2.as_slice().iter().enumerate() {
        let expect = if i == dim || i == 2 * dim + 1 { h } else { 0.0 };
        assert_eq!(*z, C64::new(expect, 0.0));
    }
    let spins = partial_trace(&phi2.density(), &[0, 1]).unwrap();
    assert!(concurrence(&spins).unwrap() < 1e-12);

    let CompositeState::Pure(phi1) = build_hybrid_state(HybridTag::phi1(C64::new(0.0, 0.0)), sp).unwrap().state else {
        panic!("phi1 is pure");
    };
    let vac = StateVector::basis(sp.spec(), 0).unwrap();
    let product = canonical_state(CanonicalState::PsiPlus).tensor(&vac);
    assert!((phi1.amplitudes() - product.amplitudes()).norm() < 1e-15);

    let CompositeState::Mixed(phi3) = build_hybrid_state(HybridTag::Phi3 { p: 0.3 }, sp).unwrap().state else {
        panic!("phi3 is mixed");
    };
    assert!((phi3.matrix().trace() - C64::new(1.0, 0.0)).norm() < 1e-12);
    assert!(build_hybrid_state(HybridTag::phi1(C64::new(4.0, 0.0)), space(10)).is_err());
}

#[test]
fn optimal_coefficients_examples() {
    let singlet = pure(CanonicalState::Singlet);
    let aggregates = axis_aggregates(|c| {
        witness_classical(0.0, &[0.0, 1.0], c, 2)?.expectation(&singlet)
    })
    .unwrap();
    assert_eq!(optimal_coefficients(aggregates), ALL_MINUS);

    let couplings = ModeCouplings::two_ion_single_mode(1.0);
    let spins = canonical_state(CanonicalState::PsiPlus).density();
    let mode = thermal_state(1.0, space(60)).unwrap();
    let aggregates = axis_aggregates(|c| {
        Ok(expect_via_charfn(0.4, &spins, std::slice::from_ref(&mode), &couplings, c)?.value)
    })
    .unwrap();
    assert_eq!(optimal_coefficients(aggregates), PPM);
    assert_eq!(optimal_coefficients([0.0; 3]), WitnessCoefficients::new(1.0, 1.0, 1.0).unwrap());
}

#[test]
fn detection_sanity() {
    let classical = witness_classical(0.0, &[0.0, 1.0], ALL_MINUS, 2).unwrap();
    assert!(classical.expectation(&pure(CanonicalState::Singlet)).unwrap() < 0.0);
    let op = witness_bc(0.0, &ModeCouplings::two_ion_single_mode(1.0), space(60), PPM).unwrap();
    assert!(op.expectation(&psi_plus_thermal(1.0, 60)).unwrap() < 0.0);
}

#[test]
fn three_ion_structured_matches_dense_oracle() {
    let cfg = ChainConfig::new(3, 1.0, 1.0, 1.0, Coupling::Coulomb { strength: 0.5 }).unwrap();
    let d = decompose(&cfg).unwrap();
    let couplings = ModeCouplings::from_decomposition(&d, &cfg, &[0, 2]).unwrap();
    let sp = space(7).with_acknowledged_truncation();
    let mut rng = seeded_rng(21);
    let spec = HilbertSpec::new(vec![2, 2, 2, 8, 8]).unwrap();
    let c = WitnessCoefficients::new(0.7, -0.2, -1.0).unwrap();
    for q in [-2.0, 0.6, 1.5] {
        let op = witness_bc(q, &couplings, sp, c).unwrap();
        let disp = QuadratureDisplacements::new(sp, 4.0);
        let dense = oracle_bc_operator(q, &couplings, &disp, &c, None).unwrap();
        assert!(op.to_dense().unwrap().max_abs_diff(&dense) < 1e-12);
        let amps: Vec<C64> = (0..spec.total_dim()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let psi = StateVector::normalized(spec.clone(), amps).unwrap();
        let entangled = CompositeState::Pure(psi);
        let got = op.expectation(&entangled).unwrap();
        assert!((got - dense_expectation(&dense, &entangled.to_density().unwrap()).unwrap()).abs() < 1e-12);
        let mixed = CompositeState::Mixed(entangled.to_density().unwrap());
        assert!((op.expectation(&mixed).unwrap() - got).abs() < 1e-12);
        let product = CompositeState::Product {
            spins: random_product_spins(&mut rng, 3).unwrap(),
            modes: vec![ModeState::fock(1, sp).unwrap(), thermal_state(2.0, sp.with_acknowledged_truncation()).unwrap()],
        };
        let got = op.expectation(&product).unwrap();
        assert!((got - dense_expectation(&dense, &product.to_density().unwrap()).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn separable_states_are_never_detected() {
    let mut rng = seeded_rng(77);
    let cfg = ChainConfig::new(3, 1.0, 1.0, 1.0, Coupling::NearestNeighbor { k_c: 0.4 }).unwrap();
    let d = decompose(&cfg).unwrap();
    let chain = ModeCouplings::from_decomposition(&d, &cfg, &[1, 2]).unwrap();
    let pair = ModeCouplings::two_ion_single_mode(1.0);
    let sp = space(60);
    for _ in 0..60 {
        let c = random_coefficients(&mut rng);
        let q = rng.gen_range(-3.0..3.0);
        for couplings in [&pair, &chain] {
            let n = couplings.n_ions();
            let modes = (0..couplings.n_modes()).map(|_| random_mode_state(&mut rng, sp)).collect::<Result<Vec<_>, _>>().unwrap();
            let state = CompositeState::Product {
                spins: random_product_spins(&mut rng, n).unwrap(),
                modes,
            };
            let op = witness_bc(q, couplings, sp, c).unwrap();
            assert!(op.expectation(&state).unwrap() >= -1e-8);
        }
        let spins = random_product_spins(&mut rng, 3).unwrap();
        let positions = [0.0, rng.gen_range(0.5..2.0), rng.gen_range(2.5..4.0)];
        let classical = witness_classical(q, &positions, c, 3).unwrap();
        assert!(classical.expectation(&CompositeState::Mixed(spins)).unwrap() >= -1e-8);
    }
}

fn affine_check(make: impl Fn(WitnessCoefficients) -> WitnessOperator, state: &CompositeState, c1: WitnessCoefficients, c2: WitnessCoefficients, lambda: f64) -> f64 {
    let mixed = make(c1.mix(&c2, lambda)).expectation(state).unwrap();
    let split = lambda * make(c1).expectation(state).unwrap() + (1.0 - lambda) * make(c2).expectation(state).unwrap();
    (mixed - split).abs()
}

fn coefficients() -> impl Strategy<Value = WitnessCoefficients> {
    (-1.0f64..=1.0, -1.0f64..=1.0, -1.0f64..=1.0).prop_map(|(x, y, z)| WitnessCoefficients::new(x, y, z).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn expectation_is_affine_in_coefficients(c1 in coefficients(), c2 in coefficients(), lambda in 0.0f64..=1.0, q in -3.0f64..3.0, seed in 0u64..1000) {
        let mut rng = seeded_rng(seed);
        let spins = random_product_spins(&mut rng, 2).unwrap();
        let couplings = ModeCouplings::two_ion_single_mode(1.0);
        let hybrid = build_hybrid_state(HybridTag::Phi3 { p: rng.gen_range(0.0..=1.0) }, space(40)).unwrap().state;
        let d = affine_check(|c| witness_bc(q, &couplings, space(40), c).unwrap(), &hybrid, c1, c2, lambda);
        prop_assert!(d < 1e-12);
        let d = affine_check(|c| witness_classical(q, &[0.0, 1.0], c, 2).unwrap(), &CompositeState::Mixed(spins), c1, c2, lambda);
        prop_assert!(d < 1e-12);
    }

    #[test]
    fn trapped_ion_expectation_is_even(q in 0.0f64..3.0, seed in 0u64..1000, c in coefficients()) {
        let mut rng = seeded_rng(seed);
        let couplings = ModeCouplings::two_ion_single_mode(1.0);
        let sp = space(40);
        let alpha = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let state = build_hybrid_state(HybridTag::phi1(alpha), sp).unwrap().state;
        let plus = witness_bc(q, &couplings, sp, c).unwrap().expectation(&state).unwrap();
        let minus = witness_bc(-q, &couplings, sp, c).unwrap().expectation(&state).unwrap();
        prop_assert!((plus - minus).abs() < 1e-10);
    }
}
