use hybrid_witness::fock::{
    annihilation, char_fn, coherent_state, displacement, displacement_exp, mode_overlap, thermal_mean_occupation,
    thermal_state, thermal_state_from_mean, FockSpace, ModeState,
};
use hybrid_witness::tensor::ComplexMatrix;
use hybrid_witness::{Error, C64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn space(n_max: usize) -> FockSpace {
    FockSpace::new(n_max).unwrap()
}

/// `Tr[ρ D(α)]` by brute force: full density matrix times the
/// exponentiated displacement.
fn trace_oracle(state: &ModeState, alpha: C64) -> C64 {
    let d = displacement_exp(alpha, state.space()).unwrap();
    let prod = &d * state.density().matrix();
    prod.trace()
}

#[test]
fn annihilation_examples() {
    let a = annihilation(space(5));
    let col = |n: usize| a.matrix().column(n).into_owned();
    assert_eq!(col(1)[0], c(1.0, 0.0));
    assert!(col(0).iter().all(|z| *z == c(0.0, 0.0)));
    assert!((a.matrix()[(2, 3)].re - 3f64.sqrt()).abs() < 1e-15);
}

#[test]
fn displacement_examples() {
    let s = space(40);
    assert_eq!(displacement(c(0.0, 0.0), s).unwrap(), ComplexMatrix::identity(41));
    assert_eq!(displacement_exp(c(0.0, 0.0), s).unwrap(), ComplexMatrix::identity(41));
    for alpha in [c(1.0, 0.0), c(0.3, -1.2), c(0.0, 1.5)] {
        let vacuum = displacement_exp(alpha, s).unwrap().matrix()[(0, 0)];
        assert!((vacuum.re - (-0.5 * alpha.norm_sqr()).exp()).abs() < 1e-10);
        assert!((displacement(alpha, s).unwrap().matrix()[(0, 0)] - vacuum).norm() < 1e-10);
    }
    let d = displacement(c(1.0, 0.0), s).unwrap();
    let coh = coherent_state(c(1.0, 0.0), s).unwrap();
    let psi = coh.pure_state().unwrap();
    let displaced = d.matrix().column(0);
    let fidelity = psi.amplitudes().dotc(&displaced).norm_sqr();
    assert!((fidelity - 1.0).abs() < 1e-10);
}

#[test]
fn displacement_constructions_agree() {
    let s = space(60);
    for re in [-2.0, -1.0, -0.25, 0.0, 0.5, 1.4] {
        for im in [-1.4, -0.5, 0.0, 0.25, 1.0, 2.0] {
            let alpha = c(re, im);
            if alpha.norm() > 2.0 {
                continue;
            }
            let a = displacement(alpha, s).unwrap();
            let b = displacement_exp(alpha, s).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-8, "alpha = {alpha}");
        }
    }
}

#[test]
fn truncated_exponential_is_unitary_on_lower_half() {
    let s = space(60);
    for alpha in [c(1.0, 0.0), c(-0.7, 1.2), c(0.0, 1.5)] {
        let prod = &displacement_exp(alpha, s).unwrap() * &displacement_exp(-alpha, s).unwrap();
        for i in 0..=30 {
            for j in 0..=30 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((prod.matrix()[(i, j)] - c(target, 0.0)).norm() < 1e-8, "({i}, {j})");
            }
        }
    }
}

#[test]
fn guard_rejects_large_amplitudes() {
    match displacement(c(5.0, 0.0), space(10)) {
        Err(Error::Truncation { required_n_max, .. }) => {
            assert!(required_n_max > 10);
            assert!(displacement(c(5.0, 0.0), space(required_n_max)).is_ok());
        }
        other => panic!("expected truncation error, got {other:?}"),
    }
    assert!(displacement(c(5.0, 0.0), space(10).with_acknowledged_truncation()).is_ok());
    assert!(FockSpace::new(0).is_err());
}

#[test]
fn coherent_examples() {
    let s = space(40);
    let vac = coherent_state(c(0.0, 0.0), s).unwrap();
    assert_eq!(vac.pure_state().unwrap().as_slice()[0], c(1.0, 0.0));
    let one = coherent_state(c(1.0, 0.0), s).unwrap();
    assert!((one.mean_occupation() - 1.0).abs() < 1e-8);
    let minus = coherent_state(c(-1.0, 0.0), s).unwrap();
    let overlap = mode_overlap(&one, &minus).unwrap().norm();
    assert!((overlap - (-2.0f64).exp()).abs() < 1e-10);
    assert!(one.leakage() < 1e-10);
}

#[test]
fn thermal_examples() {
    let cold = thermal_state(100.0, space(5)).unwrap();
    let excited: f64 = cold.populations().unwrap()[1..].iter().sum();
    assert!(excited < 1e-40);
    let warm = thermal_state(1.0, space(60)).unwrap();
    let total: f64 = warm.populations().unwrap().iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!((warm.mean_occupation() - 0.5820).abs() < 1e-4);
    assert!((warm.mean_occupation() - thermal_mean_occupation(1.0)).abs() < 1e-10);
    let from_mean = thermal_state_from_mean(thermal_mean_occupation(1.0), space(60)).unwrap();
    assert!((from_mean.mean_occupation() - warm.mean_occupation()).abs() < 1e-12);
    assert!(matches!(thermal_state(0.01, space(60)), Err(Error::Truncation { .. })));
    assert!(thermal_state(-1.0, space(60)).is_err());
}

#[test]
fn char_fn_examples() {
    let s = space(40);
    let thermal = thermal_state(1.0, s).unwrap();
    let vacuum = ModeState::fock(0, s).unwrap();
    assert!((char_fn(&thermal, c(0.0, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    let beta = 0.5;
    let expect = (-0.5 * beta * beta / (0.5f64).tanh()).exp();
    let got = char_fn(&thermal, c(0.0, beta)).unwrap();
    assert!((got.re - expect).abs() < 1e-8 && got.im.abs() < 1e-15);
    assert!((got - trace_oracle(&thermal, c(0.0, beta))).norm() < 1e-10);
    let got = char_fn(&vacuum, c(0.0, beta)).unwrap();
    assert!((got.re - (-0.5 * beta * beta).exp()).abs() < 1e-12);
}

#[test]
fn coherent_char_fn_matches_formula() {
    let s = space(60);
    for beta in [c(0.8, 0.0), c(-0.3, 0.9)] {
        let state = coherent_state(beta, s).unwrap();
        for alpha in [c(0.5, 0.0), c(0.0, 1.1), c(-0.7, 0.4)] {
            let expect = (-0.5 * alpha.norm_sqr() + alpha * beta.conj() - alpha.conj() * beta).exp();
            let got = char_fn(&state, alpha).unwrap();
            assert!((got - expect).norm() < 1e-8);
            assert!((got - trace_oracle(&state, alpha)).norm() < 1e-10);
        }
    }
}

#[test]
fn doubling_truncation_at_guard_boundary() {
    for abs_alpha in [0.5, 1.0, 2.0] {
        let alpha = c(abs_alpha, 0.0);
        let probe = c(0.0, 0.7);
        let n = FockSpace::required_for_amplitude(abs_alpha.max(probe.norm()));
        let at = char_fn(&coherent_state(alpha, space(n)).unwrap(), probe).unwrap();
        let doubled = char_fn(&coherent_state(alpha, space(2 * n)).unwrap(), probe).unwrap();
        assert!((at - doubled).norm() < 1e-8, "|alpha| = {abs_alpha}");
    }
    for delta in [0.5, 1.0, 5.0] {
        let n = FockSpace::required_for_thermal(delta).max(FockSpace::required_for_amplitude(0.7));
        let at = char_fn(&thermal_state(delta, space(n)).unwrap(), c(0.0, 0.7)).unwrap();
        let doubled = char_fn(&thermal_state(delta, space(2 * n)).unwrap(), c(0.0, 0.7)).unwrap();
        assert!((at - doubled).norm() < 1e-8, "delta = {delta}");
    }
}

fn mode_state() -> impl Strategy<Value = ModeState> {
    let s = space(60);
    prop_oneof![
        (0usize..=3).prop_map(move |n| ModeState::fock(n, s).unwrap()),
        (-0.7f64..0.7, -0.7f64..0.7).prop_map(move |(re, im)| coherent_state(c(re, im), s).unwrap()),
        (0.5f64..5.0).prop_map(move |d| thermal_state(d, s).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn char_fn_conjugate_symmetry(state in mode_state(), re in -1.5f64..1.5, im in -1.5f64..1.5) {
        let a = char_fn(&state, c(re, im)).unwrap();
        let b = char_fn(&state, c(-re, -im)).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-12);
        prop_assert!(a.norm() <= 1.0 + 1e-10);
    }

    #[test]
    fn thermal_char_fn_is_gaussian(delta in 0.5f64..5.0, re in -1.5f64..1.5, im in -1.5f64..1.5) {
        let state = thermal_state(delta, space(60)).unwrap();
        let alpha = c(re, im);
        let got = char_fn(&state, alpha).unwrap();
        let expect = (-0.5 * alpha.norm_sqr() / (0.5 * delta).tanh()).exp();
        prop_assert!(got.im.abs() < 1e-15);
        prop_assert!((got.re - expect).abs() < 1e-8);
        prop_assert!((got - char_fn(&state, -alpha).unwrap()).norm() < 1e-15);
    }
}
