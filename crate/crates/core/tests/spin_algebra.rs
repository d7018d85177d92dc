use hybrid_witness::gaussian::reduced_state_three;
use hybrid_witness::spin::{
    canonical_state, canonical_state_by_name, concurrence, correlators, pauli, qubit_from_bloch, CanonicalState,
    PauliAxis,
};
use hybrid_witness::tensor::{kron, ComplexMatrix, DensityMatrix, HilbertSpec, StateVector};
use hybrid_witness::{Error, C64};
use proptest::prelude::*;

fn dm(entries: [[f64; 4]; 4]) -> DensityMatrix {
    let flat: Vec<C64> = entries.iter().flatten().map(|&x| C64::new(x, 0.0)).collect();
    DensityMatrix::new(HilbertSpec::qubits(2).unwrap(), ComplexMatrix::from_row_slice(4, &flat).unwrap()).unwrap()
}

#[test]
fn pauli_examples() {
    let up = StateVector::basis(HilbertSpec::qubits(1).unwrap(), 0).unwrap();
    let z_up = pauli(PauliAxis::Z).apply(up.amplitudes());
    assert!((z_up - up.amplitudes()).norm() < 1e-15);
    let x = pauli(PauliAxis::X);
    assert_eq!(&x * &x, ComplexMatrix::identity(2));
    let xy = &x * &pauli(PauliAxis::Y);
    assert!(xy.max_abs_diff(&pauli(PauliAxis::Z).scale(C64::new(0.0, 1.0))) < 1e-15);
    for axis in PauliAxis::ALL {
        let p = pauli(axis);
        assert_eq!(p.hermiticity_defect(), 0.0);
        assert_eq!(p.trace(), C64::new(0.0, 0.0));
        assert_eq!(&p * &p.adjoint(), ComplexMatrix::identity(2));
    }
}

#[test]
fn correlator_examples() {
    let expect = |s: CanonicalState, values: [f64; 3]| {
        let t = correlators(&canonical_state(s), 2).unwrap();
        for (axis, v) in PauliAxis::ALL.into_iter().zip(values) {
            assert!((t.get(0, 1, axis).unwrap() - v).abs() < 1e-15, "{s} {axis:?}");
        }
    };
    expect(CanonicalState::Singlet, [-1.0, -1.0, -1.0]);
    expect(CanonicalState::PsiPlus, [1.0, 1.0, -1.0]);
    expect(CanonicalState::UpUp, [0.0, 0.0, 1.0]);
    assert!(correlators(&canonical_state(CanonicalState::Singlet), 1).is_err());
}

#[test]
fn canonical_state_examples() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let s = canonical_state(CanonicalState::Singlet);
    let amps: Vec<f64> = s.as_slice().iter().map(|z| z.re).collect();
    assert_eq!(amps, vec![0.0, h, -h, 0.0]);
    let p = canonical_state_by_name("psi_plus").unwrap();
    let amps: Vec<f64> = p.as_slice().iter().map(|z| z.re).collect();
    assert_eq!(amps, vec![0.0, h, h, 0.0]);
    for which in CanonicalState::ALL {
        assert!((canonical_state(which).norm() - 1.0).abs() < 1e-15);
    }
    assert!(matches!(canonical_state_by_name("ghz"), Err(Error::UnknownState(_))));
}

#[test]
fn concurrence_examples() {
    let singlet = canonical_state(CanonicalState::Singlet).density();
    assert!((concurrence(&singlet).unwrap() - 1.0).abs() < 1e-12);
    let mixed = DensityMatrix::maximally_mixed(HilbertSpec::qubits(2).unwrap());
    assert!(concurrence(&mixed).unwrap().abs() < 1e-12);
    let c = concurrence(&dm(reduced_state_three(2.0))).unwrap();
    assert!((c - (-1.0f64).exp()).abs() < 1e-10);
    assert!((c - 0.3679).abs() < 1e-4);
}

#[test]
fn reduced_state_concurrence_is_exponential_in_y() {
    for y in [0.5, 1.0, 2.0, 4.0] {
        let c = concurrence(&dm(reduced_state_three(y))).unwrap();
        assert!((c - (-(y * y) / 4.0f64).exp()).abs() < 1e-10, "y = {y}");
    }
}

fn rotation(n: [f64; 3], angle: f64) -> ComplexMatrix {
    let mut gen = ComplexMatrix::zeros(2);
    for (axis, v) in PauliAxis::ALL.into_iter().zip(n) {
        gen = &gen + &pauli(axis).scale(C64::new(v, 0.0));
    }
    let cos = ComplexMatrix::identity(2).scale(C64::new((0.5 * angle).cos(), 0.0));
    &cos - &gen.scale(C64::new(0.0, (0.5 * angle).sin()))
}

fn direction() -> impl Strategy<Value = [f64; 3]> {
    (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(z, phi)| {
        let s = (1.0 - z * z).sqrt();
        [s * phi.cos(), s * phi.sin(), z]
    })
}

fn bloch() -> impl Strategy<Value = [f64; 3]> {
    (direction(), 0.0f64..=1.0).prop_map(|(n, r)| n.map(|x| r * x))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_correlators_factorize(a in bloch(), b in bloch()) {
        let rho = qubit_from_bloch(a).unwrap().tensor(&qubit_from_bloch(b).unwrap());
        let t = correlators(&rho, 2).unwrap();
        for (k, axis) in PauliAxis::ALL.into_iter().enumerate() {
            let v = t.get(0, 1, axis).unwrap();
            prop_assert!((-1.0..=1.0).contains(&v));
            prop_assert!((v - a[k] * b[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn concurrence_is_locally_invariant(
        y in 0.1f64..4.0,
        n1 in direction(), t1 in 0.0f64..6.3,
        n2 in direction(), t2 in 0.0f64..6.3,
    ) {
        let rho = dm(reduced_state_three(y));
        let u = kron(&rotation(n1, t1), &rotation(n2, t2));
        let rotated = &(&u * rho.matrix()) * &u.adjoint();
        let rotated = DensityMatrix::new(HilbertSpec::qubits(2).unwrap(), rotated).unwrap();
        let before = concurrence(&rho).unwrap();
        let after = concurrence(&rotated).unwrap();
        prop_assert!((before - after).abs() < 1e-10);
    }
}
