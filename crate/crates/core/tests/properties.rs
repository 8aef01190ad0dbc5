//! Cross-checks of the Pauli algebra and the two simulation engines against
//! dense matrices and against each other.

use mbqc_core::{Basis, CliffordGate, Matrix, OutcomePolicy, Pauli, PauliString, StabilizerTableau, StateVector};
use num_complex::Complex64;
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn letter_matrix(p: Pauli) -> Matrix {
    match p {
        Pauli::I => Matrix::identity(2),
        Pauli::X => Matrix::x(),
        Pauli::Y => Matrix::y(),
        Pauli::Z => Matrix::z(),
    }
}

fn pauli_matrix(p: &PauliString) -> Matrix {
    let m = p.letters().into_iter().fold(Matrix::identity(1), |acc, l| acc.kron(&letter_matrix(l)));
    m.scale(Complex64::i().powu(p.phase() as u32))
}

/// Dense matrix of a gate on `n` qubits, column by column from basis states.
fn gate_matrix(n: usize, g: CliffordGate) -> Matrix {
    let d = 1 << n;
    let mut rows = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for c in 0..d {
        let mut s = StateVector::basis_state(n, c).unwrap();
        apply_sv(&mut s, g);
        for (row, a) in rows.iter_mut().zip(s.amplitudes()) {
            row[c] = *a;
        }
    }
    Matrix::from_rows(rows)
}

fn apply_sv(s: &mut StateVector, g: CliffordGate) {
    match g {
        CliffordGate::H(q) => s.h(q),
        CliffordGate::S(q) => s.s(q),
        CliffordGate::X(q) => s.x(q),
        CliffordGate::Z(q) => s.z(q),
        CliffordGate::Cnot(a, b) => s.cnot(a, b),
        CliffordGate::Cz(a, b) => s.cz(a, b),
    }
    .unwrap()
}

fn letter() -> impl Strategy<Value = Pauli> {
    prop_oneof![Just(Pauli::I), Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
}

fn pauli(n: usize) -> impl Strategy<Value = PauliString> {
    (prop::collection::vec(letter(), n), 0u8..4).prop_map(|(ls, ph)| PauliString::from_letters(&ls).with_phase(ph))
}

fn gate(n: usize) -> impl Strategy<Value = CliffordGate> {
    let one = (0..n, 0u8..4).prop_map(|(q, k)| match k {
        0 => CliffordGate::H(q),
        1 => CliffordGate::S(q),
        2 => CliffordGate::X(q),
        _ => CliffordGate::Z(q),
    });
    let two = (0..n, 1..n, any::<bool>()).prop_map(move |(a, off, cz)| {
        let b = (a + off) % n;
        if cz {
            CliffordGate::Cz(a, b)
        } else {
            CliffordGate::Cnot(a, b)
        }
    });
    prop_oneof![one, two]
}

#[derive(Debug, Clone)]
enum Step {
    Gate(CliffordGate),
    Measure(PauliString),
}

fn circuit(n: usize) -> impl Strategy<Value = Vec<Step>> {
    let hermitian = pauli(n).prop_map(|p| p.with_phase(0));
    let step = prop_oneof![4 => gate(n).prop_map(Step::Gate), 1 => hermitian.prop_map(Step::Measure)];
    prop::collection::vec(step, 0..24)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn product_matches_matrix_product(a in pauli(3), b in pauli(3)) {
        let ab = a.multiply(&b).unwrap();
        prop_assert!(pauli_matrix(&ab).approx_eq(&(&pauli_matrix(&a) * &pauli_matrix(&b)), TOL));
    }

    #[test]
    fn product_is_associative(a in pauli(4), b in pauli(4), c in pauli(4)) {
        let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn commutation_matches_matrices(a in pauli(3), b in pauli(3)) {
        let (ma, mb) = (pauli_matrix(&a), pauli_matrix(&b));
        let commute = (&ma * &mb).approx_eq(&(&mb * &ma), TOL);
        prop_assert_eq!(a.commutes(&b).unwrap(), commute);
    }

    #[test]
    fn conjugation_matches_matrices(p in pauli(3), g in gate(3)) {
        let u = gate_matrix(3, g);
        let want = &(&u * &pauli_matrix(&p)) * &u.adjoint();
        let got = p.conjugate_by(&g).unwrap();
        prop_assert!(pauli_matrix(&got).approx_eq(&want, TOL));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    /// The tableau samples outcomes; the state vector replays them. Both must
    /// agree on which outcomes are random, on the deterministic ones, and the
    /// final state must be stabilized by every tableau generator.
    #[test]
    fn engines_agree_on_clifford_circuits(n in 1usize..=4, seed in any::<u64>(), steps in circuit(4)) {
        let steps: Vec<Step> = steps
            .into_iter()
            .filter_map(|s| match s {
                Step::Gate(g) if g.qubits().iter().all(|&q| q < n) && g.check(n).is_ok() => Some(Step::Gate(g)),
                Step::Measure(p) => Some(Step::Measure(p.restrict(&(0..n).collect::<Vec<_>>()))),
                _ => None,
            })
            .collect();
        let mut t = StabilizerTableau::zero_state(n);
        let mut sample = OutcomePolicy::sample(seed);
        let mut tab_bits = Vec::new();
        for s in &steps {
            match s {
                Step::Gate(g) => t.apply(g).unwrap(),
                Step::Measure(p) if p.weight() > 0 => tab_bits.push(t.measure(p, &mut sample).unwrap()),
                Step::Measure(_) => {}
            }
            prop_assert!(t.validate().is_ok());
        }

        let mut sv = StateVector::zero(n).unwrap();
        let mut replay = OutcomePolicy::force(sample.consumed().to_vec());
        let mut sv_bits = Vec::new();
        for s in &steps {
            match s {
                Step::Gate(g) => apply_sv(&mut sv, *g),
                Step::Measure(p) if p.weight() > 0 => sv_bits.push(sv.measure_pauli(p, &mut replay).unwrap()),
                Step::Measure(_) => {}
            }
        }
        prop_assert_eq!(replay.remaining(), 0);
        prop_assert_eq!(tab_bits, sv_bits);
        prop_assert!((sv.norm() - 1.0).abs() < TOL);
        for g in t.stabilizers() {
            prop_assert!((sv.expectation(g).unwrap() - 1.0).abs() < 1e-8, "{} not stabilizing", g);
        }
    }

    #[test]
    fn measuring_twice_repeats(n in 1usize..=4, seed in any::<u64>(), gates in prop::collection::vec(gate(4), 0..16), obs in pauli(4)) {
        let mut t = StabilizerTableau::zero_state(n);
        for g in gates.iter().filter(|g| g.check(n).is_ok()) {
            t.apply(g).unwrap();
        }
        let obs = obs.with_phase(0).restrict(&(0..n).collect::<Vec<_>>());
        prop_assume!(obs.weight() > 0);
        let mut p = OutcomePolicy::sample(seed);
        let first = t.measure(&obs, &mut p).unwrap();
        let used = p.consumed().len();
        let again = t.measure(&obs, &mut p).unwrap();
        prop_assert_eq!(first, again);
        prop_assert_eq!(p.consumed().len(), used);
        prop_assert_eq!(t.expectation(&obs).unwrap(), Some(if first == 0 { 1 } else { -1 }));
    }
}

#[test]
fn single_qubit_basis_measurement_agrees_with_pauli_form() {
    let mut a = StateVector::plus(2).unwrap();
    a.cz(0, 1).unwrap();
    let mut b = a.clone();
    let x0 = PauliString::single(2, 0, Pauli::X);
    let bit_a = a.measure(0, Basis::X, &mut OutcomePolicy::force([1])).unwrap();
    let bit_b = b.measure_pauli(&x0, &mut OutcomePolicy::force([1])).unwrap();
    assert_eq!(bit_a, bit_b);
    assert!(mbqc_core::fidelity(&a, &b).unwrap() > 1.0 - TOL);
}
