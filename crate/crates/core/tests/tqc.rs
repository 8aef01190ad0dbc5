use std::f64::consts::PI;

use mbqc_core::pattern::{random_state, spanning_inputs};
use mbqc_core::tqc::{
    ancilla_cnot_tableau, repeat_until_success_capped, sigma, RemoteCzOutcome, ANCILLA_CNOT_PREP_MEASUREMENTS,
};
use mbqc_core::*;
use num_complex::Complex64;

const TOL: f64 = 1e-10;

fn close(a: &StateVector, b: &StateVector) -> bool {
    fidelity(a, b).unwrap() >= 1.0 - TOL
}

fn with_matrix(s: &StateVector, qubits: &[usize], m: &Matrix) -> StateVector {
    let mut t = s.clone();
    t.apply_matrix(qubits, m).unwrap();
    t
}

fn sigma_matrix(j: BellBits) -> Matrix {
    // Z^{j1} X^{j2}
    let mut m = Matrix::identity(2);
    if j.j2 == 1 {
        m = &m * &Matrix::x();
    }
    if j.j1 == 1 {
        m = &Matrix::z() * &m;
    }
    m
}

#[test]
fn teleport_variants_every_branch() {
    for u in [Matrix::identity(2), Matrix::ux(PI / 8.0), Matrix::h(), Matrix::uz(1.234567)] {
        for psi in spanning_inputs(1, 2).unwrap() {
            for variant in [Variant::A, Variant::B] {
                let branches =
                    enumerate_branches(|p| teleport_apply(&psi, 0, &u, variant, p)).unwrap();
                assert_eq!(branches.len(), 4);
                for (_, t) in branches {
                    let s = sigma_matrix(t.bell);
                    let expect = match variant {
                        Variant::A => &u * &s,
                        Variant::B => &s * &u,
                    };
                    assert!(close(&t.state, &with_matrix(&psi, &[0], &expect)));
                }
            }
        }
    }
}

#[test]
fn teleport_examples() {
    let psi = random_state(1, 4).unwrap();
    let t = teleport_apply(&psi, 0, &Matrix::identity(2), Variant::B, &mut OutcomePolicy::force_bell([0])).unwrap();
    assert!(close(&t.state, &psi));
    assert_eq!(t.correction.weight(), 0);
    let t = teleport_apply(&psi, 0, &Matrix::h(), Variant::A, &mut OutcomePolicy::force_bell([1])).unwrap();
    assert_eq!(sigma(t.bell), Pauli::X);
    assert!(close(&t.state, &with_matrix(&psi, &[0], &(&Matrix::h() * &Matrix::x()))));
}

#[test]
fn teleport_keeps_other_qubits_in_place() {
    let psi = random_state(3, 8).unwrap();
    let u = Matrix::ux(0.3);
    let t = teleport_apply(&psi, 1, &u, Variant::B, &mut OutcomePolicy::sample(1)).unwrap();
    let mut expect = with_matrix(&psi, &[1], &u);
    expect.apply_pauli(&t.correction).unwrap();
    assert!(close(&t.state, &expect));
}

#[test]
fn rus_forced_examples() {
    let psi = random_state(1, 6).unwrap();
    let u = Matrix::ux(PI / 8.0);
    let target = with_matrix(&psi, &[0], &u);
    let r = repeat_until_success(&psi, 0, &u, &mut OutcomePolicy::force_bell([0])).unwrap();
    assert_eq!(r.attempts, 1);
    assert!(close(&r.state, &target));
    let r = repeat_until_success(&psi, 0, &u, &mut OutcomePolicy::force_bell([3, 0])).unwrap();
    assert_eq!(r.attempts, 2);
    assert!(close(&r.state, &target));
    let r = repeat_until_success(&psi, 0, &u, &mut OutcomePolicy::force_bell([1, 2, 3, 2, 0])).unwrap();
    assert_eq!(r.attempts, 5);
    assert!(close(&r.state, &target));
    assert!(matches!(
        repeat_until_success_capped(&psi, 0, &u, &mut OutcomePolicy::force_bell([1, 1, 1]), 3),
        Err(Error::AttemptCapExceeded(3))
    ));
}

#[test]
fn rus_attempts_are_geometric() {
    let u = Matrix::ux(PI / 8.0);
    let psi = random_state(1, 21).unwrap();
    let target = with_matrix(&psi, &[0], &u);
    let runs = 4000;
    let mut total = 0;
    for seed in 0..runs {
        let r = repeat_until_success(&psi, 0, &u, &mut OutcomePolicy::sample(seed)).unwrap();
        assert!(close(&r.state, &target));
        total += r.attempts;
    }
    let mean = total as f64 / runs as f64;
    // geometric(1/4): mean 4, sd of the mean ≈ 3.46/√4000 ≈ 0.055
    assert!((3.7..4.3).contains(&mean), "mean attempts {mean}");
}

#[test]
fn ancilla_cnot_state() {
    let (s, a) = prepare_ancilla_cnot().unwrap();
    assert_eq!((a.a1, a.a2, a.a3, a.a4), (0, 1, 2, 3));
    let t = ancilla_cnot_tableau().unwrap();
    assert_eq!(t.stabilizers().len(), 4);
    for g in t.stabilizers() {
        let bare = g.clone().with_phase(0);
        let e = s.expectation(&bare).unwrap();
        assert!((e - f64::from(g.sign().unwrap())).abs() < 1e-12, "{g}");
    }
    // reduced state on (a1, a3) is I/4: ρ_{(x,y),(x',y')} = Σ_rest ψ ψ*
    let amps = s.amplitudes();
    for r in 0..4usize {
        for c in 0..4usize {
            let mut acc = Complex64::new(0.0, 0.0);
            for rest in 0..4usize {
                let idx = |p: usize| ((p >> 1) << 3) | ((rest >> 1) << 2) | ((p & 1) << 1) | (rest & 1);
                acc += amps[idx(r)] * amps[idx(c)].conj();
            }
            let want = if r == c { 0.25 } else { 0.0 };
            assert!((acc - Complex64::new(want, 0.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn cnot_gadget_every_branch() {
    let plus_zero = StateVector::plus(1).unwrap().tensor(&StateVector::zero(1).unwrap()).unwrap();
    let mut inputs = spanning_inputs(2, 3).unwrap();
    inputs.push(plus_zero);
    for psi in &inputs {
        let branches = enumerate_branches(|p| cnot_gadget(psi, 0, 1, p)).unwrap();
        assert_eq!(branches.len(), 16);
        for (_, g) in branches {
            let mut expect = with_matrix(psi, &[0, 1], &Matrix::cnot());
            expect.apply_pauli(&g.correction).unwrap();
            assert!(close(&g.state, &expect));
            assert_eq!(g.transcript.two_qubit_measurements(), 5);
            assert_eq!(g.transcript.records.len(), 2);
        }
    }
    assert_eq!(ANCILLA_CNOT_PREP_MEASUREMENTS, 3);
}

#[test]
fn cnot_gadget_correction_algebra() {
    // X⊗I before CNOT(1→2) is X⊗X after
    let xi: PauliString = "XI".parse().unwrap();
    assert_eq!(conjugate_by_clifford(&xi, &CliffordGate::Cnot(0, 1)).unwrap(), "XX".parse().unwrap());
    let psi = random_state(2, 5).unwrap();
    let g = cnot_gadget(&psi, 0, 1, &mut OutcomePolicy::force_bell([0, 0])).unwrap();
    assert!(close(&g.state, &with_matrix(&psi, &[0, 1], &Matrix::cnot())));
    let g = cnot_gadget(&psi, 0, 1, &mut OutcomePolicy::force_bell([1, 0])).unwrap();
    assert_eq!(g.correction, "XX".parse().unwrap());
}

#[test]
fn cnot_gadget_reversed_qubits() {
    let psi = random_state(3, 12).unwrap();
    let g = cnot_gadget(&psi, 2, 0, &mut OutcomePolicy::sample(4)).unwrap();
    let mut expect = with_matrix(&psi, &[2, 0], &Matrix::cnot());
    expect.apply_pauli(&g.correction).unwrap();
    assert!(close(&g.state, &expect));
}

#[test]
fn remote_cnot_every_branch() {
    for psi in spanning_inputs(2, 9).unwrap() {
        let branches = enumerate_branches(|p| remote_cnot_circuit(&psi, 0, 1, p)).unwrap();
        assert_eq!(branches.len(), 4);
        for (_, r) in branches {
            let mut expect = with_matrix(&psi, &[0, 1], &Matrix::cnot());
            expect.apply_pauli(&r.correction).unwrap();
            assert!(close(&r.state, &expect));
        }
    }
    // |+⟩|0⟩ → Bell pair up to corrections
    let psi = StateVector::plus(1).unwrap().tensor(&StateVector::zero(1).unwrap()).unwrap();
    let r = remote_cnot_circuit(&psi, 0, 1, &mut OutcomePolicy::force([0, 0])).unwrap();
    assert!(close(&r.state, &StateVector::bell()));
}

#[test]
fn remote_cz_procedures_every_branch() {
    for proc in Procedure::all() {
        for psi in spanning_inputs(2, 17).unwrap() {
            let branches = enumerate_branches(|p| remote_cz(&psi, 0, 1, proc, p)).unwrap();
            assert!(branches.len() >= 4, "{proc}");
            for (bits, r) in branches {
                let mut expect = with_matrix(&psi, &[0, 1], &proc.gate());
                expect.apply_pauli(&r.correction).unwrap();
                assert!(close(&r.state, &expect), "{proc} branch {bits:?}");
                let weight_two = r.transcript.records.iter().filter(|x| x.weight == 2).count();
                assert_eq!(weight_two, 2);
            }
        }
    }
}

#[test]
fn procedure_b_counts_and_branches() {
    let psi = StateVector::plus(2).unwrap();
    let branches = enumerate_branches(|p| remote_cz(&psi, 0, 1, Procedure::B, p)).unwrap();
    assert_eq!(branches.len(), 8);
    let (_, first) = &branches[0];
    assert_eq!(first.outcomes, vec![0, 0, 0]);
    let mut omega = StateVector::plus(2).unwrap();
    omega.cz(0, 1).unwrap();
    assert!(close(&first.state, &omega));
    assert_eq!(first.correction.weight(), 0);
    assert_eq!(first.transcript.two_qubit_measurements(), 2);
    let obs: Vec<&str> = first.transcript.records.iter().map(|r| r.observable.as_str()).collect();
    assert_eq!(obs, ["ZZI", "IXZ", "IZI"]);
    assert!(!pauli_commutes(&"ZZI".parse().unwrap(), &"IXZ".parse().unwrap()).unwrap());
    assert!(pauli_commutes(&"ZXII".parse().unwrap(), &"IIXZ".parse().unwrap()).unwrap());
}

#[test]
fn procedures_on_spectator_registers() {
    let psi = random_state(4, 30).unwrap();
    for proc in Procedure::all() {
        let r = remote_cz(&psi, 3, 1, proc, &mut OutcomePolicy::sample(2)).unwrap();
        let mut expect = with_matrix(&psi, &[3, 1], &proc.gate());
        expect.apply_pauli(&r.correction).unwrap();
        assert!(close(&r.state, &expect), "{proc}");
    }
}

#[test]
fn swapped_order_realises_the_same_channel() {
    let psi = random_state(2, 77).unwrap();
    let cz = with_matrix(&psi, &[0, 1], &Matrix::cz());
    for proc in [Procedure::B, Procedure::BSwapped] {
        for (_, r) in enumerate_branches(|p| remote_cz(&psi, 0, 1, proc, p)).unwrap() {
            let mut fixed = r.state.clone();
            fixed.apply_pauli(&r.correction).unwrap();
            assert!(close(&fixed, &cz));
        }
    }
}

#[test]
fn correction_formulas_are_reported() {
    let f = RemoteCzOutcome::correction_formulas(Procedure::A, 0, 3);
    assert_eq!(f, vec![(1, "Z^(m2+m3)".to_string()), (4, "Z^(m1+m4)".to_string())]);
    let f = RemoteCzOutcome::correction_formulas(Procedure::BCnot, 0, 2);
    assert_eq!(f[1], (3, "X^(m1+m3)".to_string()));
}

/// Procedure A's first two observables commute: either order gives the same
/// final stabilizer group branch by branch.
#[test]
fn procedure_a_step_one_order_is_free() {
    let p = |s: &str| -> PauliString { s.parse().unwrap() };
    let start = StabilizerTableau::from_graph(&Graph::from_edges(4, &[(1, 2)]).unwrap()).unwrap();
    for bits in 0..16u8 {
        let b: Vec<u8> = (0..4).map(|i| (bits >> (3 - i)) & 1).collect();
        let run = |order: [&str; 4], forced: Vec<u8>| {
            let mut t = start.clone();
            let mut pol = OutcomePolicy::force(forced);
            for o in order {
                t.measure(&p(o), &mut pol).unwrap();
            }
            t
        };
        let a = run(["ZXII", "IIXZ", "IZII", "IIZI"], b.clone());
        let c = run(["IIXZ", "ZXII", "IZII", "IIZI"], vec![b[1], b[0], b[2], b[3]]);
        assert!(a.same_group(&c));
    }
}
