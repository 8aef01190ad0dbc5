//! Teleportation-based gadgets on the statevector engine: one-qubit gate
//! teleportation (variants a and b), repeat-until-success, the CNOT gadget
//! built on `|a_CNOT⟩`, the remote CNOT circuit and the remote `Λ(Z)`
//! procedures that use incomplete two-qubit measurements.
//!
//! Pauli corrections `σ_j = Z^{j1} X^{j2}` follow [`BellBits`].

use std::fmt;

use serde::Serialize;

use crate::error::{check_qubit, Error, Result};
use crate::matrix::Matrix;
use crate::pauli::{CliffordGate, Pauli, PauliString};
use crate::policy::{BellBits, OutcomePolicy};
use crate::statevector::{Basis, StateVector};
use crate::tableau::StabilizerTableau;

/// Default attempt cap for [`repeat_until_success`].
pub const RUS_ATTEMPT_CAP: usize = 1000;

/// Two-qubit measurements needed to prepare `|a_CNOT⟩`, a cited cost; the
/// preparation itself is done here by the unitary recipe.
pub const ANCILLA_CNOT_PREP_MEASUREMENTS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum ResourceKind {
    /// `(|00⟩ + |11⟩)/√2`.
    Bell,
    /// `Λ(Z)|+⟩|+⟩`.
    Omega,
    /// `(I ⊗ U)|Φ_0⟩`.
    RotatedBell(Matrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitResource {
    pub kind: ResourceKind,
    pub qubits: (usize, usize),
}

impl TwoQubitResource {
    pub fn state(&self) -> Result<StateVector> {
        match &self.kind {
            ResourceKind::Bell => Ok(StateVector::bell()),
            ResourceKind::Omega => {
                let mut s = StateVector::plus(2)?;
                s.cz(0, 1)?;
                Ok(s)
            }
            ResourceKind::RotatedBell(u) => {
                let mut s = StateVector::bell();
                s.apply_1q(1, u)?;
                Ok(s)
            }
        }
    }
}

/// Pauli `σ_j = Z^{j1} X^{j2}` as a single letter.
pub fn sigma(bits: BellBits) -> Pauli {
    Pauli::from_bits(bits.j2 == 1, bits.j1 == 1)
}

fn sigma_matrix(bits: BellBits) -> Matrix {
    Matrix::pauli_power(bits.j1, bits.j2)
}

/// Register with stable labels so that qubits can be appended, measured away
/// and finally put back in order.
struct Register {
    state: StateVector,
    labels: Vec<usize>,
    next: usize,
}

impl Register {
    fn new(s: &StateVector) -> Self {
        let n = s.num_qubits();
        Register { state: s.clone(), labels: (0..n).collect(), next: n }
    }

    fn append(&mut self, extra: &StateVector) -> Result<Vec<usize>> {
        self.state = self.state.tensor(extra)?;
        let new: Vec<usize> = (self.next..self.next + extra.num_qubits()).collect();
        self.next += extra.num_qubits();
        self.labels.extend(&new);
        Ok(new)
    }

    fn pos(&self, label: usize) -> usize {
        self.labels.iter().position(|&l| l == label).expect("live qubit label")
    }

    fn apply(&mut self, labels: &[usize], m: &Matrix) -> Result<()> {
        let at: Vec<usize> = labels.iter().map(|&l| self.pos(l)).collect();
        self.state.apply_matrix(&at, m)
    }

    fn observable(&self, letters: &[(usize, Pauli)]) -> PauliString {
        let mut p = PauliString::identity(self.labels.len());
        for &(l, letter) in letters {
            p.set(self.pos(l), letter);
        }
        p
    }

    fn measure(&mut self, letters: &[(usize, Pauli)], policy: &mut OutcomePolicy) -> Result<u8> {
        let obs = self.observable(letters);
        self.state.measure_pauli(&obs, policy)
    }

    fn bell_discard(&mut self, a: usize, b: usize, pre: Option<&Matrix>, policy: &mut OutcomePolicy) -> Result<BellBits> {
        let (pa, pb) = (self.pos(a), self.pos(b));
        let bits = self.state.bell_measure_discard(pa, pb, pre, policy)?;
        self.labels.retain(|&l| l != a && l != b);
        Ok(bits)
    }

    /// Remove a qubit known to be in an eigenstate of `basis`.
    fn discard_eigen(&mut self, label: usize, basis: Basis) -> Result<()> {
        let at = self.pos(label);
        let p0 = self.state.prob_zero(at, basis)?;
        if (p0 - 0.5).abs() < 0.49 {
            return Err(Error::Circuit(format!("qubit {} is not in an eigenstate", label + 1)));
        }
        self.state.project_discard(at, basis, u8::from(p0 < 0.5))?;
        self.labels.remove(at);
        Ok(())
    }

    /// Relabel: the qubit labelled `from` takes over label `to`.
    fn rename(&mut self, from: usize, to: usize) {
        let at = self.pos(from);
        self.labels[at] = to;
    }

    /// The state with qubits ordered by label `0..n`.
    fn finish(mut self) -> Result<StateVector> {
        let mut order: Vec<usize> = (0..self.labels.len()).collect();
        order.sort_by_key(|&i| self.labels[i]);
        self.state.permute(&order)?;
        Ok(self.state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Variant {
    /// Ancilla `(I⊗U)|Φ_0⟩`, plain Bell measurement: output `U σ_j |ψ⟩`.
    A,
    /// Plain `|Φ_0⟩`, generalized Bell measurement: output `σ_j U |ψ⟩`.
    B,
}

#[derive(Debug, Clone)]
pub struct TeleportOutcome {
    /// Where the output lives (the input's position).
    pub out: usize,
    pub bell: BellBits,
    pub state: StateVector,
    /// `σ_j` on `out`: to the right of `U` for variant a, to the left for b.
    pub correction: PauliString,
}

/// Teleport qubit `q` through a Bell pair while applying `u`.
pub fn teleport_apply(
    s: &StateVector,
    q: usize,
    u: &Matrix,
    variant: Variant,
    policy: &mut OutcomePolicy,
) -> Result<TeleportOutcome> {
    check_qubit(q, s.num_qubits())?;
    if u.dim() != 2 {
        return Err(Error::Dimension { expected: 2, got: u.dim() });
    }
    let mut reg = Register::new(s);
    let (resource, pre) = match variant {
        Variant::A => (ResourceKind::RotatedBell(u.clone()), None),
        Variant::B => (ResourceKind::Bell, Some(u)),
    };
    let pair = reg.append(&TwoQubitResource { kind: resource, qubits: (0, 1) }.state()?)?;
    let bell = reg.bell_discard(q, pair[0], pre, policy)?;
    reg.rename(pair[1], q);
    let state = reg.finish()?;
    let correction = PauliString::single(s.num_qubits(), q, sigma(bell));
    Ok(TeleportOutcome { out: q, bell, state, correction })
}

#[derive(Debug, Clone)]
pub struct RusOutcome {
    pub out: usize,
    pub attempts: usize,
    pub history: Vec<BellBits>,
    pub state: StateVector,
}

/// Apply a (typically non-Clifford) `u` by variant-a teleportation, retrying
/// until the Bell outcome is 0.
///
/// After a failed attempt the qubit holds `E|ψ⟩` for a known unitary `E`
/// (first `E = U σ_j`). The next attempt uses the ancilla `(I ⊗ U E†)|Φ_0⟩`,
/// which undoes `E` and reapplies `U` in one teleportation.
pub fn repeat_until_success(
    s: &StateVector,
    q: usize,
    u: &Matrix,
    policy: &mut OutcomePolicy,
) -> Result<RusOutcome> {
    repeat_until_success_capped(s, q, u, policy, RUS_ATTEMPT_CAP)
}

pub fn repeat_until_success_capped(
    s: &StateVector,
    q: usize,
    u: &Matrix,
    policy: &mut OutcomePolicy,
    cap: usize,
) -> Result<RusOutcome> {
    let mut state = s.clone();
    let mut error = Matrix::identity(2);
    let mut history = Vec::new();
    for attempt in 1..=cap {
        let w = u * &error.adjoint();
        let t = teleport_apply(&state, q, &w, Variant::A, policy)?;
        state = t.state;
        history.push(t.bell);
        if t.bell.index() == 0 {
            return Ok(RusOutcome { out: q, attempts: attempt, history, state });
        }
        // current qubit: W σ_j E|ψ⟩ = U E† σ_j E |ψ⟩
        error = &(&w * &sigma_matrix(t.bell)) * &error;
    }
    Err(Error::AttemptCapExceeded(cap))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AncillaCnot {
    pub a1: usize,
    pub a2: usize,
    pub a3: usize,
    pub a4: usize,
}

impl AncillaCnot {
    pub const RECIPE: &'static str = "CNOT(a2 -> a4) applied to Phi0(a1,a2) x Phi0(a3,a4)";
}

/// `|a_CNOT⟩ = CNOT_{a2→a4} (|Φ_0⟩_{a1a2} ⊗ |Φ_0⟩_{a3a4})` on qubits 0..4.
pub fn prepare_ancilla_cnot() -> Result<(StateVector, AncillaCnot)> {
    let mut s = StateVector::bell().tensor(&StateVector::bell())?;
    s.cnot(1, 3)?;
    Ok((s, AncillaCnot { a1: 0, a2: 1, a3: 2, a4: 3 }))
}

/// The same state on the tableau engine.
pub fn ancilla_cnot_tableau() -> Result<StabilizerTableau> {
    let mut t = StabilizerTableau::zero_state(4);
    for g in [
        CliffordGate::H(0),
        CliffordGate::Cnot(0, 1),
        CliffordGate::H(2),
        CliffordGate::Cnot(2, 3),
        CliffordGate::Cnot(1, 3),
    ] {
        t.apply(&g)?;
    }
    Ok(t)
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TranscriptRecord {
    pub observable: String,
    pub outcome: u8,
    pub weight: usize,
}

/// Ordered record of the measurements a gadget performed.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Transcript {
    pub records: Vec<TranscriptRecord>,
    /// Two-qubit measurements attributed to resources prepared elsewhere.
    pub cited_two_qubit: usize,
}

impl Transcript {
    fn push(&mut self, observable: String, outcome: u8, weight: usize) {
        self.records.push(TranscriptRecord { observable, outcome, weight });
    }

    pub fn two_qubit_measurements(&self) -> usize {
        self.records.iter().filter(|r| r.weight == 2).count() + self.cited_two_qubit
    }
}

#[derive(Debug, Clone)]
pub struct CnotGadgetOutcome {
    pub outs: (usize, usize),
    pub bell: (BellBits, BellBits),
    pub state: StateVector,
    /// Correction to the left of the CNOT.
    pub correction: PauliString,
    pub transcript: Transcript,
}

/// CNOT from `q1` (control) to `q2` by two Bell measurements against
/// `|a_CNOT⟩`. Outputs replace the inputs in place.
pub fn cnot_gadget(s: &StateVector, q1: usize, q2: usize, policy: &mut OutcomePolicy) -> Result<CnotGadgetOutcome> {
    let n = s.num_qubits();
    check_qubit(q1, n)?;
    check_qubit(q2, n)?;
    if q1 == q2 {
        return Err(Error::CoincidentQubits(q1));
    }
    let mut reg = Register::new(s);
    let (anc, _) = prepare_ancilla_cnot()?;
    let a = reg.append(&anc)?;
    let mut transcript = Transcript { cited_two_qubit: ANCILLA_CNOT_PREP_MEASUREMENTS, ..Default::default() };
    let b1 = reg.bell_discard(q1, a[0], None, policy)?;
    transcript.push(format!("BELL({},a1)", q1 + 1), b1.index(), 2);
    let b2 = reg.bell_discard(q2, a[2], None, policy)?;
    transcript.push(format!("BELL({},a3)", q2 + 1), b2.index(), 2);
    reg.rename(a[1], q1);
    reg.rename(a[3], q2);
    let state = reg.finish()?;
    let mut before = PauliString::identity(n);
    before.set(q1, sigma(b1));
    before.set(q2, sigma(b2));
    let correction = before.conjugate_by(&CliffordGate::Cnot(q1, q2))?.with_phase(0);
    Ok(CnotGadgetOutcome { outs: (q1, q2), bell: (b1, b2), state, correction, transcript })
}

#[derive(Debug, Clone)]
pub struct RemoteCnotOutcome {
    pub state: StateVector,
    /// `X_target^a Z_control^b`.
    pub correction: PauliString,
    /// Z outcome on the control-side half of the pair.
    pub a: u8,
    /// X outcome on the target-side half.
    pub b: u8,
}

/// Remote CNOT through a shared `|Φ_0⟩` on fresh qubits `(e1, e2)`:
/// `CNOT control→e1`, `CNOT e2→target`, measure `e1` in Z (`a`) and `e2` in X
/// (`b`); the corrections are `X^a` on the target and `Z^b` on the control.
pub fn remote_cnot_circuit(
    s: &StateVector,
    control: usize,
    target: usize,
    policy: &mut OutcomePolicy,
) -> Result<RemoteCnotOutcome> {
    let n = s.num_qubits();
    check_qubit(control, n)?;
    check_qubit(target, n)?;
    if control == target {
        return Err(Error::CoincidentQubits(control));
    }
    let mut reg = Register::new(s);
    let e = reg.append(&StateVector::bell())?;
    reg.apply(&[control, e[0]], &Matrix::cnot())?;
    reg.apply(&[e[1], target], &Matrix::cnot())?;
    let a = reg.measure(&[(e[0], Pauli::Z)], policy)?;
    let b = reg.measure(&[(e[1], Pauli::X)], policy)?;
    reg.discard_eigen(e[0], Basis::Z)?;
    reg.discard_eigen(e[1], Basis::X)?;
    let state = reg.finish()?;
    let mut correction = PauliString::identity(n);
    if a == 1 {
        correction.set(target, Pauli::X);
    }
    if b == 1 {
        correction.set(control, Pauli::Z);
    }
    Ok(RemoteCnotOutcome { state, correction, a, b })
}

/// Measurement procedures for `Λ(Z)` (and CNOT) with incomplete two-qubit
/// measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Procedure {
    /// `|Ω⟩` ancilla pair; `ZXII`, `IIXZ`, then `IZII`, `IIZI`.
    A,
    /// `|+⟩` ancilla; `ZZI`, `IXZ`, `IZI`.
    B,
    /// `|0⟩` ancilla; `IXZ`, `ZZI`, `IXI`.
    BSwapped,
    /// `|+⟩` ancilla; `ZZI`, `IXX`, `IZI` (CNOT instead of `Λ(Z)`).
    BCnot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AncillaInit {
    Omega,
    Plus,
    Zero,
}

/// Correction `letter^{⊕ outcomes}` on data qubit `data` (0 = control, 1 = target).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectionTerm {
    pub data: usize,
    pub letter: Pauli,
    pub outcomes: Vec<usize>,
}

impl Procedure {
    pub fn all() -> [Procedure; 4] {
        [Procedure::A, Procedure::B, Procedure::BSwapped, Procedure::BCnot]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Procedure::A => "A",
            Procedure::B => "B",
            Procedure::BSwapped => "B_swapped",
            Procedure::BCnot => "B_cnot",
        }
    }

    pub fn ancilla_init(&self) -> AncillaInit {
        match self {
            Procedure::A => AncillaInit::Omega,
            Procedure::B | Procedure::BCnot => AncillaInit::Plus,
            Procedure::BSwapped => AncillaInit::Zero,
        }
    }

    /// Observables in measurement order on `[control, ancillas…, target]`.
    pub fn sequence(&self) -> Vec<PauliString> {
        let words: &[&str] = match self {
            Procedure::A => &["ZXII", "IIXZ", "IZII", "IIZI"],
            Procedure::B => &["ZZI", "IXZ", "IZI"],
            Procedure::BSwapped => &["IXZ", "ZZI", "IXI"],
            Procedure::BCnot => &["ZZI", "IXX", "IZI"],
        };
        words.iter().map(|w| w.parse().expect("static observable")).collect()
    }

    /// The gate realised, on `(control, target)`.
    pub fn gate(&self) -> Matrix {
        match self {
            Procedure::BCnot => Matrix::cnot(),
            _ => Matrix::cz(),
        }
    }

    /// Correction exponents as parities of the outcomes `m1, m2, …`
    /// (0-based indices into [`Procedure::sequence`]).
    pub fn corrections(&self) -> Vec<CorrectionTerm> {
        let t = |data, letter, outcomes: &[usize]| CorrectionTerm { data, letter, outcomes: outcomes.to_vec() };
        match self {
            Procedure::A => vec![t(0, Pauli::Z, &[1, 2]), t(1, Pauli::Z, &[0, 3])],
            Procedure::B => vec![t(0, Pauli::Z, &[1]), t(1, Pauli::Z, &[0, 2])],
            Procedure::BSwapped => vec![t(0, Pauli::Z, &[0, 2]), t(1, Pauli::Z, &[1])],
            Procedure::BCnot => vec![t(0, Pauli::Z, &[1]), t(1, Pauli::X, &[0, 2])],
        }
    }

    fn ancillas(&self) -> usize {
        if *self == Procedure::A {
            2
        } else {
            1
        }
    }
}

impl std::str::FromStr for Procedure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Procedure::A),
            "B" | "b" => Ok(Procedure::B),
            "B_swapped" | "b_swapped" => Ok(Procedure::BSwapped),
            "B_cnot" | "b_cnot" => Ok(Procedure::BCnot),
            other => Err(Error::Parse(format!("unknown procedure {other:?}"))),
        }
    }
}

impl fmt::Display for Procedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct RemoteCzOutcome {
    pub state: StateVector,
    pub outcomes: Vec<u8>,
    pub correction: PauliString,
    pub transcript: Transcript,
}

impl RemoteCzOutcome {
    /// Correction formulas keyed by 1-based qubit, e.g. `Z^(m2+m3)`.
    pub fn correction_formulas(proc: Procedure, control: usize, target: usize) -> Vec<(usize, String)> {
        proc.corrections()
            .iter()
            .map(|c| {
                let q = if c.data == 0 { control } else { target };
                let exps: Vec<String> = c.outcomes.iter().map(|m| format!("m{}", m + 1)).collect();
                (q + 1, format!("{}^({})", c.letter.as_char(), exps.join("+")))
            })
            .collect()
    }
}

/// Run a measurement procedure between `control` and `target`, appending its
/// ancillas and removing them afterwards.
pub fn remote_cz(
    s: &StateVector,
    control: usize,
    target: usize,
    proc: Procedure,
    policy: &mut OutcomePolicy,
) -> Result<RemoteCzOutcome> {
    let n = s.num_qubits();
    check_qubit(control, n)?;
    check_qubit(target, n)?;
    if control == target {
        return Err(Error::CoincidentQubits(control));
    }
    let mut reg = Register::new(s);
    let anc = match proc.ancilla_init() {
        AncillaInit::Omega => reg.append(&TwoQubitResource { kind: ResourceKind::Omega, qubits: (0, 1) }.state()?)?,
        AncillaInit::Plus => reg.append(&StateVector::plus(1)?)?,
        AncillaInit::Zero => reg.append(&StateVector::zero(1)?)?,
    };
    let local: Vec<usize> = std::iter::once(control).chain(anc.iter().copied()).chain([target]).collect();
    debug_assert_eq!(local.len(), proc.ancillas() + 2);
    let mut transcript = Transcript::default();
    let mut outcomes = Vec::new();
    for obs in proc.sequence() {
        let letters: Vec<(usize, Pauli)> =
            obs.support().into_iter().map(|i| (local[i], obs.get(i))).collect();
        let m = reg.measure(&letters, policy)?;
        transcript.push(obs.letter_string(), m, obs.weight());
        outcomes.push(m);
    }
    // the last measurement on each ancilla leaves it in an eigenstate
    let finals = proc.sequence();
    for &a in &anc {
        let i = local.iter().position(|&l| l == a).expect("ancilla in local order");
        let last = finals.iter().rev().find(|o| o.get(i) != Pauli::I).expect("ancilla is measured");
        let basis = match last.get(i) {
            Pauli::X => Basis::X,
            _ => Basis::Z,
        };
        reg.discard_eigen(a, basis)?;
    }
    let state = reg.finish()?;
    let mut correction = PauliString::identity(n);
    for c in proc.corrections() {
        let bit = c.outcomes.iter().fold(0, |acc, &m| acc ^ outcomes[m]);
        if bit == 1 {
            correction.set(if c.data == 0 { control } else { target }, c.letter);
        }
    }
    Ok(RemoteCzOutcome { state, outcomes, correction, transcript })
}

/// One block of the procedure-A stabilizer evolution.
#[derive(Debug, Clone)]
pub struct TableBlock {
    pub title: String,
    pub tableau: StabilizerTableau,
}

/// Stabilizer evolution of procedure A on `|Ω⟩` with the logical operators
/// of qubits 1 and 4 tracked, outcome-0 branch. In the final block the ancilla
/// pair has been projected out, so the logical operators are shown with their
/// ancilla support multiplied away.
pub fn procedure_a_evolution() -> Result<Vec<TableBlock>> {
    let p = |s: &str| -> PauliString { s.parse().expect("static Pauli") };
    let mut t = StabilizerTableau::from_generators(4, vec![p("IXZI"), p("IZXI")])?;
    for (name, op) in [("X1", "XIII"), ("Z1", "ZIII"), ("X4", "IIIX"), ("Z4", "IIIZ")] {
        t.track(name, p(op))?;
    }
    let mut blocks = vec![TableBlock { title: "At start".into(), tableau: t.clone() }];
    let steps = [("1a", "ZXII"), ("1b", "IIXZ"), ("2a", "IZII"), ("2b", "IIZI")];
    let mut policy = OutcomePolicy::force([0; 4]);
    for (i, (label, obs)) in steps.iter().enumerate() {
        t.measure(&p(obs), &mut policy)?;
        let mut shown = t.clone();
        if i + 1 == steps.len() {
            shown.reduce_tracked(&[1, 2]);
        }
        blocks.push(TableBlock { title: format!("{label}) Measure {obs}"), tableau: shown });
    }
    Ok(blocks)
}

pub fn render_table(blocks: &[TableBlock]) -> String {
    let mut out = String::new();
    for (i, b) in blocks.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&b.title);
        out.push('\n');
        out.push_str(&b.tableau.to_text());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resources() {
        let omega = TwoQubitResource { kind: ResourceKind::Omega, qubits: (0, 1) }.state().unwrap();
        assert!((omega.expectation(&"XZ".parse().unwrap()).unwrap() - 1.0).abs() < 1e-12);
        assert!((omega.expectation(&"ZX".parse().unwrap()).unwrap() - 1.0).abs() < 1e-12);
        let rb = TwoQubitResource { kind: ResourceKind::RotatedBell(Matrix::h()), qubits: (0, 1) }.state().unwrap();
        assert!((rb.expectation(&"XZ".parse().unwrap()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn procedure_parsing_and_formulas() {
        assert_eq!("B_swapped".parse::<Procedure>().unwrap(), Procedure::BSwapped);
        assert!("C".parse::<Procedure>().is_err());
        let f = RemoteCzOutcome::correction_formulas(Procedure::B, 0, 3);
        assert_eq!(f, vec![(1, "Z^(m2)".to_string()), (4, "Z^(m1+m3)".to_string())]);
    }

    #[test]
    fn ancilla_tableau_is_pure() {
        let t = ancilla_cnot_tableau().unwrap();
        assert!(t.is_pure());
        t.validate().unwrap();
    }
}
