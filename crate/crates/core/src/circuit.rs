//! A small circuit IR for the model mapping: preparations, gates with
//! outcome-dependent angles, labelled measurements, classical Pauli
//! corrections and named boxes.
//!
//! Wires are 0-based. A wire is live from its preparation (or from the start,
//! for inputs) until it is measured; the live wires at the end are the
//! outputs, in wire order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::pattern::{MeasurementPattern, StepBasis};
use crate::pauli::{CliffordGate, Pauli, PauliString};
use crate::policy::{enumerate_branches, OutcomePolicy};
use crate::statevector::{fidelity, Basis, StateVector};
use crate::tableau::StabilizerTableau;

/// Outcome assignment keyed by measurement label.
pub type Outcomes = BTreeMap<String, u8>;

/// `value · (−1)^(sum of the listed outcomes)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Angle {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub deps: Vec<String>,
}

impl Angle {
    pub fn constant(value: f64) -> Self {
        Angle { value, deps: Vec::new() }
    }

    pub fn signed(value: f64, deps: &[&str]) -> Self {
        Angle { value, deps: deps.iter().map(|s| s.to_string()).collect() }
    }

    pub fn negated(&self) -> Self {
        Angle { value: -self.value, deps: self.deps.clone() }
    }

    pub fn is_constant(&self) -> bool {
        self.deps.is_empty()
    }

    pub fn eval(&self, outcomes: &Outcomes) -> Result<f64> {
        let mut parity = 0;
        for d in &self.deps {
            parity ^= lookup(outcomes, d)?;
        }
        Ok(if parity == 1 { -self.value } else { self.value })
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.deps.is_empty() {
            write!(f, "{}", self.value)
        } else {
            write!(f, "(-1)^({})*{}", self.deps.join("+"), self.value)
        }
    }
}

fn lookup(outcomes: &Outcomes, label: &str) -> Result<u8> {
    outcomes
        .get(label)
        .copied()
        .ok_or_else(|| Error::Circuit(format!("outcome {label} used before it is measured")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrepState {
    Zero,
    Plus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    S(usize),
    X(usize),
    Z(usize),
    /// `Cnot(control, target)`.
    Cnot(usize, usize),
    Cz(usize, usize),
    Ux(usize, Angle),
    Uz(usize, Angle),
}

impl Gate {
    pub fn wires(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::S(q) | Gate::X(q) | Gate::Z(q) | Gate::Ux(q, _) | Gate::Uz(q, _) => vec![*q],
            Gate::Cnot(a, b) | Gate::Cz(a, b) => vec![*a, *b],
        }
    }

    pub fn clifford(&self) -> Option<CliffordGate> {
        Some(match *self {
            Gate::H(q) => CliffordGate::H(q),
            Gate::S(q) => CliffordGate::S(q),
            Gate::X(q) => CliffordGate::X(q),
            Gate::Z(q) => CliffordGate::Z(q),
            Gate::Cnot(a, b) => CliffordGate::Cnot(a, b),
            Gate::Cz(a, b) => CliffordGate::Cz(a, b),
            Gate::Ux(..) | Gate::Uz(..) => return None,
        })
    }

    pub fn angle(&self) -> Option<&Angle> {
        match self {
            Gate::Ux(_, a) | Gate::Uz(_, a) => Some(a),
            _ => None,
        }
    }

    /// Single-qubit matrix for a constant-angle one-qubit gate.
    pub fn matrix(&self) -> Option<Matrix> {
        Some(match self {
            Gate::H(_) => Matrix::h(),
            Gate::S(_) => Matrix::s(),
            Gate::X(_) => Matrix::x(),
            Gate::Z(_) => Matrix::z(),
            Gate::Ux(_, a) if a.is_constant() => Matrix::ux(a.value),
            Gate::Uz(_, a) if a.is_constant() => Matrix::uz(a.value),
            _ => return None,
        })
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::H(q) => write!(f, "H q{q}"),
            Gate::S(q) => write!(f, "S q{q}"),
            Gate::X(q) => write!(f, "X q{q}"),
            Gate::Z(q) => write!(f, "Z q{q}"),
            Gate::Cnot(c, t) => write!(f, "CNOT q{c}->q{t}"),
            Gate::Cz(a, b) => write!(f, "CZ q{a},q{b}"),
            Gate::Ux(q, a) => write!(f, "Ux({a}) q{q}"),
            Gate::Uz(q, a) => write!(f, "Uz({a}) q{q}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MeasBasis {
    X,
    Z,
    /// `(|0⟩ ± e^{iω}|1⟩)/√2` with `ω` given by the angle.
    Equatorial(Angle),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BoxTag {
    /// Prepares `|Φ_0⟩` on `(a, b)`.
    BellPrep { a: usize, b: usize },
    /// Bell measurement of `(a, b)`; the `a` outcome is the `XX` bit and the
    /// `b` outcome the `ZZ` bit.
    BellMeas { a: usize, b: usize },
    /// Measurement in the basis `(U† ⊗ I)|Φ_j⟩` where `U` is the leading
    /// rotation on `a`.
    GeneralizedBell { a: usize, b: usize, rotation: Gate },
}

impl BoxTag {
    pub fn name(&self) -> &'static str {
        match self {
            BoxTag::BellPrep { .. } => "bell_prep",
            BoxTag::BellMeas { .. } => "bell_meas",
            BoxTag::GeneralizedBell { .. } => "generalized_bell",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Op {
    Prep { wire: usize, state: PrepState },
    Gate(Gate),
    Measure { wire: usize, basis: MeasBasis, label: String },
    /// Classical correction `P^(constant + sum of deps)` on `wire`.
    Correct {
        wire: usize,
        pauli: Pauli,
        deps: Vec<String>,
        #[serde(default)]
        constant: bool,
    },
    Box { tag: BoxTag, ops: Vec<Op> },
}

impl Op {
    pub fn prep_plus(wire: usize) -> Self {
        Op::Prep { wire, state: PrepState::Plus }
    }

    pub fn mx(wire: usize, label: &str) -> Self {
        Op::Measure { wire, basis: MeasBasis::X, label: label.to_string() }
    }

    pub fn mz(wire: usize, label: &str) -> Self {
        Op::Measure { wire, basis: MeasBasis::Z, label: label.to_string() }
    }

    pub fn correct(wire: usize, pauli: Pauli, deps: &[&str]) -> Self {
        Op::Correct { wire, pauli, deps: deps.iter().map(|s| s.to_string()).collect(), constant: false }
    }

    /// Wires the op touches.
    pub fn wires(&self) -> BTreeSet<usize> {
        match self {
            Op::Prep { wire, .. } | Op::Measure { wire, .. } | Op::Correct { wire, .. } => [*wire].into(),
            Op::Gate(g) => g.wires().into_iter().collect(),
            Op::Box { ops, .. } => ops.iter().flat_map(|o| o.wires()).collect(),
        }
    }

    /// Labels the op reads.
    pub fn reads(&self) -> BTreeSet<String> {
        match self {
            Op::Gate(g) => g.angle().map(|a| a.deps.iter().cloned().collect()).unwrap_or_default(),
            Op::Measure { basis: MeasBasis::Equatorial(a), .. } => a.deps.iter().cloned().collect(),
            Op::Correct { deps, .. } => deps.iter().cloned().collect(),
            Op::Box { ops, .. } => ops.iter().flat_map(|o| o.reads()).collect(),
            _ => BTreeSet::new(),
        }
    }

    /// Labels the op writes.
    pub fn writes(&self) -> BTreeSet<String> {
        match self {
            Op::Measure { label, .. } => [label.clone()].into(),
            Op::Box { ops, .. } => ops.iter().flat_map(|o| o.writes()).collect(),
            _ => BTreeSet::new(),
        }
    }

    fn render(&self, indent: usize, out: &mut String) {
        let pad = "  ".repeat(indent);
        match self {
            Op::Prep { wire, state } => {
                let s = match state {
                    PrepState::Zero => "|0>",
                    PrepState::Plus => "|+>",
                };
                out.push_str(&format!("{pad}prep {s} q{wire}\n"));
            }
            Op::Gate(g) => out.push_str(&format!("{pad}{g}\n")),
            Op::Measure { wire, basis, label } => {
                let b = match basis {
                    MeasBasis::X => "X".to_string(),
                    MeasBasis::Z => "Z".to_string(),
                    MeasBasis::Equatorial(a) => format!("eq({a})"),
                };
                out.push_str(&format!("{pad}measure {b} q{wire} -> {label}\n"));
            }
            Op::Correct { wire, pauli, deps, constant } => {
                let mut terms: Vec<String> = deps.clone();
                if *constant {
                    terms.insert(0, "1".into());
                }
                out.push_str(&format!("{pad}correct {}^({}) q{wire}\n", pauli.as_char(), terms.join("+")));
            }
            Op::Box { tag, ops } => {
                let head = match tag {
                    BoxTag::BellPrep { a, b } | BoxTag::BellMeas { a, b } => format!("{} q{a},q{b}", tag.name()),
                    BoxTag::GeneralizedBell { a, b, rotation } => {
                        format!("{} q{a},q{b} basis (U^dag x I)|Phi_j>, U = {rotation}", tag.name())
                    }
                };
                out.push_str(&format!("{pad}[{head}\n"));
                for o in ops {
                    o.render(indent + 1, out);
                }
                out.push_str(&format!("{pad}]\n"));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n: usize,
    pub inputs: Vec<usize>,
    pub ops: Vec<Op>,
}

impl Circuit {
    pub fn new(n: usize, inputs: Vec<usize>, ops: Vec<Op>) -> Result<Self> {
        let c = Circuit { n, inputs, ops };
        c.validate()?;
        Ok(c)
    }

    /// Wire typing: every op touches live wires only, preparations hit fresh
    /// wires, labels are unique and read after they are written.
    pub fn validate(&self) -> Result<()> {
        let mut live = vec![false; self.n];
        let mut used = vec![false; self.n];
        for &i in &self.inputs {
            if i >= self.n || used[i] {
                return Err(Error::Circuit(format!("bad input wire {i}")));
            }
            live[i] = true;
            used[i] = true;
        }
        let mut labels = BTreeSet::new();
        validate_ops(&self.ops, &mut live, &mut used, &mut labels)
    }

    /// Wires still live at the end, in wire order.
    pub fn outputs(&self) -> Vec<usize> {
        let mut live = vec![false; self.n];
        for &i in &self.inputs {
            live[i] = true;
        }
        fn walk(ops: &[Op], live: &mut [bool]) {
            for op in ops {
                match op {
                    Op::Prep { wire, .. } => live[*wire] = true,
                    Op::Measure { wire, .. } => live[*wire] = false,
                    Op::Box { ops, .. } => walk(ops, live),
                    _ => {}
                }
            }
        }
        walk(&self.ops, &mut live);
        (0..self.n).filter(|&w| live[w]).collect()
    }

    /// All ops with boxes flattened, in execution order.
    pub fn flat_ops(&self) -> Vec<Op> {
        fn walk(ops: &[Op], out: &mut Vec<Op>) {
            for op in ops {
                match op {
                    Op::Box { ops, .. } => walk(ops, out),
                    other => out.push(other.clone()),
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.ops, &mut out);
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("circuit serializes")
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Count of top-level and nested ops matching `pred`.
    pub fn count(&self, pred: impl Fn(&Op) -> bool) -> usize {
        self.flat_ops().iter().filter(|o| pred(o)).count()
    }
}

fn validate_ops(ops: &[Op], live: &mut [bool], used: &mut [bool], labels: &mut BTreeSet<String>) -> Result<()> {
    let n = live.len();
    let need_live = |w: usize, live: &[bool]| -> Result<()> {
        if w >= n {
            return Err(Error::QubitOutOfRange { index: w, n });
        }
        if !live[w] {
            return Err(Error::Circuit(format!("wire {w} is not live")));
        }
        Ok(())
    };
    for op in ops {
        for r in op.reads() {
            if !labels.contains(&r) && !op.writes().contains(&r) {
                return Err(Error::Circuit(format!("outcome {r} used before it is measured")));
            }
        }
        match op {
            Op::Prep { wire, .. } => {
                if *wire >= n {
                    return Err(Error::QubitOutOfRange { index: *wire, n });
                }
                if used[*wire] {
                    return Err(Error::Circuit(format!("wire {wire} prepared twice")));
                }
                used[*wire] = true;
                live[*wire] = true;
            }
            Op::Gate(g) => {
                let w = g.wires();
                if w.len() == 2 && w[0] == w[1] {
                    return Err(Error::CoincidentQubits(w[0]));
                }
                for q in w {
                    need_live(q, live)?;
                }
            }
            Op::Measure { wire, label, .. } => {
                need_live(*wire, live)?;
                if !labels.insert(label.clone()) {
                    return Err(Error::Circuit(format!("label {label} measured twice")));
                }
                live[*wire] = false;
            }
            Op::Correct { wire, pauli, .. } => {
                need_live(*wire, live)?;
                if *pauli == Pauli::I {
                    return Err(Error::Circuit("identity correction".into()));
                }
            }
            Op::Box { ops, .. } => validate_ops(ops, live, used, labels)?,
        }
    }
    Ok(())
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ins: Vec<String> = self.inputs.iter().map(|q| format!("q{q}")).collect();
        let mut out = format!("circuit on {} wires, inputs [{}]\n", self.n, ins.join(", "));
        for op in &self.ops {
            op.render(1, &mut out);
        }
        f.write_str(&out)
    }
}

/// One executed branch.
#[derive(Debug, Clone)]
pub struct CircuitRun {
    pub outcomes: Outcomes,
    pub probability: f64,
    /// Output wires in wire order.
    pub output: StateVector,
}

/// Execute `c` on `input` (input wires in `c.inputs` order). Corrections are
/// applied only when `apply_corrections` is set.
pub fn run_circuit(
    c: &Circuit,
    input: &StateVector,
    policy: &mut OutcomePolicy,
    apply_corrections: bool,
) -> Result<CircuitRun> {
    if input.num_qubits() != c.inputs.len() {
        return Err(Error::Dimension { expected: c.inputs.len(), got: input.num_qubits() });
    }
    let mut ex = Exec {
        state: input.clone(),
        pos: vec![None; c.n],
        outcomes: Outcomes::new(),
        probability: 1.0,
        apply_corrections,
    };
    for (i, &w) in c.inputs.iter().enumerate() {
        ex.pos[w] = Some(i);
    }
    ex.run(&c.ops, policy)?;
    let live: Vec<usize> = (0..c.n).filter(|&w| ex.pos[w].is_some()).collect();
    let order: Vec<usize> = live.iter().map(|&w| ex.pos[w].expect("live")).collect();
    let mut output = ex.state;
    output.permute(&order)?;
    Ok(CircuitRun { outcomes: ex.outcomes, probability: ex.probability, output })
}

struct Exec {
    state: StateVector,
    pos: Vec<Option<usize>>,
    outcomes: Outcomes,
    probability: f64,
    apply_corrections: bool,
}

impl Exec {
    fn at(&self, w: usize) -> Result<usize> {
        self.pos.get(w).copied().flatten().ok_or_else(|| Error::Circuit(format!("wire {w} is not live")))
    }

    fn run(&mut self, ops: &[Op], policy: &mut OutcomePolicy) -> Result<()> {
        for op in ops {
            match op {
                Op::Prep { wire, state } => {
                    if self.pos[*wire].is_some() {
                        return Err(Error::Circuit(format!("wire {wire} prepared while live")));
                    }
                    let fresh = match state {
                        PrepState::Zero => StateVector::zero(1)?,
                        PrepState::Plus => StateVector::plus(1)?,
                    };
                    self.pos[*wire] = Some(self.state.num_qubits());
                    self.state = self.state.tensor(&fresh)?;
                }
                Op::Gate(g) => self.gate(g)?,
                Op::Measure { wire, basis, label } => {
                    let q = self.at(*wire)?;
                    let b = match basis {
                        MeasBasis::X => Basis::X,
                        MeasBasis::Z => Basis::Z,
                        MeasBasis::Equatorial(a) => Basis::Equatorial(a.eval(&self.outcomes)?),
                    };
                    let p0 = self.state.prob_zero(q, b)?;
                    let bit = policy.draw(p0.clamp(0.0, 1.0))?;
                    self.probability *= self.state.project_discard(q, b, bit)?;
                    self.outcomes.insert(label.clone(), bit);
                    self.pos[*wire] = None;
                    for p in self.pos.iter_mut().flatten() {
                        if *p > q {
                            *p -= 1;
                        }
                    }
                }
                Op::Correct { wire, pauli, deps, constant } => {
                    let q = self.at(*wire)?;
                    let mut bit = u8::from(*constant);
                    for d in deps {
                        bit ^= lookup(&self.outcomes, d)?;
                    }
                    if self.apply_corrections && bit == 1 {
                        let p = PauliString::single(self.state.num_qubits(), q, *pauli);
                        self.state.apply_pauli(&p)?;
                    }
                }
                Op::Box { ops, .. } => self.run(ops, policy)?,
            }
        }
        Ok(())
    }

    fn gate(&mut self, g: &Gate) -> Result<()> {
        match g {
            Gate::H(q) => self.state.h(self.at(*q)?),
            Gate::S(q) => self.state.s(self.at(*q)?),
            Gate::X(q) => self.state.x(self.at(*q)?),
            Gate::Z(q) => self.state.z(self.at(*q)?),
            Gate::Cnot(c, t) => self.state.cnot(self.at(*c)?, self.at(*t)?),
            Gate::Cz(a, b) => self.state.cz(self.at(*a)?, self.at(*b)?),
            Gate::Ux(q, a) => {
                let v = a.eval(&self.outcomes)?;
                self.state.ux(self.at(*q)?, v)
            }
            Gate::Uz(q, a) => {
                let v = a.eval(&self.outcomes)?;
                self.state.uz(self.at(*q)?, v)
            }
        }
    }
}

/// Every branch of `c` on `input`, keyed by outcome assignment.
pub fn circuit_branches(c: &Circuit, input: &StateVector, apply_corrections: bool) -> Result<BTreeMap<Outcomes, CircuitRun>> {
    let runs = enumerate_branches(|p| run_circuit(c, input, p, apply_corrections))?;
    Ok(runs.into_iter().map(|(_, r)| (r.outcomes.clone(), r)).collect())
}

/// A branch of the first circuit with no partner in the second.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub input: usize,
    pub outcomes: Outcomes,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub equivalent: bool,
    pub inputs: usize,
    /// Branch of the first circuit and its partner in the second.
    pub relabeling: Vec<(Outcomes, Outcomes)>,
    pub counterexample: Option<Counterexample>,
}

impl EquivalenceReport {
    /// Whether the relabeling keeps every outcome under the same label.
    pub fn is_identity(&self) -> bool {
        self.relabeling.iter().all(|(a, b)| a == b)
    }
}

/// Branch-wise equivalence: every branch of `c1` needs a branch of `c2`
/// that, on every input, has the same probability and the same output both
/// before and after the declared corrections (fidelity ≥ 1 − tol).
pub fn verify_equivalence(c1: &Circuit, c2: &Circuit, inputs: &[StateVector], tol: f64) -> Result<EquivalenceReport> {
    if c1.inputs.len() != c2.inputs.len() {
        return Err(Error::Arity { left: c1.inputs.len(), right: c2.inputs.len() });
    }
    let (o1, o2) = (c1.outputs().len(), c2.outputs().len());
    if o1 != o2 {
        return Err(Error::Arity { left: o1, right: o2 });
    }
    type Table = Vec<(BTreeMap<Outcomes, CircuitRun>, BTreeMap<Outcomes, CircuitRun>)>;
    let tables = |c: &Circuit| -> Result<Table> {
        inputs.iter().map(|s| Ok((circuit_branches(c, s, false)?, circuit_branches(c, s, true)?))).collect()
    };
    let t1 = tables(c1)?;
    let t2 = tables(c2)?;

    let keys = |t: &Table| -> BTreeSet<Outcomes> { t.iter().flat_map(|(raw, _)| raw.keys().cloned()).collect() };
    let k1 = keys(&t1);
    let k2 = keys(&t2);

    let mut relabeling = Vec::new();
    for a in &k1 {
        let mut reason = String::new();
        let partner = k2.iter().find(|b| match branch_matches(&t1, a, &t2, b, tol) {
            Ok(()) => true,
            Err(r) => {
                if reason.is_empty() {
                    reason = r;
                }
                false
            }
        });
        match partner {
            Some(b) => relabeling.push((a.clone(), b.clone())),
            None => {
                let input = t1.iter().position(|(raw, _)| raw.contains_key(a)).unwrap_or(0);
                return Ok(EquivalenceReport {
                    equivalent: false,
                    inputs: inputs.len(),
                    relabeling,
                    counterexample: Some(Counterexample { input, outcomes: a.clone(), reason }),
                });
            }
        }
    }
    Ok(EquivalenceReport { equivalent: true, inputs: inputs.len(), relabeling, counterexample: None })
}

/// Per input: raw and corrected runs keyed by outcomes.
type RunTable = (BTreeMap<Outcomes, CircuitRun>, BTreeMap<Outcomes, CircuitRun>);

fn branch_matches(
    t1: &[RunTable],
    a: &Outcomes,
    t2: &[RunTable],
    b: &Outcomes,
    tol: f64,
) -> std::result::Result<(), String> {
    for (i, ((raw1, cor1), (raw2, cor2))) in t1.iter().zip(t2).enumerate() {
        let p1 = raw1.get(a).map_or(0.0, |r| r.probability);
        let p2 = raw2.get(b).map_or(0.0, |r| r.probability);
        if (p1 - p2).abs() > tol {
            return Err(format!("input {i}: probability {p1} vs {p2}"));
        }
        if p1 <= tol {
            continue;
        }
        for (x, y, what) in [(raw1.get(a), raw2.get(b), "raw"), (cor1.get(a), cor2.get(b), "corrected")] {
            let (Some(x), Some(y)) = (x, y) else {
                return Err(format!("input {i}: {what} branch missing"));
            };
            let f = fidelity(&x.output, &y.output).map_err(|e| e.to_string())?;
            if f < 1.0 - tol {
                return Err(format!("input {i}: {what} output fidelity {f}"));
            }
        }
    }
    Ok(())
}

/// Direct circuit translation of a pattern: `|+⟩` on every non-input, one CZ
/// per edge, the measurement plan, then the byproduct as corrections.
/// Measurement of qubit `q` is labelled `j{q+1}`.
pub fn pattern_circuit(p: &MeasurementPattern) -> Result<Circuit> {
    let label = |q: usize| format!("j{}", q + 1);
    let mut ops = Vec::new();
    for q in 0..p.graph.len() {
        if !p.inputs.contains(&q) {
            ops.push(Op::prep_plus(q));
        }
    }
    let edges: Vec<(usize, usize)> = p.graph.edges().collect();
    for &(a, b) in edges.iter().rev() {
        ops.push(Op::Gate(Gate::Cz(a, b)));
    }
    for step in &p.plan {
        let deps: Vec<String> = step.deps.iter().map(|&d| label(d)).collect();
        let basis = match step.basis {
            StepBasis::X => MeasBasis::X,
            StepBasis::Z => MeasBasis::Z,
            StepBasis::Equatorial(base) => MeasBasis::Equatorial(Angle { value: base, deps }),
        };
        ops.push(Op::Measure { wire: step.qubit, basis, label: label(step.qubit) });
    }
    for (i, &w) in p.outputs.iter().enumerate() {
        for (pauli, parity) in [(Pauli::X, &p.byproduct.x[i]), (Pauli::Z, &p.byproduct.z[i])] {
            if parity.constant || !parity.qubits.is_empty() {
                ops.push(Op::Correct {
                    wire: w,
                    pauli,
                    deps: parity.qubits.iter().map(|&q| label(q)).collect(),
                    constant: parity.constant,
                });
            }
        }
    }
    Circuit::new(p.graph.len(), p.inputs.clone(), ops)
}

/// Standard teleportation: `|Φ_0⟩` from `H` and CNOT, Bell measurement by
/// CNOT, `H` and two `Z` measurements labelled `m1` (the `XX` bit) and `m2`
/// (the `ZZ` bit), then `X^(m2) Z^(m1)` on the output.
pub fn teleportation_circuit() -> Circuit {
    let ops = vec![
        Op::Prep { wire: 1, state: PrepState::Zero },
        Op::Prep { wire: 2, state: PrepState::Zero },
        Op::Gate(Gate::H(1)),
        Op::Gate(Gate::Cnot(1, 2)),
        Op::Gate(Gate::Cnot(0, 1)),
        Op::Gate(Gate::H(0)),
        Op::mz(0, "m1"),
        Op::mz(1, "m2"),
        Op::correct(2, Pauli::X, &["m2"]),
        Op::correct(2, Pauli::Z, &["m1"]),
    ];
    Circuit::new(3, vec![0], ops).expect("static circuit")
}

/// Stabilizer generators of the state a preparation box produces, on the
/// box's wires relabelled `0..k` in ascending order.
pub fn box_stabilizers(op: &Op) -> Result<Vec<PauliString>> {
    let Op::Box { ops, .. } = op else {
        return Err(Error::Circuit("not a box".into()));
    };
    let wires: Vec<usize> = op.wires().into_iter().collect();
    let local = |w: usize| wires.iter().position(|&x| x == w).expect("box wire");
    let mut t = StabilizerTableau::zero_state(wires.len());
    for o in ops {
        match o {
            Op::Prep { wire, state: PrepState::Plus } => t.apply(&CliffordGate::H(local(*wire)))?,
            Op::Prep { state: PrepState::Zero, .. } => {}
            Op::Gate(g) => {
                let c = g.clifford().ok_or_else(|| Error::Circuit(format!("{g} is not Clifford")))?;
                let c = match c {
                    CliffordGate::H(q) => CliffordGate::H(local(q)),
                    CliffordGate::S(q) => CliffordGate::S(local(q)),
                    CliffordGate::X(q) => CliffordGate::X(local(q)),
                    CliffordGate::Z(q) => CliffordGate::Z(local(q)),
                    CliffordGate::Cnot(a, b) => CliffordGate::Cnot(local(a), local(b)),
                    CliffordGate::Cz(a, b) => CliffordGate::Cz(local(a), local(b)),
                };
                t.apply(&c)?;
            }
            _ => return Err(Error::Circuit("box is not a pure preparation".into())),
        }
    }
    Ok(t.stabilizers().to_vec())
}

/// Check that the two-wire measurement `ops` on `(a, b)` is a measurement in
/// the basis `(U† ⊗ I)|Φ_j⟩`: fed that state it returns `(j1, j2)` on the
/// labels of `a` and `b` with certainty. Returns the smallest such
/// probability over the four `j`.
pub fn measurement_basis_check(ops: &[Op], a: usize, b: usize, u: &Matrix) -> Result<f64> {
    let n = a.max(b) + 1;
    let c = Circuit::new(n, vec![a, b], ops.to_vec())?;
    if !c.outputs().is_empty() {
        return Err(Error::Circuit("measurement box leaves live wires".into()));
    }
    let label_of = |w: usize| {
        c.flat_ops().iter().find_map(|o| match o {
            Op::Measure { wire, label, .. } if *wire == w => Some(label.clone()),
            _ => None,
        })
    };
    let (la, lb) = (label_of(a).expect("measured"), label_of(b).expect("measured"));
    let mut worst = 1.0f64;
    for j in 0..4u8 {
        let bits = crate::policy::BellBits::from_index(j);
        let mut s = StateVector::bell();
        s.apply_1q(0, &Matrix::pauli_power(bits.j1, bits.j2))?;
        s.apply_1q(0, &u.adjoint())?;
        // inputs are listed as [a, b]; `c.inputs` order is what run_circuit uses
        let mut p = 0.0;
        for (k, r) in circuit_branches(&c, &s, false)? {
            if k.get(&la) == Some(&bits.j1) && k.get(&lb) == Some(&bits.j2) {
                p += r.probability;
            }
        }
        worst = worst.min(p);
    }
    Ok(worst)
}
