//! One-way measurement patterns: a graph state with designated input and
//! output qubits, an ordered list of adaptive single-qubit measurements and a
//! byproduct rule giving the Pauli correction left on the outputs.
//!
//! Qubits are 0-based internally and 1-based in the JSON form.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gf2;
use crate::graph::Graph;
use crate::matrix::Matrix;
use crate::pauli::{Pauli, PauliString};
use crate::policy::{OutcomePolicy, DETERMINISTIC_EPS};
use crate::statevector::{fidelity, Basis, StateVector};

/// Fidelity tolerance used when deriving byproducts for the built-in library.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepBasis {
    X,
    Z,
    /// Equatorial measurement at `base · (−1)^{parity of deps}`.
    Equatorial(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanStep {
    pub qubit: usize,
    pub basis: StepBasis,
    /// Qubits whose outcomes flip the sign of the angle.
    pub deps: BTreeSet<usize>,
}

impl PlanStep {
    pub fn x(qubit: usize) -> Self {
        PlanStep { qubit, basis: StepBasis::X, deps: BTreeSet::new() }
    }

    pub fn z(qubit: usize) -> Self {
        PlanStep { qubit, basis: StepBasis::Z, deps: BTreeSet::new() }
    }

    pub fn equatorial(qubit: usize, base: f64, deps: &[usize]) -> Self {
        PlanStep { qubit, basis: StepBasis::Equatorial(base), deps: deps.iter().copied().collect() }
    }

    /// The concrete basis once the listed outcomes are known.
    pub fn resolve(&self, outcomes: &BTreeMap<usize, u8>) -> Basis {
        match self.basis {
            StepBasis::X => Basis::X,
            StepBasis::Z => Basis::Z,
            StepBasis::Equatorial(base) => {
                let flips = self.deps.iter().map(|q| outcomes.get(q).copied().unwrap_or(0)).sum::<u8>();
                Basis::Equatorial(if flips % 2 == 1 { -base } else { base })
            }
        }
    }
}

/// `constant ⊕ (⊕_{q ∈ qubits} j_q)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Parity {
    pub constant: bool,
    pub qubits: BTreeSet<usize>,
}

impl Parity {
    pub fn of(qubits: &[usize]) -> Self {
        Parity { constant: false, qubits: qubits.iter().copied().collect() }
    }

    pub fn eval(&self, outcomes: &BTreeMap<usize, u8>) -> u8 {
        let s: u8 = self.qubits.iter().map(|q| outcomes.get(q).copied().unwrap_or(0)).fold(0, |a, b| a ^ b);
        s ^ u8::from(self.constant)
    }

    fn xor(&mut self, other: &Parity) {
        self.constant ^= other.constant;
        for &q in &other.qubits {
            if !self.qubits.remove(&q) {
                self.qubits.insert(q);
            }
        }
    }
}

/// Output state = `⊗_k X^{x_k} Z^{z_k} · U|ψ⟩`, exponents evaluated on the
/// outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ByproductRule {
    pub x: Vec<Parity>,
    pub z: Vec<Parity>,
}

impl ByproductRule {
    pub fn identity(outputs: usize) -> Self {
        ByproductRule { x: vec![Parity::default(); outputs], z: vec![Parity::default(); outputs] }
    }

    /// The byproduct as a Pauli string on the outputs (phase ignored).
    pub fn eval(&self, outcomes: &BTreeMap<usize, u8>) -> PauliString {
        let letters: Vec<Pauli> = self
            .x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| Pauli::from_bits(x.eval(outcomes) == 1, z.eval(outcomes) == 1))
            .collect();
        PauliString::from_letters(&letters)
    }
}

#[derive(Debug, Clone)]
pub struct MeasurementPattern {
    pub name: String,
    pub graph: Graph,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub plan: Vec<PlanStep>,
    pub byproduct: ByproductRule,
    /// Intended unitary on the logical qubits, when known.
    pub unitary: Option<Matrix>,
}

impl MeasurementPattern {
    /// A pattern with an identity byproduct rule; run [`derive_byproduct_rule`]
    /// to fill it in.
    pub fn new(
        name: &str,
        graph: Graph,
        inputs: Vec<usize>,
        outputs: Vec<usize>,
        plan: Vec<PlanStep>,
    ) -> Result<Self> {
        let p = MeasurementPattern {
            name: name.to_string(),
            byproduct: ByproductRule::identity(outputs.len()),
            graph,
            inputs,
            outputs,
            plan,
            unitary: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.graph.len();
        let bad = |msg: String| Err(Error::Pattern(msg));
        for list in [&self.inputs, &self.outputs] {
            let set: BTreeSet<_> = list.iter().collect();
            if set.len() != list.len() {
                return bad("repeated qubit in input or output list".into());
            }
            if let Some(q) = list.iter().find(|&&q| q >= n) {
                return bad(format!("qubit {} is not in the graph", q + 1));
            }
        }
        let mut seen = BTreeSet::new();
        for step in &self.plan {
            if step.qubit >= n {
                return bad(format!("qubit {} is not in the graph", step.qubit + 1));
            }
            if self.outputs.contains(&step.qubit) {
                return bad(format!("output qubit {} is measured", step.qubit + 1));
            }
            if let Some(d) = step.deps.iter().find(|d| !seen.contains(*d)) {
                return bad(format!("step on qubit {} depends on later qubit {}", step.qubit + 1, d + 1));
            }
            if !seen.insert(step.qubit) {
                return bad(format!("qubit {} is measured twice", step.qubit + 1));
            }
        }
        if seen.len() + self.outputs.len() != n {
            return bad("every non-output qubit must be measured exactly once".into());
        }
        let rule_ok = self.byproduct.x.len() == self.outputs.len()
            && self.byproduct.z.len() == self.outputs.len()
            && self.byproduct.x.iter().chain(&self.byproduct.z).all(|p| p.qubits.is_subset(&seen));
        if !rule_ok {
            return bad("byproduct rule does not match the outputs and measured qubits".into());
        }
        Ok(())
    }

    pub fn num_measured(&self) -> usize {
        self.plan.len()
    }
}

/// The built-in pattern library.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PatternKind {
    Wire,
    XRot(f64),
    ZRot(f64),
    /// `Uz(ψ)·Ux(θ)·Uz(φ)` with fields `(ψ, θ, φ)`.
    Euler(f64, f64, f64),
    Cnot6,
    CnotSquare,
    RemoteCz,
}

impl PatternKind {
    pub fn name(&self) -> &'static str {
        match self {
            PatternKind::Wire => "wire",
            PatternKind::XRot(_) => "xrot",
            PatternKind::ZRot(_) => "zrot",
            PatternKind::Euler(..) => "euler",
            PatternKind::Cnot6 => "cnot6",
            PatternKind::CnotSquare => "cnot_square",
            PatternKind::RemoteCz => "remote_cz",
        }
    }

    pub fn unitary(&self) -> Matrix {
        match *self {
            PatternKind::Wire => Matrix::identity(2),
            PatternKind::XRot(phi) => Matrix::ux(phi),
            PatternKind::ZRot(theta) => Matrix::uz(theta),
            PatternKind::Euler(psi, theta, phi) => &(&Matrix::uz(psi) * &Matrix::ux(theta)) * &Matrix::uz(phi),
            PatternKind::Cnot6 | PatternKind::CnotSquare => Matrix::cnot(),
            PatternKind::RemoteCz => Matrix::cz(),
        }
    }
}

impl FromStr for PatternKind {
    type Err = Error;

    /// `wire`, `xrot:φ`, `zrot:θ`, `euler:ψ,θ,φ`, `cnot6`, `cnot_square`,
    /// `remote_cz`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let nums = args
            .split(',')
            .filter(|a| !a.trim().is_empty())
            .map(|a| a.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad angle {a:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        if nums.iter().any(|a| !a.is_finite()) {
            return Err(Error::Parse("angles must be finite".into()));
        }
        let want = |k: usize| -> Result<()> {
            if nums.len() == k {
                Ok(())
            } else {
                Err(Error::Parse(format!("pattern {name} takes {k} angle(s), got {}", nums.len())))
            }
        };
        let kind = match name.trim() {
            "wire" => PatternKind::Wire,
            "xrot" => {
                want(1)?;
                PatternKind::XRot(nums[0])
            }
            "zrot" => {
                want(1)?;
                PatternKind::ZRot(nums[0])
            }
            "euler" => {
                want(3)?;
                PatternKind::Euler(nums[0], nums[1], nums[2])
            }
            "cnot6" => PatternKind::Cnot6,
            "cnot_square" => PatternKind::CnotSquare,
            "remote_cz" => PatternKind::RemoteCz,
            other => return Err(Error::Pattern(format!("unknown pattern kind {other:?}"))),
        };
        if !matches!(kind, PatternKind::XRot(_) | PatternKind::ZRot(_) | PatternKind::Euler(..)) {
            want(0)?;
        }
        Ok(kind)
    }
}

/// Build a library pattern and derive its byproduct rule.
pub fn build_pattern(kind: PatternKind) -> Result<MeasurementPattern> {
    let line = |n: usize| Graph::path(n);
    let (graph, inputs, outputs, plan) = match kind {
        PatternKind::Wire => (line(3), vec![0], vec![2], vec![PlanStep::x(0), PlanStep::x(1)]),
        PatternKind::XRot(phi) => {
            check_angle(phi)?;
            (line(3), vec![0], vec![2], vec![PlanStep::x(0), PlanStep::equatorial(1, -phi, &[0])])
        }
        PatternKind::ZRot(theta) => {
            check_angle(theta)?;
            (line(3), vec![0], vec![2], vec![PlanStep::equatorial(0, -theta, &[]), PlanStep::x(1)])
        }
        PatternKind::Euler(psi, theta, phi) => {
            for a in [psi, theta, phi] {
                check_angle(a)?;
            }
            let plan = vec![
                PlanStep::equatorial(0, -phi, &[]),
                PlanStep::equatorial(1, -theta, &[0]),
                PlanStep::equatorial(2, -psi, &[1]),
                PlanStep::x(3),
            ];
            (line(5), vec![0], vec![4], plan)
        }
        PatternKind::Cnot6 => {
            let g = Graph::from_edges(6, &[(0, 2), (2, 4), (1, 3), (3, 5), (3, 4)])?;
            let plan = [0, 2, 1, 3].into_iter().map(PlanStep::x).collect();
            (g, vec![0, 1], vec![4, 5], plan)
        }
        PatternKind::CnotSquare => {
            // 5×3 grid with five sites removed by Z measurements:
            //   1 . 5
            //   2 3 4
            //   . 6 .
            //   . 7 .
            //   8 9 10
            let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (2, 5), (5, 6), (6, 8), (7, 8), (8, 9)];
            let g = Graph::from_edges(10, &edges)?;
            let plan = [0, 1, 2, 3, 5, 6, 7, 8].into_iter().map(PlanStep::x).collect();
            (g, vec![0, 7], vec![4, 9], plan)
        }
        PatternKind::RemoteCz => (line(4), vec![0, 3], vec![0, 3], vec![PlanStep::x(1), PlanStep::x(2)]),
    };
    let mut p = MeasurementPattern::new(kind.name(), graph, inputs, outputs, plan)?;
    let u = kind.unitary();
    p.byproduct = derive_byproduct_rule(&p, &u, DEFAULT_TOLERANCE)?;
    p.unitary = Some(u);
    Ok(p)
}

fn check_angle(a: f64) -> Result<()> {
    if a.is_finite() {
        Ok(())
    } else {
        Err(Error::Pattern(format!("angle {a} is not finite")))
    }
}

/// Result of running a pattern.
#[derive(Debug, Clone)]
pub struct PatternRun {
    /// Output state before any correction, outputs in pattern order.
    pub output: StateVector,
    /// Outcome per measured qubit.
    pub outcomes: BTreeMap<usize, u8>,
    /// Outcomes in plan order.
    pub bits: Vec<u8>,
    /// Byproduct predicted by the pattern's rule.
    pub byproduct: PauliString,
    /// Probability of the branch taken.
    pub probability: f64,
}

impl PatternRun {
    /// Output with the byproduct undone.
    pub fn corrected(&self) -> Result<StateVector> {
        let mut s = self.output.clone();
        s.apply_pauli(&self.byproduct)?;
        Ok(s)
    }
}

fn run(
    p: &MeasurementPattern,
    input: &StateVector,
    mut choose: impl FnMut(usize, f64) -> Result<u8>,
) -> Result<PatternRun> {
    if input.num_qubits() != p.inputs.len() {
        return Err(Error::Dimension { expected: p.inputs.len(), got: input.num_qubits() });
    }
    let n = p.graph.len();
    let others: Vec<usize> = (0..n).filter(|q| !p.inputs.contains(q)).collect();
    let mut state = input.tensor(&StateVector::plus(others.len())?)?;
    let mut alive: Vec<usize> = p.inputs.iter().chain(&others).copied().collect();
    let pos = |alive: &[usize], q: usize| alive.iter().position(|&a| a == q).expect("qubit is alive");
    for (a, b) in p.graph.edges() {
        state.cz(pos(&alive, a), pos(&alive, b))?;
    }
    let mut outcomes = BTreeMap::new();
    let mut bits = Vec::with_capacity(p.plan.len());
    let mut probability = 1.0;
    for (i, step) in p.plan.iter().enumerate() {
        let basis = step.resolve(&outcomes);
        let at = pos(&alive, step.qubit);
        let p0 = state.prob_zero(at, basis)?.clamp(0.0, 1.0);
        let bit = choose(i, p0)?;
        probability *= state.project_discard(at, basis, bit)?;
        alive.remove(at);
        outcomes.insert(step.qubit, bit);
        bits.push(bit);
    }
    let order: Vec<usize> = p.outputs.iter().map(|&q| pos(&alive, q)).collect();
    state.permute(&order)?;
    let byproduct = p.byproduct.eval(&outcomes);
    Ok(PatternRun { output: state, outcomes, bits, byproduct, probability })
}

/// Execute with outcomes drawn from `policy`.
pub fn execute_pattern(p: &MeasurementPattern, input: &StateVector, policy: &mut OutcomePolicy) -> Result<PatternRun> {
    run(p, input, |_, p0| policy.draw(p0))
}

/// Execute a single branch: `bits[i]` is the outcome of plan step `i`.
pub fn execute_branch(p: &MeasurementPattern, input: &StateVector, bits: &[u8]) -> Result<PatternRun> {
    if bits.len() != p.plan.len() {
        return Err(Error::Dimension { expected: p.plan.len(), got: bits.len() });
    }
    run(p, input, |i, p0| {
        let b = bits[i];
        let prob = if b == 0 { p0 } else { 1.0 - p0 };
        if b > 1 || prob < DETERMINISTIC_EPS {
            Err(Error::ZeroProbabilityBranch { bit: b })
        } else {
            Ok(b)
        }
    })
}

/// `|0⟩,|1⟩,… (all basis states), |+…+⟩, |+i…+i⟩` and one seeded random
/// state on `k` qubits.
pub fn spanning_inputs(k: usize, seed: u64) -> Result<Vec<StateVector>> {
    let mut out: Vec<StateVector> = (0..1usize << k).map(|i| StateVector::basis_state(k, i)).collect::<Result<_>>()?;
    let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let plus_i = StateVector::qubit(r, Complex64::new(0.0, FRAC_1_SQRT_2))?;
    let mut pi = plus_i.clone();
    for _ in 1..k {
        pi = pi.tensor(&plus_i)?;
    }
    out.push(StateVector::plus(k)?);
    out.push(pi);
    out.push(random_state(k, seed)?);
    Ok(out)
}

pub fn random_state(k: usize, seed: u64) -> Result<StateVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut amps: Vec<Complex64> =
        (0..1usize << k).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    StateVector::from_amplitudes(amps)
}

pub fn apply_unitary(u: &Matrix, s: &StateVector) -> Result<StateVector> {
    let mut t = s.clone();
    let qubits: Vec<usize> = (0..s.num_qubits()).collect();
    t.apply_matrix(&qubits, u)?;
    Ok(t)
}

/// Bits of `b` as a plan-order outcome list of length `m`.
pub fn branch_bits(b: usize, m: usize) -> Vec<u8> {
    (0..m).map(|i| ((b >> (m - 1 - i)) & 1) as u8).collect()
}

/// Fit the byproduct rule of `p` against the intended unitary `u` by
/// enumerating every outcome branch on a spanning input set.
pub fn derive_byproduct_rule(p: &MeasurementPattern, u: &Matrix, tol: f64) -> Result<ByproductRule> {
    let k = p.inputs.len();
    if u.num_qubits() != k || p.outputs.len() != k {
        return Err(Error::Arity { left: k, right: u.num_qubits() });
    }
    let inputs = spanning_inputs(k, 0)?;
    let targets: Vec<StateVector> = inputs.iter().map(|s| apply_unitary(u, s)).collect::<Result<_>>()?;
    let m = p.plan.len();
    let mut table: Vec<(Vec<u8>, PauliString)> = Vec::with_capacity(1 << m);
    for b in 0..1usize << m {
        let bits = branch_bits(b, m);
        let outs: Vec<StateVector> = inputs
            .iter()
            .map(|s| execute_branch(p, s, &bits).map(|r| r.output))
            .collect::<Result<_>>()?;
        let found = all_paulis(k).into_iter().find(|cand| {
            targets.iter().zip(&outs).all(|(t, o)| {
                let mut t = t.clone();
                t.apply_pauli(cand).is_ok() && fidelity(&t, o).map(|f| f >= 1.0 - tol).unwrap_or(false)
            })
        });
        let Some(pauli) = found else {
            return Err(Error::NoByproductFit(format!(
                "{}: branch {bits:?} is not a Pauli image of the intended unitary",
                p.name
            )));
        };
        table.push((bits, pauli));
    }
    // affine fit: columns are the constant and one per plan step
    let columns: Vec<Vec<bool>> = std::iter::once(vec![true; table.len()])
        .chain((0..m).map(|i| table.iter().map(|(bits, _)| bits[i] == 1).collect()))
        .collect();
    let fit = |rhs: Vec<bool>| -> Result<Parity> {
        let sol = gf2::solve(&columns, &rhs)
            .ok_or_else(|| Error::NoByproductFit(format!("{}: byproduct is not affine in the outcomes", p.name)))?;
        Ok(Parity {
            constant: sol[0],
            qubits: (0..m).filter(|&i| sol[i + 1]).map(|i| p.plan[i].qubit).collect(),
        })
    };
    let mut rule = ByproductRule::identity(k);
    for o in 0..k {
        rule.x[o] = fit(table.iter().map(|(_, pl)| pl.x_bits()[o]).collect())?;
        rule.z[o] = fit(table.iter().map(|(_, pl)| pl.z_bits()[o]).collect())?;
    }
    Ok(rule)
}

fn all_paulis(k: usize) -> Vec<PauliString> {
    (0..1usize << (2 * k))
        .map(|c| {
            let letters: Vec<Pauli> =
                (0..k).map(|q| Pauli::from_bits((c >> (2 * q)) & 1 == 1, (c >> (2 * q + 1)) & 1 == 1)).collect();
            PauliString::from_letters(&letters)
        })
        .collect()
}

/// Run `a` then `b`, with `a`'s outputs identified with `b`'s inputs. The
/// byproduct of `a` is carried through `b`'s entangling step as a Pauli frame:
/// frames flip the affected outcomes and angle signs, and whatever reaches
/// `b`'s outputs joins `b`'s own byproduct.
pub fn compose_patterns(a: &MeasurementPattern, b: &MeasurementPattern) -> Result<MeasurementPattern> {
    if a.outputs.len() != b.inputs.len() {
        return Err(Error::Arity { left: a.outputs.len(), right: b.inputs.len() });
    }
    let na = a.graph.len();
    let mut map = vec![usize::MAX; b.graph.len()];
    for (i, &q) in b.inputs.iter().enumerate() {
        map[q] = a.outputs[i];
    }
    let mut next = na;
    for slot in map.iter_mut().filter(|s| **s == usize::MAX) {
        *slot = next;
        next += 1;
    }
    let mut graph = Graph::new(next);
    for (x, y) in a.graph.edges() {
        graph.add_edge(x, y)?;
    }
    for (x, y) in b.graph.edges() {
        graph.add_edge(map[x], map[y])?;
    }

    // Pauli frame per b-qubit, as parities over a's outcomes.
    let nb = b.graph.len();
    let mut xf = vec![Parity::default(); nb];
    let mut zf = vec![Parity::default(); nb];
    for (i, &q) in b.inputs.iter().enumerate() {
        xf[q].xor(&a.byproduct.x[i]);
        zf[q].xor(&a.byproduct.z[i]);
        for w in b.graph.neighbors(q) {
            zf[w].xor(&a.byproduct.x[i]);
        }
    }
    // ideal outcome of b-qubit q in terms of actual composite outcomes
    let mut ideal: BTreeMap<usize, Parity> = BTreeMap::new();
    let mut plan = a.plan.clone();
    for step in &b.plan {
        let q = step.qubit;
        let mut deps = Parity::default();
        for d in &step.deps {
            deps.xor(&ideal[d]);
        }
        if matches!(step.basis, StepBasis::Equatorial(_)) {
            deps.xor(&xf[q]);
        }
        let mut id = Parity::of(&[map[q]]);
        id.xor(if step.basis == StepBasis::Z { &xf[q] } else { &zf[q] });
        ideal.insert(q, id);
        plan.push(PlanStep { qubit: map[q], basis: step.basis, deps: deps.qubits });
    }
    let substitute = |p: &Parity, frame: &Parity| {
        let mut out = Parity { constant: p.constant, qubits: BTreeSet::new() };
        for q in &p.qubits {
            out.xor(&ideal[q]);
        }
        out.xor(frame);
        out
    };
    let byproduct = ByproductRule {
        x: b.outputs.iter().enumerate().map(|(i, &o)| substitute(&b.byproduct.x[i], &xf[o])).collect(),
        z: b.outputs.iter().enumerate().map(|(i, &o)| substitute(&b.byproduct.z[i], &zf[o])).collect(),
    };
    let unitary = match (&a.unitary, &b.unitary) {
        (Some(ua), Some(ub)) => Some(ub * ua),
        _ => None,
    };
    let p = MeasurementPattern {
        name: format!("{}*{}", b.name, a.name),
        graph,
        inputs: a.inputs.clone(),
        outputs: b.outputs.iter().map(|&o| map[o]).collect(),
        plan,
        byproduct,
        unitary,
    };
    p.validate()?;
    Ok(p)
}

/// Side-by-side union of two patterns; `b`'s qubits are renumbered after `a`'s.
pub fn tensor_patterns(a: &MeasurementPattern, b: &MeasurementPattern) -> Result<MeasurementPattern> {
    let na = a.graph.len();
    let mut graph = Graph::new(na + b.graph.len());
    for (x, y) in a.graph.edges() {
        graph.add_edge(x, y)?;
    }
    for (x, y) in b.graph.edges() {
        graph.add_edge(x + na, y + na)?;
    }
    let shift = |qs: &[usize]| qs.iter().map(|q| q + na).collect::<Vec<_>>();
    let shift_parity = |p: &Parity| Parity { constant: p.constant, qubits: p.qubits.iter().map(|q| q + na).collect() };
    let plan = a
        .plan
        .iter()
        .cloned()
        .chain(b.plan.iter().map(|s| PlanStep {
            qubit: s.qubit + na,
            basis: s.basis,
            deps: s.deps.iter().map(|q| q + na).collect(),
        }))
        .collect();
    let byproduct = ByproductRule {
        x: a.byproduct.x.iter().cloned().chain(b.byproduct.x.iter().map(shift_parity)).collect(),
        z: a.byproduct.z.iter().cloned().chain(b.byproduct.z.iter().map(shift_parity)).collect(),
    };
    let p = MeasurementPattern {
        name: format!("{}+{}", a.name, b.name),
        graph,
        inputs: a.inputs.iter().copied().chain(shift(&b.inputs)).collect(),
        outputs: a.outputs.iter().copied().chain(shift(&b.outputs)).collect(),
        plan,
        byproduct,
        unitary: match (&a.unitary, &b.unitary) {
            (Some(ua), Some(ub)) => Some(ua.kron(ub)),
            _ => None,
        },
    };
    p.validate()?;
    Ok(p)
}

/// Remove consecutive X-measured pairs `p–a–b–c` (with `a`, `b` of degree two
/// and neither an input nor an output) by joining `p` to `c`. Such a pair only
/// acts as a wire; its outcomes are fixed to 0 and references to them dropped.
/// Returns the reduced pattern and the removed pairs.
pub fn eliminate_wires(p: &MeasurementPattern) -> Result<(MeasurementPattern, Vec<(usize, usize)>)> {
    let mut graph = p.graph.clone();
    let mut removed: BTreeSet<usize> = BTreeSet::new();
    let mut pairs = Vec::new();
    let x_measured: BTreeSet<usize> =
        p.plan.iter().filter(|s| s.basis == StepBasis::X).map(|s| s.qubit).collect();
    let eligible = |q: usize, g: &Graph, removed: &BTreeSet<usize>| {
        !removed.contains(&q)
            && x_measured.contains(&q)
            && !p.inputs.contains(&q)
            && !p.outputs.contains(&q)
            && g.degree(q) == 2
    };
    loop {
        let found = graph.edges().find(|&(a, b)| {
            eligible(a, &graph, &removed) && eligible(b, &graph, &removed) && {
                let pa = graph.neighbors(a).into_iter().find(|&v| v != b);
                let cb = graph.neighbors(b).into_iter().find(|&v| v != a);
                matches!((pa, cb), (Some(x), Some(y)) if x != y && !graph.has_edge(x, y))
            }
        });
        let Some((a, b)) = found else { break };
        let x = graph.neighbors(a).into_iter().find(|&v| v != b).expect("degree two");
        let y = graph.neighbors(b).into_iter().find(|&v| v != a).expect("degree two");
        graph.remove_edge(x, a);
        graph.remove_edge(a, b);
        graph.remove_edge(b, y);
        graph.add_edge(x, y)?;
        removed.insert(a);
        removed.insert(b);
        pairs.push((a, b));
    }
    if pairs.is_empty() {
        return Ok((p.clone(), pairs));
    }
    let keep: Vec<usize> = (0..p.graph.len()).filter(|q| !removed.contains(q)).collect();
    let renum = |q: usize| keep.iter().position(|&k| k == q).expect("kept qubit");
    let mut g = Graph::new(keep.len());
    for (x, y) in graph.edges() {
        g.add_edge(renum(x), renum(y))?;
    }
    let strip = |par: &Parity| Parity {
        constant: par.constant,
        qubits: par.qubits.iter().filter(|q| !removed.contains(q)).map(|&q| renum(q)).collect(),
    };
    let plan = p
        .plan
        .iter()
        .filter(|s| !removed.contains(&s.qubit))
        .map(|s| PlanStep {
            qubit: renum(s.qubit),
            basis: s.basis,
            deps: s.deps.iter().filter(|q| !removed.contains(q)).map(|&q| renum(q)).collect(),
        })
        .collect();
    let out = MeasurementPattern {
        name: p.name.clone(),
        graph: g,
        inputs: p.inputs.iter().map(|&q| renum(q)).collect(),
        outputs: p.outputs.iter().map(|&q| renum(q)).collect(),
        plan,
        byproduct: ByproductRule {
            x: p.byproduct.x.iter().map(strip).collect(),
            z: p.byproduct.z.iter().map(strip).collect(),
        },
        unitary: p.unitary.clone(),
    };
    out.validate()?;
    Ok((out, pairs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct ResourceCount {
    pub total_qubits: usize,
    pub measured_qubits: usize,
    /// Number of logical qubits carried, `max(|inputs|, |outputs|)`.
    pub width: usize,
    /// Qubits along the longest shortest path from the inputs.
    pub length: usize,
}

pub fn resource_count(p: &MeasurementPattern) -> ResourceCount {
    let n = p.graph.len();
    let mut dist = vec![usize::MAX; n];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &q in &p.inputs {
        dist[q] = 0;
        queue.push_back(q);
    }
    while let Some(v) = queue.pop_front() {
        for w in p.graph.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    let far = dist.iter().filter(|&&d| d != usize::MAX).max().copied().unwrap_or(0);
    ResourceCount {
        total_qubits: n,
        measured_qubits: n - p.outputs.len(),
        width: p.inputs.len().max(p.outputs.len()),
        length: if n == 0 { 0 } else { far + 1 },
    }
}

fn parity_json(p: &Parity) -> Value {
    json!({ "constant": u8::from(p.constant), "outcomes": p.qubits.iter().map(|q| q + 1).collect::<Vec<_>>() })
}

impl MeasurementPattern {
    /// `{qubits, edges, inputs, outputs, plan, byproduct}` with 1-based qubits.
    pub fn to_json(&self) -> Value {
        let plan: Vec<Value> = self
            .plan
            .iter()
            .map(|s| {
                let mut v = json!({ "qubit": s.qubit + 1 });
                match s.basis {
                    StepBasis::X => v["basis"] = json!("X"),
                    StepBasis::Z => v["basis"] = json!("Z"),
                    StepBasis::Equatorial(a) => {
                        v["basis"] = json!("XY");
                        v["angle"] = json!(a);
                        v["deps"] = json!(s.deps.iter().map(|q| q + 1).collect::<Vec<_>>());
                    }
                }
                v
            })
            .collect();
        let byproduct: Vec<Value> = self
            .outputs
            .iter()
            .enumerate()
            .map(|(i, o)| {
                json!({ "qubit": o + 1, "x": parity_json(&self.byproduct.x[i]), "z": parity_json(&self.byproduct.z[i]) })
            })
            .collect();
        json!({
            "name": self.name,
            "qubits": self.graph.len(),
            "edges": self.graph.edges().map(|(a, b)| [a + 1, b + 1]).collect::<Vec<_>>(),
            "inputs": self.inputs.iter().map(|q| q + 1).collect::<Vec<_>>(),
            "outputs": self.outputs.iter().map(|q| q + 1).collect::<Vec<_>>(),
            "plan": plan,
            "byproduct": byproduct,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let err = |m: &str| Error::Parse(format!("pattern JSON: {m}"));
        let idx = |x: &Value| -> Result<usize> {
            x.as_u64().filter(|&q| q >= 1).map(|q| q as usize - 1).ok_or_else(|| err("qubits are positive integers"))
        };
        let list = |key: &str| -> Result<Vec<usize>> {
            v.get(key).and_then(Value::as_array).ok_or_else(|| err(&format!("missing {key}")))?.iter().map(idx).collect()
        };
        let n = v.get("qubits").and_then(Value::as_u64).ok_or_else(|| err("missing qubits"))? as usize;
        let mut graph = Graph::new(n);
        for e in v.get("edges").and_then(Value::as_array).ok_or_else(|| err("missing edges"))? {
            let pair = e.as_array().filter(|p| p.len() == 2).ok_or_else(|| err("edges are pairs"))?;
            graph.add_edge(idx(&pair[0])?, idx(&pair[1])?)?;
        }
        let mut plan = Vec::new();
        for s in v.get("plan").and_then(Value::as_array).ok_or_else(|| err("missing plan"))? {
            let qubit = idx(s.get("qubit").ok_or_else(|| err("step without qubit"))?)?;
            let basis = match s.get("basis").and_then(Value::as_str) {
                Some("X") => StepBasis::X,
                Some("Z") => StepBasis::Z,
                Some("XY") => {
                    let a = s.get("angle").and_then(Value::as_f64).ok_or_else(|| err("XY step needs an angle"))?;
                    check_angle(a)?;
                    StepBasis::Equatorial(a)
                }
                _ => return Err(err("basis must be X, Z or XY")),
            };
            let deps = match s.get("deps").and_then(Value::as_array) {
                Some(d) => d.iter().map(idx).collect::<Result<_>>()?,
                None => BTreeSet::new(),
            };
            plan.push(PlanStep { qubit, basis, deps });
        }
        let name = v.get("name").and_then(Value::as_str).unwrap_or("custom");
        let mut p = MeasurementPattern::new(name, graph, list("inputs")?, list("outputs")?, plan)?;
        if let Some(entries) = v.get("byproduct").and_then(Value::as_array) {
            let parity = |x: Option<&Value>| -> Result<Parity> {
                let x = x.ok_or_else(|| err("byproduct entry needs x and z"))?;
                Ok(Parity {
                    constant: x.get("constant").and_then(Value::as_u64).unwrap_or(0) == 1,
                    qubits: match x.get("outcomes").and_then(Value::as_array) {
                        Some(a) => a.iter().map(idx).collect::<Result<_>>()?,
                        None => BTreeSet::new(),
                    },
                })
            };
            if entries.len() != p.outputs.len() {
                return Err(err("one byproduct entry per output"));
            }
            for (i, e) in entries.iter().enumerate() {
                p.byproduct.x[i] = parity(e.get("x"))?;
                p.byproduct.z[i] = parity(e.get("z"))?;
            }
            p.validate()?;
        }
        Ok(p)
    }
}

impl fmt::Display for MeasurementPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one = |qs: &[usize]| qs.iter().map(|q| (q + 1).to_string()).collect::<Vec<_>>().join(",");
        writeln!(f, "pattern {} ({} qubits)", self.name, self.graph.len())?;
        let edges: Vec<String> = self.graph.edges().map(|(a, b)| format!("{}-{}", a + 1, b + 1)).collect();
        writeln!(f, "edges: {}", edges.join(" "))?;
        writeln!(f, "inputs: {}  outputs: {}", one(&self.inputs), one(&self.outputs))?;
        for s in &self.plan {
            match s.basis {
                StepBasis::X => writeln!(f, "  measure {} in X", s.qubit + 1)?,
                StepBasis::Z => writeln!(f, "  measure {} in Z", s.qubit + 1)?,
                StepBasis::Equatorial(a) => {
                    let deps: Vec<usize> = s.deps.iter().copied().collect();
                    if deps.is_empty() {
                        writeln!(f, "  measure {} at angle {a}", s.qubit + 1)?
                    } else {
                        writeln!(f, "  measure {} at angle {a} * (-1)^(j{})", s.qubit + 1, deps.iter().map(|q| (q + 1).to_string()).collect::<Vec<_>>().join("+j"))?
                    }
                }
            }
        }
        let term = |p: &Parity| {
            let mut t: Vec<String> = p.qubits.iter().map(|q| format!("j{}", q + 1)).collect();
            if p.constant {
                t.insert(0, "1".into());
            }
            if t.is_empty() {
                "0".to_string()
            } else {
                t.join("+")
            }
        };
        for (i, o) in self.outputs.iter().enumerate() {
            writeln!(f, "byproduct on {}: X^({}) Z^({})", o + 1, term(&self.byproduct.x[i]), term(&self.byproduct.z[i]))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn outcome_map(pairs: &[(usize, u8)]) -> BTreeMap<usize, u8> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn library_patterns_build() {
        for kind in [
            PatternKind::Wire,
            PatternKind::XRot(0.3),
            PatternKind::ZRot(1.1),
            PatternKind::Euler(0.2, 0.5, 0.9),
            PatternKind::Cnot6,
            PatternKind::CnotSquare,
            PatternKind::RemoteCz,
        ] {
            let p = build_pattern(kind).unwrap();
            p.validate().unwrap();
        }
    }

    #[test]
    fn xrot_sign_rule() {
        let p = build_pattern(PatternKind::XRot(0.4)).unwrap();
        let step = &p.plan[1];
        assert_eq!(step.resolve(&outcome_map(&[(0, 0)])), Basis::Equatorial(-0.4));
        assert_eq!(step.resolve(&outcome_map(&[(0, 1)])), Basis::Equatorial(0.4));
    }

    #[test]
    fn wrong_unitary_has_no_fit() {
        let p = build_pattern(PatternKind::XRot(PI / 4.0)).unwrap();
        assert!(matches!(
            derive_byproduct_rule(&p, &Matrix::uz(PI / 4.0), DEFAULT_TOLERANCE),
            Err(Error::NoByproductFit(_))
        ));
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("euler:1,2,3".parse::<PatternKind>().unwrap(), PatternKind::Euler(1.0, 2.0, 3.0));
        assert!("xrot".parse::<PatternKind>().is_err());
        assert!("wire:1".parse::<PatternKind>().is_err());
        assert!(matches!("spiral".parse::<PatternKind>(), Err(Error::Pattern(_))));
    }

    #[test]
    fn invalid_patterns_are_rejected() {
        let g = Graph::path(3);
        assert!(MeasurementPattern::new("x", g.clone(), vec![0], vec![2], vec![PlanStep::x(0)]).is_err());
        assert!(MeasurementPattern::new("x", g.clone(), vec![0], vec![2], vec![PlanStep::x(0), PlanStep::x(2)]).is_err());
        let late = vec![PlanStep::equatorial(0, 0.1, &[1]), PlanStep::x(1)];
        assert!(MeasurementPattern::new("x", g, vec![0], vec![2], late).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = build_pattern(PatternKind::Euler(0.1, 0.2, 0.3)).unwrap();
        let q = MeasurementPattern::from_json(&p.to_json()).unwrap();
        assert_eq!(q.plan, p.plan);
        assert_eq!(q.byproduct, p.byproduct);
        assert_eq!(q.graph, p.graph);
    }
}
