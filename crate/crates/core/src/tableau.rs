//! Stabilizer tableau with destabilizers and tracked logical operators.
//!
//! The tableau holds `k ≤ n` commuting, independent stabilizer generators.
//! With `k = n` it describes a pure stabilizer state; with `k < n` the
//! remaining degrees of freedom carry unspecified input data, described by the
//! tracked logical operators. Each generator is paired with a destabilizer
//! that anticommutes with it and commutes with every other generator, which
//! makes deterministic outcomes computable in `O(n²)`.
//!
//! Measuring an observable `M` that anticommutes with some generators replaces
//! the first such generator `g_p` with `±M`; every other anticommuting
//! generator, destabilizer and tracked operator is multiplied by `g_p`, and
//! `g_p` becomes the new destabilizer `p`.

use std::fmt;

use crate::error::{check_qubit, Error, Result};
use crate::gf2;
use crate::graph::Graph;
use crate::pauli::{CliffordGate, Pauli, PauliString};
use crate::policy::OutcomePolicy;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrackedOperator {
    pub name: String,
    pub op: PauliString,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerTableau {
    n: usize,
    stabilizers: Vec<PauliString>,
    destabilizers: Vec<PauliString>,
    tracked: Vec<TrackedOperator>,
}

impl StabilizerTableau {
    /// `|0…0⟩`.
    pub fn zero_state(n: usize) -> Self {
        StabilizerTableau {
            n,
            stabilizers: (0..n).map(|q| PauliString::single(n, q, Pauli::Z)).collect(),
            destabilizers: (0..n).map(|q| PauliString::single(n, q, Pauli::X)).collect(),
            tracked: Vec::new(),
        }
    }

    /// `|+…+⟩`.
    pub fn plus_state(n: usize) -> Self {
        StabilizerTableau {
            n,
            stabilizers: (0..n).map(|q| PauliString::single(n, q, Pauli::X)).collect(),
            destabilizers: (0..n).map(|q| PauliString::single(n, q, Pauli::Z)).collect(),
            tracked: Vec::new(),
        }
    }

    /// Graph state: generator `i` is `X_i ∏_{j ∈ nbhd(i)} Z_j`, destabilizer `Z_i`.
    pub fn from_graph(g: &Graph) -> Result<Self> {
        let n = g.len();
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let stabilizers = (0..n)
            .map(|v| {
                let mut s = PauliString::single(n, v, Pauli::X);
                for w in g.neighbors(v) {
                    s.set(w, Pauli::Z);
                }
                s
            })
            .collect();
        Ok(StabilizerTableau {
            n,
            stabilizers,
            destabilizers: (0..n).map(|q| PauliString::single(n, q, Pauli::Z)).collect(),
            tracked: Vec::new(),
        })
    }

    /// Build from an arbitrary list of commuting, independent Hermitian
    /// generators; destabilizers are constructed.
    pub fn from_generators(n: usize, generators: Vec<PauliString>) -> Result<Self> {
        for g in &generators {
            if g.len() != n {
                return Err(Error::Dimension { expected: n, got: g.len() });
            }
            if g.sign().is_none() {
                return Err(Error::NonHermitianObservable(g.to_string()));
            }
        }
        for (i, a) in generators.iter().enumerate() {
            for b in &generators[i + 1..] {
                if !a.commutes_unchecked(b) {
                    return Err(Error::InvalidGraph(format!("generators {a} and {b} anticommute")));
                }
            }
        }
        if gf2::rank(&generators.iter().map(symplectic).collect::<Vec<_>>()) != generators.len() {
            return Err(Error::InvalidGraph("generators are not independent".into()));
        }
        let destabilizers = build_destabilizers(n, &generators);
        Ok(StabilizerTableau { n, stabilizers: generators, destabilizers, tracked: Vec::new() })
    }

    pub fn with_tracked(mut self, name: &str, op: PauliString) -> Result<Self> {
        self.track(name, op)?;
        Ok(self)
    }

    pub fn track(&mut self, name: &str, op: PauliString) -> Result<()> {
        if op.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: op.len() });
        }
        self.tracked.push(TrackedOperator { name: name.to_string(), op });
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.stabilizers
    }

    pub fn destabilizers(&self) -> &[PauliString] {
        &self.destabilizers
    }

    pub fn tracked(&self) -> &[TrackedOperator] {
        &self.tracked
    }

    pub fn tracked_op(&self, name: &str) -> Option<&PauliString> {
        self.tracked.iter().find(|t| t.name == name).map(|t| &t.op)
    }

    pub fn is_pure(&self) -> bool {
        self.stabilizers.len() == self.n
    }

    pub fn apply(&mut self, gate: &CliffordGate) -> Result<()> {
        gate.check(self.n)?;
        for row in self.stabilizers.iter_mut().chain(self.destabilizers.iter_mut()) {
            row.conjugate_in_place(gate)?;
        }
        for t in &mut self.tracked {
            t.op.conjugate_in_place(gate)?;
        }
        Ok(())
    }

    /// Conjugate by a Pauli operator (flips the sign of anticommuting rows).
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        if p.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: p.len() });
        }
        for row in self.stabilizers.iter_mut().chain(self.destabilizers.iter_mut()) {
            if !row.commutes_unchecked(p) {
                *row = row.clone().negated();
            }
        }
        for t in &mut self.tracked {
            if !t.op.commutes_unchecked(p) {
                t.op = t.op.clone().negated();
            }
        }
        Ok(())
    }

    fn check_observable(&self, obs: &PauliString) -> Result<()> {
        if obs.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: obs.len() });
        }
        if obs.phase() != 0 {
            return Err(Error::NonHermitianObservable(obs.to_string()));
        }
        Ok(())
    }

    /// `Some(±1)` when `obs` (phase +1) or its negation is in the stabilizer
    /// group, using the destabilizer decomposition.
    pub fn expectation(&self, obs: &PauliString) -> Result<Option<i8>> {
        self.check_observable(obs)?;
        if self.stabilizers.iter().any(|s| !s.commutes_unchecked(obs)) {
            return Ok(None);
        }
        let mut acc = PauliString::identity(self.n);
        for (d, s) in self.destabilizers.iter().zip(&self.stabilizers) {
            if !d.commutes_unchecked(obs) {
                acc.mul_assign_unchecked(s);
            }
        }
        if acc.same_letters(obs) {
            Ok(acc.sign())
        } else {
            Ok(None)
        }
    }

    /// Measure a Hermitian Pauli observable with phase `+1`. Outcome `0`
    /// corresponds to eigenvalue `+1`.
    pub fn measure(&mut self, obs: &PauliString, policy: &mut OutcomePolicy) -> Result<u8> {
        self.check_observable(obs)?;
        let Some(p) = self.stabilizers.iter().position(|s| !s.commutes_unchecked(obs)) else {
            return match self.expectation(obs)? {
                Some(1) => Ok(0),
                Some(_) => Ok(1),
                None => Err(Error::IndeterminateLogical(obs.to_string())),
            };
        };
        let outcome = policy.draw_fair()?;
        let retired = self.stabilizers[p].clone();
        for (i, s) in self.stabilizers.iter_mut().enumerate() {
            if i != p && !s.commutes_unchecked(obs) {
                s.mul_assign_unchecked(&retired);
            }
        }
        for (i, d) in self.destabilizers.iter_mut().enumerate() {
            if i != p && !d.commutes_unchecked(obs) {
                d.mul_assign_unchecked(&retired);
            }
        }
        for t in &mut self.tracked {
            if !t.op.commutes_unchecked(obs) {
                t.op.mul_assign_unchecked(&retired);
            }
        }
        self.destabilizers[p] = retired;
        self.stabilizers[p] = if outcome == 1 { obs.clone().negated() } else { obs.clone() };
        Ok(outcome)
    }

    /// Group membership by linear algebra; works for any `k`. Returns the sign
    /// with which `obs` (phase +1) belongs to the group.
    pub fn contains(&self, obs: &PauliString) -> Result<Option<i8>> {
        self.check_observable(obs)?;
        let Some(sel) = self.decompose(obs) else { return Ok(None) };
        let mut acc = PauliString::identity(self.n);
        for (s, take) in self.stabilizers.iter().zip(sel) {
            if take {
                acc.mul_assign_unchecked(s);
            }
        }
        Ok(acc.sign())
    }

    fn decompose(&self, obs: &PauliString) -> Option<Vec<bool>> {
        let columns: Vec<Vec<bool>> = self.stabilizers.iter().map(symplectic).collect();
        gf2::solve(&columns, &symplectic(obs))
    }

    /// Same stabilizer group, signs included.
    pub fn same_group(&self, other: &StabilizerTableau) -> bool {
        self.n == other.n
            && self.stabilizers.len() == other.stabilizers.len()
            && other.stabilizers.iter().all(|g| {
                let bare = g.clone().with_phase(0);
                matches!(self.contains(&bare), Ok(Some(s)) if Some(s) == g.sign())
            })
    }

    /// Multiply each tracked operator by stabilizers so that it acts as the
    /// identity on `qubits`, where such a representative exists.
    pub fn reduce_tracked(&mut self, qubits: &[usize]) {
        let columns: Vec<Vec<bool>> = self.stabilizers.iter().map(|s| restricted_symplectic(s, qubits)).collect();
        for t in &mut self.tracked {
            let rhs = restricted_symplectic(&t.op, qubits);
            if let Some(sel) = gf2::solve(&columns, &rhs) {
                for (s, take) in self.stabilizers.iter().zip(sel) {
                    if take {
                        t.op.mul_assign_unchecked(s);
                    }
                }
            }
        }
    }

    /// Remove qubit `q`, which must be in a single-qubit eigenstate.
    pub fn remove_qubit(&self, q: usize) -> Result<StabilizerTableau> {
        check_qubit(q, self.n)?;
        let local = [Pauli::Z, Pauli::X, Pauli::Y]
            .into_iter()
            .find_map(|p| {
                let op = PauliString::single(self.n, q, p);
                match self.contains(&op) {
                    Ok(Some(s)) => Some(if s == 1 { op } else { op.negated() }),
                    _ => None,
                }
            })
            .ok_or(Error::NotProductQubit(q))?;
        let letter = local.get(q);
        let keep: Vec<usize> = (0..self.n).filter(|&i| i != q).collect();
        let clear = |op: &PauliString| -> PauliString {
            let mut op = op.clone();
            if op.get(q) == letter {
                op.mul_assign_unchecked(&local);
            }
            op
        };
        let mut stabilizers: Vec<PauliString> = Vec::new();
        let mut vecs: Vec<Vec<bool>> = Vec::new();
        for s in &self.stabilizers {
            let c = clear(s);
            if c.get(q) != Pauli::I {
                return Err(Error::NotProductQubit(q));
            }
            let r = c.restrict(&keep);
            if r.weight() == 0 {
                continue;
            }
            vecs.push(symplectic(&r));
            if gf2::rank(&vecs) < vecs.len() {
                vecs.pop();
                continue;
            }
            stabilizers.push(r);
        }
        let tracked = self
            .tracked
            .iter()
            .map(|t| TrackedOperator { name: t.name.clone(), op: clear(&t.op).restrict(&keep) })
            .collect();
        let destabilizers = build_destabilizers(self.n - 1, &stabilizers);
        Ok(StabilizerTableau { n: self.n - 1, stabilizers, destabilizers, tracked })
    }

    /// Checks the structural invariants: commuting, independent generators and
    /// the destabilizer pairing.
    pub fn validate(&self) -> Result<()> {
        let k = self.stabilizers.len();
        for i in 0..k {
            for j in 0..k {
                if i < j && !self.stabilizers[i].commutes_unchecked(&self.stabilizers[j]) {
                    return Err(Error::InvalidGraph(format!("stabilizers {i} and {j} anticommute")));
                }
                let anti = !self.destabilizers[i].commutes_unchecked(&self.stabilizers[j]);
                if anti != (i == j) {
                    return Err(Error::InvalidGraph(format!("destabilizer {i} pairs wrongly with stabilizer {j}")));
                }
            }
            if self.stabilizers[i].sign().is_none() {
                return Err(Error::NonHermitianObservable(self.stabilizers[i].to_string()));
            }
        }
        if gf2::rank(&self.stabilizers.iter().map(symplectic).collect::<Vec<_>>()) != k {
            return Err(Error::InvalidGraph("stabilizers are dependent".into()));
        }
        Ok(())
    }

    /// Text layout: `S:` followed by one signed generator per line, then
    /// `tracked:` with `name: ±letters` lines.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for StabilizerTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "S:")?;
        for s in &self.stabilizers {
            writeln!(f, "{s}")?;
        }
        if !self.tracked.is_empty() {
            writeln!(f, "tracked:")?;
            for t in &self.tracked {
                writeln!(f, "{}: {}", t.name, t.op)?;
            }
        }
        Ok(())
    }
}

/// `(x | z)` bits of a Pauli string.
fn symplectic(p: &PauliString) -> Vec<bool> {
    p.x_bits().iter().chain(p.z_bits()).copied().collect()
}

fn restricted_symplectic(p: &PauliString, qubits: &[usize]) -> Vec<bool> {
    let r = p.restrict(qubits);
    symplectic(&r)
}

/// Destabilizers for commuting independent generators by solving the pairing
/// conditions over GF(2), then symplectic Gram–Schmidt so they commute.
fn build_destabilizers(n: usize, generators: &[PauliString]) -> Vec<PauliString> {
    let k = generators.len();
    // unknown d = (dx | dz); ⟨d, s_j⟩ = Σ dx·s_j.z + dz·s_j.x
    let columns: Vec<Vec<bool>> = (0..2 * n)
        .map(|u| {
            generators
                .iter()
                .map(|s| if u < n { s.z_bits()[u] } else { s.x_bits()[u - n] })
                .collect()
        })
        .collect();
    let mut out: Vec<PauliString> = Vec::with_capacity(k);
    for i in 0..k {
        let rhs: Vec<bool> = (0..k).map(|j| j == i).collect();
        let sol = gf2::solve(&columns, &rhs).expect("independent generators admit destabilizers");
        let letters: Vec<Pauli> = (0..n).map(|q| Pauli::from_bits(sol[q], sol[n + q])).collect();
        let mut d = PauliString::from_letters(&letters);
        for j in 0..i {
            if !d.commutes_unchecked(&out[j]) {
                d.mul_assign_unchecked(&generators[j]);
            }
        }
        out.push(d.with_phase(0));
    }
    out
}

/// Pure-function form: measure and return the updated tableau.
pub fn measure_pauli(
    t: &StabilizerTableau,
    obs: &PauliString,
    policy: &mut OutcomePolicy,
) -> Result<(u8, StabilizerTableau)> {
    let mut t = t.clone();
    let bit = t.measure(obs, policy)?;
    Ok((bit, t))
}

pub fn tableau_from_graph(g: &Graph) -> Result<StabilizerTableau> {
    StabilizerTableau::from_graph(g)
}

/// Measure `Z_q` on a graph-state tableau and delete the qubit. Returns the
/// outcome, the tableau on the remaining `n-1` qubits, and the correction
/// (`Z` on each former neighbour when the outcome is 1) that maps it to the
/// graph state of the graph with `q` removed.
pub fn delete_qubit_z(
    t: &StabilizerTableau,
    q: usize,
    policy: &mut OutcomePolicy,
) -> Result<(u8, StabilizerTableau, PauliString)> {
    check_qubit(q, t.n)?;
    if !t.is_pure() {
        return Err(Error::NotGraphState("tableau is not a pure state".into()));
    }
    let centre = t
        .stabilizers
        .iter()
        .find(|s| s.get(q) == Pauli::X)
        .ok_or_else(|| Error::NotGraphState(format!("no generator centred on qubit {q}")))?;
    for s in &t.stabilizers {
        let xs = s.letters().iter().filter(|&&p| p == Pauli::X).count();
        let ys = s.letters().iter().filter(|&&p| p == Pauli::Y).count();
        if xs != 1 || ys != 0 {
            return Err(Error::NotGraphState(format!("generator {s} is not of the form X ⊗ Z…")));
        }
    }
    let neighbours: Vec<usize> = centre.support().into_iter().filter(|&w| w != q).collect();
    let mut t = t.clone();
    let outcome = t.measure(&PauliString::single(t.n, q, Pauli::Z), policy)?;
    let reduced = t.remove_qubit(q)?;
    let mut correction = PauliString::identity(t.n - 1);
    if outcome == 1 {
        for w in neighbours {
            correction.set(if w > q { w - 1 } else { w }, Pauli::Z);
        }
    }
    Ok((outcome, reduced, correction))
}
