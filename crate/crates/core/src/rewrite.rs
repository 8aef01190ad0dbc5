//! Rewrite rules over [`Circuit`] and the fixed traces that carry 1WQC
//! patterns to teleportation form and back.
//!
//! Every rule application returns the rule that undoes it, so a trace can be
//! replayed backwards to the byte.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::circuit::{pattern_circuit, verify_equivalence, Angle, BoxTag, Circuit, EquivalenceReport, Gate, MeasBasis, Op, PrepState};
use crate::error::{Error, Result};
use crate::pattern::{build_pattern, spanning_inputs, PatternKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleId {
    InsertHh,
    CancelHh,
    CzCnotIdentity,
    BellTranspose,
    CommuteCnotCz,
    CnotOnPlusPlus,
    EquatorialToUzX,
    CommuteUzCz,
    CommuteDisjoint,
    BoxBellPrep,
    BoxBellMeas,
    BoxGeneralizedBell,
}

impl RuleId {
    pub const ALL: [RuleId; 12] = [
        RuleId::InsertHh,
        RuleId::CancelHh,
        RuleId::CzCnotIdentity,
        RuleId::BellTranspose,
        RuleId::CommuteCnotCz,
        RuleId::CnotOnPlusPlus,
        RuleId::EquatorialToUzX,
        RuleId::CommuteUzCz,
        RuleId::CommuteDisjoint,
        RuleId::BoxBellPrep,
        RuleId::BoxBellMeas,
        RuleId::BoxGeneralizedBell,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::InsertHh => "insert_hh",
            RuleId::CancelHh => "cancel_hh",
            RuleId::CzCnotIdentity => "cz_cnot_identity",
            RuleId::BellTranspose => "bell_transpose",
            RuleId::CommuteCnotCz => "commute_cnot_cz",
            RuleId::CnotOnPlusPlus => "cnot_on_plus_plus",
            RuleId::EquatorialToUzX => "equatorial_to_uz_x",
            RuleId::CommuteUzCz => "commute_uz_cz",
            RuleId::CommuteDisjoint => "commute_disjoint",
            RuleId::BoxBellPrep => "box_bell_prep",
            RuleId::BoxBellMeas => "box_bell_meas",
            RuleId::BoxGeneralizedBell => "box_generalized_bell",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RuleId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        RuleId::ALL.into_iter().find(|r| r.name() == s).ok_or_else(|| Error::Parse(format!("unknown rule {s:?}")))
    }
}

/// A rule applied at top-level op index `site`. `reverse` runs the rule
/// right to left; `args` carries whatever the reverse direction cannot read
/// off the circuit (the wire for `insert_hh`, the form of `commute_cnot_cz`,
/// the pair for `cnot_on_plus_plus`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewriteRule {
    pub id: RuleId,
    pub site: usize,
    #[serde(default)]
    pub reverse: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<usize>,
}

impl RewriteRule {
    pub fn at(id: RuleId, site: usize) -> Self {
        RewriteRule { id, site, reverse: false, args: Vec::new() }
    }

    pub fn rev(id: RuleId, site: usize) -> Self {
        RewriteRule { id, site, reverse: true, args: Vec::new() }
    }

    pub fn insert_hh(site: usize, wire: usize) -> Self {
        RewriteRule { id: RuleId::InsertHh, site, reverse: false, args: vec![wire] }
    }

    /// Human-readable label such as `box_bell_prep@0` or `~box_bell_meas@3`.
    pub fn label(&self) -> String {
        format!("{}{}@{}", if self.reverse { "~" } else { "" }, self.id, self.site)
    }
}

fn mismatch(rule: &RewriteRule, reason: impl Into<String>) -> Error {
    Error::RuleMismatch { rule: rule.id.name().to_string(), site: rule.site.to_string(), reason: reason.into() }
}

/// Apply `rule` and return the rewritten circuit together with the rule that
/// restores the input.
pub fn apply_rule(c: &Circuit, rule: &RewriteRule) -> Result<(Circuit, RewriteRule)> {
    let s = rule.site;
    let ops = &c.ops;
    let get = |i: usize| ops.get(i).ok_or_else(|| mismatch(rule, format!("no op at {i}")));
    let gate = |i: usize| -> Result<&Gate> {
        match get(i)? {
            Op::Gate(g) => Ok(g),
            other => Err(mismatch(rule, format!("op {i} is not a gate: {other:?}"))),
        }
    };
    let inv = |id: RuleId, reverse: bool, args: Vec<usize>| RewriteRule { id, site: s, reverse, args };

    let (replace_len, replacement, inverse): (usize, Vec<Op>, RewriteRule) = match (rule.id, rule.reverse) {
        (RuleId::InsertHh, false) => {
            let &[w] = rule.args.as_slice() else {
                return Err(mismatch(rule, "insert_hh needs one wire"));
            };
            if s > ops.len() {
                return Err(mismatch(rule, "site past the end"));
            }
            (0, vec![Op::Gate(Gate::H(w)), Op::Gate(Gate::H(w))], inv(RuleId::CancelHh, false, vec![]))
        }
        (RuleId::CancelHh, false) => match (gate(s)?, gate(s + 1)?) {
            (Gate::H(a), Gate::H(b)) if a == b => (2, vec![], inv(RuleId::InsertHh, false, vec![*a])),
            _ => return Err(mismatch(rule, "expected H, H on one wire")),
        },
        (RuleId::InsertHh | RuleId::CancelHh, true) => {
            return Err(mismatch(rule, "use the named inverse instead of reverse"));
        }
        (RuleId::CzCnotIdentity, false) => match gate(s)? {
            Gate::Cz(a, b) => (
                1,
                vec![Op::Gate(Gate::H(*b)), Op::Gate(Gate::Cnot(*a, *b)), Op::Gate(Gate::H(*b))],
                inv(rule.id, true, vec![]),
            ),
            _ => return Err(mismatch(rule, "expected CZ")),
        },
        (RuleId::CzCnotIdentity, true) => match (gate(s)?, gate(s + 1)?, gate(s + 2)?) {
            (Gate::H(h1), Gate::Cnot(a, b), Gate::H(h2)) if h1 == b && h2 == b => {
                (3, vec![Op::Gate(Gate::Cz(*a, *b))], inv(rule.id, false, vec![]))
            }
            _ => return Err(mismatch(rule, "expected H_t, CNOT, H_t")),
        },
        (RuleId::BellTranspose, rev) => bell_transpose(c, rule, rev)?,
        (RuleId::CommuteCnotCz, false) => {
            let (Gate::Cz(x, y), Gate::Cnot(ctl, tgt)) = (gate(s)?, gate(s + 1)?) else {
                return Err(mismatch(rule, "expected CZ then CNOT"));
            };
            let (x, y, ctl, tgt) = (*x, *y, *ctl, *tgt);
            let on_c = x == ctl || y == ctl;
            let on_t = x == tgt || y == tgt;
            match (on_c, on_t) {
                (true, false) | (false, false) => {
                    (2, vec![get(s + 1)?.clone(), get(s)?.clone()], inv(rule.id, true, vec![]))
                }
                (false, true) => {
                    let other = if x == tgt { y } else { x };
                    let emitted = Op::Gate(Gate::Cz(other, ctl));
                    (2, vec![get(s + 1)?.clone(), emitted, get(s)?.clone()], inv(rule.id, true, vec![other]))
                }
                (true, true) => return Err(mismatch(rule, "CZ on both CNOT wires")),
            }
        }
        (RuleId::CommuteCnotCz, true) => {
            let Gate::Cnot(ctl, tgt) = gate(s)? else {
                return Err(mismatch(rule, "expected CNOT first"));
            };
            match rule.args.as_slice() {
                [] => match gate(s + 1)? {
                    Gate::Cz(x, y) if !(x == tgt || y == tgt) => {
                        (2, vec![get(s + 1)?.clone(), get(s)?.clone()], inv(rule.id, false, vec![]))
                    }
                    _ => return Err(mismatch(rule, "expected CZ off the target")),
                },
                &[other] => {
                    let emitted = Gate::Cz(other, *ctl);
                    if gate(s + 1)? != &emitted {
                        return Err(mismatch(rule, format!("expected {emitted}")));
                    }
                    match gate(s + 2)? {
                        Gate::Cz(x, y) if (*x == other && y == tgt) || (x == tgt && *y == other) => {
                            (3, vec![get(s + 2)?.clone(), get(s)?.clone()], inv(rule.id, false, vec![]))
                        }
                        _ => return Err(mismatch(rule, "expected CZ on the target")),
                    }
                }
                _ => return Err(mismatch(rule, "bad args")),
            }
        }
        (RuleId::CnotOnPlusPlus, false) => {
            let (Op::Prep { wire: p1, state: PrepState::Plus }, Op::Prep { wire: p2, state: PrepState::Plus }) =
                (get(s)?, get(s + 1)?)
            else {
                return Err(mismatch(rule, "expected two |+> preparations"));
            };
            match gate(s + 2)? {
                Gate::Cnot(ctl, tgt) if [*p1, *p2] == [*ctl, *tgt] || [*p2, *p1] == [*ctl, *tgt] => (
                    3,
                    vec![get(s)?.clone(), get(s + 1)?.clone()],
                    inv(rule.id, true, vec![*ctl, *tgt]),
                ),
                _ => return Err(mismatch(rule, "expected CNOT on the prepared pair")),
            }
        }
        (RuleId::CnotOnPlusPlus, true) => {
            let &[ctl, tgt] = rule.args.as_slice() else {
                return Err(mismatch(rule, "needs control and target"));
            };
            let plus = |op: &Op, w: usize| matches!(op, Op::Prep { wire, state: PrepState::Plus } if *wire == w);
            let (a, b) = (get(s)?, get(s + 1)?);
            if !((plus(a, ctl) && plus(b, tgt)) || (plus(a, tgt) && plus(b, ctl))) {
                return Err(mismatch(rule, "expected |+> on both wires"));
            }
            (2, vec![a.clone(), b.clone(), Op::Gate(Gate::Cnot(ctl, tgt))], inv(rule.id, false, vec![]))
        }
        (RuleId::EquatorialToUzX, false) => match get(s)? {
            Op::Measure { wire, basis: MeasBasis::Equatorial(a), label } => (
                1,
                vec![Op::Gate(Gate::Uz(*wire, a.negated())), Op::mx(*wire, label)],
                inv(rule.id, true, vec![]),
            ),
            _ => return Err(mismatch(rule, "expected an equatorial measurement")),
        },
        (RuleId::EquatorialToUzX, true) => match (gate(s)?, get(s + 1)?) {
            (Gate::Uz(q, a), Op::Measure { wire, basis: MeasBasis::X, label }) if q == wire => (
                2,
                vec![Op::Measure { wire: *wire, basis: MeasBasis::Equatorial(a.negated()), label: label.clone() }],
                inv(rule.id, false, vec![]),
            ),
            _ => return Err(mismatch(rule, "expected Uz then X measurement on one wire")),
        },
        (RuleId::CommuteUzCz, rev) => {
            // forward moves Uz earlier: [CZ, Uz] -> [Uz, CZ]
            let (cz, uz) = if rev { (gate(s + 1)?, gate(s)?) } else { (gate(s)?, gate(s + 1)?) };
            match (cz, uz) {
                (Gate::Cz(..), Gate::Uz(..)) => {}
                _ => return Err(mismatch(rule, "expected CZ and Uz")),
            }
            (2, vec![get(s + 1)?.clone(), get(s)?.clone()], inv(rule.id, !rev, vec![]))
        }
        (RuleId::CommuteDisjoint, _) => {
            let (a, b) = (get(s)?, get(s + 1)?);
            if !a.wires().is_disjoint(&b.wires()) {
                return Err(mismatch(rule, "ops share a wire"));
            }
            if !a.writes().is_disjoint(&b.reads()) || !b.writes().is_disjoint(&a.reads()) {
                return Err(mismatch(rule, "classical dependency between the ops"));
            }
            (2, vec![b.clone(), a.clone()], inv(rule.id, false, vec![]))
        }
        (RuleId::BoxBellPrep, false) => {
            let pair = match (get(s)?, get(s + 1)?, gate(s + 2)?, gate(s + 3)?) {
                (
                    Op::Prep { wire: a, state: PrepState::Plus },
                    Op::Prep { wire: b, state: PrepState::Plus },
                    Gate::Cz(x, y),
                    Gate::H(h),
                ) if ((x, y) == (a, b) || (x, y) == (b, a)) && h == a => (*a, *b),
                _ => return Err(mismatch(rule, "expected |+>_a |+>_b CZ H_a")),
            };
            let tag = BoxTag::BellPrep { a: pair.0, b: pair.1 };
            (4, vec![Op::Box { tag, ops: ops[s..s + 4].to_vec() }], inv(rule.id, true, vec![]))
        }
        (RuleId::BoxBellMeas, false) => {
            let pair = match (gate(s)?, gate(s + 1)?, get(s + 2)?, get(s + 3)?) {
                (
                    Gate::H(h),
                    Gate::Cz(x, y),
                    Op::Measure { wire: a, basis: MeasBasis::X, .. },
                    Op::Measure { wire: b, basis: MeasBasis::X, .. },
                ) if h == b && ((x, y) == (a, b) || (x, y) == (b, a)) => (*a, *b),
                _ => return Err(mismatch(rule, "expected H_b CZ MX_a MX_b")),
            };
            let tag = BoxTag::BellMeas { a: pair.0, b: pair.1 };
            (4, vec![Op::Box { tag, ops: ops[s..s + 4].to_vec() }], inv(rule.id, true, vec![]))
        }
        (RuleId::BoxGeneralizedBell, false) => {
            let rotation = gate(s)?.clone();
            let (q, constant) = match &rotation {
                Gate::Ux(q, a) | Gate::Uz(q, a) => (*q, a.is_constant()),
                _ => return Err(mismatch(rule, "expected a rotation")),
            };
            match get(s + 1)? {
                Op::Box { tag: BoxTag::BellMeas { a, b }, .. } if *a == q && constant => {
                    let tag = BoxTag::GeneralizedBell { a: *a, b: *b, rotation };
                    (2, vec![Op::Box { tag, ops: ops[s..s + 2].to_vec() }], inv(rule.id, true, vec![]))
                }
                _ => return Err(mismatch(rule, "expected a Bell measurement on the rotated wire")),
            }
        }
        (RuleId::BoxBellPrep | RuleId::BoxBellMeas | RuleId::BoxGeneralizedBell, true) => match get(s)? {
            Op::Box { tag, ops: inner } if box_rule(tag) == rule.id => {
                (1, inner.clone(), inv(rule.id, false, vec![]))
            }
            _ => return Err(mismatch(rule, "expected a matching box")),
        },
    };

    let mut out = c.ops[..s].to_vec();
    out.extend(replacement);
    out.extend_from_slice(&c.ops[s + replace_len..]);
    let next = Circuit { n: c.n, inputs: c.inputs.clone(), ops: out };
    next.validate().map_err(|e| mismatch(rule, format!("result is ill-typed: {e}")))?;
    Ok((next, inverse))
}

fn box_rule(tag: &BoxTag) -> RuleId {
    match tag {
        BoxTag::BellPrep { .. } => RuleId::BoxBellPrep,
        BoxTag::BellMeas { .. } => RuleId::BoxBellMeas,
        BoxTag::GeneralizedBell { .. } => RuleId::BoxGeneralizedBell,
    }
}

/// Two forms. On a Bell preparation: `[prep(a,b), G_a] <-> [prep(a,b), Gᵀ_b]`
/// (every gate in the IR is its own transpose). Across a Bell measurement:
/// `[H_b, CZ(a,b), MX_a -> j, Uz_b((−1)^j φ)] -> [Ux_a(φ), H_b, CZ(a,b), MX_a]`,
/// which holds because after the `X_a` measurement `(−1)^j Z_b` acts as
/// `X_a Z_b`, the image of `X_a` under the CZ.
fn bell_transpose(c: &Circuit, rule: &RewriteRule, rev: bool) -> Result<(usize, Vec<Op>, RewriteRule)> {
    let s = rule.site;
    let ops = &c.ops;
    let get = |i: usize| ops.get(i).ok_or_else(|| mismatch(rule, format!("no op at {i}")));
    let back = RewriteRule { id: rule.id, site: s, reverse: !rev, args: vec![] };
    if let Op::Box { tag: BoxTag::BellPrep { a, b }, .. } = get(s)? {
        let (from, to) = if rev { (*b, *a) } else { (*a, *b) };
        let moved = match get(s + 1)? {
            Op::Gate(g) if g.wires() == [from] && g.angle().is_none_or(Angle::is_constant) => retarget(g, to),
            _ => return Err(mismatch(rule, format!("expected a one-qubit gate on q{from}"))),
        };
        return Ok((2, vec![get(s)?.clone(), Op::Gate(moved)], back));
    }
    if !rev {
        match (get(s)?, get(s + 1)?, get(s + 2)?, get(s + 3)?) {
            (
                Op::Gate(Gate::H(h)),
                Op::Gate(Gate::Cz(x, y)),
                Op::Measure { wire: a, basis: MeasBasis::X, label },
                Op::Gate(Gate::Uz(q, ang)),
            ) if q == h && ((x, y) == (a, q) || (x, y) == (q, a)) && ang.deps == [label.clone()] => {
                let ux = Op::Gate(Gate::Ux(*a, Angle::constant(ang.value)));
                Ok((4, vec![ux, get(s)?.clone(), get(s + 1)?.clone(), get(s + 2)?.clone()], back))
            }
            _ => Err(mismatch(rule, "expected H_b CZ MX_a Uz_b((-1)^a phi)")),
        }
    } else {
        match (get(s)?, get(s + 1)?, get(s + 2)?, get(s + 3)?) {
            (
                Op::Gate(Gate::Ux(q, ang)),
                Op::Gate(Gate::H(h)),
                Op::Gate(Gate::Cz(x, y)),
                Op::Measure { wire: a, basis: MeasBasis::X, label },
            ) if q == a && ang.is_constant() && ((x, y) == (a, h) || (x, y) == (h, a)) => {
                let uz = Op::Gate(Gate::Uz(*h, Angle { value: ang.value, deps: vec![label.clone()] }));
                Ok((4, vec![get(s + 1)?.clone(), get(s + 2)?.clone(), get(s + 3)?.clone(), uz], back))
            }
            _ => Err(mismatch(rule, "expected Ux_a H_b CZ MX_a")),
        }
    }
}

fn retarget(g: &Gate, w: usize) -> Gate {
    match g {
        Gate::H(_) => Gate::H(w),
        Gate::S(_) => Gate::S(w),
        Gate::X(_) => Gate::X(w),
        Gate::Z(_) => Gate::Z(w),
        Gate::Ux(_, a) => Gate::Ux(w, a.clone()),
        Gate::Uz(_, a) => Gate::Uz(w, a.clone()),
        two => two.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub rule: RewriteRule,
    pub inverse: RewriteRule,
    pub circuit: Circuit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewriteTrace {
    pub name: String,
    pub start: Circuit,
    pub steps: Vec<TraceStep>,
}

impl RewriteTrace {
    pub fn new(name: &str, start: Circuit) -> Self {
        RewriteTrace { name: name.to_string(), start, steps: Vec::new() }
    }

    pub fn end(&self) -> &Circuit {
        self.steps.last().map_or(&self.start, |s| &s.circuit)
    }

    pub fn push(&mut self, rule: RewriteRule) -> Result<&mut Self> {
        let (circuit, inverse) = apply_rule(self.end(), &rule)?;
        self.steps.push(TraceStep { rule, inverse, circuit });
        Ok(self)
    }

    /// Index of the first top-level op equal to `op`.
    pub fn find(&self, op: &Op) -> Result<usize> {
        self.end().ops.iter().position(|o| o == op).ok_or_else(|| Error::Circuit(format!("op {op:?} not found")))
    }

    /// Swap the op at `i` one place later, using CNOT/CZ commutation when the
    /// pair shares a wire and disjoint commutation otherwise.
    fn swap(&mut self, i: usize) -> Result<()> {
        let ops = &self.end().ops;
        let id = match (&ops[i], &ops[i + 1]) {
            (Op::Gate(Gate::Cz(..)), Op::Gate(Gate::Cnot(..))) if !ops[i].wires().is_disjoint(&ops[i + 1].wires()) => {
                RuleId::CommuteCnotCz
            }
            _ => RuleId::CommuteDisjoint,
        };
        self.push(RewriteRule::at(id, i))?;
        Ok(())
    }

    /// Move the op at `from` to index `to` (`to > from`) by adjacent swaps.
    fn move_later(&mut self, from: usize, to: usize) -> Result<()> {
        for i in from..to {
            self.swap(i)?;
        }
        Ok(())
    }

    /// The trace run backwards from the end circuit using the recorded
    /// inverses.
    pub fn reversed(&self) -> Result<RewriteTrace> {
        let mut t = RewriteTrace::new(&format!("{} (reversed)", self.name), self.end().clone());
        for step in self.steps.iter().rev() {
            t.push(step.inverse.clone())?;
        }
        Ok(t)
    }

    /// Check every intermediate circuit against the start.
    pub fn validate(&self, tol: f64) -> Result<Vec<EquivalenceReport>> {
        let inputs = spanning_inputs(self.start.inputs.len(), 0x5eed)?;
        let mut out = Vec::new();
        for (i, step) in self.steps.iter().enumerate() {
            let r = verify_equivalence(&self.start, &step.circuit, &inputs, tol)?;
            if !r.equivalent {
                return Err(Error::NotEquivalent(format!(
                    "{} step {} ({}): {:?}",
                    self.name,
                    i + 1,
                    step.rule.label(),
                    r.counterexample
                )));
            }
            out.push(r);
        }
        Ok(out)
    }

    /// `[{rule, site, circuit_hash}]`, starting with the start circuit.
    pub fn to_json(&self) -> Value {
        let mut rows = vec![json!({"rule": "start", "site": null, "circuit_hash": self.start.hash()})];
        for s in &self.steps {
            rows.push(json!({
                "rule": if s.rule.reverse { format!("~{}", s.rule.id) } else { s.rule.id.to_string() },
                "site": s.rule.site,
                "circuit_hash": s.circuit.hash(),
            }));
        }
        Value::Array(rows)
    }
}

impl fmt::Display for RewriteTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "trace {}", self.name)?;
        writeln!(f, "start:\n{}", self.start)?;
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(f, "step {}: {}\n{}", i + 1, s.rule.label(), s.circuit)?;
        }
        Ok(())
    }
}

/// The wire pattern's direct circuit, with the two CZs ordered so that the
/// `(1,2)` bond is created first.
pub fn wire_circuit() -> Result<Circuit> {
    pattern_circuit(&build_pattern(PatternKind::Wire)?)
}

/// Wire pattern to teleportation: `H·H` inserted on the middle wire, then the
/// Bell preparation and the Bell measurement are boxed.
pub fn map_wire_to_teleportation() -> Result<RewriteTrace> {
    let mut t = RewriteTrace::new("wire", wire_circuit()?);
    let cz = t.find(&Op::Gate(Gate::Cz(0, 1)))?;
    t.push(RewriteRule::insert_hh(cz, 1))?;
    t.push(RewriteRule::at(RuleId::BoxBellPrep, 0))?;
    t.push(RewriteRule::at(RuleId::BoxBellMeas, 1))?;
    Ok(t)
}

/// Rotation pattern (`XRot` or `ZRot`) to a Bell preparation followed by a
/// generalized Bell measurement.
pub fn map_rotation_to_generalized_bell(kind: PatternKind) -> Result<RewriteTrace> {
    let start = pattern_circuit(&build_pattern(kind)?)?;
    let mut t = RewriteTrace::new(kind.name(), start);
    match kind {
        PatternKind::XRot(_) => {
            let m = position(t.end(), |o| matches!(o, Op::Measure { basis: MeasBasis::Equatorial(_), .. }))?;
            t.push(RewriteRule::at(RuleId::EquatorialToUzX, m))?;
            let cz = t.find(&Op::Gate(Gate::Cz(0, 1)))?;
            t.push(RewriteRule::insert_hh(cz, 1))?;
            t.push(RewriteRule::at(RuleId::BoxBellPrep, 0))?;
            t.push(RewriteRule::at(RuleId::BellTranspose, 1))?;
            t.push(RewriteRule::at(RuleId::BoxBellMeas, 2))?;
            t.push(RewriteRule::at(RuleId::BoxGeneralizedBell, 1))?;
        }
        PatternKind::ZRot(_) => {
            let m = position(t.end(), |o| matches!(o, Op::Measure { basis: MeasBasis::Equatorial(_), .. }))?;
            t.push(RewriteRule::at(RuleId::EquatorialToUzX, m))?;
            let cz = t.find(&Op::Gate(Gate::Cz(0, 1)))?;
            t.push(RewriteRule::insert_hh(cz, 1))?;
            t.push(RewriteRule::at(RuleId::BoxBellPrep, 0))?;
            // [box, H1, CZ01, Uz0, MX0, MX1]
            t.push(RewriteRule::at(RuleId::CommuteUzCz, 2))?;
            t.push(RewriteRule::at(RuleId::CommuteDisjoint, 1))?;
            t.push(RewriteRule::at(RuleId::BoxBellMeas, 2))?;
            t.push(RewriteRule::at(RuleId::BoxGeneralizedBell, 1))?;
        }
        other => return Err(Error::Pattern(format!("{} is not a rotation pattern", other.name()))),
    }
    Ok(t)
}

fn position(c: &Circuit, pred: impl Fn(&Op) -> bool) -> Result<usize> {
    c.ops.iter().position(pred).ok_or_else(|| Error::Circuit("op not found".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappingDirection {
    TqcTo1wqc,
    OneWqcToTqc,
}

impl FromStr for MappingDirection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tqc_to_1wqc" => Ok(MappingDirection::TqcTo1wqc),
            "1wqc_to_tqc" => Ok(MappingDirection::OneWqcToTqc),
            _ => Err(Error::Parse(format!("unknown direction {s:?}"))),
        }
    }
}

/// Teleportation-based CNOT on wires 0 (control) and 1 (target): Bell pairs
/// on (2,4) and (3,5), CNOT 4→5 between the pair halves, Bell measurements
/// of (0,2) and (1,3); outputs on 4 and 5. Labels follow the 1WQC numbering
/// `j1..j4` of the measured wires.
pub fn cnot_gadget_circuit() -> Result<Circuit> {
    let bell_prep = |a: usize, b: usize| Op::Box {
        tag: BoxTag::BellPrep { a, b },
        ops: vec![Op::prep_plus(a), Op::prep_plus(b), Op::Gate(Gate::Cz(a, b)), Op::Gate(Gate::H(a))],
    };
    let bell_meas = |a: usize, b: usize| Op::Box {
        tag: BoxTag::BellMeas { a, b },
        ops: vec![
            Op::Gate(Gate::H(b)),
            Op::Gate(Gate::Cz(a, b)),
            Op::mx(a, &format!("j{}", a + 1)),
            Op::mx(b, &format!("j{}", b + 1)),
        ],
    };
    let pattern = build_pattern(PatternKind::Cnot6)?;
    let corrections = pattern_circuit(&pattern)?.ops.into_iter().filter(|o| matches!(o, Op::Correct { .. }));
    let mut ops = vec![bell_prep(2, 4), bell_prep(3, 5), Op::Gate(Gate::Cnot(4, 5)), bell_meas(0, 2), bell_meas(1, 3)];
    ops.extend(corrections);
    Circuit::new(6, vec![0, 1], ops)
}

/// CNOT between the models. `TqcTo1wqc` starts from [`cnot_gadget_circuit`]
/// and ends in `|+⟩` preparations, CZs and X measurements only; the other
/// direction is that trace replayed backwards.
pub fn map_cnot_between_models(direction: MappingDirection) -> Result<RewriteTrace> {
    let mut t = RewriteTrace::new("cnot tqc_to_1wqc", cnot_gadget_circuit()?);
    // open all four boxes
    for _ in 0..4 {
        let b = position(t.end(), |o| matches!(o, Op::Box { .. }))?;
        let id = match &t.end().ops[b] {
            Op::Box { tag, .. } => box_rule(tag),
            _ => unreachable!(),
        };
        t.push(RewriteRule::rev(id, b))?;
    }
    // [P2 P4 CZ24 H2 P3 P5 CZ35 H3 CNOT45 H2 CZ02 MX0 MX2 H3 CZ13 MX1 MX3 ...]
    let cnot = Op::Gate(Gate::Cnot(4, 5));
    let h3 = t.find(&Op::Gate(Gate::H(3)))?;
    t.swap(h3)?;
    // CNOT past CZ(3,5) leaves CZ(3,4) behind
    let i = t.find(&cnot)?;
    t.swap(i - 1)?;
    // bring the CNOT next to the preparations of 4 and 5
    let p3 = t.find(&Op::prep_plus(3))?;
    t.swap(p3)?;
    let p3 = t.find(&Op::prep_plus(3))?;
    t.swap(p3)?;
    let h2 = t.find(&Op::Gate(Gate::H(2)))?;
    t.move_later(h2, h2 + 2)?;
    let cz24 = t.find(&Op::Gate(Gate::Cz(2, 4)))?;
    t.move_later(cz24, cz24 + 2)?;
    let p4 = t.find(&Op::prep_plus(4))?;
    t.push(RewriteRule::at(RuleId::CnotOnPlusPlus, p4))?;
    // cancel the Hadamards that met on wires 2 and 3
    for w in [2, 3] {
        let h = Op::Gate(Gate::H(w));
        let first = t.find(&h)?;
        let second = first + 1 + t.end().ops[first + 1..].iter().position(|o| *o == h).expect("second H");
        t.move_later(first, second - 1)?;
        t.push(RewriteRule::at(RuleId::CancelHh, second - 1))?;
    }
    match direction {
        MappingDirection::TqcTo1wqc => Ok(t),
        MappingDirection::OneWqcToTqc => {
            let mut r = t.reversed()?;
            r.name = "cnot 1wqc_to_tqc".into();
            Ok(r)
        }
    }
}

/// Graph edges, input wires and measured wires.
pub type GraphForm = (Vec<(usize, usize)>, Vec<usize>, Vec<usize>);

/// The 1WQC content of a circuit made only of `|+⟩` preparations, CZs and X
/// measurements: its graph edges, input wires and measured wires. `None`
/// if any other op occurs (corrections are ignored).
pub fn graph_form(c: &Circuit) -> Option<GraphForm> {
    let mut edges = Vec::new();
    let mut measured = Vec::new();
    for op in c.flat_ops() {
        match op {
            Op::Prep { state: PrepState::Plus, .. } | Op::Correct { .. } => {}
            Op::Gate(Gate::Cz(a, b)) => edges.push((a.min(b), a.max(b))),
            Op::Measure { wire, basis: MeasBasis::X, .. } => measured.push(wire),
            _ => return None,
        }
    }
    edges.sort_unstable();
    measured.sort_unstable();
    Some((edges, c.inputs.clone(), measured))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_names_round_trip() {
        for r in RuleId::ALL {
            assert_eq!(r.name().parse::<RuleId>().unwrap(), r);
        }
    }
}
