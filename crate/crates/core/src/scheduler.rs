//! Graph-state preparation by two-qubit measurements, scheduled into rounds.
//!
//! Qubit layout for execution: graph vertices `0..n`, then the ancillas in
//! edge order (one per edge for procedure B, an `|Ω⟩` pair per edge for
//! procedure A).

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::pauli::{Pauli, PauliString};
use crate::policy::OutcomePolicy;
use crate::tableau::{tableau_from_graph, StabilizerTableau};
use crate::tqc::{AncillaInit, Procedure};

/// `G′`: every edge `k = (i, j)` of the base graph split by ancilla `n + k`.
#[derive(Debug, Clone)]
pub struct AuxGraph {
    pub base: Graph,
    /// Aux edges as `(graph vertex, ancilla)`, two per base edge, sorted.
    pub edges: Vec<(usize, usize)>,
}

impl AuxGraph {
    pub fn num_vertices(&self) -> usize {
        self.base.len() + self.base.edge_count()
    }

    pub fn ancilla(&self, k: usize) -> usize {
        self.base.len() + k
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_vertices()).map(|v| self.degree(v)).max().unwrap_or(0)
    }
}

pub fn build_aux_graph(g: &Graph) -> Result<AuxGraph> {
    if g.is_empty() {
        return Err(Error::InvalidGraph("graph has no vertices".into()));
    }
    let n = g.len();
    let mut edges: Vec<(usize, usize)> = g.edges().enumerate().flat_map(|(k, (i, j))| [(i, n + k), (j, n + k)]).collect();
    edges.sort_unstable();
    Ok(AuxGraph { base: g.clone(), edges })
}

/// Proper edge colouring; `colors[e]` is the colour of `aux.edges[e]`,
/// numbered from 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeColoring {
    pub colors: Vec<usize>,
    pub num_colors: usize,
}

impl EdgeColoring {
    pub fn is_proper(&self, edges: &[(usize, usize)]) -> bool {
        for (x, &(a, b)) in edges.iter().enumerate() {
            for (y, &(c, d)) in edges.iter().enumerate().skip(x + 1) {
                let touch = a == c || a == d || b == c || b == d;
                if touch && self.colors[x] == self.colors[y] {
                    return false;
                }
            }
        }
        true
    }
}

/// König colouring of a bipartite graph with `Δ` colours by alternating-path
/// recolouring. Edges are taken in the order given; the lowest colour free
/// at both ends is preferred, and a path swap is made only when none is.
pub fn bipartite_edge_coloring(aux: &AuxGraph) -> EdgeColoring {
    color_bipartite(aux.num_vertices(), &aux.edges, aux.max_degree())
}

fn color_bipartite(nv: usize, edges: &[(usize, usize)], delta: usize) -> EdgeColoring {
    // at[v][c] = (neighbour, edge index) along the edge of colour c at v
    let mut at: Vec<Vec<Option<(usize, usize)>>> = vec![vec![None; delta]; nv];
    let mut colors = vec![usize::MAX; edges.len()];
    let free = |at: &Vec<Vec<Option<(usize, usize)>>>, v: usize| at[v].iter().position(Option::is_none);
    for (e, &(u, v)) in edges.iter().enumerate() {
        let common = (0..delta).find(|&c| at[u][c].is_none() && at[v][c].is_none());
        let alpha = common.or_else(|| free(&at, u)).expect("degree bound");
        let beta = free(&at, v).expect("degree bound");
        if common.is_none() {
            // walk the alpha/beta path from v and swap its colours; in a
            // bipartite graph it never reaches u
            let mut path = Vec::new();
            let (mut x, mut c) = (v, alpha);
            while let Some((y, f)) = at[x][c] {
                path.push(f);
                x = y;
                c = if c == alpha { beta } else { alpha };
            }
            for &f in &path {
                let (a, b) = edges[f];
                at[a][colors[f]] = None;
                at[b][colors[f]] = None;
            }
            for &f in &path {
                let (a, b) = edges[f];
                let c = if colors[f] == alpha { beta } else { alpha };
                colors[f] = c;
                at[a][c] = Some((b, f));
                at[b][c] = Some((a, f));
            }
        }
        colors[e] = alpha;
        at[u][alpha] = Some((v, e));
        at[v][alpha] = Some((u, e));
    }
    let num_colors = colors.iter().map(|c| c + 1).max().unwrap_or(0);
    EdgeColoring { colors, num_colors }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleProcedure {
    A,
    B,
}

impl FromStr for ScheduleProcedure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(ScheduleProcedure::A),
            "B" | "b" => Ok(ScheduleProcedure::B),
            other => Err(Error::Parse(format!("unknown procedure {other:?}"))),
        }
    }
}

impl fmt::Display for ScheduleProcedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScheduleProcedure::A => "A",
            ScheduleProcedure::B => "B",
        })
    }
}

/// One observable: `letters[t]` acts on `qubits[t]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduledMeasurement {
    pub letters: String,
    pub qubits: Vec<usize>,
    pub edge: usize,
}

impl ScheduledMeasurement {
    pub fn observable(&self, total: usize) -> PauliString {
        let mut p = PauliString::identity(total);
        for (c, &q) in self.letters.chars().zip(&self.qubits) {
            p.set(q, Pauli::from_char(c).expect("schedule letters are Pauli"));
        }
        p
    }
}

/// Per-edge bookkeeping: ancilla qubits, how they start, and which gadget
/// ordering the colouring produced.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgePlan {
    pub edge: (usize, usize),
    pub ancillas: Vec<usize>,
    pub procedure: Procedure,
}

impl EdgePlan {
    pub fn init(&self) -> AncillaInit {
        self.procedure.ancilla_init()
    }
}

#[derive(Debug, Clone)]
pub struct MeasurementSchedule {
    pub procedure: ScheduleProcedure,
    pub graph: Graph,
    pub plans: Vec<EdgePlan>,
    pub rounds: Vec<Vec<ScheduledMeasurement>>,
    pub final_round: Vec<ScheduledMeasurement>,
}

impl MeasurementSchedule {
    pub fn depth(&self) -> usize {
        self.rounds.len() + 1
    }

    pub fn total_qubits(&self) -> usize {
        self.graph.len() + self.plans.iter().map(|p| p.ancillas.len()).sum::<usize>()
    }

    pub fn two_qubit_measurements(&self) -> usize {
        self.rounds.iter().map(Vec::len).sum()
    }

    /// No two measurements of one round share a qubit.
    pub fn check_rounds(&self) -> Result<()> {
        for (r, round) in self.rounds.iter().chain(std::iter::once(&self.final_round)).enumerate() {
            let mut seen = std::collections::BTreeSet::new();
            for m in round {
                for &q in &m.qubits {
                    if !seen.insert(q) {
                        return Err(Error::Schedule(format!("round {} uses qubit {q} twice", r + 1)));
                    }
                }
            }
        }
        Ok(())
    }

    fn qubit_name(&self, q: usize) -> String {
        let n = self.graph.len();
        if q < n {
            self.graph.label(q).to_string()
        } else {
            format!("a{}", q - n + 1)
        }
    }

    fn init_of(&self, q: usize) -> Option<&'static str> {
        self.plans.iter().find(|p| p.ancillas.contains(&q)).map(|p| match p.init() {
            AncillaInit::Plus => "+",
            AncillaInit::Zero => "0",
            AncillaInit::Omega => "Omega",
        })
    }

    pub fn to_json(&self) -> Value {
        let meas = |m: &ScheduledMeasurement| {
            let mut v = json!({
                "obs": m.letters,
                "qubits": m.qubits.iter().map(|&q| self.qubit_name(q)).collect::<Vec<_>>(),
            });
            if let Some(init) = m.qubits.iter().find_map(|&q| self.init_of(q)) {
                v["init"] = json!(init);
            }
            v
        };
        json!({
            "procedure": self.procedure.to_string(),
            "rounds": self.rounds.iter().map(|r| r.iter().map(meas).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "final": self.final_round.iter().map(meas).collect::<Vec<_>>(),
            "depth": self.depth(),
            "ancillas": self.total_qubits() - self.graph.len(),
        })
    }
}

impl fmt::Display for MeasurementSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "procedure {}: {} vertices, {} edges, {} ancillas, depth {}",
            self.procedure,
            self.graph.len(),
            self.graph.edge_count(),
            self.total_qubits() - self.graph.len(),
            self.depth()
        )?;
        let show = |m: &ScheduledMeasurement| {
            let qs: Vec<String> = m.qubits.iter().map(|&q| self.qubit_name(q)).collect();
            format!("{}({})", m.letters, qs.join(","))
        };
        for (r, round) in self.rounds.iter().enumerate() {
            let items: Vec<String> = round.iter().map(show).collect();
            writeln!(f, "round {}: {}", r + 1, items.join(" "))?;
        }
        let items: Vec<String> = self.final_round.iter().map(show).collect();
        writeln!(f, "round {} (final): {}", self.depth(), items.join(" "))
    }
}

pub fn build_schedule(g: &Graph, procedure: ScheduleProcedure) -> Result<MeasurementSchedule> {
    if g.edge_count() == 0 {
        return Err(Error::Schedule("graph has no edges".into()));
    }
    match procedure {
        ScheduleProcedure::B => schedule_b(g),
        ScheduleProcedure::A => schedule_a(g),
    }
}

fn schedule_b(g: &Graph) -> Result<MeasurementSchedule> {
    let aux = build_aux_graph(g)?;
    let coloring = bipartite_edge_coloring(&aux);
    let color_of = |v: usize, a: usize| {
        let e = aux.edges.binary_search(&(v, a)).expect("aux edge");
        coloring.colors[e]
    };
    let mut rounds = vec![Vec::new(); coloring.num_colors];
    let mut plans = Vec::new();
    let mut final_round = Vec::new();
    for (k, (i, j)) in g.edges().enumerate() {
        let a = aux.ancilla(k);
        let (ci, cj) = (color_of(i, a), color_of(j, a));
        // ZZ on (i, a) and XZ on (a, j); which comes first fixes the gadget
        let procedure = if ci < cj { Procedure::B } else { Procedure::BSwapped };
        rounds[ci].push(ScheduledMeasurement { letters: "ZZ".into(), qubits: vec![i, a], edge: k });
        rounds[cj].push(ScheduledMeasurement { letters: "XZ".into(), qubits: vec![a, j], edge: k });
        let last = if procedure == Procedure::B { "Z" } else { "X" };
        final_round.push(ScheduledMeasurement { letters: last.into(), qubits: vec![a], edge: k });
        plans.push(EdgePlan { edge: (i, j), ancillas: vec![a], procedure });
    }
    let s = MeasurementSchedule { procedure: ScheduleProcedure::B, graph: g.clone(), plans, rounds, final_round };
    s.check_rounds()?;
    Ok(s)
}

/// Greedy colouring of the observable conflict graph (shared graph qubit),
/// edges in order, lowest free round first.
fn schedule_a(g: &Graph) -> Result<MeasurementSchedule> {
    let n = g.len();
    let mut busy: Vec<Vec<bool>> = vec![Vec::new(); n];
    let mut rounds: Vec<Vec<ScheduledMeasurement>> = Vec::new();
    let mut plans = Vec::new();
    let mut final_round = Vec::new();
    let mut place = |v: usize, m: ScheduledMeasurement, rounds: &mut Vec<Vec<ScheduledMeasurement>>| {
        let r = busy[v].iter().position(|b| !b).unwrap_or(busy[v].len());
        if r == busy[v].len() {
            busy[v].push(false);
        }
        busy[v][r] = true;
        if rounds.len() <= r {
            rounds.resize(r + 1, Vec::new());
        }
        rounds[r].push(m);
    };
    for (k, (i, j)) in g.edges().enumerate() {
        let (a, b) = (n + 2 * k, n + 2 * k + 1);
        place(i, ScheduledMeasurement { letters: "ZX".into(), qubits: vec![i, a], edge: k }, &mut rounds);
        place(j, ScheduledMeasurement { letters: "XZ".into(), qubits: vec![b, j], edge: k }, &mut rounds);
        final_round.push(ScheduledMeasurement { letters: "Z".into(), qubits: vec![a], edge: k });
        final_round.push(ScheduledMeasurement { letters: "Z".into(), qubits: vec![b], edge: k });
        plans.push(EdgePlan { edge: (i, j), ancillas: vec![a, b], procedure: Procedure::A });
    }
    let s = MeasurementSchedule { procedure: ScheduleProcedure::A, graph: g.clone(), plans, rounds, final_round };
    s.check_rounds()?;
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct ScheduleRun {
    /// Graph-qubit tableau after the ancillas are removed, before corrections.
    pub tableau: StabilizerTableau,
    /// Pauli on the graph qubits that maps `tableau` to the graph state.
    pub corrections: PauliString,
    pub outcomes: Vec<u8>,
    pub log: Vec<String>,
}

impl ScheduleRun {
    pub fn corrected(&self) -> Result<StabilizerTableau> {
        let mut t = self.tableau.clone();
        t.apply_pauli(&self.corrections)?;
        Ok(t)
    }

    /// Whether the corrected tableau is exactly the graph state of `g`.
    pub fn graph_state_check(&self, g: &Graph) -> Result<bool> {
        Ok(self.corrected()?.same_group(&tableau_from_graph(g)?))
    }
}

pub fn execute_schedule(s: &MeasurementSchedule, policy: &mut OutcomePolicy) -> Result<ScheduleRun> {
    s.check_rounds()?;
    let n = s.graph.len();
    let total = s.total_qubits();
    let single = |q: usize, p: Pauli| PauliString::single(total, q, p);
    let mut gens: Vec<PauliString> = (0..n).map(|v| single(v, Pauli::X)).collect();
    for plan in &s.plans {
        match plan.init() {
            AncillaInit::Plus => gens.push(single(plan.ancillas[0], Pauli::X)),
            AncillaInit::Zero => gens.push(single(plan.ancillas[0], Pauli::Z)),
            AncillaInit::Omega => {
                let (a, b) = (plan.ancillas[0], plan.ancillas[1]);
                let mut xz = single(a, Pauli::X);
                xz.set(b, Pauli::Z);
                let mut zx = single(a, Pauli::Z);
                zx.set(b, Pauli::X);
                gens.push(xz);
                gens.push(zx);
            }
        }
    }
    let mut t = StabilizerTableau::from_generators(total, gens)?;

    // outcomes per edge in the order of that edge's gadget sequence
    let mut per_edge: Vec<Vec<(usize, u8)>> = vec![Vec::new(); s.plans.len()];
    let mut outcomes = Vec::new();
    let mut log = Vec::new();
    for (r, round) in s.rounds.iter().chain(std::iter::once(&s.final_round)).enumerate() {
        for m in round {
            let bit = t.measure(&m.observable(total), policy)?;
            outcomes.push(bit);
            let slot = gadget_slot(&s.plans[m.edge], m);
            per_edge[m.edge].push((slot, bit));
            let qs: Vec<String> = m.qubits.iter().map(|&q| s.qubit_name(q)).collect();
            log.push(format!("round {}: {}({}) -> {}", r + 1, m.letters, qs.join(","), bit));
        }
    }

    let mut corrections = PauliString::identity(n);
    for (plan, got) in s.plans.iter().zip(&mut per_edge) {
        got.sort_unstable();
        let bits: Vec<u8> = got.iter().map(|&(_, b)| b).collect();
        let data = [plan.edge.0, plan.edge.1];
        for term in plan.procedure.corrections() {
            let parity = term.outcomes.iter().fold(0, |acc, &i| acc ^ bits[i]);
            if parity == 1 {
                let q = data[term.data];
                let cur = PauliString::single(n, q, term.letter);
                corrections = corrections.multiply(&cur)?;
            }
        }
    }
    let corrections = corrections.with_phase(0);

    // ancillas are now in single-qubit eigenstates; drop them from the top
    for q in (n..total).rev() {
        t = t.remove_qubit(q)?;
    }
    Ok(ScheduleRun { tableau: t, corrections, outcomes, log })
}

/// Position of `m` within its edge's gadget sequence.
fn gadget_slot(plan: &EdgePlan, m: &ScheduledMeasurement) -> usize {
    match (plan.procedure, m.letters.as_str()) {
        (Procedure::A, "ZX") => 0,
        (Procedure::A, "XZ") => 1,
        (Procedure::A, _) if m.qubits[0] == plan.ancillas[0] => 2,
        (Procedure::A, _) => 3,
        (Procedure::B, "ZZ") | (Procedure::BSwapped, "XZ") => 0,
        (Procedure::B, "XZ") | (Procedure::BSwapped, "ZZ") => 1,
        _ => 2,
    }
}
