use mbqc_core::scheduler::ScheduledMeasurement;
use mbqc_core::tqc::Procedure;
use mbqc_core::{
    bipartite_edge_coloring, build_aux_graph, build_schedule, execute_schedule, enumerate_branches, Graph, MeasurementSchedule,
    OutcomePolicy, PauliString, ScheduleProcedure, StabilizerTableau,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_graph(rng: &mut ChaCha8Rng) -> Graph {
    loop {
        let n = rng.gen_range(2..=10);
        let mut g = Graph::new(n);
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(0.5) {
                    g.add_edge(a, b).unwrap();
                }
            }
        }
        if g.edge_count() > 0 {
            return g;
        }
    }
}

fn stabilizers(t: &StabilizerTableau) -> Vec<String> {
    let mut v: Vec<String> = t.stabilizers().iter().map(|p| p.to_string()).collect();
    v.sort();
    v
}

fn disjoint_rounds(s: &MeasurementSchedule) -> bool {
    s.rounds.iter().chain(std::iter::once(&s.final_round)).all(|round| {
        let mut qs: Vec<usize> = round.iter().flat_map(|m| m.qubits.clone()).collect();
        let total = qs.len();
        qs.sort_unstable();
        qs.dedup();
        qs.len() == total
    })
}

#[test]
fn aux_graph_shapes() {
    let k3 = build_aux_graph(&Graph::complete(3)).unwrap();
    assert_eq!(k3.num_vertices(), 6);
    assert_eq!(k3.edges.len(), 6);
    // every vertex has degree 2 and walking the cycle visits all six
    assert!((0..6).all(|v| k3.degree(v) == 2));
    let mut seen = vec![0usize];
    let mut cur = 0;
    loop {
        let next = k3
            .edges
            .iter()
            .filter_map(|&(a, b)| if a == cur { Some(b) } else if b == cur { Some(a) } else { None })
            .find(|v| !seen.contains(v));
        match next {
            Some(v) => {
                // alternates between graph vertices (< 3) and ancillas
                assert_ne!(v < 3, cur < 3);
                seen.push(v);
                cur = v;
            }
            None => break,
        }
    }
    assert_eq!(seen.len(), 6);

    let star = build_aux_graph(&Graph::star(4)).unwrap();
    assert_eq!(star.max_degree(), 4);
    assert!((5..9).all(|a| star.degree(a) == 2));
    assert!(build_aux_graph(&Graph::new(0)).is_err());
}

fn brute_force_proper(edges: &[(usize, usize)], colors: &[usize]) -> bool {
    let mut ok = true;
    for x in 0..edges.len() {
        for y in 0..edges.len() {
            if x != y {
                let (a, b) = edges[x];
                let (c, d) = edges[y];
                if [a, b].iter().any(|v| *v == c || *v == d) && colors[x] == colors[y] {
                    ok = false;
                }
            }
        }
    }
    ok
}

#[test]
fn coloring_examples() {
    for (g, want) in [(Graph::path(2), 2), (Graph::complete(3), 2), (Graph::star(4), 4)] {
        let aux = build_aux_graph(&g).unwrap();
        let c = bipartite_edge_coloring(&aux);
        assert_eq!(c.num_colors, want);
        assert!(brute_force_proper(&aux.edges, &c.colors));
        assert!(c.is_proper(&aux.edges));
    }
}

#[test]
fn coloring_is_deterministic() {
    let g = Graph::complete(5);
    let aux = build_aux_graph(&g).unwrap();
    assert_eq!(bipartite_edge_coloring(&aux), bipartite_edge_coloring(&aux));
}

#[test]
fn procedure_b_depths() {
    assert_eq!(build_schedule(&Graph::path(2), ScheduleProcedure::B).unwrap().depth(), 3);
    assert_eq!(build_schedule(&Graph::path(3), ScheduleProcedure::B).unwrap().depth(), 3);
    assert_eq!(build_schedule(&Graph::star(4), ScheduleProcedure::B).unwrap().depth(), 5);
    assert!(build_schedule(&Graph::new(3), ScheduleProcedure::B).is_err());
}

/// Smallest number of rounds for a list of observables where observables
/// that share a qubit or anticommute on a shared ancilla must be separated.
fn brute_force_rounds(obs: &[Vec<usize>]) -> usize {
    let n = obs.len();
    for k in 1..=n {
        let mut assign = vec![0usize; n];
        loop {
            let ok = (0..n).all(|x| (x + 1..n).all(|y| assign[x] != assign[y] || obs[x].iter().all(|q| !obs[y].contains(q))));
            if ok {
                return k;
            }
            let mut i = 0;
            while i < n {
                assign[i] += 1;
                if assign[i] < k {
                    break;
                }
                assign[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    n
}

#[test]
fn single_edge_b_depth_matches_brute_force() {
    let s = build_schedule(&Graph::path(2), ScheduleProcedure::B).unwrap();
    let obs: Vec<Vec<usize>> = s.rounds.iter().flatten().map(|m| m.qubits.clone()).collect();
    assert_eq!(brute_force_rounds(&obs) + 1, s.depth());
    // the two observables share the ancilla and do not commute
    let all: Vec<&ScheduledMeasurement> = s.rounds.iter().flatten().collect();
    let total = s.total_qubits();
    assert!(!all[0].observable(total).commutes(&all[1].observable(total)).unwrap());
}

#[test]
fn degree_three_centre_with_procedure_a() {
    // centre vertex 0 joined to 1, 2, 3, and a pendant 3-4
    let g = Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (3, 4)]).unwrap();
    let s = build_schedule(&g, ScheduleProcedure::A).unwrap();
    let mut centre_rounds: Vec<usize> = s
        .rounds
        .iter()
        .enumerate()
        .flat_map(|(r, round)| round.iter().filter(|m| m.qubits.contains(&0)).map(move |_| r + 1))
        .collect();
    centre_rounds.sort_unstable();
    assert_eq!(centre_rounds, vec![1, 2, 3]);
    assert_eq!(s.depth(), 4);
    assert_eq!(s.final_round.len(), 8);
    assert!(s.final_round.iter().all(|m| m.qubits.len() == 1));
}

#[test]
fn procedure_a_round_count_is_minimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 40 {
        let g = random_graph(&mut rng);
        if g.edge_count() > 6 {
            continue;
        }
        let s = build_schedule(&g, ScheduleProcedure::A).unwrap();
        let obs: Vec<Vec<usize>> = s.rounds.iter().flatten().map(|m| m.qubits.clone()).collect();
        assert_eq!(s.rounds.len(), brute_force_rounds(&obs), "{g:?}");
        assert!(s.rounds.len() >= g.max_degree());
        checked += 1;
    }
}

#[test]
fn procedure_b_ordering_rule() {
    let s = build_schedule(&Graph::complete(4), ScheduleProcedure::B).unwrap();
    for (k, plan) in s.plans.iter().enumerate() {
        let round_of = |letters: &str| {
            s.rounds.iter().position(|r| r.iter().any(|m| m.edge == k && m.letters == letters)).unwrap()
        };
        let last = s.final_round.iter().find(|m| m.edge == k).unwrap();
        let per_edge = s.rounds.iter().flatten().filter(|m| m.edge == k).count();
        assert_eq!(per_edge, 2);
        if round_of("ZZ") < round_of("XZ") {
            assert_eq!(plan.procedure, Procedure::B);
            assert_eq!(last.letters, "Z");
        } else {
            assert_eq!(plan.procedure, Procedure::BSwapped);
            assert_eq!(last.letters, "X");
        }
    }
}

#[test]
fn single_edge_all_zero_outcomes() {
    for proc in [ScheduleProcedure::A, ScheduleProcedure::B] {
        let g = Graph::path(2);
        let s = build_schedule(&g, proc).unwrap();
        let run = execute_schedule(&s, &mut OutcomePolicy::force(vec![0; 8])).unwrap();
        assert_eq!(run.corrections, PauliString::identity(2));
        assert_eq!(stabilizers(&run.tableau), vec!["+XZ".to_string(), "+ZX".to_string()]);
    }
}

#[test]
fn every_branch_of_small_graphs() {
    for g in [Graph::path(2), Graph::path(3), Graph::complete(3)] {
        for proc in [ScheduleProcedure::A, ScheduleProcedure::B] {
            let s = build_schedule(&g, proc).unwrap();
            let runs = enumerate_branches(|p| execute_schedule(&s, p)).unwrap();
            assert!(runs.len() > 1);
            for (bits, run) in runs {
                assert!(run.graph_state_check(&g).unwrap(), "{proc} {bits:?}");
            }
        }
    }
}

#[test]
fn random_graphs_depth_and_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..200 {
        let g = random_graph(&mut rng);
        let b = build_schedule(&g, ScheduleProcedure::B).unwrap();
        assert_eq!(b.depth(), g.max_degree().max(2) + 1);
        assert!(disjoint_rounds(&b));
        let a = build_schedule(&g, ScheduleProcedure::A).unwrap();
        assert_eq!(a.depth(), g.max_degree() + 1);
        assert!(disjoint_rounds(&a));
        for seed in 0..5 {
            for s in [&a, &b] {
                let run = execute_schedule(s, &mut OutcomePolicy::sample(seed)).unwrap();
                assert!(run.graph_state_check(&g).unwrap());
            }
        }
    }
}

#[test]
fn schedule_json_shape() {
    let s = build_schedule(&Graph::path(2), ScheduleProcedure::B).unwrap();
    let v = s.to_json();
    assert_eq!(v["procedure"], "B");
    assert_eq!(v["depth"], 3);
    assert_eq!(v["ancillas"], 1);
    assert_eq!(v["rounds"].as_array().unwrap().len(), 2);
    assert_eq!(v["rounds"][0][0]["obs"], "ZZ");
    assert_eq!(v["rounds"][0][0]["qubits"], serde_json::json!(["1", "a1"]));
    assert_eq!(v["rounds"][0][0]["init"], "+");
    assert_eq!(v["final"][0]["obs"], "Z");
}
