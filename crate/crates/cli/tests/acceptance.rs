//! The eight acceptance criteria. Each prints one PASS/FAIL line; the test
//! fails at the end if any criterion failed.

use std::process::Command;
use std::time::Instant;

use mbqc_core::suites::{
    cross_engine_check, gadget_checks, mapping_checks, pattern_checks, resource_check, scheduler_check, Check, SuiteConfig,
};

/// Fidelity and probability tolerance for every criterion.
const TOL: f64 = 1e-10;
const RUS_RUNS: u64 = 10_000;
const RANDOM_GRAPHS: usize = 200;
const SEEDS_PER_GRAPH: u64 = 5;
const RANDOM_CIRCUITS: usize = 500;

fn config() -> SuiteConfig {
    SuiteConfig {
        seed: 0,
        tolerance: TOL,
        rus_runs: RUS_RUNS,
        random_graphs: RANDOM_GRAPHS,
        seeds_per_graph: SEEDS_PER_GRAPH,
        random_circuits: RANDOM_CIRCUITS,
    }
}

fn summarize(checks: &[Check]) -> (bool, String) {
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| format!("{}: {}", c.name, c.detail)).collect();
    if failed.is_empty() {
        let parts: Vec<String> = checks
            .iter()
            .map(|c| if c.detail.is_empty() { format!("{}={}", c.name, c.branches) } else { format!("{} ({})", c.name, c.detail) })
            .collect();
        (true, parts.join(", "))
    } else {
        (false, failed.join("; "))
    }
}

fn table1() -> (bool, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_mbqc")).arg("table1").output().expect("binary runs");
    let out = String::from_utf8_lossy(&o.stdout);
    let blocks: Vec<&str> = out.split("\n\n").collect();
    let ok = o.status.success()
        && out.contains("table1: PASS")
        && blocks.iter().any(|b| b.starts_with("1a) Measure ZXII") && b.contains("X1: +XZXI"))
        && blocks.last().is_some_and(|b| b.contains("X4: +ZIIX") && b.contains("X1: +XIIZ"));
    (ok, format!("{} blocks, exit {:?}", blocks.len(), o.status.code()))
}

type Criterion<'a> = (&'a str, Box<dyn Fn() -> (bool, String) + 'a>);

fn pick(checks: Vec<Check>, names: &[&str]) -> Vec<Check> {
    checks.into_iter().filter(|c| names.iter().any(|n| c.name.starts_with(n))).collect()
}

#[test]
fn acceptance() {
    let cfg = config();
    let started = Instant::now();
    let gadgets = gadget_checks(&cfg);
    let criteria: Vec<Criterion> = vec![
        ("procedure A stabilizer table", Box::new(table1)),
        ("pattern universality", Box::new(|| summarize(&pattern_checks(&cfg)))),
        (
            "teleportation gadgets",
            Box::new(|| summarize(&pick(gadgets.clone(), &["teleport", "cnot_gadget", "remote_cnot", "remote_cz"]))),
        ),
        ("repeat-until-success statistics", Box::new(|| summarize(&pick(gadgets.clone(), &["repeat_until_success"])))),
        ("mapping traces", Box::new(|| summarize(&mapping_checks(&cfg)))),
        ("scheduler optimality and correctness", Box::new(|| summarize(&[scheduler_check(&cfg)]))),
        ("resource counts", Box::new(|| summarize(&[resource_check().expect("patterns build")]))),
        ("cross-engine agreement", Box::new(|| summarize(&[cross_engine_check(&cfg)]))),
    ];
    let mut all = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (ok, detail) = run();
        all &= ok;
        println!("criterion {} {name}: {}  [{detail}]", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    println!("acceptance finished in {:.1}s", started.elapsed().as_secs_f64());
    assert!(all, "some acceptance criteria failed");
}
