use mbqc_core::suites::{run_suite, Suite, SuiteConfig};

fn small() -> SuiteConfig {
    SuiteConfig { rus_runs: 400, random_graphs: 20, seeds_per_graph: 2, random_circuits: 60, ..SuiteConfig::default() }
}

#[test]
fn every_suite_passes_at_reduced_size() {
    for report in run_suite(Suite::All, &small()) {
        println!("{report}");
        assert!(report.passed(), "{report}");
    }
}

#[test]
fn pattern_branch_counts() {
    let reports = run_suite(Suite::Patterns, &small());
    let r = &reports[0];
    for (name, n) in [("wire", 4), ("xrot", 4), ("zrot", 4), ("euler", 16), ("cnot6", 16), ("cnot_square", 256), ("remote_cz", 4)] {
        assert_eq!(r.check(name).unwrap().branches, n, "{name}");
    }
}

#[test]
fn suite_names_parse() {
    for s in ["all", "patterns", "gadgets", "mapping", "scheduler", "engines"] {
        assert_eq!(s.parse::<Suite>().unwrap().name(), s);
    }
    assert!("bogus".parse::<Suite>().is_err());
}
