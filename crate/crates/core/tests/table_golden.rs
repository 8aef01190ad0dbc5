use mbqc_core::{procedure_a_evolution, render_table};

/// Rows transcribed by hand: (title, stabilizers, [X1, Z1, X4, Z4]).
const EXPECTED: [(&str, [&str; 2], [&str; 4]); 5] = [
    ("At start", ["IXZI", "IZXI"], ["XIII", "ZIII", "IIIX", "IIIZ"]),
    ("1a) Measure ZXII", ["IXZI", "ZXII"], ["XZXI", "ZIII", "IIIX", "IIIZ"]),
    ("1b) Measure IIXZ", ["IIXZ", "ZXII"], ["XZXI", "ZIII", "IXZX", "IIIZ"]),
    ("2a) Measure IZII", ["IIXZ", "IZII"], ["XZXI", "ZIII", "ZIZX", "IIIZ"]),
    ("2b) Measure IIZI", ["IIZI", "IZII"], ["XIIZ", "ZIII", "ZIIX", "IIIZ"]),
];

fn expected_text() -> String {
    let blocks: Vec<String> = EXPECTED
        .iter()
        .map(|(title, s, t)| {
            let mut b = format!("{title}\nS:\n+{}\n+{}\ntracked:\n", s[0], s[1]);
            for (name, op) in ["X1", "Z1", "X4", "Z4"].iter().zip(t) {
                b.push_str(&format!("{name}: +{op}\n"));
            }
            b
        })
        .collect();
    blocks.join("\n")
}

#[test]
fn procedure_a_table_matches_row_by_row() {
    let blocks = procedure_a_evolution().unwrap();
    assert_eq!(blocks.len(), EXPECTED.len());
    for (b, (title, s, t)) in blocks.iter().zip(EXPECTED.iter()) {
        assert_eq!(&b.title, title);
        let stabs: Vec<String> = b.tableau.stabilizers().iter().map(|p| p.to_string()).collect();
        assert_eq!(stabs, s.iter().map(|x| format!("+{x}")).collect::<Vec<_>>(), "{title}");
        for (i, op) in t.iter().enumerate() {
            assert_eq!(b.tableau.tracked()[i].op.to_string(), format!("+{op}"), "{title} row {i}");
        }
    }
}

#[test]
fn rendered_table_is_stable() {
    assert_eq!(render_table(&procedure_a_evolution().unwrap()), expected_text());
}

#[test]
fn final_block_realises_controlled_phase() {
    // CZ sends X1 → X1 Z4 and X4 → Z1 X4 and fixes the Z's
    let last = procedure_a_evolution().unwrap().pop().unwrap();
    let ops: Vec<String> = last.tableau.tracked().iter().map(|t| t.op.to_string()).collect();
    assert_eq!(ops, ["+XIIZ", "+ZIII", "+ZIIX", "+IIIZ"]);
}
