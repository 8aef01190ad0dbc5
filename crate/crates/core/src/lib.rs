//! Measurement-based quantum computing toolkit: stabilizer and statevector
//! engines, one-way measurement patterns, teleportation gadgets, circuit
//! rewriting between the two models and graph-state preparation schedules.

pub mod circuit;
pub mod error;
mod gf2;
pub mod graph;
pub mod matrix;
pub mod pattern;
pub mod pauli;
pub mod policy;
pub mod rewrite;
pub mod scheduler;
pub mod statevector;
pub mod suites;
pub mod tableau;
pub mod tqc;

pub use error::{Error, Result};
pub use graph::Graph;
pub use pauli::{conjugate_by_clifford, pauli_commutes, pauli_multiply, CliffordGate, Pauli, PauliString};
pub use policy::{enumerate_branches, BellBits, OutcomePolicy, DETERMINISTIC_EPS};
pub use tableau::{delete_qubit_z, measure_pauli, tableau_from_graph, StabilizerTableau, TrackedOperator};
pub use matrix::Matrix;
pub use statevector::{fidelity, Basis, StateVector};
pub use pattern::{
    build_pattern, compose_patterns, derive_byproduct_rule, eliminate_wires, execute_branch, execute_pattern,
    resource_count, tensor_patterns, ByproductRule, MeasurementPattern, Parity, PatternKind, PatternRun, PlanStep, ResourceCount,
    StepBasis,
};
pub use tqc::{
    cnot_gadget, prepare_ancilla_cnot, procedure_a_evolution, remote_cnot_circuit, remote_cz, render_table,
    repeat_until_success, teleport_apply, Procedure, Transcript, Variant,
};
pub use circuit::{pattern_circuit, run_circuit, teleportation_circuit, verify_equivalence, Circuit, EquivalenceReport, Op};
pub use rewrite::{
    apply_rule, map_cnot_between_models, map_rotation_to_generalized_bell, map_wire_to_teleportation, MappingDirection,
    RewriteRule, RewriteTrace, RuleId,
};
pub use scheduler::{
    bipartite_edge_coloring, build_aux_graph, build_schedule, execute_schedule, AuxGraph, EdgeColoring, MeasurementSchedule,
    ScheduleProcedure, ScheduleRun,
};
