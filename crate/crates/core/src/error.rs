use thiserror::Error;

/// Errors produced by the simulation, pattern, rewriting and scheduling layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} qubits, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("qubit index {index} out of range for {n} qubits")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("two-qubit operation needs distinct qubits, got {0} twice")]
    CoincidentQubits(usize),

    #[error("measured observable must have phase +1, found {0}")]
    NonHermitianObservable(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("register of {requested} qubits exceeds the statevector cap of {cap}")]
    CapExceeded { requested: usize, cap: usize },

    #[error("amplitudes are not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("forced outcome {bit} has zero probability")]
    ZeroProbabilityBranch { bit: u8 },

    #[error("forced outcome list exhausted after {consumed} outcomes")]
    ForcedOutcomesExhausted { consumed: usize },

    #[error("outcome depends on the unspecified logical state (observable {0})")]
    IndeterminateLogical(String),

    #[error("qubit {0} is not in a single-qubit eigenstate and cannot be removed")]
    NotProductQubit(usize),

    #[error("tableau is not a graph-state tableau: {0}")]
    NotGraphState(String),

    #[error("pattern error: {0}")]
    Pattern(String),

    #[error("no consistent Pauli byproduct: {0}")]
    NoByproductFit(String),

    #[error("arity mismatch: {left} outputs vs {right} inputs")]
    Arity { left: usize, right: usize },

    #[error("repeat-until-success exceeded {0} attempts")]
    AttemptCapExceeded(usize),

    #[error("rule {rule} does not match at {site}: {reason}")]
    RuleMismatch { rule: String, site: String, reason: String },

    #[error("circuit error: {0}")]
    Circuit(String),

    #[error("circuits are not equivalent: {0}")]
    NotEquivalent(String),

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_qubit(index: usize, n: usize) -> Result<()> {
    if index < n {
        Ok(())
    } else {
        Err(Error::QubitOutOfRange { index, n })
    }
}
