use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("qubit index {index} out of range for a {n}-qubit register")]
    QubitOutOfRange { index: usize, n: usize },

    #[error("register of {0} qubits exceeds the dense-simulation cap of {max} qubits", max = crate::sim::MAX_QUBITS)]
    TooManyQubits(usize),

    #[error("gate matrix is not unitary (max deviation {0:.3e})")]
    NonUnitary(f64),

    #[error("Kraus operators violate completeness (max deviation {0:.3e})")]
    Incomplete(f64),

    #[error("observable is not Hermitian (max deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("observable must be diagonal in the computational basis for sampled or corrupted evaluation")]
    NonDiagonalObservable,

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("probability {0} out of range")]
    Probability(f64),

    #[error("invalid read-out model: {0}")]
    Readout(String),

    #[error("parameter slot {slot} out of range for {p} parameters")]
    ParamOutOfRange { slot: usize, p: usize },

    #[error("parameter {0} is attached to a gate that is not tagged as shift-rule compatible")]
    NotShiftable(usize),

    #[error("shift {0} is an integer multiple of pi")]
    DegenerateShift(f64),

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("samples are degenerate (zero variance)")]
    ZeroVariance,

    #[error("iterate diverged at k={k}: {reason}")]
    Diverged { k: usize, reason: String },
}
