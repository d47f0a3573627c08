use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state vector has zero norm")]
    ZeroVector,

    #[error("amplitude is not finite")]
    NonFinite,

    #[error("amplitude vector of length {len} is not a power of two")]
    BadLength { len: usize },

    #[error("state is not normalized (squared norm {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("register of {requested} qubits exceeds the maximum of {max}")]
    CapacityExceeded { requested: usize, max: usize },

    #[error("qubit index {index} out of range for {num_qubits}-qubit register")]
    IndexOutOfRange { index: usize, num_qubits: usize },

    #[error("measured qubits must be distinct (got {0} twice)")]
    RepeatedQubit(usize),

    #[error("projector mass {mass:e} too small; state is degenerate")]
    DegenerateState { mass: f64 },

    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },

    #[error("gate is not unitary (deviation {deviation:e})")]
    NonUnitary { deviation: f64 },

    #[error("message length {m} outside 1..={max}")]
    MessageLength { m: usize, max: usize },

    #[error("invalid outcome code {0}")]
    InvalidCode(u8),

    #[error("key of agent {agent} has {len} bits; expected 1 or {m}")]
    KeyLengthMismatch { agent: String, len: usize, m: usize },

    #[error("not enough samples for CHSH combination ({alice_angle}, {agent_angle})")]
    InsufficientSamples { alice_angle: f64, agent_angle: f64 },

    #[error("batch of {batch} photons cannot carry {needed} message and check photons after {forward_checks} forward checks")]
    BatchTooSmall {
        batch: usize,
        forward_checks: usize,
        needed: usize,
    },

    #[error("key establishment for agent {agent} failed after {attempts} attempts")]
    RetriesExhausted { agent: String, attempts: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
