use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate fidelity: both |t0| and |t| vanish")]
    DegenerateFidelity,

    #[error("invalid range for `{name}`: {reason}")]
    InvalidRange { name: &'static str, reason: String },

    #[error("input amplitudes are not normalized (|alpha|^2 + |beta|^2 = {0})")]
    NonNormalizedInput(f64),

    #[error("qubit index {index} out of range for a register of {len} qubits")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("register has zero norm")]
    ZeroNormRegister,

    #[error("unknown qubit label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate qubit label `{0}`")]
    DuplicateLabel(String),

    #[error("register of {0} qubits exceeds the {max}-qubit cap", max = crate::qstate::MAX_QUBITS)]
    TooManyQubits(usize),

    #[error("expected a {expected}-qubit operand, got {got}")]
    WrongDimension { expected: usize, got: usize },

    #[error("density matrix trace {0} is not 1")]
    InvalidTrace(f64),

    #[error("registers differ in shape: {0}")]
    ShapeMismatch(String),

    #[error("qubit `{id}` is a {found}, expected a {expected}")]
    KindMismatch {
        id: String,
        expected: &'static str,
        found: &'static str,
    },

    #[error("photon `{id}` has frequency {photon}, gate was built at {gate}")]
    FrequencyMismatch { id: String, photon: f64, gate: f64 },

    #[error("invalid protocol input: {0}")]
    InvalidProtocolInput(String),

    #[error("no heralded branch has nonzero probability")]
    ZeroSuccessProbability,
}

pub type Result<T> = std::result::Result<T, Error>;
