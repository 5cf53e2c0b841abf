use thiserror::Error;

/// Errors raised by the simulator and its analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("atom {0} is already registered")]
    DuplicateAtom(u64),

    #[error("atom {0} is not registered")]
    UnknownAtom(u64),

    #[error("excitation probability {0} exceeds unity (corrupted state)")]
    CorruptedState(f64),

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("cavity jump requested on a state with no photons")]
    NoPhoton,

    #[error("atom {0} carries no excitation")]
    NoExcitation(u64),

    #[error("expected {expected} couplings, got {got}")]
    MissingCoupling { expected: usize, got: usize },

    #[error("total jump probability {0:.3e} per step is too large; reduce dt")]
    StepTooLarge(f64),

    #[error("atom count {count} exceeds the configured cap of {cap}")]
    AtomCap { count: usize, cap: usize },

    #[error("collected {got} samples, at least {need} are required")]
    TooFewSamples { got: usize, need: usize },

    #[error("series of length {len} is too short for a lag of {lag} samples")]
    SeriesTooShort { len: usize, lag: usize },

    #[error("empty series")]
    EmptySeries,

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("dense oracle: {0}")]
    Oracle(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}

impl Error {
    /// Process exit status: 2 for usage and configuration problems, 3 when a
    /// resource cap is hit, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::AtomCap { .. } => 3,
            Error::InvalidParameter { .. }
            | Error::Config { .. }
            | Error::UnknownPreset(_)
            | Error::StepTooLarge(_)
            | Error::TooFewSamples { .. }
            | Error::Io(_) => 2,
            _ => 1,
        }
    }
}
