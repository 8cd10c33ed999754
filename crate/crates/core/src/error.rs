use thiserror::Error;

/// Largest atom number the full product space is built for.
pub const MAX_FULL_ATOMS: u32 = 6;

#[derive(Debug, Error)]
pub enum Error {
    #[error("full product space holds at most {max} atoms (requested {atom_count}); use the superatom model for larger ensembles")]
    Capacity { atom_count: u32, max: u32 },

    #[error("atom index {index} out of range for {atom_count} atoms")]
    AtomIndex { index: usize, atom_count: u32 },

    #[error("collective state {which} needs at least {needed} atoms (have {atom_count})")]
    UnsupportedState {
        which: &'static str,
        needed: u32,
        atom_count: u32,
    },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("spectral projections span rank {rank}, expected {dim}")]
    IncompleteSpectrum { rank: usize, dim: usize },

    #[error("eigen-decomposition failed to converge")]
    NoConvergence,

    #[error("empty sweep grid")]
    EmptyGrid,

    #[error("unknown state label `{0}`")]
    UnknownLabel(String),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("g2 undefined: first-order correlation {denominator:e} is vacuum-like")]
    VacuumCorrelation { denominator: f64 },

    #[error("detuning must be nonzero for adiabatic elimination")]
    ZeroDetuning,

    #[error("noise channel `{0}` is not configured")]
    MissingChannel(&'static str),

    #[error("replay log mismatch: {0}")]
    Replay(String),

    #[error("step too coarse: trace drifted by {drift:e} during cycle {cycle}")]
    StepTooCoarse { cycle: u32, drift: f64 },

    #[error("invariant violated at sample {sample}: {what} = {value:e}")]
    Invariant {
        what: &'static str,
        value: f64,
        sample: usize,
    },

    #[error("observer set invalid: {0}")]
    Observers(String),

    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }

    /// True for failures of a numerical invariant (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian { .. }
                | Error::NotUnitary { .. }
                | Error::IncompleteSpectrum { .. }
                | Error::NoConvergence
                | Error::StepTooCoarse { .. }
                | Error::Invariant { .. }
                | Error::VacuumCorrelation { .. }
        )
    }

    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::InvalidParams(_)
                | Error::Capacity { .. }
                | Error::UnknownExperiment(_)
                | Error::UnknownLabel(_)
                | Error::EmptyGrid
                | Error::MissingChannel(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
