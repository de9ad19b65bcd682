use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("not a density matrix: {0}")]
    NotDensity(String),

    #[error("pauli word has {len} sites but the register only has {n}")]
    WordTooLong { len: usize, n: u64 },

    #[error("moment table is missing entry `{word}` required by the expansion")]
    IncompleteTable { word: String },

    #[error("moment table has frame {found:?} where {expected:?} is required")]
    WrongFrame {
        expected: crate::moments::Frame,
        found: crate::moments::Frame,
    },

    #[error("{what} is limited to {limit} qubits (requested {n})")]
    TooLarge {
        what: &'static str,
        n: u64,
        limit: u64,
    },

    #[error("degeneracy resolution failed: off-block residual {residual:.3e} exceeds {tol:.1e}")]
    DegeneracyResolution { residual: f64, tol: f64 },

    #[error("phase is unidentifiable: d<J_y>/dphi vanishes at eta = 0")]
    UnidentifiablePhase,

    #[error("variance {value:.6e} is more negative than the rounding slack {slack:.3e}")]
    NegativeVariance { value: f64, slack: f64 },

    #[error("{op} requires the phi = 0 operating point (got phi = {phi})")]
    RequiresPhiZero { op: &'static str, phi: f64 },

    #[error("site list {0:?} repeats a site; same-site contractions are the caller's job")]
    RepeatedSite(Vec<usize>),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
