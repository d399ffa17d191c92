use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside an operation's domain (bad weight, wire out of range, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("ancilla not restored: leaked norm {leaked:.3e}")]
    AncillaLeak { leaked: f64 },

    #[error("particle number not conserved: leaked norm {leaked:.3e}")]
    Leakage { leaked: f64 },

    #[error("unsupported gate: {0}")]
    Unsupported(String),

    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),

    #[error("preparation plan error: {0}")]
    Plan(String),

    #[error("size cap exceeded: {wires} wires (cap {cap})")]
    TooLarge { wires: usize, cap: usize },

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors that indicate a numerical tolerance was exceeded
    /// rather than malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::AncillaLeak { .. } | Error::Leakage { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
