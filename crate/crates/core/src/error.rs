use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{what} out of range: {detail}")]
    Range { what: &'static str, detail: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("grid of {grid_size} points cannot resolve an arc of normalized length {arc_length:e}; need at least {required_grid}")]
    Resolution {
        grid_size: usize,
        arc_length: f64,
        required_grid: usize,
    },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("point {modulus} lies outside the evaluation domain (|z| <= {limit})")]
    OutOfDomain { modulus: f64, limit: f64 },

    #[error("boundedness certificate refused for exponent {exponent} (needs p >= 2)")]
    CertificateRefused { exponent: f64 },

    #[error("Gram matrix ill-conditioned: min eigenvalue {min_eigenvalue:e}, max {max_eigenvalue:e}; closest nodes {closest:?}")]
    IllConditioned {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
        closest: (usize, usize),
    },

    #[error("quadratic form is negative ({0:e}); metric corrupted")]
    MetricCorruption(f64),

    #[error("evaluation point coincides with node {0}")]
    Pole(usize),

    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("subspaces are trivial for fewer than two nodes")]
    TrivialSubspace,

    #[error("numerically degenerate complement (G-norm {0:e})")]
    DegenerateComplement(f64),

    #[error("resolvent singular: point within {margin:e} of eigenvalue of node {node}")]
    ResolventSingular { node: usize, margin: f64 },

    #[error("nodes {0} and {1} coincide")]
    DuplicateNodes(usize, usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("root tracking found {found} boundary solutions, expected {expected}")]
    RootTracking { found: usize, expected: usize },

    #[error("consistency: {0}")]
    Consistency(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn range(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Range {
            what,
            detail: detail.into(),
        }
    }
}
