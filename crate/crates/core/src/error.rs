use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("correlation matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("{which} = {supplied} contradicts the Markov relation (expected {expected})")]
    MarkovViolation {
        which: &'static str,
        supplied: f64,
        expected: f64,
    },

    #[error("{0}")]
    Range(String),

    #[error("degenerate denominator in {0}")]
    DegenerateDenominator(&'static str),

    #[error("the Markov chain X -> (S1,S2) -> Z must be asserted for {0}")]
    MarkovRequired(&'static str),

    #[error("singular covariance (det = {det:.3e})")]
    SingularCovariance { det: f64 },

    #[error("rate has no interior maximum on [{lo}, {hi}]")]
    NoInteriorMax { lo: f64, hi: f64 },

    #[error("target correlation {rho_target} not reachable: copula parameter {rho_param} outside [-1, 1] (|rho| <= {limit} for these marginals)")]
    OutOfRange {
        rho_target: f64,
        rho_param: f64,
        limit: f64,
    },

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("CDF inversion failed: {0}")]
    InversionFailure(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("{0}")]
    Input(String),
}

impl Error {
    /// Stable identifier printed by the CLI.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NotPsd { .. } => "NotPSD",
            Error::MarkovViolation { .. } => "MarkovViolation",
            Error::Range(_) => "RangeError",
            Error::DegenerateDenominator(_) => "DegenerateDenominator",
            Error::MarkovRequired(_) => "MarkovRequired",
            Error::SingularCovariance { .. } => "SingularCovariance",
            Error::NoInteriorMax { .. } => "NoInteriorMax",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::QuadratureFailure(_) => "QuadratureFailure",
            Error::InversionFailure(_) => "InversionFailure",
            Error::LengthMismatch(..) => "LengthMismatch",
            Error::Input(_) => "InputError",
        }
    }
}
