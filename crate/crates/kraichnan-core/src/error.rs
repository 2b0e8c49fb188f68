use thiserror::Error;

/// Errors surfaced by the toolkit.
///
/// `Domain` covers precondition violations on plain arguments; the remaining
/// variants are named after the failure modes the solvers can hit at run
/// time (factorization breakdown, under-resolved mollifiers, paths leaving
/// the sampled grid, spectral truncation).
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// Itô-mode solvers require κ = ν₂ − ½ρ(0) > 0.
    #[error("low-turbulence condition violated: kappa = {kappa} <= 0 (need nu2 > rho(0)/2)")]
    LowTurbulence { kappa: f64 },

    /// Covariance factorization failed even after the maximum diagonal jitter.
    #[error("degenerate kernel: {0}")]
    DegenerateKernel(String),

    /// Mollifier width too small for the grid spacing.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// A sampled path left the spatial grid of the noise realization.
    #[error("out of sampled domain: {0}")]
    OutOfDomain(String),

    #[error("unsupported kernel: {0}")]
    UnsupportedKernel(String),

    /// Too few usable box counts for a dimension fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Frequency-truncation tail bound violated in the spectral solver.
    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerical machinery itself, as opposed to
    /// bad arguments. The CLI maps these to a distinct exit code.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateKernel(_) | Error::Resolution(_) | Error::Truncation(_)
        )
    }
}
