use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the numerical modules and the command-line front end.
///
/// [`Error::is_config`] separates bad input (exit code 2) from numerical
/// failures (exit code 3).
#[derive(Debug, Error)]
pub enum Error {
    #[error("potential: {0}")]
    Potential(String),

    #[error("bloch: {0}")]
    Bloch(String),

    #[error("bloch: eigensolver did not converge for a {dim}x{dim} matrix")]
    EigenNonConvergence { dim: usize },

    #[error("singularity: {0}")]
    Singularity(String),

    #[error("{0}")]
    Quadrature(String),

    #[error("singularity: no symmetry-breaking transition in [{lo}, {hi}]")]
    NoTransition { lo: f64, hi: f64 },

    #[error("ladder: {0}")]
    Ladder(String),

    #[error("ladder: step control failed: {0}")]
    StepControl(String),

    #[error("packet: {0}")]
    Packet(String),

    #[error("packet: amplitude overflow (max |psi| = {peak:.3e}) at t = {time}")]
    Overflow { peak: f64, time: f64 },

    #[error("packet: field reached the periodic boundary at t = {time} ({fraction:.2e} of the norm in the edge bands)")]
    BoundaryWrap { time: f64, fraction: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error comes from invalid user input rather than the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Potential(_)
                | Error::Bloch(_)
                | Error::Singularity(_)
                | Error::NoTransition { .. }
                | Error::Ladder(_)
                | Error::Packet(_)
        )
    }
}
