use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("matrix is not symplectic: defect {defect:.3e} exceeds {tol:.3e}")]
    NotSymplectic { defect: f64, tol: f64 },

    #[error("tangent vector flavor mismatch: {0}")]
    Flavor(String),

    #[error("singular {size}x{size} solve on low-rank factors (try rank recompression)")]
    DegenerateFactors { size: usize },

    /// The Cayley chart is close to an eigenvalue -1; the caller should reduce the step size.
    #[error("coordinate map breakdown: {0}")]
    CoordinateBreakdown(String),

    #[error("overapproximation: Gram matrix Z^T Z + J^T Z^T Z J is rank deficient (smin/smax = {ratio:.3e})")]
    Overapproximation { ratio: f64 },

    #[error("initialization error: {0}")]
    Initialization(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("fixed-point iteration did not converge in {iters} iterations (relative update {residual:.3e}); reduce dt")]
    NonConvergence { iters: usize, residual: f64 },

    #[error("step {index} failed: {source}")]
    Step {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures that a smaller time step can cure.
    pub fn is_step_size_related(&self) -> bool {
        match self {
            Error::CoordinateBreakdown(_) | Error::DegenerateFactors { .. } | Error::NonConvergence { .. } => true,
            Error::Step { source, .. } => source.is_step_size_related(),
            _ => false,
        }
    }

    pub(crate) fn at_step(self, index: usize) -> Error {
        match self {
            e @ Error::Step { .. } => e,
            e => Error::Step { index, source: Box::new(e) },
        }
    }
}
