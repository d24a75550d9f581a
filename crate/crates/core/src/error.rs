use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Variants are grouped by the exit-code class the command-line front end
/// maps them onto (see [`Error::exit_code`]).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("rectangular potential cannot be evaluated at non-real coordinate {x}")]
    UnsupportedEvaluation { x: num_complex::Complex64 },

    #[error("rotation angle {theta} reaches the divergence limit pi/4 of the Gaussian factor")]
    DivergentRotation { theta: f64 },

    #[error("cannot classify stationary point near x0 = {x0}: no derivative up to order 8 resolves it")]
    ClassificationAmbiguous { x0: f64 },

    #[error("solver did not converge after {iterations} refinements (last iterates {previous} and {last})")]
    ConvergenceFailure {
        iterations: usize,
        previous: num_complex::Complex64,
        last: num_complex::Complex64,
    },

    #[error("quadrature did not reach tolerance: achieved residual {residual:e}")]
    QuadratureFailure { residual: f64 },

    #[error("phase unwrapping is ambiguous between E = {lower} and E = {upper}; refine the grid")]
    UnwrapAmbiguity { lower: f64, upper: f64 },

    #[error("eigensolver failed for a {size}x{size} matrix (max |element| = {scale:e})")]
    EigensolverFailure { size: usize, scale: f64 },

    #[error("eigenvalue {index} ({value}) lies in a non-physical region of the complex plane")]
    ClassificationAnomaly {
        index: usize,
        value: num_complex::Complex64,
    },

    #[error("evaluation point {point} is within {distance:e} of pole {index}")]
    PoleProximity {
        index: usize,
        point: num_complex::Complex64,
        distance: f64,
    },

    #[error("energy {energy} coincides with a singular energy {singular}")]
    SingularEnergy { energy: f64, singular: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("turning point search failed in [{lower}, {upper}]")]
    EventDetection { lower: f64, upper: f64 },

    #[error("trajectory did not leave the interaction region before s = {s_max}")]
    IncompleteTrajectory { s_max: f64 },

    #[error("singularity fit is unreliable: {0}")]
    FitUnreliable(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for the command-line front end:
    /// 2 config error, 3 numerical non-convergence, 4 precondition violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) | Error::InvalidPotential(_) => 2,
            Error::ConvergenceFailure { .. }
            | Error::QuadratureFailure { .. }
            | Error::EigensolverFailure { .. }
            | Error::EventDetection { .. }
            | Error::FitUnreliable(_)
            | Error::IncompleteTrajectory { .. } => 3,
            _ => 4,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
