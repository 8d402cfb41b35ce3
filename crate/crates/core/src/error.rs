use thiserror::Error;

/// Errors raised by the numerical and symbolic routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("invalid phase: {0}")]
    InvalidPhase(String),

    #[error("invalid amplitude: {0}")]
    InvalidAmplitude(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error(
        "quadrature budget of {max_points} points exceeded (estimated error {estimate:e}, tolerance {tolerance:e})"
    )]
    BudgetExceeded {
        max_points: usize,
        estimate: f64,
        tolerance: f64,
    },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("no finite contact order up to {max_m}")]
    NoFiniteContact { max_m: u32 },

    #[error("symbol has vanishing gradient at the crossing")]
    ZeroGradient,

    #[error("sign s is undefined: a Hamiltonian inner product vanishes")]
    DegenerateS,

    #[error("normal-form constant c is not defined in the transversal case (m = 1)")]
    TransversalUnsupported,

    #[error("Neumann series is not contractive: estimated norm {estimate:.3e} >= 1/2")]
    NotContractive { estimate: f64 },

    #[error("ODE integration failed at x = {x}: {reason}")]
    StepFailure { x: f64, reason: String },

    #[error("extraction window [{lo}, {hi}] intersects the coupling support")]
    WindowInsideSupport { lo: f64, hi: f64 },

    #[error("problem does not match the requested crossing case: {0}")]
    CaseMismatch(String),

    #[error("a turning point lies inside the integration range")]
    TurningPointInRange,

    #[error("branch matrix is ill-conditioned at x = {x} (|det| = {det:e})")]
    IllConditioned { x: f64, det: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
