use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid spin magnitude: {0}")]
    InvalidSpin(String),

    #[error("dense state of dimension {dim} exceeds the cap of {max}; use the closed-form path instead")]
    DimensionOverflow { dim: usize, max: usize },

    #[error("polar angle {0} outside [0, pi]")]
    InvalidAngle(f64),

    #[error("unphysical twist parameters: mu' = {mu_prime} must be >= |mu| = {mu}", mu = .mu.abs())]
    NonPhysicalParameters { mu: f64, mu_prime: f64 },

    #[error("invalid twist parameter: {0}")]
    InvalidParameter(String),

    #[error("a pulse train needs at least one pulse")]
    EmptyPulseTrain,

    #[error("closed form requires mu in (-pi, pi), got {0}")]
    MuOutOfRange(f64),

    #[error("cos(mu) is exactly zero at mu = {0}; power of cos(mu) is singular")]
    SingularCosine(f64),

    #[error("ellipse model invalid: transverse mean ({mean_y:e}, {mean_z:e}) is not centred")]
    EllipseModelInvalid { mean_y: f64, mean_z: f64 },

    #[error("state violates {invariant}: deviation {deviation:e}")]
    InvariantViolation { invariant: &'static str, deviation: f64 },

    #[error("matrix has {got} elements, expected {expected}")]
    ShapeMismatch { got: usize, expected: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("root not bracketed on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    RootNotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("oracle scope exceeded: {0}")]
    OracleScope(String),

    #[error("Fock lattice of {size} amplitudes exceeds the cap of {max}")]
    LatticeTooLarge { size: usize, max: usize },

    #[error("invalid optical setup: {0}")]
    InvalidSetup(String),

    #[error("target mu = {target_mu:e} is infeasible: assumption '{flag}' fails ({detail})")]
    Infeasible {
        target_mu: f64,
        flag: String,
        detail: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
