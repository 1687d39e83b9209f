use thiserror::Error;

/// Errors raised by the spin, frame and QRF routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QrfError {
    #[error("invalid spin quantum number {0}: must be a non-negative multiple of 1/2")]
    InvalidSpin(f64),

    #[error("invalid magnetic quantum number m = {m} for spin {s}")]
    InvalidProjection { m: f64, s: f64 },

    #[error("vector is not a unit vector (norm {norm})")]
    NonUnitVector { norm: f64 },

    #[error("angle {name} = {value} outside its allowed range")]
    AngleOutOfRange { name: &'static str, value: f64 },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("eigenvalue {value} outside the function domain [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("frame is not orthonormal (max deviation {deviation:e})")]
    NonOrthonormalFrame { deviation: f64 },

    #[error("frame is gimbal locked (f3.e3 = {cos_beta})")]
    GimbalLock { cos_beta: f64 },

    #[error("frame is improper; a proper frame is required here")]
    ImproperFrame,

    #[error("branch {branch}: reflection of a vector-form spin state is not supported")]
    UnsupportedReflection { branch: usize },

    #[error("branch {branch}: {reason}")]
    InvalidBranch { branch: usize, reason: String },

    #[error("Hamiltonian is not rotationally invariant (deviation {deviation:e})")]
    NotInvariant { deviation: f64 },
}

pub type Result<T> = std::result::Result<T, QrfError>;
