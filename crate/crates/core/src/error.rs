use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("torus knot winding numbers ({p}, {q}) are not coprime")]
    NotCoprime { p: u32, q: u32 },

    #[error("too few samples: got {got}, need at least {min}")]
    TooFewSamples { got: usize, min: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The Gamma/1F2 closed form divides by zero for this order.
    #[error("closed form is degenerate at l = {l}; use quadrature")]
    DegenerateClosedForm { l: u32 },

    #[error("parameter at a pole: {0}")]
    ParameterPole(String),

    #[error("forward scattering: momentum transfer is zero")]
    ForwardScattering,

    #[error("kinematics off the energy shell: |k_i| = {ki}, |k_n| = {kn}")]
    OffShell { ki: f64, kn: f64 },

    #[error("field point lies on the curve (distance {0:e})")]
    PointOnCurve(f64),

    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),

    #[error("argument outside supported range: {0}")]
    OutOfRange(String),

    #[error("missing harmonic coefficient for (l, m) = ({l}, {m})")]
    MissingCoefficient { l: u32, m: i32 },

    #[error("monomial degree {0} exceeds 3")]
    MonomialDegree(u32),

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
