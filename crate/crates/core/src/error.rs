use std::fmt;

use thiserror::Error;

/// Which side of the admissible annulus a stencil violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Inner,
    Outer,
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Inner => f.write_str("inner radius r_min"),
            Bound::Outer => f.write_str("outer radius r_max"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("ambient dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("ambient dimension {0} outside supported range 3..=8")]
    UnsupportedDimension(usize),

    #[error("multivector is not homogeneous")]
    NotHomogeneous,

    #[error("interior product needs grade(gamma) >= grade(beta), got {gamma} < {beta}")]
    GradeTooLow { gamma: usize, beta: usize },

    #[error("stencil around |x| = {radius:.6e} reaches {reach:.6e}, violating the {bound} = {limit:.6e}")]
    StencilOutOfDomain {
        radius: f64,
        reach: f64,
        bound: Bound,
        limit: f64,
    },

    #[error("evaluation at |x| = {radius:.6e} is outside the {bound} = {limit:.6e}")]
    OutsideDomain { radius: f64, bound: Bound, limit: f64 },

    #[error("degenerate point ({0:.6e}, {1:.6e}): gradient of the immersion vanishes")]
    Degenerate(f64, f64),

    #[error("inversion pole: |Phi(x)| < 1e-12 at ({0:.6e}, {1:.6e})")]
    InversionPole(f64, f64),

    #[error("quadrature needs at least 4 nodes per direction, got n_r = {n_r}, n_phi = {n_phi}")]
    QuadratureTooCoarse { n_r: usize, n_phi: usize },

    #[error("invalid annulus [{r_in}, {r_out}] for field domain [{r_min}, {r_max}]")]
    InvalidAnnulus {
        r_in: f64,
        r_out: f64,
        r_min: f64,
        r_max: f64,
    },

    #[error("not a finite-order branch point: log-slope {slope:.4} is {defect:.3} from the nearest integer")]
    NotBranchPoint { slope: f64, defect: f64 },

    #[error("Fourier projection signal-to-noise ratio {0:.3} below 10")]
    LowSnr(f64),

    #[error("ill-conditioned normal equations (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("rotation is not orthogonal: |R^T R - I| = {0:.3e}")]
    NonOrthogonal(f64),

    #[error("invalid surface: {0}")]
    InvalidSurface(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no consistent sign for pi_n V = s n_|(n_|V) in dimension {0}")]
    InconsistentSign(usize),
}

pub type Result<T> = std::result::Result<T, LabError>;
