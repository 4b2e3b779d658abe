use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the numerical pipeline can report.
///
/// Variants are grouped by the module that raises them; [`Error::module`]
/// gives the tag used in CLI diagnostics.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate parametrization: |q'(t)| = {speed:e} at t = {t}")]
    DegenerateParametrization { t: f64, speed: f64 },
    #[error("point ({}, {}) is not strictly inside the domain", .point[0], .point[1])]
    NotInterior { point: [f64; 2] },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("boundary components {0} and {1} have coincident nodes")]
    CoincidentNodes(usize, usize),
    #[error("ill-conditioned layer system (condition estimate {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("eigenvalue {value:e} is negative beyond tolerance")]
    NegativeEigenvalue { value: f64 },
    #[error("eigensolver failure: {0}")]
    EigenSolver(String),

    #[error(
        "point ({}, {}) is {distance:e} from the boundary, below the reliable distance {d_min:e}",
        .point[0], .point[1]
    )]
    TooCloseToBoundary { point: [f64; 2], distance: f64, d_min: f64 },

    #[error("h = {h} too large: periodized Gaussian images overlap ({overlap:e})")]
    PeriodizationOverlap { h: f64, overlap: f64 },
    #[error("heat-kernel series needs |k| <= {needed} but the samples only resolve {available}")]
    TruncationUnmet { needed: usize, available: usize },
    #[error("gamma = {0} is outside (0, 1/2)")]
    GammaOutOfRange(f64),
    #[error("weighted norm overflows (log-norm {0})")]
    WeightOverflow(f64),
    #[error("mode with sigma = {sigma} is not resolved on the grid (wavenumber {wavenumber} > {limit})")]
    UnresolvedMode { sigma: f64, wavenumber: usize, limit: usize },

    #[error("{found} samples in fit range, at least {needed} required")]
    TooFewSamples { found: usize, needed: usize },
    #[error("rank-deficient fit design")]
    RankDeficient,
    #[error("fit refused: residual {residual:e} exceeds threshold {threshold:e}")]
    FitRefused { residual: f64, threshold: f64 },
}

impl Error {
    /// Module tag for diagnostics.
    pub fn module(&self) -> &'static str {
        use Error::*;
        match self {
            InvalidParameter(_) => "params",
            DegenerateParametrization { .. } | NotInterior { .. } | InvalidDomain(_) => "geometry",
            CoincidentNodes(..) | IllConditioned { .. } | NegativeEigenvalue { .. } | EigenSolver(_) => "dtn",
            TooCloseToBoundary { .. } => "extension",
            PeriodizationOverlap { .. }
            | TruncationUnmet { .. }
            | GammaOutOfRange(_)
            | WeightOverflow(_)
            | UnresolvedMode { .. } => "fbi",
            TooFewSamples { .. } | RankDeficient | FitRefused { .. } => "decay",
        }
    }
}
