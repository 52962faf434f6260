use thiserror::Error;

/// Errors raised by the decomposition and regression routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("series spans less than one whole day ({0} observations)")]
    InsufficientSpan(usize),

    #[error("series contains {count} missing values (first at index {first}); impute before embedding")]
    MissingValues { count: usize, first: usize },

    #[error("window length {window} outside [2, {max}] for series of length {n}")]
    WindowLength { window: usize, n: usize, max: usize },

    #[error("singular covariance: {0}")]
    SingularCovariance(String),

    #[error("matrix has no nonzero singular values")]
    ZeroMatrix,

    #[error("elementary series {0} has zero weighted norm")]
    ZeroNorm(usize),

    #[error("eigentriple index {index} out of range 1..={d}")]
    IndexOutOfRange { index: usize, d: usize },

    #[error("grouping is not a partition: overlapping {overlap:?}, missing {missing:?}")]
    NotPartition {
        overlap: Vec<usize>,
        missing: Vec<usize>,
    },

    #[error("frequency band {band} (periods ({lower}, {upper}]) receives no Fourier frequency")]
    EmptyBand { band: usize, lower: f64, upper: f64 },

    #[error("smooth covariate '{0}' is constant")]
    ConstantCovariate(String),

    #[error("parametric design is rank deficient; collinear columns: {0:?}")]
    RankDeficient(Vec<String>),

    #[error("invalid counts: {0}")]
    InvalidCounts(String),

    #[error("PIRLS failed to converge in {iterations} iterations; deviance trace {trace:?}")]
    NotConverged { iterations: usize, trace: Vec<f64> },

    #[error("penalized system is not positive definite")]
    NotPositiveDefinite,

    #[error("smoothing parameters {deltas:?} failed: {source}")]
    SmoothingFailed {
        deltas: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown exposure '{0}'")]
    UnknownExposure(String),

    #[error("invalid model comparison: degrees of freedom difference {0} is not positive")]
    InvalidComparison(f64),

    #[error("linear predictor {0} exceeds overflow guard 20; use smaller effects")]
    PredictorOverflow(f64),

    #[error("csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
