use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // input and validation
    #[error("empty input")]
    EmptyInput,
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("duplicate row id `{0}`")]
    DuplicateRowId(String),
    #[error("duplicate column id `{0}`")]
    DuplicateColumnId(String),
    #[error("row `{row}`, column `{col}`: `{text}` is neither a number nor the missing-value token")]
    NonNumeric {
        row: String,
        col: String,
        text: String,
    },
    #[error("row `{row}`, column `{col}`: value is not finite")]
    NonFiniteCell { row: String, col: String },
    #[error("malformed csv: {0}")]
    Csv(String),
    #[error("column `{0}` has no present values")]
    ColumnAllMissing(String),
    #[error("column `{column}` is {missing} of {n} missing, above the {cap} cap")]
    TooManyMissing {
        column: String,
        missing: usize,
        n: usize,
        cap: f64,
    },
    #[error("data contain missing cells (row `{row}`, column `{col}`); impute first")]
    MissingCells { row: String, col: String },
    #[error("unknown fixture `{0}` (expected `potassium` or `eight_elements`)")]
    UnknownFixture(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("probability {0} outside (0, 1)")]
    ProbabilityOutOfRange(f64),
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("matrix contains non-finite entries")]
    NonFiniteMatrix,

    // estimator failures
    #[error("zero robust scale: {0}")]
    ZeroScale(String),
    #[error("constant input vector")]
    ConstantInput,
    #[error("every pair is tied; rank correlation undefined")]
    AllPairsTied,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("matrix is indefinite (eigenvalue {0})")]
    Indefinite(f64),
    #[error("reweighting rejected every row")]
    AllRowsRejected,
    #[error("every candidate subset has a singular covariance matrix")]
    DegenerateSubsets,
    #[error("correlation magnitude {0} is not below 1")]
    DegenerateCorrelation(f64),
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
}

impl Error {
    /// True when the failure comes from the numerical estimator rather than
    /// from malformed input or arguments.
    pub fn is_estimator_failure(&self) -> bool {
        matches!(
            self,
            Error::ZeroScale(_)
                | Error::ConstantInput
                | Error::AllPairsTied
                | Error::NotPositiveDefinite
                | Error::Indefinite(_)
                | Error::AllRowsRejected
                | Error::DegenerateSubsets
                | Error::DegenerateCorrelation(_)
                | Error::NoConvergence
        )
    }
}
