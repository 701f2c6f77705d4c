use robstat_data::DataError;

#[derive(Debug, thiserror::Error)]
pub enum RobError {
    #[error("empty sample")]
    EmptySample,
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("nonpositive weight")]
    NonPositiveWeight,
    #[error("degenerate medcouple")]
    DegenerateMedcouple,
    #[error("singular scatter")]
    SingularScatter,
    #[error("no convergence after {iterations} iterations")]
    NonConvergence { iterations: usize, last: Vec<f64> },
    #[error("directionally degenerate data")]
    DirectionallyDegenerate,
    #[error("degenerate scale")]
    DegenerateScale,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("exact-fit or degenerate data")]
    ExactFit { hyperplane: Option<Vec<f64>> },
    #[error("degenerate design")]
    DegenerateDesign,
    #[error("no analyzable columns remain")]
    NoAnalyzableColumns,
    #[error("zero robust scale in column {0:?}")]
    ZeroRobustScale(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

pub type Result<T> = std::result::Result<T, RobError>;
