use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("edge ({u}, {v}) has nonpositive weight {w}")]
    NonpositiveWeight { u: usize, v: usize, w: f64 },

    #[error("vertex {vertex} has nonpositive measure {value}")]
    NonpositiveMeasure { vertex: usize, value: f64 },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("edge ({u}, {v}) references a vertex outside 0..{n}")]
    DanglingEdge { u: usize, v: usize, n: usize },

    #[error("edge ({u}, {v}) is listed more than once")]
    DuplicateEdge { u: usize, v: usize },

    #[error("directed arc ({u}, {v}) has no reverse arc")]
    MissingReverse { u: usize, v: usize },

    #[error("measure has {got} entries, graph has {expected} vertices")]
    MeasureLength { expected: usize, got: usize },

    #[error("unknown vertex {0}")]
    UnknownVertex(usize),

    #[error("vertices {0} and {1} are not connected")]
    Disconnected(usize, usize),

    #[error("graph is not connected")]
    NotConnected,

    #[error("operation requires symmetric weights w_xy = w_yx")]
    AsymmetricWeights,

    #[error("function has {got} values, graph has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },

    #[error("function value {value} at vertex {vertex} is below the positivity floor {floor}")]
    NonpositiveFunction { vertex: usize, value: f64, floor: f64 },

    #[error("hypothesis of the estimate fails at vertex {vertex} (excess {excess})")]
    HypothesisViolated { vertex: usize, excess: f64 },

    #[error("non-finite value while evaluating {0}")]
    Overflow(&'static str),

    #[error("initial data must be strictly positive (vertex {0})")]
    NonpositiveInitialData(usize),

    #[error("time grid must be strictly increasing with at least one point")]
    BadTimeGrid,

    #[error("method {0} requires a time-independent potential")]
    TimeDependentPotential(&'static str),

    #[error("step size control gave up at t = {0}")]
    StepRejected(f64),

    #[error("solution residual {residual} exceeds {limit}")]
    ResidualTooLarge { residual: f64, limit: f64 },

    #[error("grid index {index} out of range (grid has {len} points)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("sampled potential does not cover [{t1}, {t2}]")]
    GridMismatch { t1: f64, t2: f64 },

    #[error("bad parameters: {0}")]
    BadParameters(String),

    #[error("gave up generating a connected graph after {0} attempts")]
    GenerationExhausted(usize),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown check {0:?}")]
    UnknownCheck(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("json error: {0}")]
    Json(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
