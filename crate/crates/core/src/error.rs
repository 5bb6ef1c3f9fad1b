use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("nodes {0} and {1} are not adjacent")]
    NotAdjacent(usize, usize),

    #[error("self-loop at node {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("edge ({i}, {j}) has non-positive or non-finite weight {weight}")]
    InvalidWeight { i: usize, j: usize, weight: f64 },

    #[error("graph must have at least 2 nodes, got {0}")]
    TooFewNodes(usize),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph is disconnected")]
    Disconnected,

    #[error("graph is bipartite: two walkers need not meet")]
    Bipartite,

    #[error("graph has {n} nodes, above the limit of {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("start nodes must differ (got {0} twice)")]
    SameStart(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no connected graph after {attempts} attempts")]
    GenerationFailed { attempts: usize },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("walkers starting at {a} and {b} never meet")]
    NeverMeets { a: usize, b: usize },

    #[error("a walker starting at {a} never hits {target}")]
    NeverHits { a: usize, target: usize },

    #[error("every simulation run was truncated; mean is undefined")]
    UndefinedMean,

    #[error("fit failed: {0}")]
    Fit(String),
}
