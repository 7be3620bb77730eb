use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("vertex {vertex} has degree {degree}, above the declared cap {cap}")]
    DegreeCap { vertex: usize, degree: usize, cap: usize },

    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("random graph generation failed after {0} attempts")]
    GenerationFailed(usize),

    #[error("{free} free vertices exceed the enumeration cap of {cap}")]
    EnumerationCap { free: usize, cap: usize },

    #[error("SAW tree exceeds the node cap of {0}")]
    NodeCap(usize),

    #[error("vertex {0} is pinned")]
    PinnedVertex(usize),

    #[error("vertex {0} is isolated")]
    IsolatedVertex(usize),

    #[error("pole of the recurrence at node {node}")]
    Pole { node: usize },

    #[error("map has a pole at this input")]
    MapPole,

    #[error("principal logarithm requested off the right half-plane")]
    Branch,

    #[error("beta = 0 raised to a negative power")]
    ZeroToNegativePower,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("zero-free certificate failed: rho = {rho} <= 1")]
    Certificate { rho: f64 },

    #[error("root finder did not converge")]
    RootFinding,
}
