use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("empty tree: no vertices")]
    EmptyTree,
    #[error("duplicate vertex {0}")]
    DuplicateVertex(String),
    #[error("edge {edge} references unknown vertex {vertex}")]
    UnknownVertex { edge: usize, vertex: String },
    #[error("cycle detected at edge {0}")]
    Cycle(usize),
    #[error("tree is disconnected")]
    Disconnected,
    #[error("vertex {0} has valency-2")]
    ValencyTwo(String),
    #[error("vertex {0} is isolated")]
    IsolatedVertex(String),
    #[error("edge {0} has nonpositive length")]
    NonPositiveLength(usize),
    #[error("ray {0} has finite length")]
    FiniteRay(usize),
    #[error("edge {0} joins two vertices but has infinite length")]
    InfiniteEdge(usize),
    #[error("unknown edge {0}")]
    UnknownEdge(usize),
    #[error("offset {offset} out of range on edge {edge}")]
    OffsetOutOfRange { edge: usize, offset: String },
    #[error("invalid geodesic: {0}")]
    InvalidGeodesic(String),
    #[error("point is not on the geodesic")]
    NotOnGeodesic,
    #[error("invalid flag: {0}")]
    InvalidFlag(String),
    #[error("tree is not geodesically complete (vertex {0} is a leaf)")]
    NotGeodesicallyComplete(String),
    #[error("geodesic extension reached leaf {0}")]
    LeafReached(String),
    #[error("nonpositive mass {0}")]
    NonPositiveMass(String),
    #[error("masses sum to {0}, expected 1")]
    MassNotOne(String),
    #[error("parameter {0} out of range")]
    ParameterOutOfRange(String),
    #[error("point is not in the support of the measure")]
    NotInSupport,
    #[error("measure is a Dirac mass")]
    DiracMeasure,
    #[error("exhaustive cycle search needs support <= {limit}, got {size}")]
    SupportTooLarge { size: usize, limit: usize },
    #[error("vertex {vertex} has valency {valency}, inversion needs at least {needed}")]
    ValencyTooSmall {
        vertex: String,
        valency: usize,
        needed: usize,
    },
    #[error("flag table is missing flag ({0})")]
    IncompleteTable(String),
    #[error("flag table has a flag not in the tree ({0})")]
    UnknownFlag(String),
    #[error("inconsistent Radon data: {0}")]
    InconsistentOracle(String),
    #[error("transport solver failure: {0}")]
    Solver(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
