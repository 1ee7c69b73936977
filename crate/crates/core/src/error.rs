use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// Numerical payloads are carried as `f64` so the type stays independent of
/// the scalar the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("graph is not connected: {unreachable} vertex(es) unreachable from `{root}`")]
    DisconnectedGraph { root: String, unreachable: usize },
    #[error("graph has no Dirichlet pendant vertex")]
    NoPendant,
    #[error("edge `{edge}` has non-positive or non-finite length {length}")]
    NonpositiveLength { edge: String, length: f64 },
    #[error("Dirichlet vertex `{vertex}` has degree {degree}; Dirichlet conditions are only allowed on pendant ends")]
    DirichletNotPendant { vertex: String, degree: usize },
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("graph has no edges")]
    EmptyGraph,

    #[error("point outside the admissible domain: {0}")]
    InvalidDomain(String),
    #[error("orbit through (p, q) is not closed inside the homoclinic loop (E = {energy})")]
    OrbitNotClosed { energy: f64 },
    #[error("adaptive quadrature did not reach tolerance {tol} (estimate {estimate})")]
    QuadratureFailed { tol: f64, estimate: f64 },

    #[error("mesh too coarse: edge `{edge}` gets {interior_nodes} interior nodes (need at least 4)")]
    MeshTooCoarse { edge: String, interior_nodes: usize },
    #[error("loop half-length L_{index} = {half_length} is not below pi/2")]
    LoopTooLong { index: usize, half_length: f64 },
    #[error("eigen-solver did not converge after {iterations} iterations (residual {residual})")]
    EigenNotConverged { iterations: usize, residual: f64 },

    #[error("interval length {length} does not exceed the threshold pi/2")]
    BelowThreshold { length: f64 },
    #[error("edge lengths lie outside the existence region (lambda0 = {lambda0} >= 1)")]
    OutsideRegion { lambda0: f64 },
    #[error("Newton iteration stalled after {iterations} iterations with residual {residual}; best iterate {best:?}")]
    NewtonStalled { iterations: usize, residual: f64, best: Vec<f64> },
    #[error("profile integration mismatch {mismatch} exceeds the allowed {allowed}")]
    StepTooLarge { mismatch: f64, allowed: f64 },

    #[error("linear solve failed: {0}")]
    LinearSolveFailure(String),
    #[error("initial data is negative ({value}) at node {node}")]
    NegativeInitialData { node: usize, value: f64 },
    #[error("comparison bound violated at t = {time}: u = {value} outside [0, {bound}]")]
    ComparisonViolated { time: f64, value: f64, bound: f64 },

    #[error("graph is not a flower graph")]
    NotAFlower,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
