//! One error type for the whole crate.

use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong when building networks, sampling
/// environments, or solving for flows.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Lattice dimension outside the supported range 1..=4.
    UnsupportedDimension(usize),
    /// A box or grid side of zero was requested.
    ZeroSide,
    /// A requested construction would overflow the vertex/edge index range.
    SizeOverflow,
    /// `parallel_series(0)` has no stages.
    ZeroStages,
    /// Edge joins a vertex to itself.
    SelfLoop { edge: usize },
    /// Vertex index out of range for the network.
    VertexOutOfRange { vertex: usize, count: usize },
    /// Edge index out of range for the environment or network.
    EdgeOutOfRange { edge: usize, count: usize },
    /// Coordinates are missing but the operation needs them.
    MissingCoordinates,
    /// Coordinates are present but inconsistent with the edge set.
    InvalidCoordinates(&'static str),
    /// Source/sink sets empty, overlapping, or out of range.
    InvalidTerminals(&'static str),
    /// A distribution parameter is zero, negative, or not finite.
    NonPositiveParameter,
    /// Distribution bounds are reversed (`a > b` or `lo > hi`).
    ReversedBounds,
    /// Environment length does not match the network's edge count.
    LengthMismatch { expected: usize, got: usize },
    /// An environment entry is zero, negative, or not finite.
    NonPositiveResistance { edge: usize },
    /// Flip precondition: the edge value is not exactly `a` or `b`.
    NotTwoPoint { edge: usize },
    /// Exhaustive enumeration asked for more edges than the cap allows.
    EnumerationTooLarge { edges: usize, limit: usize },
    /// The terminals are not joined by any path: the resistance is infinite.
    Disconnected,
    /// The iterative solver hit its iteration cap.
    NonConvergence { iterations: usize, residual: f64 },
    /// Grounded Laplacian lost positive definiteness (should not happen on
    /// a connected component; indicates degenerate weights).
    SingularSystem,
    /// Tolerance outside the accepted range `(0, 1e-4]`.
    TolOutOfRange { tol: f64 },
    /// Exponent outside the accepted range `(1, 8]`.
    POutOfRange { p: f64 },
    /// A potential field violates its boundary normalization.
    BoundaryViolation { vertex: usize },
    /// Monte Carlo estimation needs a two-point (Bernoulli) distribution.
    NotBernoulli,
    /// Fewer replicas than the estimator can work with.
    TooFewReplicas { got: u64 },
    /// An edge set argument that must be non-empty was empty.
    EmptyEdgeSet,
    /// Influence sums are degenerate (zero where the bound needs them positive).
    DegenerateInfluence,
    /// The variance-bound hypothesis `e2/e1 >= e` (or inner positivity) failed.
    HypothesisViolated(&'static str),
    /// Edge count is not a perfect square, so it cannot be a staged
    /// parallel-series layout.
    EdgeCountNotSquare { edges: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UnsupportedDimension(d) => write!(f, "unsupported lattice dimension {d} (supported: 1..=4)"),
            Error::ZeroSide => write!(f, "box side must be at least 1"),
            Error::SizeOverflow => write!(f, "requested construction overflows the index range"),
            Error::ZeroStages => write!(f, "parallel-series network needs at least one stage"),
            Error::SelfLoop { edge } => write!(f, "edge {edge} is a self-loop"),
            Error::VertexOutOfRange { vertex, count } => {
                write!(f, "vertex {vertex} out of range for {count} vertices")
            }
            Error::EdgeOutOfRange { edge, count } => {
                write!(f, "edge {edge} out of range for {count} edges")
            }
            Error::MissingCoordinates => write!(f, "network has no lattice coordinates"),
            Error::InvalidCoordinates(msg) => write!(f, "invalid coordinates: {msg}"),
            Error::InvalidTerminals(msg) => write!(f, "invalid terminals: {msg}"),
            Error::NonPositiveParameter => write!(f, "distribution parameters must be finite and > 0"),
            Error::ReversedBounds => write!(f, "distribution bounds are reversed"),
            Error::LengthMismatch { expected, got } => {
                write!(f, "environment has {got} entries, network has {expected} edges")
            }
            Error::NonPositiveResistance { edge } => {
                write!(f, "resistance at edge {edge} must be finite and > 0")
            }
            Error::NotTwoPoint { edge } => {
                write!(f, "edge {edge} does not carry an exact two-point value")
            }
            Error::EnumerationTooLarge { edges, limit } => {
                write!(f, "enumeration over {edges} edges exceeds the cap of {limit}")
            }
            Error::Disconnected => write!(f, "terminals are disconnected: effective resistance is infinite"),
            Error::NonConvergence { iterations, residual } => {
                write!(f, "solver did not converge after {iterations} iterations (residual {residual:e})")
            }
            Error::SingularSystem => write!(f, "grounded system is numerically singular"),
            Error::TolOutOfRange { tol } => write!(f, "tolerance {tol:e} outside (0, 1e-4]"),
            Error::POutOfRange { p } => write!(f, "exponent {p} outside (1, 8]"),
            Error::BoundaryViolation { vertex } => {
                write!(f, "potential at vertex {vertex} violates the boundary normalization")
            }
            Error::NotBernoulli => write!(f, "operation needs a two-point (Bernoulli) distribution"),
            Error::TooFewReplicas { got } => write!(f, "need at least 2 replicas, got {got}"),
            Error::EmptyEdgeSet => write!(f, "edge set must be non-empty"),
            Error::DegenerateInfluence => write!(f, "influence sums are degenerate"),
            Error::HypothesisViolated(msg) => write!(f, "bound hypothesis violated: {msg}"),
            Error::EdgeCountNotSquare { edges } => {
                write!(f, "{edges} edges is not a staged parallel-series layout (need a perfect square)")
            }
        }
    }
}

impl core::error::Error for Error {}
