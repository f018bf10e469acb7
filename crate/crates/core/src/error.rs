//! Error types shared across the solver crate.

use thiserror::Error;

/// Errors raised while building or validating a network.
#[derive(Debug, Error)]
pub enum NetError {
    #[error("edge `{edge}` is a self-loop (vertex `{vertex}`)")]
    SelfLoop { edge: String, vertex: String },
    #[error("edge `{edge}` has nonpositive length {value}")]
    NonpositiveLength { edge: String, value: f64 },
    #[error("edge `{edge}` has nonpositive diffusivity {value}")]
    NonpositiveDiffusivity { edge: String, value: f64 },
    #[error("edge `{edge}` needs at least 3 grid points, got {value}")]
    TooFewGridPoints { edge: String, value: usize },
    #[error("edge `{edge}` references unknown vertex `{vertex}`")]
    UnknownVertex { edge: String, vertex: String },
    #[error("vertex entry `{vertex}` does not appear in any edge")]
    UnusedVertex { vertex: String },
    #[error("duplicate id `{id}`")]
    DuplicateId { id: String },
    #[error("network is not connected: vertex `{vertex}` unreachable")]
    Disconnected { vertex: String },
    #[error(
        "weight normalization violated at vertex `{vertex}`: sum mu*gamma = {sum} \
         (must be 1 within {tol}); set normalize_gamma to rescale"
    )]
    WeightSum { vertex: String, sum: f64, tol: f64 },
    #[error("missing gamma for edge `{edge}` at interior vertex `{vertex}`")]
    MissingGamma { edge: String, vertex: String },
    #[error("gamma must be positive, got {value} for edge `{edge}` at vertex `{vertex}`")]
    NonpositiveGamma { edge: String, vertex: String, value: f64 },
    #[error("eta must be nonnegative, got {value} at vertex `{vertex}`")]
    NegativeEta { vertex: String, value: f64 },
    #[error("edge {edge} is not incident to vertex {vertex}")]
    NotIncident { edge: usize, vertex: usize },
    #[error("vertex {vertex} is not an interior vertex")]
    NotInterior { vertex: usize },
    #[error(
        "inconsistent weighted traces at vertex {vertex}: relative spread {spread:.3e} \
         exceeds {tol:.3e}"
    )]
    InconsistentTrace { vertex: usize, spread: f64, tol: f64 },
    #[error("field shape does not match network grid: {0}")]
    ShapeMismatch(String),
}

/// Errors raised by the PDE solvers and the fixed-point iteration.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error("linear system is singular or ill-conditioned: {0}")]
    SingularSystem(String),
    #[error(
        "density negative beyond tolerance: min {min:.3e} < -{tol:.3e}; \
         refine the grid or check the drift"
    )]
    NegativeDensity { min: f64, tol: f64 },
    #[error("Newton iteration failed to converge after {iterations} steps (residual {residual:.3e})")]
    NewtonStalled { iterations: usize, residual: f64 },
    #[error("vertex balance root-finder stagnated after {iterations} steps (residual {residual:.3e})")]
    JunctionStalled { iterations: usize, residual: f64 },
    #[error("vanishing-discount loop did not converge within {halvings} discount halvings")]
    ErgodicStalled { halvings: usize },
    #[error("discounted bound violated: ||lambda*u|| = {observed:.6e} > {bound:.6e} + 1e-6 (scheme bug)")]
    SupBoundViolated { observed: f64, bound: f64 },
    #[error("test function violates generator-domain conditions: residual {residual:.3e} > {tol:.3e}")]
    NotInDomain { residual: f64, tol: f64 },
    #[error("fixed-point iteration exceeded {max_iter} iterations (last gap {gap:.3e})")]
    FixedPointStalled { max_iter: usize, gap: f64 },
    #[error("inner solver failed at iteration {iteration}: {source}")]
    InnerSolve {
        iteration: usize,
        #[source]
        source: Box<SolveError>,
    },
    #[error("local-time identity undefined at a vertex with eta = 0")]
    ZeroStickiness,
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("{0}")]
    Invalid(String),
}
