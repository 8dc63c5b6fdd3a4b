use alloc::string::String;

/// Errors raised by model evaluation, integration and optimization.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("mass matrix is singular")]
    SingularMassMatrix,
    #[error("stacked input map Y = [Y_u Y_emb] is singular")]
    SingularInputMap,
    #[error("impact matrix is ill conditioned (cond = {cond:e})")]
    SingularImpactMatrix { cond: f64 },
    #[error("impact matrix denominator vanishes (|den| = {den:e})")]
    ZeroImpactDenominator { den: f64 },
    #[error("inverse jump map did not converge")]
    InverseJumpFailed,
    #[error("{what}: expected dimension {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("state became non-finite at node {node}")]
    NonFiniteState { node: usize },
    #[error("projection diverged at node {node} (|x|_inf = {norm:e})")]
    Divergence { node: usize, norm: f64 },
    #[error("Riccati solution blew up at node {node} (|P| = {norm:e})")]
    RiccatiBlowup { node: usize, norm: f64 },
    #[error("second-order LQ subproblem is not positive definite at node {node}")]
    IndefiniteHessian { node: usize },
    #[error("line search failed after {halvings} halvings")]
    LineSearchFailure { halvings: usize },
    #[error("no convergence within {iterations} iterations")]
    MaxIterations { iterations: usize },
    #[error("continuation stalled after {steps} steps (residual {residual:e})")]
    ContinuationStall { steps: usize, residual: f64 },
    #[error("terminal sensitivity D-beta is singular (cond = {cond:e})")]
    SingularDbeta { cond: f64 },
    #[error("run interrupted")]
    Interrupted,
}

pub type Result<T> = core::result::Result<T, Error>;
