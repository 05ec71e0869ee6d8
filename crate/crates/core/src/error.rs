use thiserror::Error;

/// Failures raised while evaluating an expression or one of its derivatives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("variable index {index} out of range for a point of dimension {dim}")]
    VariableOutOfRange { index: usize, dim: usize },
    #[error("non-finite value produced by {0}")]
    NonFinite(String),
}

/// Errors raised by the expression parser. Positions are byte offsets into the source.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("function `{name}` at {pos} takes {expected} argument(s), got {got}")]
    Arity {
        pos: usize,
        name: String,
        expected: usize,
        got: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("non-finite coordinate in point")]
    NonFinitePoint,
    #[error("singular matrix in {0}")]
    Singular(&'static str),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid integrator settings: {0}")]
    InvalidIntegrator(String),
    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite state at t = {t}; last valid state at t = {last_t}: {last:?}")]
    NonFiniteState { t: f64, last_t: f64, last: Vec<f64> },
    #[error("invariant measure undefined: H(p) = {0}")]
    UndefinedMeasure(f64),
    #[error("linearly dependent basis (rank {rank} < {expected})")]
    DependentBasis { rank: usize, expected: usize },
    #[error("parametrization is rank deficient at a sample (rank {rank} < {expected})")]
    RankDeficient { rank: usize, expected: usize },
    #[error("could not project sample onto the level set (residual {residual:e})")]
    ProjectionFailure { residual: f64 },
    #[error("constraint differentials are dependent at a sample (rank {rank} < {expected})")]
    Irregular { rank: usize, expected: usize },
    #[error("submanifold is not coisotropic at the sample (max |Z_a(phi_b)| = {0:e})")]
    NotCoisotropic(f64),
    #[error("declared projection is not constant on characteristic leaves (residual {0:e})")]
    NotLeafConstant(f64),
    #[error("sample is a horizontal point of the submanifold; quotient form would vanish")]
    HorizontalPoint,
    #[error("Hamiltonian is not invariant under the action: max |xi_M(H)| = {0:e}")]
    NonInvariant(f64),
    #[error("action is not in adapted form: {0}")]
    NonAdapted(String),
    #[error("generator {index} is not an infinitesimal contactomorphism (|L_xi eta| = {residual:e})")]
    NotContactomorphism { index: usize, residual: f64 },
    #[error("action is not abelian")]
    NonAbelian,
    #[error(
        "reduction is only implemented at mu = 0 (got {0:?}); for mu != 0 the orbit \
         directions are not horizontal and the characteristic distribution of the level set \
         differs from the orbit distribution"
    )]
    NonzeroMomentum(Vec<f64>),
    #[error("start point mismatch: {0:e}")]
    StartMismatch(f64),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
