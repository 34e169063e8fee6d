use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // schedule
    #[error("switch times must be nonempty")]
    EmptySchedule,
    #[error("switch times must start at 0, got {0}")]
    FirstTimeNotZero(f64),
    #[error("switch times must be strictly increasing (index {index}: {prev} then {next})")]
    NonIncreasingTimes { index: usize, prev: f64, next: f64 },
    #[error("delay must be positive, got {0}")]
    NonPositiveDelay(f64),
    #[error("horizon {horizon} exceeds last switch time {last} and no periodic extension was declared")]
    HorizonBeyondSchedule { horizon: f64, last: f64 },
    #[error("periodic extension needs an even number of listed intervals, got {0}")]
    OddCyclePattern(usize),
    #[error("time {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    // linear algebra and systems
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Gram matrix is not symmetric positive definite")]
    GramNotPositiveDefinite,
    #[error("generator is not dissipative: largest symmetrized eigenvalue {worst} exceeds tolerance {tol}")]
    NotDissipative { worst: f64, tol: f64 },
    #[error("anti-damping operator {index} violates <Bx, x> >= 0 (smallest symmetrized eigenvalue {min_eig})")]
    AntiDampingSignViolated { index: usize, min_eig: f64 },
    #[error("no feedback operator for odd interval {0} and the operator list is not cyclic")]
    MissingFeedbackOperator(usize),
    #[error("eigendecomposition failed: {0}")]
    Decomposition(String),
    #[error("cannot parse dense matrix: {0}")]
    MatrixParse(String),

    // semigroup
    #[error("generator is not exponentially stable (spectral abscissa {0})")]
    NotExponentiallyStable(f64),
    #[error("numerical abscissa {0} is not negative; use eigen_conditioning or sampled_fit")]
    NonNegativeNumericalAbscissa(f64),
    #[error("eigenvector basis is defective or ill-conditioned (condition number {0}); use sampled_fit")]
    DefectiveEigenbasis(f64),
    #[error("interval length {length} does not exceed T* = {t_star}")]
    IntervalTooShort { length: f64, t_star: f64 },
    #[error("invalid envelope constants M = {m}, mu = {mu}")]
    InvalidEnvelope { m: f64, mu: f64 },

    // integrator
    #[error("step {h} is not aligned: {what} / h = {ratio} is not an integer")]
    StepNotAligned { h: f64, what: String, ratio: f64 },
    #[error("delayed feedback reads t - tau = {0} < 0 but no history segment was supplied")]
    MissingHistory(f64),
    #[error("t_end = {t_end} exceeds the schedule horizon {horizon}")]
    HorizonExceeded { t_end: f64, horizon: f64 },
    #[error("lookup at t - tau = {0} lies before the history segment")]
    LookupBeforeHistory(f64),
    #[error("history table has {got} entries, expected {expected}")]
    HistoryLength { got: usize, expected: usize },

    // monitor
    #[error("Lyapunov window at t = {0} reaches before t = 0 and no history norms are available")]
    WindowUnderflow(f64),

    // certificates
    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),
    #[error("declared tail bound is violated at term {index}: {term} > {bound}")]
    InconsistentTailDeclaration { index: usize, term: f64, bound: f64 },

    // models
    #[error("decay rate must be positive, got {0}")]
    NonPositiveDecay(f64),
    #[error("kernel mass mu0/delta = {0} must be below 1")]
    KernelMassExceedsOne(f64),
    #[error("memory truncation too short: exp(-delta * s_max) = {0} > 1e-8")]
    TruncationTooShort(f64),
    #[error("bad subinterval: {0}")]
    BadSubinterval(String),
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
}
