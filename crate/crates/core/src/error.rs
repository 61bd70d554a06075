use thiserror::Error;

/// Errors produced by the wave machinery.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("hypotheses H1-H3 violated: {0}")]
    HypothesisViolated(String),

    #[error("no monotone wave below c* (c = {c}, c* = {c_star})")]
    SubcriticalSpeed { c: f64, c_star: f64 },

    #[error("speed {c} below KPP minimal speed {c_min}")]
    BelowKppMinimalSpeed { c: f64, c_min: f64 },

    #[error("speed {c} is not subcritical (c* = {c_star})")]
    NotSubcritical { c: f64, c_star: f64 },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("solver stalled after {iterations} iterations: residual {residual:e} above tolerance {tol:e}")]
    SolverStalled {
        iterations: usize,
        residual: f64,
        tol: f64,
    },

    #[error("maximum iterations ({0}) exceeded")]
    MaxIterations(usize),

    #[error("quasimonotonicity broken at iteration {iteration}, node {node}, violation {violation:e}")]
    OrderingBroken {
        iteration: usize,
        node: usize,
        violation: f64,
    },

    #[error("upper/lower pair cannot be ordered by any shift up to {max_shift}")]
    PairNotOrderable { max_shift: f64 },

    #[error("fit window error: {0}")]
    FitWindow(String),

    #[error("simulation diverged (non-finite field) at t = {t}")]
    SimulationBlowup { t: f64 },

    #[error("front reached domain boundary before final time: {0}")]
    DomainTooShort(String),

    #[error("{0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed input: {0}")]
    Parse(String),
}
