use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("solution left the positive cone at r = {r} (u = {u})")]
    NonPositive { r: f64, u: f64 },

    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64, last: Vec<f64> },

    #[error("maximum number of steps ({0}) exceeded")]
    TooManySteps(usize),

    #[error("event location did not converge near t = {t} (residual {residual:e})")]
    EventPolish { t: f64, residual: f64 },

    #[error("degenerate event: u = 1 and u' = 0 simultaneously at r = {r}")]
    DegenerateEvent { r: f64 },

    #[error("no parameter c~ on the search grid satisfies the bound for N = {n} on p in [{p_lo}, {p_hi}]")]
    NoFeasibleCtilde { n: u32, p_lo: f64, p_hi: f64 },

    #[error(
        "seed sensitivity check failed: u(r~_p) = {u_fine} vs {u_coarse} (allowed {allowed:e})"
    )]
    SeedSensitivity {
        u_coarse: f64,
        u_fine: f64,
        allowed: f64,
    },

    #[error("no unit crossing before r_end = {r_end}")]
    NoUnitCrossing { r_end: f64 },

    #[error("critical point {i} not found before r = {r_cap}")]
    CriticalPointMissing { i: usize, r_cap: f64 },

    #[error("no sign change in bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("crossing count {found} differs from index {expected}")]
    CrossingMismatch { expected: usize, found: usize },

    #[error("profile does not cover [{lo}, {hi}]")]
    Coverage { lo: f64, hi: f64 },

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("Sturm recurrence broke down after {0} shift perturbations")]
    InertiaBreakdown(usize),
}
