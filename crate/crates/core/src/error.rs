use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("group size must be positive")]
    EmptyGroup,
    #[error("{n_extroverts} extroverts requested in a group of {n_agents}")]
    TooManyExtroverts { n_extroverts: u32, n_agents: u32 },
    #[error("extrovert fraction {0} is outside [0, 1]")]
    FractionOutOfRange(f64),
    #[error("workday horizon must be positive")]
    ZeroHorizon,
    #[error("maximum conversation duration must be positive")]
    ZeroDuration,
    #[error("contact rate {0} must be a finite non-negative number")]
    InvalidContactRate(f64),
    #[error("tau values must be finite and positive (extrovert {tau_extrovert}, introvert {tau_introvert})")]
    InvalidTau { tau_extrovert: f64, tau_introvert: f64 },
    #[error("introvert tau {tau_introvert} is below extrovert tau {tau_extrovert}")]
    TauOrder { tau_extrovert: f64, tau_introvert: f64 },
    #[error("motivation cap must be at least 1")]
    ZeroMotivationCap,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StochasticsError {
    #[error("empty integer range [{lo}, {hi}]")]
    EmptyRange { lo: i64, hi: i64 },
    #[error("invalid seed {0:?}: expected decimal or 0x-prefixed hex u64")]
    InvalidSeed(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("cannot aggregate an empty set of runs")]
    NoRuns,
    #[error("run {index} was produced with different parameters than run 0")]
    MixedParams { index: usize },
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("grid point eta={eta} q={q} D={max_duration}: {source}")]
    Point {
        eta: f64,
        q: f64,
        max_duration: u32,
        #[source]
        source: ParamError,
    },
    #[error("sweep has an empty {0} grid")]
    EmptyGrid(&'static str),
    #[error("runs per point must be positive")]
    NoRuns,
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("failed to build worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("unknown preset {0:?} (expected fig1..fig5 or long_talks)")]
    UnknownPreset(String),
}
