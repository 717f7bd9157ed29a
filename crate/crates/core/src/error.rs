use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid offspring law: {0}")]
    InvalidLaw(String),

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("count overflow while accumulating {0}")]
    CountOverflow(&'static str),

    #[error("generation horizons differ (simulated {sim}, observed {obs})")]
    HorizonMismatch { sim: usize, obs: usize },

    #[error("zero denominator in distance term `{0}`")]
    ZeroDenominator(&'static str),

    #[error("sample does not match scheme variant: {0}")]
    VariantMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(
        "only {compatible} compatible paths in a pool of {pool_size}; \
         at least {required} are needed for the requested quantile \
         (increase the pool size or the tolerance quantile)"
    )]
    InsufficientCompatible {
        compatible: u64,
        required: u64,
        pool_size: u64,
    },

    #[error("ratio limit undefined when m_R = 0")]
    DegenerateRatio,

    #[error("empty sample")]
    EmptySample,

    #[error("credibility level {0} outside (0, 1)")]
    InvalidLevel(f64),
}
