use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Everything that can go wrong inside the core library.
///
/// Row numbers are 1-based data rows (the header is not counted).
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {0}: non-numeric field")]
    NonNumericField(usize),
    #[error("row {0}: negative income")]
    NegativeIncome(usize),
    #[error("row {0}: negative weight")]
    NegativeWeight(usize),
    #[error("row {0}: empty area label")]
    MissingArea(usize),
    #[error("row {0}: complex design requires stratum and psu labels")]
    MissingDesignLabel(usize),
    #[error("duplicate unit id `{0}`")]
    DuplicateUnitId(String),
    #[error("finite population correction for stratum `{0}` is outside [0, 1]")]
    BadFpc(String),

    #[error("total weight is zero")]
    ZeroTotalWeight,
    #[error("total weighted income is zero")]
    ZeroTotalIncome,
    #[error("probability {0} outside [0, 1]")]
    POutOfRange(f64),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("membership value {0} outside [0, 1]")]
    MembershipOutOfRange(f64),

    #[error("invalid thresholds z1={z1}, z2={z2}")]
    BadThresholds { z1: f64, z2: f64 },
    #[error("shape parameter must be positive, got {0}")]
    BadShape(f64),
    #[error("alpha must be >= 1, got {0}")]
    BadAlpha(f64),
    #[error("membership kind {kind} is missing parameter `{param}`")]
    MissingParameter { kind: &'static str, param: &'static str },
    #[error("unknown membership kind `{0}`")]
    UnknownKind(String),
    #[error("cannot parse parameter value `{0}`")]
    BadParamValue(String),
    #[error("ZBM parameters contain no triples")]
    EmptyTriples,
    #[error("ZBM cardinalities are all zero")]
    AllZeroCardinality,
    #[error("ZBM fitting needs at least 100 observations, got {0}")]
    DomainTooSmall(usize),
    #[error("calibration target {target} cannot be bracketed (mean membership at alpha=1 is {at_one})")]
    TargetNotBracketable { target: f64, at_one: f64 },
    #[error("alpha calibration did not converge")]
    NoConvergence,

    #[error("domain is empty")]
    EmptyDomain,
    #[error("domain `{0}` has zero effective weight")]
    EmptyEffectiveDomain(String),
    #[error("unknown domain `{0}`")]
    UnknownDomain(String),
    #[error("invalid replication plan: {0}")]
    BadPlan(&'static str),
    #[error("stratum `{0}` has a single PSU")]
    SingletonStratum(String),
    #[error("jackknife requires a complex design with strata and PSUs")]
    JackknifeNeedsComplexDesign,

    #[error("sequence is empty")]
    EmptySequence,
    #[error("replicate {0}: estimate is not positive")]
    NonPositiveEstimate(usize),
    #[error("coefficient of variation is negative: {0}")]
    NegativeCv(f64),
    #[error("need at least {needed} Monte Carlo replicates, got {got}")]
    TooFewReplicates { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("sample size {requested} exceeds population size {available}")]
    SampleTooLarge { requested: usize, available: usize },
    #[error("stratum `{stratum}`: {requested} households requested, {available} available")]
    StratumSampleTooLarge { stratum: String, requested: usize, available: usize },

    #[error("rank vectors are degenerate (all tied)")]
    DegenerateRanks,
    #[error("need at least two areas, got {0}")]
    TooFewAreas(usize),
    #[error("parameter grid is empty after filtering z1 < z2")]
    EmptyGrid,
}
