//! Fuzzy poverty measurement over survey microdata.
//!
//! The crate is `no_std` and only needs `alloc`. It covers:
//!
//! * [`survey_data`]: the microdata model and domain partitioning,
//! * [`estimation`]: weighted ECDF, Lorenz complement, quantiles and the
//!   fuzzy index estimator,
//! * [`membership`]: the distance- and distribution-based membership
//!   functions together with parameter calibration,
//! * [`resampling`]: bootstrap and stratified delete-one-PSU jackknife MSE
//!   estimation,
//! * [`metrics`]: Monte Carlo performance measures (bias, CV, CV2, ATMSE,
//!   AEMSE, BMSE),
//! * [`simulation`]: synthetic populations, sample designs and the
//!   experiment driver,
//! * [`robustness`]: MSE surfaces over normative parameters and rank
//!   stability via Kendall's tau-b and Spearman's rho.
//!
//! File formats, the command line and parallel execution live in the
//! companion `fuzzypov` crate.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod estimation;
pub mod membership;
pub mod metrics;
pub mod resampling;
pub mod rng;
pub mod robustness;
pub mod simulation;
pub mod survey_data;

pub use error::{Error, Result};
pub use estimation::{IncomeOrder, LorenzComplement, WeightedEcdf};
pub use membership::{MembershipKind, MembershipSpec, ParamValue, ZbmParams};
pub use resampling::{MseEstimate, ReplicationMethod, ReplicationPlan};
pub use survey_data::{DesignInfo, DesignKind, Domain, DomainPartition, Observation, SurveyDataset};
