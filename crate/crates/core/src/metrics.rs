//! Monte Carlo performance measures of domain estimators.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Estimates with a CV above this are flagged as not publishable.
pub const PUBLICATION_CV_LIMIT: f64 = 0.166;

pub fn is_publishable(cv: f64) -> bool {
    cv.is_finite() && cv <= PUBLICATION_CV_LIMIT
}

/// Mean deviation of the estimates from the true value.
pub fn bias(estimates: &[f64], truth: f64) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(estimates.iter().map(|e| e - truth).sum::<f64>() / estimates.len() as f64)
}

/// Mean over replicates of `sqrt(mse_t) / estimate_t`.
pub fn cv(estimates: &[f64], mse_estimates: &[f64]) -> Result<f64> {
    if estimates.len() != mse_estimates.len() {
        return Err(Error::LengthMismatch { expected: estimates.len(), got: mse_estimates.len() });
    }
    if estimates.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut sum = 0.0;
    for (t, (&h, &mse)) in estimates.iter().zip(mse_estimates).enumerate() {
        if !(h > 0.0) {
            return Err(Error::NonPositiveEstimate(t));
        }
        sum += libm::sqrt(mse) / h;
    }
    Ok(sum / estimates.len() as f64)
}

/// Second-order coefficient of variation `sqrt(cv^2 / (1 + cv^2))`.
pub fn cv2(cv: f64) -> Result<f64> {
    if !(cv >= 0.0) {
        return Err(Error::NegativeCv(cv));
    }
    if cv.is_infinite() {
        return Ok(1.0);
    }
    let sq = cv * cv;
    Ok(libm::sqrt(sq / (1.0 + sq)))
}

/// Replicate series of one domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSeries {
    /// `H_hat_t`, one per Monte Carlo replicate.
    pub estimates: Vec<f64>,
    /// `MSE_hat_t`, aligned with `estimates`.
    pub mse_estimates: Vec<f64>,
    /// True domain value `H`.
    pub truth: f64,
}

impl DomainSeries {
    /// Monte Carlo MSE `(1/T) sum (H_hat_t - H)^2`.
    pub fn true_mse(&self) -> f64 {
        let t = self.estimates.len() as f64;
        self.estimates.iter().map(|e| (e - self.truth) * (e - self.truth)).sum::<f64>() / t
    }

    /// Standard deviation of the estimates across replicates.
    pub fn sd(&self) -> f64 {
        let t = self.estimates.len() as f64;
        if t < 2.0 {
            return 0.0;
        }
        let mean = self.estimates.iter().sum::<f64>() / t;
        libm::sqrt(self.estimates.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (t - 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseAggregates {
    pub atmse: f64,
    pub aemse: f64,
    pub bmse: f64,
}

/// ATMSE, AEMSE and BMSE averaged over domains. The true MSE of a domain is
/// its Monte Carlo MSE over all replicates.
pub fn mse_aggregates(domains: &[&DomainSeries]) -> Result<MseAggregates> {
    if domains.is_empty() {
        return Err(Error::EmptySequence);
    }
    let (mut atmse, mut aemse, mut bmse) = (0.0, 0.0, 0.0);
    for d in domains {
        if d.estimates.len() != d.mse_estimates.len() {
            return Err(Error::LengthMismatch { expected: d.estimates.len(), got: d.mse_estimates.len() });
        }
        let t = d.estimates.len();
        if t < 2 {
            return Err(Error::TooFewReplicates { needed: 2, got: t });
        }
        let true_mse = d.true_mse();
        atmse += true_mse;
        aemse += d.mse_estimates.iter().sum::<f64>() / t as f64;
        bmse += d.mse_estimates.iter().map(|m| m - true_mse).sum::<f64>() / t as f64;
    }
    let j = domains.len() as f64;
    Ok(MseAggregates { atmse: atmse / j, aemse: aemse / j, bmse: bmse / j })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainMetrics {
    pub bias: f64,
    /// NaN when some replicate estimate was not positive.
    pub cv: f64,
    pub cv2: f64,
    pub publishable: bool,
    /// Sd of the estimates across replicates (Monte Carlo spread).
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub per_domain: BTreeMap<String, DomainMetrics>,
    pub aggregate: MseAggregates,
    pub replicates: usize,
    pub truth: BTreeMap<String, f64>,
}

/// Builds the per-domain metrics for every series and aggregates the MSE
/// measures over the domains listed in `aggregate_over`.
pub fn metrics_report(series: &BTreeMap<String, DomainSeries>, aggregate_over: &[String]) -> Result<MetricsReport> {
    let mut per_domain = BTreeMap::new();
    let mut truth = BTreeMap::new();
    let mut replicates = 0;
    for (label, s) in series {
        let b = bias(&s.estimates, s.truth)?;
        let c = match cv(&s.estimates, &s.mse_estimates) {
            Ok(c) => c,
            Err(Error::NonPositiveEstimate(_)) => f64::NAN,
            Err(e) => return Err(e),
        };
        let c2 = if c.is_nan() { f64::NAN } else { cv2(c)? };
        per_domain.insert(label.clone(), DomainMetrics { bias: b, cv: c, cv2: c2, publishable: is_publishable(c), sd: s.sd() });
        truth.insert(label.clone(), s.truth);
        replicates = s.estimates.len();
    }
    let selected: Vec<&DomainSeries> = aggregate_over
        .iter()
        .map(|l| series.get(l).ok_or_else(|| Error::UnknownDomain(l.clone())))
        .collect::<Result<_>>()?;
    let aggregate = mse_aggregates(&selected)?;
    Ok(MetricsReport { per_domain, aggregate, replicates, truth })
}
