//! Replicate weight systems and replication-based MSE estimation.
//!
//! Both resamplers express every replicate as a full-length weight vector:
//! a bootstrap resample multiplies each unit's design weight by the number
//! of times it was drawn, a jackknife replicate zeroes one PSU and rescales
//! the rest of its stratum. A [`Statistic`] maps a weight vector to one
//! value per output (e.g. per domain).

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::estimation::IncomeOrder;
use crate::membership::{self, DistributionValues, MembershipSpec};
use crate::rng::{replicate_rng, Stream};
use crate::survey_data::{partition_by_area, DesignKind, Domain, DomainPartition, SurveyDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ReplicationMethod {
    Bootstrap,
    Jackknife,
}

impl ReplicationMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ReplicationMethod::Bootstrap => "bootstrap",
            ReplicationMethod::Jackknife => "jackknife",
        }
    }
}

impl fmt::Display for ReplicationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Factor `g` multiplying each squared jackknife deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GRule {
    /// `a_h / (a_h - 1)`, the same factor used to rescale weights.
    Paper,
    /// `(a_h - 1) / a_h`, classical delete-one jackknife.
    Standard,
}

impl GRule {
    pub fn as_str(self) -> &'static str {
        match self {
            GRule::Paper => "paper",
            GRule::Standard => "standard",
        }
    }

    pub fn factor(self, psus: usize) -> f64 {
        let a = psus as f64;
        match self {
            GRule::Paper => a / (a - 1.0),
            GRule::Standard => (a - 1.0) / a,
        }
    }
}

impl core::str::FromStr for GRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "paper" => Ok(GRule::Paper),
            "standard" => Ok(GRule::Standard),
            _ => Err(Error::BadConfig(alloc::format!("unknown g-rule `{s}`"))),
        }
    }
}

/// What to do with strata holding a single PSU.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingletonPolicy {
    /// Merge into the alphabetically next stratum (previous for the last).
    Collapse,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationPlan {
    pub method: ReplicationMethod,
    /// Bootstrap replicate count `R`.
    pub replicates: usize,
    pub seed: u64,
    pub g_rule: GRule,
    /// Sampling fractions `f_h`; falls back to the dataset's design info.
    pub fpc: BTreeMap<String, f64>,
    pub singleton: SingletonPolicy,
    /// Multiply each jackknife term by `1 - w_hi / w_h`.
    pub unequal_probability_correction: bool,
}

impl ReplicationPlan {
    pub const DEFAULT_REPLICATES: usize = 500;

    pub fn bootstrap(replicates: usize, seed: u64) -> Self {
        ReplicationPlan {
            method: ReplicationMethod::Bootstrap,
            replicates,
            seed,
            g_rule: GRule::Paper,
            fpc: BTreeMap::new(),
            singleton: SingletonPolicy::Collapse,
            unequal_probability_correction: false,
        }
    }

    pub fn jackknife(g_rule: GRule) -> Self {
        ReplicationPlan { method: ReplicationMethod::Jackknife, g_rule, ..Self::bootstrap(0, 0) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.method == ReplicationMethod::Bootstrap && self.replicates < 2 {
            return Err(Error::BadPlan("bootstrap needs at least 2 replicates"));
        }
        if self.fpc.values().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::BadPlan("finite population corrections must lie in [0, 1]"));
        }
        Ok(())
    }

    fn fpc_for(&self, dataset: &SurveyDataset, stratum: &str) -> f64 {
        self.fpc.get(stratum).copied().unwrap_or_else(|| dataset.design().fpc(stratum))
    }
}

/// Point estimate with its replication-based MSE.
#[derive(Debug, Clone, PartialEq)]
pub struct MseEstimate {
    pub point: f64,
    pub mse: f64,
    pub method: ReplicationMethod,
    /// `S_r` (bootstrap) or `S_(hi)` (jackknife); NaN where the replicate
    /// left the output undefined.
    pub replicate_values: Vec<f64>,
}

/// A statistic evaluated under an arbitrary weight system. Outputs that are
/// undefined for a weight system (no effective units) are reported as NaN.
pub trait Statistic {
    fn evaluate(&self, weights: &[f64]) -> Result<Vec<f64>>;
}

impl<F> Statistic for F
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    fn evaluate(&self, weights: &[f64]) -> Result<Vec<f64>> {
        self(weights)
    }
}

// ---------------------------------------------------------------------------
// Bootstrap

/// Draw multiplicities of bootstrap replicate `r`.
///
/// Under SRS each of the `n` units is drawn uniformly with replacement.
/// Under a complex design the PSUs of every stratum are resampled with
/// replacement within the stratum and a drawn PSU brings all its units.
pub fn bootstrap_multipliers(dataset: &SurveyDataset, seed: u64, r: usize) -> Vec<f64> {
    let mut rng = replicate_rng(seed, Stream::Bootstrap, r as u64);
    let n = dataset.len();
    let mut counts = alloc::vec![0.0; n];
    match dataset.design().kind {
        DesignKind::Srs => {
            for _ in 0..n {
                counts[rng.random_range(0..n)] += 1.0;
            }
        }
        DesignKind::Complex => {
            for psus in psu_layout(dataset).values() {
                let members: Vec<&Vec<usize>> = psus.values().collect();
                let a = members.len();
                for _ in 0..a {
                    for &i in members[rng.random_range(0..a)] {
                        counts[i] += 1.0;
                    }
                }
            }
        }
    }
    counts
}

/// Stratum -> PSU -> unit indices, all in label order.
fn psu_layout(dataset: &SurveyDataset) -> BTreeMap<&str, BTreeMap<&str, Vec<usize>>> {
    let mut layout: BTreeMap<&str, BTreeMap<&str, Vec<usize>>> = BTreeMap::new();
    for (i, o) in dataset.observations().iter().enumerate() {
        layout.entry(o.stratum.as_str()).or_default().entry(o.psu.as_str()).or_default().push(i);
    }
    layout
}

/// Replicate weight vectors for bootstrap replicates `0..replicates`.
pub fn bootstrap_weight_systems(dataset: &SurveyDataset, plan: &ReplicationPlan) -> Result<Vec<Vec<f64>>> {
    plan.validate()?;
    Ok((0..plan.replicates).map(|r| bootstrap_weights(dataset, plan.seed, r)).collect())
}

pub fn bootstrap_weights(dataset: &SurveyDataset, seed: u64, r: usize) -> Vec<f64> {
    let mut m = bootstrap_multipliers(dataset, seed, r);
    for (m, w) in m.iter_mut().zip(dataset.weights()) {
        *m *= w;
    }
    m
}

/// Bootstrap MSE of every output of `statistic`.
pub fn bootstrap_mse<S: Statistic + ?Sized>(
    dataset: &SurveyDataset,
    statistic: &S,
    plan: &ReplicationPlan,
) -> Result<Vec<MseEstimate>> {
    if plan.method != ReplicationMethod::Bootstrap {
        return Err(Error::BadPlan("plan is not a bootstrap plan"));
    }
    plan.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let systems = (0..plan.replicates).map(|r| bootstrap_weights(dataset, plan.seed, r));
    bootstrap_mse_from_weights(dataset.weights(), statistic, systems)
}

/// Bootstrap MSE from explicit replicate weight systems (used for common
/// random numbers across parameter grids).
pub fn bootstrap_mse_from_weights<S, I>(full_weights: &[f64], statistic: &S, systems: I) -> Result<Vec<MseEstimate>>
where
    S: Statistic + ?Sized,
    I: IntoIterator,
    I::Item: AsRef<[f64]>,
{
    let point = statistic.evaluate(full_weights)?;
    let mut replicate_values: Vec<Vec<f64>> = alloc::vec![Vec::new(); point.len()];
    for w in systems {
        let values = statistic.evaluate(w.as_ref())?;
        if values.len() != point.len() {
            return Err(Error::LengthMismatch { expected: point.len(), got: values.len() });
        }
        for (acc, v) in replicate_values.iter_mut().zip(values) {
            acc.push(v);
        }
    }
    point
        .into_iter()
        .zip(replicate_values)
        .map(|(point, values)| {
            let mse = replicate_variance(&values)?;
            Ok(MseEstimate { point, mse, method: ReplicationMethod::Bootstrap, replicate_values: values })
        })
        .collect()
}

/// `1/(R-1) * sum (S_r - mean)^2` over the finite replicate values.
pub fn replicate_variance(values: &[f64]) -> Result<f64> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.len() < 2 {
        return Err(Error::BadPlan("fewer than two usable replicates"));
    }
    let mean = finite.iter().sum::<f64>() / finite.len() as f64;
    let ss: f64 = finite.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok(ss / (finite.len() - 1) as f64)
}

// ---------------------------------------------------------------------------
// Jackknife

/// Replicate obtained by deleting PSU `psu` of stratum `stratum`.
#[derive(Debug, Clone, PartialEq)]
pub struct JackknifeReplicate {
    /// Variance stratum (after collapsing singletons).
    pub stratum: String,
    pub psu: String,
    pub weights: Vec<f64>,
    /// PSUs in the variance stratum, `a_h`.
    pub stratum_psus: usize,
    /// `w_hi / w_h` of the deleted PSU.
    pub psu_weight_share: f64,
}

/// Maps every stratum label to its variance stratum, merging strata with a
/// single PSU into the alphabetically adjacent one.
fn variance_strata(dataset: &SurveyDataset, policy: SingletonPolicy) -> Result<BTreeMap<String, String>> {
    let layout = psu_layout(dataset);
    let mut group_of: BTreeMap<String, String> = layout.keys().map(|s| (s.to_string(), s.to_string())).collect();
    loop {
        let mut groups: BTreeMap<&str, usize> = BTreeMap::new();
        for (stratum, psus) in &layout {
            *groups.entry(group_of[*stratum].as_str()).or_default() += psus.len();
        }
        let Some((&single, _)) = groups.iter().find(|(_, &a)| a < 2) else { break };
        if policy == SingletonPolicy::Error || groups.len() < 2 {
            return Err(Error::SingletonStratum(single.to_string()));
        }
        let labels: Vec<&str> = groups.keys().copied().collect();
        let pos = labels.iter().position(|&l| l == single).unwrap_or(0);
        let target = if pos + 1 < labels.len() { labels[pos + 1] } else { labels[pos - 1] };
        log::warn!("stratum `{single}` has a single PSU; collapsing into `{target}`");
        let (single, target) = (single.to_string(), target.to_string());
        for g in group_of.values_mut() {
            if *g == single {
                *g = target.clone();
            }
        }
    }
    Ok(group_of)
}

/// Delete-one-PSU replicate weights for a complex design.
pub fn jackknife_replicates(dataset: &SurveyDataset, policy: SingletonPolicy) -> Result<Vec<JackknifeReplicate>> {
    if dataset.design().kind != DesignKind::Complex {
        return Err(Error::JackknifeNeedsComplexDesign);
    }
    let group_of = variance_strata(dataset, policy)?;
    // variance stratum -> (stratum, psu) -> units
    let mut groups: BTreeMap<&str, BTreeMap<(&str, &str), Vec<usize>>> = BTreeMap::new();
    for (i, o) in dataset.observations().iter().enumerate() {
        let g = group_of[&o.stratum].as_str();
        groups.entry(g).or_default().entry((o.stratum.as_str(), o.psu.as_str())).or_default().push(i);
    }
    let base = dataset.weights();
    let mut out = Vec::new();
    for (group, psus) in &groups {
        let a = psus.len();
        let g = a as f64 / (a as f64 - 1.0);
        let in_group: Vec<usize> = psus.values().flatten().copied().collect();
        let w_h: f64 = in_group.iter().map(|&i| base[i]).sum();
        for ((_, psu), members) in psus {
            let mut weights = base.to_vec();
            for &i in &in_group {
                weights[i] *= g;
            }
            for &i in members {
                weights[i] = 0.0;
            }
            let w_hi: f64 = members.iter().map(|&i| base[i]).sum();
            out.push(JackknifeReplicate {
                stratum: group.to_string(),
                psu: psu.to_string(),
                weights,
                stratum_psus: a,
                psu_weight_share: if w_h > 0.0 { w_hi / w_h } else { 0.0 },
            });
        }
    }
    Ok(out)
}

/// Jackknife MSE of every output of `statistic`:
/// `sum_h (1 - f_h) sum_i g (S_(hi) - S_(h))^2`.
pub fn jackknife_mse<S: Statistic + ?Sized>(
    dataset: &SurveyDataset,
    statistic: &S,
    plan: &ReplicationPlan,
) -> Result<Vec<MseEstimate>> {
    if plan.method != ReplicationMethod::Jackknife {
        return Err(Error::BadPlan("plan is not a jackknife plan"));
    }
    plan.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let replicates = jackknife_replicates(dataset, plan.singleton)?;
    let point = statistic.evaluate(dataset.weights())?;
    let k = point.len();
    let mut values: Vec<Vec<f64>> = alloc::vec![Vec::with_capacity(replicates.len()); k];
    for rep in &replicates {
        let v = statistic.evaluate(&rep.weights)?;
        if v.len() != k {
            return Err(Error::LengthMismatch { expected: k, got: v.len() });
        }
        for (acc, x) in values.iter_mut().zip(v) {
            acc.push(x);
        }
    }

    let mut mse = alloc::vec![0.0; k];
    let mut start = 0;
    while start < replicates.len() {
        let stratum = &replicates[start].stratum;
        let end = start + replicates[start..].iter().take_while(|r| &r.stratum == stratum).count();
        let reps = &replicates[start..end];
        let g = plan.g_rule.factor(reps[0].stratum_psus);
        let fpc = 1.0 - plan.fpc_for(dataset, stratum);
        for (out, vals) in mse.iter_mut().zip(&values) {
            let stratum_vals = &vals[start..end];
            let finite: Vec<f64> = stratum_vals.iter().copied().filter(|v| v.is_finite()).collect();
            if finite.is_empty() {
                continue;
            }
            let mean = finite.iter().sum::<f64>() / finite.len() as f64;
            let mut ss = 0.0;
            for (rep, &v) in reps.iter().zip(stratum_vals) {
                if !v.is_finite() {
                    continue;
                }
                let correction = if plan.unequal_probability_correction { 1.0 - rep.psu_weight_share } else { 1.0 };
                ss += g * correction * (v - mean) * (v - mean);
            }
            *out += fpc * ss;
        }
        start = end;
    }

    Ok(point
        .into_iter()
        .zip(mse)
        .zip(values)
        .map(|((point, mse), replicate_values)| MseEstimate {
            point,
            mse,
            method: ReplicationMethod::Jackknife,
            replicate_values,
        })
        .collect())
}

/// Dispatches on `plan.method`.
pub fn estimate_mse<S: Statistic + ?Sized>(
    dataset: &SurveyDataset,
    statistic: &S,
    plan: &ReplicationPlan,
) -> Result<Vec<MseEstimate>> {
    match plan.method {
        ReplicationMethod::Bootstrap => bootstrap_mse(dataset, statistic, plan),
        ReplicationMethod::Jackknife => jackknife_mse(dataset, statistic, plan),
    }
}

// ---------------------------------------------------------------------------
// Fuzzy index as a replicable statistic

/// Domain-level fuzzy index `H` of one membership spec, evaluable under any
/// weight system of a fixed dataset.
///
/// Distance-based memberships do not depend on the weights and are computed
/// once. Distribution-based memberships recompute the ECDF / Lorenz
/// complement under each weight system with the spec's fixed `alpha`, over
/// the whole dataset; with `recalibrate` they are instead recomputed within
/// each domain with `alpha` recalibrated to that domain's head-count ratio.
#[derive(Debug, Clone)]
pub struct FuzzyIndexStatistic {
    incomes: Vec<f64>,
    partition: DomainPartition,
    domains: Vec<Domain>,
    spec: MembershipSpec,
    order: IncomeOrder,
    fixed: Option<Vec<f64>>,
    recalibrate: bool,
}

impl FuzzyIndexStatistic {
    pub fn new(dataset: &SurveyDataset, spec: MembershipSpec, domains: Vec<Domain>) -> Result<Self> {
        spec.validate()?;
        let partition = partition_by_area(dataset)?;
        if let Some(d) = domains.iter().find(|d| partition.get(d).is_none()) {
            return Err(Error::UnknownDomain(d.label().to_string()));
        }
        let incomes = dataset.incomes().to_vec();
        let fixed = if spec.kind.is_distribution_based() { None } else { Some(membership::evaluate_fixed(&incomes, &spec)?) };
        let order = IncomeOrder::new(&incomes);
        Ok(FuzzyIndexStatistic { incomes, partition, domains, spec, order, fixed, recalibrate: false })
    }

    /// Every area followed by `National`.
    pub fn all_domains(dataset: &SurveyDataset, spec: MembershipSpec) -> Result<Self> {
        let domains = partition_by_area(dataset)?.domains();
        Self::new(dataset, spec, domains)
    }

    pub fn with_recalibration(mut self, recalibrate: bool) -> Self {
        self.recalibrate = recalibrate;
        self
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn spec(&self) -> &MembershipSpec {
        &self.spec
    }

    /// Memberships of every unit under `weights`.
    pub fn memberships(&self, weights: &[f64]) -> Result<Vec<f64>> {
        if weights.len() != self.incomes.len() {
            return Err(Error::LengthMismatch { expected: self.incomes.len(), got: weights.len() });
        }
        match &self.fixed {
            Some(mu) => Ok(mu.clone()),
            None => {
                let values = DistributionValues::compute(&self.order, &self.incomes, weights)?;
                values.memberships(self.spec.kind, self.spec.alpha.unwrap_or(1.0))
            }
        }
    }

    /// `H` of one domain; `EmptyEffectiveDomain` when its units carry no weight.
    pub fn evaluate_domain(&self, weights: &[f64], domain: &Domain) -> Result<f64> {
        let idx = self.partition.get(domain).ok_or_else(|| Error::UnknownDomain(domain.label().to_string()))?;
        if self.recalibrate && self.spec.kind.is_distribution_based() {
            return self.recalibrated_domain(weights, idx, domain);
        }
        let mu = self.memberships(weights)?;
        mean_over(&mu, weights, idx).ok_or_else(|| Error::EmptyEffectiveDomain(domain.label().to_string()))
    }

    fn recalibrated_domain(&self, weights: &[f64], idx: &[usize], domain: &Domain) -> Result<f64> {
        let empty = || Error::EmptyEffectiveDomain(domain.label().to_string());
        let (y, w): (Vec<f64>, Vec<f64>) =
            idx.iter().filter(|&&i| weights[i] > 0.0).map(|&i| (self.incomes[i], weights[i])).unzip();
        if w.is_empty() {
            return Err(empty());
        }
        let order = IncomeOrder::new(&y);
        let tau = crate::estimation::POVERTY_LINE_SHARE * order.quantile(&y, &w, 0.5)?;
        let target = crate::estimation::head_count_ratio(&y, &w, tau)?;
        let values = DistributionValues::compute(&order, &y, &w)?;
        let alpha = membership::calibrate_alpha_with(&values, &w, self.spec.kind, target)?;
        let mu = values.memberships(self.spec.kind, alpha)?;
        crate::estimation::fuzzy_index(&mu, &w)
    }
}

fn mean_over(values: &[f64], weights: &[f64], idx: &[usize]) -> Option<f64> {
    crate::estimation::weighted_mean_over(values, weights, idx)
}

impl Statistic for FuzzyIndexStatistic {
    fn evaluate(&self, weights: &[f64]) -> Result<Vec<f64>> {
        if self.recalibrate && self.spec.kind.is_distribution_based() {
            return self
                .domains
                .iter()
                .map(|d| match self.evaluate_domain(weights, d) {
                    Err(Error::EmptyEffectiveDomain(_)) => Ok(f64::NAN),
                    other => other,
                })
                .collect();
        }
        let mu = self.memberships(weights)?;
        Ok(self
            .domains
            .iter()
            .map(|d| self.partition.get(d).and_then(|idx| mean_over(&mu, weights, idx)).unwrap_or(f64::NAN))
            .collect())
    }
}

/// Binds a spec and one domain into a single-output statistic.
pub fn domain_statistic_factory(
    dataset: &SurveyDataset,
    spec: MembershipSpec,
    domain: Domain,
) -> Result<impl Fn(&[f64]) -> Result<f64>> {
    let stat = FuzzyIndexStatistic::new(dataset, spec, alloc::vec![domain.clone()])?;
    Ok(move |weights: &[f64]| stat.evaluate_domain(weights, &domain))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survey_data::{DesignInfo, Observation};
    use alloc::format;
    use alloc::vec;

    fn complex(rows: &[(&str, &str, f64, f64)]) -> SurveyDataset {
        let obs = rows
            .iter()
            .enumerate()
            .map(|(i, &(stratum, psu, weight, income))| Observation {
                unit_id: format!("u{i}"),
                household_id: psu.to_string(),
                stratum: stratum.to_string(),
                psu: psu.to_string(),
                area: stratum.to_string(),
                weight,
                income,
            })
            .collect();
        SurveyDataset::new(obs, DesignInfo::complex()).unwrap()
    }

    fn mean_stat(incomes: Vec<f64>) -> impl Fn(&[f64]) -> Result<Vec<f64>> {
        move |w: &[f64]| {
            let total: f64 = w.iter().sum();
            Ok(vec![incomes.iter().zip(w).map(|(y, w)| y * w).sum::<f64>() / total])
        }
    }

    #[test]
    fn jackknife_doubles_partner_psu() {
        let d = complex(&[("A", "p1", 1.0, 1.0), ("A", "p2", 1.0, 2.0), ("B", "p3", 2.0, 3.0), ("B", "p4", 2.0, 4.0)]);
        let reps = jackknife_replicates(&d, SingletonPolicy::Error).unwrap();
        assert_eq!(reps.len(), 4);
        let first = &reps[0];
        assert_eq!((first.stratum.as_str(), first.psu.as_str()), ("A", "p1"));
        assert_eq!(first.weights[0], 0.0);
        assert_eq!(first.weights[1], 2.0);
        assert_eq!(first.weights[2].to_bits(), 2.0f64.to_bits());
        assert_eq!(first.weights[3].to_bits(), 2.0f64.to_bits());
        // equal PSU totals keep the stratum total
        for r in &reps {
            let a: f64 = r.weights[..2].iter().sum();
            let b: f64 = r.weights[2..].iter().sum();
            assert_eq!(a, 2.0);
            assert_eq!(b, 4.0);
        }
    }

    #[test]
    fn singleton_strata_collapse_or_fail() {
        let d = complex(&[("A", "p1", 1.0, 1.0), ("B", "p2", 1.0, 2.0), ("B", "p3", 1.0, 3.0)]);
        assert_eq!(jackknife_replicates(&d, SingletonPolicy::Error), Err(Error::SingletonStratum("A".into())));
        let reps = jackknife_replicates(&d, SingletonPolicy::Collapse).unwrap();
        assert_eq!(reps.len(), 3);
        assert!(reps.iter().all(|r| r.stratum == "B" && r.stratum_psus == 3));
        let lone = complex(&[("A", "p1", 1.0, 1.0), ("A", "p1", 1.0, 2.0)]);
        assert_eq!(jackknife_replicates(&lone, SingletonPolicy::Collapse), Err(Error::SingletonStratum("A".into())));
    }

    #[test]
    fn jackknife_constant_statistic_has_zero_mse() {
        let d = complex(&[("A", "p1", 1.0, 1.0), ("A", "p2", 1.0, 2.0), ("B", "p3", 2.0, 3.0), ("B", "p4", 2.0, 4.0)]);
        let stat = |_: &[f64]| Ok(vec![0.3]);
        let est = jackknife_mse(&d, &stat, &ReplicationPlan::jackknife(GRule::Paper)).unwrap();
        assert_eq!(est[0].mse, 0.0);
        assert_eq!(est[0].replicate_values.len(), 4);
    }

    #[test]
    fn strata_contribute_additively() {
        let rows = [("A", "p1", 1.0, 1.0), ("A", "p2", 1.0, 5.0), ("A", "p5", 1.0, 2.0), ("B", "p3", 2.0, 3.0), ("B", "p4", 2.0, 9.0)];
        let d = complex(&rows);
        let incomes: Vec<f64> = rows.iter().map(|r| r.3).collect();
        let plan = ReplicationPlan::jackknife(GRule::Standard);
        let total = jackknife_mse(&d, &mean_stat(incomes.clone()), &plan).unwrap()[0].mse;

        // recompute the two stratum contributions by hand
        let reps = jackknife_replicates(&d, SingletonPolicy::Error).unwrap();
        let stat = mean_stat(incomes);
        let mut by_stratum: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for r in &reps {
            by_stratum.entry(r.stratum.clone()).or_default().push(stat(&r.weights).unwrap()[0]);
        }
        let mut expected = 0.0;
        for vals in by_stratum.values() {
            let a = vals.len() as f64;
            let m = vals.iter().sum::<f64>() / a;
            expected += (a - 1.0) / a * vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
        }
        assert!((total - expected).abs() < 1e-15);
    }

    #[test]
    fn full_sampling_fraction_annihilates_variance() {
        let d = complex(&[("A", "p1", 1.0, 1.0), ("A", "p2", 1.0, 5.0), ("A", "p3", 1.0, 2.0)]);
        let mut plan = ReplicationPlan::jackknife(GRule::Paper);
        plan.fpc.insert("A".into(), 1.0);
        let est = jackknife_mse(&d, &mean_stat(vec![1.0, 5.0, 2.0]), &plan).unwrap();
        assert_eq!(est[0].mse, 0.0);
    }

    #[test]
    fn jackknife_needs_complex_design() {
        let d = complex(&[("A", "p1", 1.0, 1.0), ("A", "p2", 1.0, 5.0)]).with_design(DesignInfo::srs()).unwrap();
        assert_eq!(jackknife_replicates(&d, SingletonPolicy::Collapse), Err(Error::JackknifeNeedsComplexDesign));
    }

    #[test]
    fn bootstrap_two_replicates_is_half_squared_difference() {
        let d = complex(&[("A", "p1", 1.0, 1.0), ("A", "p2", 1.0, 4.0), ("A", "p3", 1.0, 9.0)])
            .with_design(DesignInfo::srs())
            .unwrap();
        let plan = ReplicationPlan::bootstrap(2, 11);
        let stat = mean_stat(vec![1.0, 4.0, 9.0]);
        let est = bootstrap_mse(&d, &stat, &plan).unwrap();
        let s: Vec<f64> = (0..2).map(|r| stat(&bootstrap_weights(&d, 11, r)).unwrap()[0]).collect();
        assert_eq!(est[0].replicate_values, s);
        assert!((est[0].mse - 0.5 * (s[0] - s[1]) * (s[0] - s[1])).abs() < 1e-15);
    }

    #[test]
    fn bootstrap_constant_statistic_and_bad_plans() {
        let d = complex(&[("A", "p1", 1.0, 2.0), ("A", "p2", 1.0, 2.0)]);
        let spec = MembershipSpec::trapezoidal(1.0, 3.0);
        let stat = FuzzyIndexStatistic::all_domains(&d, spec).unwrap();
        let est = bootstrap_mse(&d, &stat, &ReplicationPlan::bootstrap(20, 1)).unwrap();
        assert!(est.iter().all(|e| e.mse == 0.0));
        assert_eq!(
            bootstrap_mse(&d, &stat, &ReplicationPlan::bootstrap(1, 1)),
            Err(Error::BadPlan("bootstrap needs at least 2 replicates"))
        );
    }

    #[test]
    fn complex_bootstrap_keeps_psus_whole() {
        let d = complex(&[("A", "p1", 1.0, 1.0), ("A", "p1", 1.0, 1.5), ("A", "p2", 1.0, 3.0), ("B", "p3", 1.0, 3.0), ("B", "p4", 1.0, 2.0)]);
        for r in 0..50 {
            let m = bootstrap_multipliers(&d, 3, r);
            assert_eq!(m[0], m[1]);
            assert_eq!(m[0] + m[2], 2.0);
            assert_eq!(m[3] + m[4], 2.0);
        }
    }

    #[test]
    fn factory_guards_empty_domains() {
        let d = complex(&[("A", "p1", 1.0, 1.0), ("A", "p2", 1.0, 3.0), ("B", "p3", 1.0, 2.0), ("B", "p4", 1.0, 5.0)]);
        let spec = MembershipSpec::crisp(2.5);
        let stat = domain_statistic_factory(&d, spec.clone(), Domain::National).unwrap();
        assert_eq!(stat(d.weights()).unwrap(), 0.5);
        let a = domain_statistic_factory(&d, spec.clone(), Domain::Area("A".into())).unwrap();
        assert_eq!(a(&[0.0, 0.0, 1.0, 1.0]), Err(Error::EmptyEffectiveDomain("A".into())));
        assert!(matches!(
            domain_statistic_factory(&d, spec, Domain::Area("Z".into())),
            Err(Error::UnknownDomain(_))
        ));
    }
}
