//! Synthetic populations, SRS and stratified household samples, and the
//! Monte Carlo experiment comparing membership functions.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::index;
use rand::distr::weighted::WeightedIndex;
use rand_distr::{Distribution, LogNormal};

use crate::error::{Error, Result};
use crate::membership::{self, MembershipConfig, MembershipKind, MembershipSpec, ResolveOptions};
use crate::metrics::{self, DomainSeries, MetricsReport};
use crate::resampling::{self, FuzzyIndexStatistic, ReplicationMethod, ReplicationPlan, Statistic};
use crate::rng::{derive_seed, replicate_rng, Stream};
use crate::survey_data::{partition_by_area, DesignInfo, Domain, Observation, SurveyDataset};

/// Income and household model of one area.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaModel {
    pub label: String,
    /// Number of individuals `N_a`.
    pub size: usize,
    /// Location of the log-normal household income.
    pub log_mean: f64,
    /// Scale of the log-normal household income.
    pub log_sd: f64,
    /// Relative frequencies of household sizes 1..=6.
    pub household_sizes: [f64; 6],
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationConfig {
    pub areas: Vec<AreaModel>,
    pub seed: u64,
}

/// Household size frequencies shared by the default areas.
pub const DEFAULT_HOUSEHOLD_SIZES: [f64; 6] = [0.37, 0.30, 0.14, 0.12, 0.05, 0.02];

/// Area names and population sizes of the default population, with the
/// person-level sample sizes of the SRS and complex scenarios.
pub const DEFAULT_AREAS: [(&str, usize, usize, usize); 9] = [
    ("Burgenland", 2905, 33, 6),
    ("Carinthia", 5546, 77, 55),
    ("Lower Austria", 16232, 176, 157),
    ("Salzburg", 14262, 113, 124),
    ("Styria", 5344, 43, 48),
    ("Tyrol", 12107, 110, 128),
    ("Upper Austria", 7219, 65, 100),
    ("Vienna", 17686, 162, 187),
    ("Vorarlberg", 3756, 42, 3),
];

// (log mean, log sd) per default area; equivalised incomes around 22k.
const DEFAULT_INCOME_MODELS: [(f64, f64); 9] = [
    (9.95, 0.50),
    (9.97, 0.52),
    (10.05, 0.50),
    (10.08, 0.53),
    (9.98, 0.51),
    (10.02, 0.55),
    (10.04, 0.49),
    (10.00, 0.62),
    (10.10, 0.54),
];

impl PopulationConfig {
    /// Nine areas totalling 85 057 individuals.
    pub fn default_areas(seed: u64) -> Self {
        let areas = DEFAULT_AREAS
            .iter()
            .zip(DEFAULT_INCOME_MODELS)
            .map(|(&(label, size, _, _), (log_mean, log_sd))| AreaModel {
                label: label.to_string(),
                size,
                log_mean,
                log_sd,
                household_sizes: DEFAULT_HOUSEHOLD_SIZES,
            })
            .collect();
        PopulationConfig { areas, seed }
    }

    pub fn total_size(&self) -> usize {
        self.areas.iter().map(|a| a.size).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.areas.is_empty() {
            return Err(Error::BadConfig("population has no areas".to_string()));
        }
        let mut labels = alloc::collections::BTreeSet::new();
        for a in &self.areas {
            let bad = |why: &str| Err(Error::BadConfig(format!("area `{}`: {why}", a.label)));
            if a.label.is_empty() {
                return Err(Error::BadConfig("area label is empty".to_string()));
            }
            if !labels.insert(a.label.as_str()) {
                return bad("duplicate label");
            }
            if a.size == 0 {
                return bad("size must be at least 1");
            }
            if !(a.log_sd >= 0.0) || !a.log_sd.is_finite() || !a.log_mean.is_finite() {
                return bad("invalid log-normal parameters");
            }
            if a.household_sizes.iter().any(|p| !(*p >= 0.0)) || a.household_sizes.iter().sum::<f64>() <= 0.0 {
                return bad("household size frequencies must be nonnegative with a positive sum");
            }
        }
        Ok(())
    }
}

/// Generates the population: households of random size, each with one
/// log-normal income shared by its members. Every individual has weight 1,
/// the area as stratum and the household as PSU.
pub fn generate_population(cfg: &PopulationConfig) -> Result<SurveyDataset> {
    cfg.validate()?;
    let mut obs = Vec::with_capacity(cfg.total_size());
    for (a, area) in cfg.areas.iter().enumerate() {
        let mut rng = replicate_rng(cfg.seed, Stream::Population, a as u64);
        let sizes = WeightedIndex::new(area.household_sizes).map_err(|e| Error::BadConfig(format!("{e}")))?;
        let income = LogNormal::new(area.log_mean, area.log_sd).map_err(|e| Error::BadConfig(format!("{e}")))?;
        let mut placed = 0;
        let mut household = 0;
        while placed < area.size {
            let members = (sizes.sample(&mut rng) + 1).min(area.size - placed);
            let y = income.sample(&mut rng);
            let hh = format!("{}#{household}", area.label);
            for _ in 0..members {
                obs.push(Observation {
                    unit_id: format!("p{}", obs.len()),
                    household_id: hh.clone(),
                    stratum: area.label.clone(),
                    psu: hh.clone(),
                    area: area.label.clone(),
                    weight: 1.0,
                    income: y,
                });
            }
            placed += members;
            household += 1;
        }
    }
    SurveyDataset::new(obs, DesignInfo::srs())
}

/// Simple random sample without replacement of `n` individuals, each
/// carrying weight `N / n`.
pub fn draw_srs(population: &SurveyDataset, n: usize, seed: u64) -> Result<SurveyDataset> {
    let big_n = population.len();
    if n > big_n || n == 0 {
        return Err(Error::SampleTooLarge { requested: n, available: big_n });
    }
    let mut rng = replicate_rng(seed, Stream::Sample, 0);
    let mut picked = index::sample(&mut rng, big_n, n).into_vec();
    picked.sort_unstable();
    let weight = big_n as f64 / n as f64;
    let obs = picked
        .into_iter()
        .map(|i| Observation { weight, ..population.observations()[i].clone() })
        .collect();
    SurveyDataset::new(obs, DesignInfo::srs())
}

/// Households of every area, in order of first appearance.
fn households_by_area(population: &SurveyDataset) -> BTreeMap<&str, Vec<Vec<usize>>> {
    let mut out: BTreeMap<&str, Vec<Vec<usize>>> = BTreeMap::new();
    let mut position: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for (i, o) in population.observations().iter().enumerate() {
        let list = out.entry(o.area.as_str()).or_default();
        let k = *position.entry((o.area.as_str(), o.household_id.as_str())).or_insert_with(|| {
            list.push(Vec::new());
            list.len() - 1
        });
        list[k].push(i);
    }
    out
}

/// Stratified sample of whole households: within each area, `households[area]`
/// households without replacement; members weighted by
/// `(households in area) / (households sampled)`.
pub fn draw_complex(population: &SurveyDataset, households: &BTreeMap<String, usize>, seed: u64) -> Result<SurveyDataset> {
    let by_area = households_by_area(population);
    if let Some(extra) = households.keys().find(|k| !by_area.contains_key(k.as_str())) {
        return Err(Error::BadConfig(format!("unknown area `{extra}` in household counts")));
    }
    let mut rng = replicate_rng(seed, Stream::Sample, 1);
    let mut selected: Vec<(usize, f64)> = Vec::new();
    for (area, hhs) in &by_area {
        let want = *households
            .get(*area)
            .ok_or_else(|| Error::BadConfig(format!("no household count for area `{area}`")))?;
        if want > hhs.len() {
            return Err(Error::StratumSampleTooLarge { stratum: area.to_string(), requested: want, available: hhs.len() });
        }
        if want == 0 {
            continue;
        }
        let weight = hhs.len() as f64 / want as f64;
        for k in index::sample(&mut rng, hhs.len(), want) {
            selected.extend(hhs[k].iter().map(|&i| (i, weight)));
        }
    }
    selected.sort_unstable_by_key(|&(i, _)| i);
    let obs = selected
        .into_iter()
        .map(|(i, weight)| {
            let o = &population.observations()[i];
            Observation { weight, stratum: o.area.clone(), psu: o.household_id.clone(), ..o.clone() }
        })
        .collect();
    SurveyDataset::new(obs, DesignInfo::complex())
}

/// How each Monte Carlo sample is drawn.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleDesign {
    /// National SRS of `n` individuals; area sample sizes are random.
    Srs { n: usize },
    /// Households per area (stratum).
    Complex { households: BTreeMap<String, usize> },
}

impl SampleDesign {
    pub fn kind(&self) -> crate::survey_data::DesignKind {
        match self {
            SampleDesign::Srs { .. } => crate::survey_data::DesignKind::Srs,
            SampleDesign::Complex { .. } => crate::survey_data::DesignKind::Complex,
        }
    }

    /// SRS of the default scenario: 821 individuals.
    pub fn default_srs() -> Self {
        SampleDesign::Srs { n: DEFAULT_AREAS.iter().map(|a| a.2).sum() }
    }

    /// Complex scenario of the default population: household counts chosen
    /// so the expected person counts match the per-area targets.
    pub fn default_complex() -> Self {
        let mean_size: f64 = DEFAULT_HOUSEHOLD_SIZES.iter().enumerate().map(|(k, p)| (k + 1) as f64 * p).sum::<f64>()
            / DEFAULT_HOUSEHOLD_SIZES.iter().sum::<f64>();
        let households = DEFAULT_AREAS
            .iter()
            .map(|&(label, _, _, persons)| (label.to_string(), libm::round(persons as f64 / mean_size).max(1.0) as usize))
            .collect();
        SampleDesign::Complex { households }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub design: SampleDesign,
    /// Monte Carlo replicates `T`.
    pub replicates: usize,
    /// MSE estimators run on every sample; their seeds are re-derived per replicate.
    pub plans: Vec<ReplicationPlan>,
    pub seed: u64,
    /// Bootstrap resamples for ZBM percentile fits.
    pub zbm_resamples: usize,
    /// Refit ZBM parameters on each sample instead of reusing the population fit.
    pub refit_zbm: bool,
    /// Recalibrate alpha within each domain instead of using the population alpha.
    pub recalibrate: bool,
}

impl ScenarioConfig {
    pub const DEFAULT_REPLICATES: usize = 500;

    pub fn new(design: SampleDesign, replicates: usize, seed: u64) -> Self {
        ScenarioConfig {
            design,
            replicates,
            plans: Vec::new(),
            seed,
            zbm_resamples: 50,
            refit_zbm: true,
            recalibrate: false,
        }
    }

    pub fn with_plan(mut self, plan: ReplicationPlan) -> Self {
        self.plans.push(plan);
        self
    }

    pub fn validate(&self, population: &SurveyDataset) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::TooFewReplicates { needed: 2, got: self.replicates });
        }
        for p in &self.plans {
            p.validate()?;
            if p.method == ReplicationMethod::Jackknife && self.design.kind() != crate::survey_data::DesignKind::Complex {
                return Err(Error::JackknifeNeedsComplexDesign);
            }
        }
        if let SampleDesign::Srs { n } = self.design {
            if n == 0 || n > population.len() {
                return Err(Error::SampleTooLarge { requested: n, available: population.len() });
            }
        }
        if self.zbm_resamples == 0 {
            return Err(Error::BadPlan("ZBM fitting needs at least one resample"));
        }
        Ok(())
    }
}

/// A membership function prepared for the experiment: its population
/// resolution and true domain values.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedKind {
    pub config: MembershipConfig,
    pub spec: MembershipSpec,
    /// True `H` per domain label (areas and `NATIONAL`).
    pub truth: BTreeMap<String, f64>,
}

/// Estimates of one kind on one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct KindReplicate {
    /// `H_hat` per domain, aligned with [`Experiment::domains`]; NaN if absent.
    pub estimates: Vec<f64>,
    /// MSE per plan (aligned with the scenario plans), then per domain.
    pub mse: Vec<Vec<f64>>,
}

/// Everything computed on one Monte Carlo sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutcome {
    pub replicate: usize,
    /// Sampled units per domain, aligned with [`Experiment::domains`].
    pub sizes: Vec<usize>,
    pub kinds: Vec<KindReplicate>,
}

/// Results for one membership kind.
#[derive(Debug, Clone, PartialEq)]
pub struct KindResult {
    pub kind: MembershipKind,
    pub config: MembershipConfig,
    pub spec: MembershipSpec,
    pub truth: BTreeMap<String, f64>,
    /// `H_hat_t` per domain.
    pub estimates: BTreeMap<String, Vec<f64>>,
    pub bias: BTreeMap<String, f64>,
    /// Per replication method.
    pub metrics: BTreeMap<ReplicationMethod, MetricsReport>,
    pub series: BTreeMap<ReplicationMethod, BTreeMap<String, DomainSeries>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub kinds: Vec<KindResult>,
    /// Mean realised sample size per domain.
    pub mean_sizes: BTreeMap<String, f64>,
    /// Population size per domain.
    pub population_sizes: BTreeMap<String, usize>,
    pub replicates: usize,
}

impl ExperimentResult {
    pub fn kind(&self, kind: MembershipKind) -> Option<&KindResult> {
        self.kinds.iter().find(|k| k.kind == kind)
    }

    /// Area labels sorted by increasing mean sample size.
    pub fn areas_by_size(&self) -> Vec<String> {
        let mut areas: Vec<(&String, f64)> =
            self.mean_sizes.iter().filter(|(l, _)| l.as_str() != "NATIONAL").map(|(l, &n)| (l, n)).collect();
        areas.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));
        areas.into_iter().map(|(l, _)| l.clone()).collect()
    }
}

/// A prepared Monte Carlo experiment. Replicates are independent and may be
/// evaluated in any order or concurrently.
#[derive(Debug, Clone)]
pub struct Experiment {
    population: SurveyDataset,
    scenario: ScenarioConfig,
    kinds: Vec<PreparedKind>,
    domains: Vec<Domain>,
}

impl Experiment {
    /// Resolves every config on the population (quantile thresholds, alpha
    /// calibrated to the population head-count ratio, ZBM percentiles) and
    /// computes the true domain values.
    pub fn prepare(population: SurveyDataset, scenario: ScenarioConfig, configs: &[MembershipConfig]) -> Result<Self> {
        scenario.validate(&population)?;
        if configs.is_empty() {
            return Err(Error::BadConfig("no membership functions configured".to_string()));
        }
        let domains = partition_by_area(&population)?.domains();
        let options = ResolveOptions {
            hcr_target: None,
            zbm_resamples: scenario.zbm_resamples,
            seed: derive_seed(scenario.seed, Stream::ZbmFit, 0),
        };
        let mut kinds = Vec::with_capacity(configs.len());
        for config in configs {
            let spec = config.resolve(population.incomes(), population.weights(), &options)?;
            let stat = FuzzyIndexStatistic::new(&population, spec.clone(), domains.clone())?
                .with_recalibration(scenario.recalibrate);
            let values = stat.evaluate(population.weights())?;
            let truth = domains.iter().map(|d| d.label().to_string()).zip(values).collect();
            kinds.push(PreparedKind { config: config.clone(), spec, truth });
        }
        Ok(Experiment { population, scenario, kinds, domains })
    }

    pub fn population(&self) -> &SurveyDataset {
        &self.population
    }

    pub fn scenario(&self) -> &ScenarioConfig {
        &self.scenario
    }

    pub fn kinds(&self) -> &[PreparedKind] {
        &self.kinds
    }

    /// Areas in label order followed by `National`.
    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn replicate_seed(&self, t: usize) -> u64 {
        derive_seed(self.scenario.seed, Stream::Sample, t as u64)
    }

    pub fn draw_sample(&self, t: usize) -> Result<SurveyDataset> {
        let seed = self.replicate_seed(t);
        match &self.scenario.design {
            SampleDesign::Srs { n } => draw_srs(&self.population, *n, seed),
            SampleDesign::Complex { households } => draw_complex(&self.population, households, seed),
        }
    }

    /// Sample-level spec of kind `k`: population parameters, except ZBM
    /// percentiles which are refitted on the sample when configured.
    pub fn sample_spec(&self, sample: &SurveyDataset, k: usize) -> Result<MembershipSpec> {
        let prepared = &self.kinds[k];
        if prepared.spec.kind == MembershipKind::ZediniBelhadj2015 && self.scenario.refit_zbm && sample.len() >= 100 {
            let zbm = membership::fit_zbm_params(
                sample.incomes(),
                sample.weights(),
                self.scenario.zbm_resamples,
                derive_seed(self.scenario.seed, Stream::ZbmFit, 0),
            )?;
            return Ok(MembershipSpec { zbm: Some(zbm), ..prepared.spec.clone() });
        }
        Ok(prepared.spec.clone())
    }

    /// Point estimates and MSEs of kind `k` on one sample.
    pub fn estimate_kind(&self, sample: &SurveyDataset, k: usize, t: usize) -> Result<KindReplicate> {
        let partition = partition_by_area(sample)?;
        let present: Vec<Domain> = self.domains.iter().filter(|d| partition.get(d).is_some()).cloned().collect();
        let spec = self.sample_spec(sample, k)?;
        let stat = FuzzyIndexStatistic::new(sample, spec, present.clone())?.with_recalibration(self.scenario.recalibrate);
        let align = |values: Vec<f64>| -> Vec<f64> {
            let mut out = alloc::vec![f64::NAN; self.domains.len()];
            for (d, v) in present.iter().zip(values) {
                if let Some(pos) = self.domains.iter().position(|x| x == d) {
                    out[pos] = v;
                }
            }
            out
        };
        let estimates = align(stat.evaluate(sample.weights())?);
        let mut mse = Vec::with_capacity(self.scenario.plans.len());
        for plan in &self.scenario.plans {
            let plan_t = ReplicationPlan { seed: derive_seed(plan.seed, Stream::Bootstrap, t as u64), ..plan.clone() };
            let est = resampling::estimate_mse(sample, &stat, &plan_t)?;
            mse.push(align(est.into_iter().map(|e| e.mse).collect()));
        }
        Ok(KindReplicate { estimates, mse })
    }

    pub fn domain_sizes(&self, sample: &SurveyDataset) -> Result<Vec<usize>> {
        let partition = partition_by_area(sample)?;
        Ok(self.domains.iter().map(|d| partition.get(d).map_or(0, <[usize]>::len)).collect())
    }

    pub fn run_replicate(&self, t: usize) -> Result<ReplicateOutcome> {
        let sample = self.draw_sample(t)?;
        let sizes = self.domain_sizes(&sample)?;
        let kinds = (0..self.kinds.len()).map(|k| self.estimate_kind(&sample, k, t)).collect::<Result<_>>()?;
        Ok(ReplicateOutcome { replicate: t, sizes, kinds })
    }

    /// Reduces replicate outcomes (in any order) into the experiment result.
    pub fn summarize(&self, mut outcomes: Vec<ReplicateOutcome>) -> Result<ExperimentResult> {
        outcomes.sort_by_key(|o| o.replicate);
        let t_count = outcomes.len();
        if t_count < 2 {
            return Err(Error::TooFewReplicates { needed: 2, got: t_count });
        }
        let labels: Vec<String> = self.domains.iter().map(|d| d.label().to_string()).collect();
        let areas: Vec<String> =
            self.domains.iter().filter(|d| **d != Domain::National).map(|d| d.label().to_string()).collect();

        let mut mean_sizes = BTreeMap::new();
        for (j, label) in labels.iter().enumerate() {
            let total: usize = outcomes.iter().map(|o| o.sizes[j]).sum();
            mean_sizes.insert(label.clone(), total as f64 / t_count as f64);
        }
        let partition = partition_by_area(&self.population)?;
        let population_sizes =
            self.domains.iter().zip(&labels).map(|(d, l)| (l.clone(), partition.get(d).map_or(0, <[usize]>::len))).collect();

        let mut kinds = Vec::with_capacity(self.kinds.len());
        for (k, prepared) in self.kinds.iter().enumerate() {
            let mut estimates = BTreeMap::new();
            let mut bias = BTreeMap::new();
            for (j, label) in labels.iter().enumerate() {
                let series: Vec<f64> = outcomes.iter().map(|o| o.kinds[k].estimates[j]).filter(|v| v.is_finite()).collect();
                let b = if series.is_empty() { f64::NAN } else { metrics::bias(&series, prepared.truth[label])? };
                bias.insert(label.clone(), b);
                estimates.insert(label.clone(), series);
            }
            let mut metrics_by_method = BTreeMap::new();
            let mut series_by_method = BTreeMap::new();
            for (p, plan) in self.scenario.plans.iter().enumerate() {
                let mut series = BTreeMap::new();
                for (j, label) in labels.iter().enumerate() {
                    let (est, mse): (Vec<f64>, Vec<f64>) = outcomes
                        .iter()
                        .map(|o| (o.kinds[k].estimates[j], o.kinds[k].mse[p][j]))
                        .filter(|(e, m)| e.is_finite() && m.is_finite())
                        .unzip();
                    series.insert(label.clone(), DomainSeries { estimates: est, mse_estimates: mse, truth: prepared.truth[label] });
                }
                let report = metrics::metrics_report(&series, &areas)?;
                metrics_by_method.insert(plan.method, report);
                series_by_method.insert(plan.method, series);
            }
            kinds.push(KindResult {
                kind: prepared.spec.kind,
                config: prepared.config.clone(),
                spec: prepared.spec.clone(),
                truth: prepared.truth.clone(),
                estimates,
                bias,
                metrics: metrics_by_method,
                series: series_by_method,
            });
        }
        Ok(ExperimentResult { kinds, mean_sizes, population_sizes, replicates: t_count })
    }
}

/// Runs every replicate sequentially and summarises.
pub fn run_experiment(
    population: SurveyDataset,
    scenario: ScenarioConfig,
    configs: &[MembershipConfig],
) -> Result<ExperimentResult> {
    let experiment = Experiment::prepare(population, scenario, configs)?;
    let outcomes =
        (0..experiment.scenario.replicates).map(|t| experiment.run_replicate(t)).collect::<Result<Vec<_>>>()?;
    experiment.summarize(outcomes)
}
