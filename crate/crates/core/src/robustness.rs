//! Parameter sweeps: national MSE surfaces over thresholds and shape, and
//! stability of area rankings measured by Kendall tau-b and Spearman rho.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::estimation::IncomeOrder;
use crate::membership::{MembershipConfig, MembershipKind, ParamValue, ResolveOptions};
use crate::resampling::{self, FuzzyIndexStatistic, ReplicationMethod, ReplicationPlan, Statistic};
use crate::survey_data::{partition_by_area, Domain, SurveyDataset};

/// Parameter grid of one membership kind. Axes a kind does not use are
/// ignored; an empty `beta` axis means the configured default.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub kind: MembershipKind,
    pub z1: Vec<ParamValue>,
    pub z2: Vec<ParamValue>,
    pub beta: Vec<f64>,
}

impl SweepGrid {
    pub fn new(kind: MembershipKind, z1: Vec<ParamValue>, z2: Vec<ParamValue>, beta: Vec<f64>) -> Self {
        SweepGrid { kind, z1, z2, beta }
    }

    fn uses_z1(&self) -> bool {
        matches!(self.kind, MembershipKind::CerioliZani | MembershipKind::Belhadj2011 | MembershipKind::Belhadj2014)
    }

    /// Every combination of the used axes, before admissibility filtering.
    pub fn configs(&self) -> Result<Vec<MembershipConfig>> {
        if !matches!(
            self.kind,
            MembershipKind::CerioliZani
                | MembershipKind::Belhadj2011
                | MembershipKind::Belhadj2014
                | MembershipKind::Chakravarty2019
        ) {
            return Err(Error::BadConfig(alloc::format!("{} has no threshold parameters to sweep", self.kind)));
        }
        let base = MembershipConfig::standard(self.kind);
        let z1: Vec<Option<ParamValue>> =
            if self.uses_z1() { self.z1.iter().copied().map(Some).collect() } else { vec![None] };
        let z2: Vec<Option<ParamValue>> = self.z2.iter().copied().map(Some).collect();
        let beta: Vec<Option<f64>> = if self.kind == MembershipKind::Belhadj2014 && !self.beta.is_empty() {
            self.beta.iter().copied().map(Some).collect()
        } else {
            vec![base.beta]
        };
        let mut out = Vec::new();
        for &b in &beta {
            for &a in &z1 {
                for &c in &z2 {
                    out.push(MembershipConfig { z1: a, z2: c, beta: b, ..base.clone() });
                }
            }
        }
        if out.is_empty() {
            return Err(Error::EmptyGrid);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceValue {
    Estimated { h: f64, mse: f64 },
    /// Resolved thresholds violate `z1 < z2`.
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint {
    pub config: MembershipConfig,
    pub z1: Option<f64>,
    pub z2: Option<f64>,
    pub beta: Option<f64>,
    pub value: SurfaceValue,
}

/// A surface prepared for evaluation: resolved gridpoints plus the
/// replicate weight systems shared by all of them.
#[derive(Debug, Clone)]
pub struct Surface<'a> {
    dataset: &'a SurveyDataset,
    plan: ReplicationPlan,
    points: Vec<SurfacePoint>,
    systems: Vec<Vec<f64>>,
}

impl<'a> Surface<'a> {
    pub fn prepare(dataset: &'a SurveyDataset, grid: &SweepGrid, plan: &ReplicationPlan) -> Result<Self> {
        plan.validate()?;
        let order = IncomeOrder::new(dataset.incomes());
        let (y, w) = (dataset.incomes(), dataset.weights());
        let resolve = |p: Option<ParamValue>| p.map(|v| v.resolve_with(&order, y, w)).transpose();
        let mut points = Vec::new();
        for config in grid.configs()? {
            let z1 = resolve(config.z1)?;
            let z2 = resolve(config.z2)?;
            let admissible = match (z1, z2) {
                (Some(a), Some(b)) => a < b,
                _ => true,
            };
            let value = if admissible { SurfaceValue::Estimated { h: f64::NAN, mse: f64::NAN } } else { SurfaceValue::Skipped };
            points.push(SurfacePoint { config, z1, z2, beta: None, value });
        }
        if points.iter().all(|p| p.value == SurfaceValue::Skipped) {
            return Err(Error::EmptyGrid);
        }
        for p in &mut points {
            p.beta = p.config.beta;
        }
        let systems = match plan.method {
            ReplicationMethod::Bootstrap => resampling::bootstrap_weight_systems(dataset, plan)?,
            ReplicationMethod::Jackknife => Vec::new(),
        };
        Ok(Surface { dataset, plan: plan.clone(), points, systems })
    }

    pub fn points(&self) -> &[SurfacePoint] {
        &self.points
    }

    pub fn plan(&self) -> &ReplicationPlan {
        &self.plan
    }

    /// National `(H, mse)` at gridpoint `i`; `None` when skipped.
    pub fn evaluate(&self, i: usize) -> Result<Option<(f64, f64)>> {
        let p = &self.points[i];
        if p.value == SurfaceValue::Skipped {
            return Ok(None);
        }
        let spec = p.config.resolve(self.dataset.incomes(), self.dataset.weights(), &ResolveOptions::default())?;
        let stat = FuzzyIndexStatistic::new(self.dataset, spec, vec![Domain::National])?;
        let est = match self.plan.method {
            ReplicationMethod::Bootstrap => {
                resampling::bootstrap_mse_from_weights(self.dataset.weights(), &stat, &self.systems)?
            }
            ReplicationMethod::Jackknife => resampling::estimate_mse(self.dataset, &stat, &self.plan)?,
        };
        Ok(Some((est[0].point, est[0].mse)))
    }

    /// Stores results from [`Surface::evaluate`], aligned with the points.
    pub fn finish(mut self, values: Vec<Option<(f64, f64)>>) -> Vec<SurfacePoint> {
        for (p, v) in self.points.iter_mut().zip(values) {
            if let Some((h, mse)) = v {
                p.value = SurfaceValue::Estimated { h, mse };
            }
        }
        self.points
    }
}

/// National MSE at every admissible gridpoint. Bootstrap plans reuse one
/// set of replicate weights across the whole grid.
pub fn mse_surface(dataset: &SurveyDataset, grid: &SweepGrid, plan: &ReplicationPlan) -> Result<Vec<SurfacePoint>> {
    let surface = Surface::prepare(dataset, grid, plan)?;
    let values = (0..surface.points().len()).map(|i| surface.evaluate(i)).collect::<Result<Vec<_>>>()?;
    Ok(surface.finish(values))
}

/// Ranks starting at 1, ties sharing the mean of their positions.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn check_pair(r: &[f64], s: &[f64]) -> Result<()> {
    if r.len() != s.len() {
        return Err(Error::LengthMismatch { expected: r.len(), got: s.len() });
    }
    if r.len() < 2 {
        return Err(Error::TooFewAreas(r.len()));
    }
    Ok(())
}

fn sign(a: f64, b: f64) -> i64 {
    if a == b {
        0
    } else if a < b {
        -1
    } else {
        1
    }
}

/// Kendall tau-b: `(C - D) / sqrt((P - T_r)(P - T_s))`.
pub fn kendall_tau(r: &[f64], s: &[f64]) -> Result<f64> {
    check_pair(r, s)?;
    let n = r.len();
    let (mut concordant, mut discordant, mut tied_r, mut tied_s) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let a = sign(r[i], r[j]);
            let b = sign(s[i], s[j]);
            if r[i] == r[j] {
                tied_r += 1;
            }
            if s[i] == s[j] {
                tied_s += 1;
            }
            match a * b {
                1 => concordant += 1,
                -1 => discordant += 1,
                _ => {}
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as i64;
    if tied_r == pairs || tied_s == pairs {
        return Err(Error::DegenerateRanks);
    }
    let denom = libm::sqrt(((pairs - tied_r) as f64) * ((pairs - tied_s) as f64));
    Ok(((concordant - discordant) as f64 / denom).clamp(-1.0, 1.0))
}

/// Pearson correlation of the midranks of `r` and `s`.
pub fn spearman_rho(r: &[f64], s: &[f64]) -> Result<f64> {
    check_pair(r, s)?;
    let (a, b) = (midranks(r), midranks(s));
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(&b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(Error::DegenerateRanks);
    }
    Ok((sab / libm::sqrt(saa * sbb)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankComparison {
    pub config: MembershipConfig,
    /// `H_hat` per area.
    pub estimates: BTreeMap<String, f64>,
    pub kendall: f64,
    pub spearman: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankStabilityReport {
    pub benchmark: MembershipConfig,
    pub benchmark_estimates: BTreeMap<String, f64>,
    pub alternatives: Vec<RankComparison>,
}

fn area_estimates(
    dataset: &SurveyDataset,
    areas: &[Domain],
    config: &MembershipConfig,
    options: &ResolveOptions,
) -> Result<Vec<f64>> {
    let spec = config.resolve(dataset.incomes(), dataset.weights(), options)?;
    FuzzyIndexStatistic::new(dataset, spec, areas.to_vec())?.evaluate(dataset.weights())
}

/// Ranks areas by `H_hat` under the benchmark and every alternative and
/// correlates each alternative ranking with the benchmark one.
pub fn rank_stability(
    dataset: &SurveyDataset,
    benchmark: &MembershipConfig,
    alternatives: &[MembershipConfig],
    options: &ResolveOptions,
) -> Result<RankStabilityReport> {
    let partition = partition_by_area(dataset)?;
    let areas: Vec<Domain> = partition.area_labels().map(|l| Domain::Area(l.to_string())).collect();
    if areas.len() < 2 {
        return Err(Error::TooFewAreas(areas.len()));
    }
    let labels: Vec<String> = areas.iter().map(|d| d.label().to_string()).collect();
    let base = area_estimates(dataset, &areas, benchmark, options)?;
    let base_ranks = midranks(&base);
    let mut rows = Vec::with_capacity(alternatives.len());
    for alt in alternatives {
        let values = area_estimates(dataset, &areas, alt, options)?;
        let ranks = midranks(&values);
        rows.push(RankComparison {
            config: alt.clone(),
            estimates: labels.iter().cloned().zip(values).collect(),
            kendall: kendall_tau(&base_ranks, &ranks)?,
            spearman: spearman_rho(&base_ranks, &ranks)?,
        });
    }
    Ok(RankStabilityReport {
        benchmark: benchmark.clone(),
        benchmark_estimates: labels.into_iter().zip(base).collect(),
        alternatives: rows,
    })
}

/// Mean coefficients per alternative over several reports with the same
/// alternatives (for instance one per Monte Carlo sample).
pub fn mean_coefficients(reports: &[RankStabilityReport]) -> Result<Vec<(f64, f64)>> {
    let first = reports.first().ok_or(Error::EmptySequence)?;
    let k = first.alternatives.len();
    let mut sums = vec![(0.0, 0.0); k];
    for r in reports {
        if r.alternatives.len() != k {
            return Err(Error::LengthMismatch { expected: k, got: r.alternatives.len() });
        }
        for (acc, c) in sums.iter_mut().zip(&r.alternatives) {
            acc.0 += c.kendall;
            acc.1 += c.spearman;
        }
    }
    let n = reports.len() as f64;
    Ok(sums.into_iter().map(|(a, b)| (a / n, b / n)).collect())
}

/// Symmetric quantile pairs `Q(p)/Q(1-p)` for `p = 0.02, 0.03, ..., 0.10`.
pub fn default_quantile_pairs() -> Vec<(ParamValue, ParamValue)> {
    (2..=10).map(|k| (ParamValue::Quantile(k as f64 / 100.0), ParamValue::Quantile((100 - k) as f64 / 100.0))).collect()
}

/// `Q(0.30)` to `Q(0.75)` in steps of 0.05, excluding the median.
pub fn default_chakravarty_thresholds() -> Vec<ParamValue> {
    (6..=15).filter(|&k| k != 10).map(|k| ParamValue::Quantile((5 * k) as f64 / 100.0)).collect()
}

/// Shape values compared against the benchmark `beta = 2`.
pub fn default_beta_sweep() -> Vec<f64> {
    vec![1.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]
}

/// Shape slices of the default Belhadj-2014 surface.
pub const DEFAULT_SURFACE_BETAS: [f64; 4] = [1.0, 2.0, 4.0, 10.0];

/// Alternatives of the default threshold sweep for `kind`.
pub fn default_alternatives(kind: MembershipKind) -> Vec<MembershipConfig> {
    let base = MembershipConfig::standard(kind);
    match kind {
        MembershipKind::Chakravarty2019 => {
            default_chakravarty_thresholds().into_iter().map(|z2| base.clone().with_thresholds(None, Some(z2))).collect()
        }
        MembershipKind::CerioliZani | MembershipKind::Belhadj2011 | MembershipKind::Belhadj2014 => default_quantile_pairs()
            .into_iter()
            .map(|(a, b)| base.clone().with_thresholds(Some(a), Some(b)))
            .collect(),
        _ => Vec::new(),
    }
}

/// Default grid of the MSE surface for `kind`: quantiles 0.01..0.49 for
/// `z1` and 0.51..0.99 for `z2` in steps of 0.04.
pub fn default_grid(kind: MembershipKind) -> SweepGrid {
    let lower: Vec<ParamValue> = (0..13).map(|k| ParamValue::Quantile((1 + 4 * k) as f64 / 100.0)).collect();
    let upper: Vec<ParamValue> = (0..13).map(|k| ParamValue::Quantile((51 + 4 * k) as f64 / 100.0)).collect();
    let beta = if kind == MembershipKind::Belhadj2014 { DEFAULT_SURFACE_BETAS.to_vec() } else { Vec::new() };
    match kind {
        MembershipKind::Chakravarty2019 => {
            let z2 = (1..25).map(|k| ParamValue::Quantile((4 * k) as f64 / 100.0)).collect();
            SweepGrid::new(kind, Vec::new(), z2, beta)
        }
        _ => SweepGrid::new(kind, lower, upper, beta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survey_data::{DesignInfo, Observation};

    fn dataset() -> SurveyDataset {
        let obs = (0..60)
            .map(|i| {
                let area = ["A", "B", "C"][i % 3];
                let y = 100.0 + (i * 37 % 61) as f64 * 10.0 + (i % 3) as f64 * 40.0;
                crate::survey_data::tests::obs(i, area, 1.0 + (i % 4) as f64, y)
            })
            .collect::<Vec<Observation>>();
        SurveyDataset::new(obs, DesignInfo::srs()).unwrap()
    }

    #[test]
    fn correlation_examples() {
        let id = [1.0, 2.0, 3.0];
        assert_eq!(kendall_tau(&id, &id).unwrap(), 1.0);
        assert_eq!(spearman_rho(&id, &id).unwrap(), 1.0);
        assert_eq!(kendall_tau(&id, &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert_eq!(spearman_rho(&id, &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!((kendall_tau(&id, &[1.0, 3.0, 2.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((spearman_rho(&id, &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(kendall_tau(&id, &[1.0, 2.0]), Err(Error::LengthMismatch { expected: 3, got: 2 }));
        assert_eq!(kendall_tau(&id, &[2.0, 2.0, 2.0]), Err(Error::DegenerateRanks));
        assert_eq!(spearman_rho(&[5.0, 5.0], &[1.0, 2.0]), Err(Error::DegenerateRanks));
    }

    #[test]
    fn midrank_ties() {
        assert_eq!(midranks(&[10.0, 20.0, 10.0, 5.0]), vec![2.5, 4.0, 2.5, 1.0]);
    }

    #[test]
    fn default_sweeps() {
        let pairs = default_quantile_pairs();
        assert_eq!(pairs.len(), 9);
        assert_eq!(pairs[0], (ParamValue::Quantile(0.02), ParamValue::Quantile(0.98)));
        let chak = default_chakravarty_thresholds();
        assert_eq!(chak.len(), 9);
        assert!(!chak.contains(&ParamValue::Quantile(0.5)));
        assert_eq!(default_beta_sweep().len(), 9);
    }

    #[test]
    fn benchmark_against_itself() {
        let d = dataset();
        let bench = MembershipConfig::standard(MembershipKind::CerioliZani);
        let r = rank_stability(&d, &bench, core::slice::from_ref(&bench), &ResolveOptions::default()).unwrap();
        assert_eq!((r.alternatives[0].kendall, r.alternatives[0].spearman), (1.0, 1.0));
    }

    #[test]
    fn single_area_is_rejected() {
        let obs = (0..5).map(|i| crate::survey_data::tests::obs(i, "A", 1.0, i as f64)).collect();
        let d = SurveyDataset::new(obs, DesignInfo::srs()).unwrap();
        let bench = MembershipConfig::standard(MembershipKind::CerioliZani);
        assert_eq!(rank_stability(&d, &bench, &[], &ResolveOptions::default()), Err(Error::TooFewAreas(1)));
    }

    #[test]
    fn surface_skips_inadmissible_points() {
        let d = dataset();
        let q = ParamValue::Quantile;
        let grid = SweepGrid::new(MembershipKind::CerioliZani, vec![q(0.2), q(0.5)], vec![q(0.5), q(0.8)], vec![]);
        let rows = mse_surface(&d, &grid, &ReplicationPlan::bootstrap(30, 1)).unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            let admissible = r.z1.unwrap() < r.z2.unwrap();
            assert_eq!(r.value == SurfaceValue::Skipped, !admissible);
            if let SurfaceValue::Estimated { h, mse } = r.value {
                assert!((0.0..=1.0).contains(&h) && mse >= 0.0);
            }
        }
        let empty = SweepGrid::new(MembershipKind::CerioliZani, vec![q(0.9)], vec![q(0.1)], vec![]);
        assert_eq!(mse_surface(&d, &empty, &ReplicationPlan::bootstrap(30, 1)).unwrap_err(), Error::EmptyGrid);
    }

    #[test]
    fn chakravarty_surface_ignores_z1() {
        let d = dataset();
        let q = ParamValue::Quantile;
        let grid = SweepGrid::new(MembershipKind::Chakravarty2019, vec![q(0.1), q(0.2)], vec![q(0.5), q(0.7)], vec![]);
        let rows = mse_surface(&d, &grid, &ReplicationPlan::bootstrap(20, 3)).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.z1.is_none()));
    }

    #[test]
    fn belhadj_slices() {
        let d = dataset();
        let grid = default_grid(MembershipKind::Belhadj2014);
        let configs = grid.configs().unwrap();
        let betas: alloc::collections::BTreeSet<u64> = configs.iter().map(|c| c.beta.unwrap() as u64).collect();
        assert_eq!(betas.into_iter().collect::<Vec<_>>(), vec![1, 2, 4, 10]);
        let small = SweepGrid::new(MembershipKind::Belhadj2014, vec![ParamValue::Quantile(0.1)], vec![ParamValue::Quantile(0.9)], vec![1.0, 2.0, 4.0, 10.0]);
        assert_eq!(mse_surface(&d, &small, &ReplicationPlan::bootstrap(10, 2)).unwrap().len(), 4);
    }
}
