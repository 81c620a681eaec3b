//! Weighted empirical statistics and the fuzzy index estimator.
//!
//! All functions take parallel `incomes` / `weights` slices. Zero-weight
//! units are allowed and contribute nothing.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Share of the median used for the monetary poverty line.
pub const POVERTY_LINE_SHARE: f64 = 0.6;

/// Relative slack when comparing cumulative weight shares with a target
/// probability, so that `k/n` quantiles of equal weights hit the `k`-th
/// order statistic despite rounding in the running sum.
const QUANTILE_SLACK: f64 = 1e-12;

fn check_lengths(incomes: &[f64], weights: &[f64]) -> Result<()> {
    if incomes.len() != weights.len() {
        return Err(Error::LengthMismatch { expected: incomes.len(), got: weights.len() });
    }
    Ok(())
}

fn positive_total(weights: &[f64]) -> Result<f64> {
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        Ok(total)
    } else {
        Err(Error::ZeroTotalWeight)
    }
}

/// Ascending income order of a fixed set of units.
///
/// Sorting once and re-using the permutation lets replicate weight systems
/// recompute ECDF and Lorenz values in linear time.
#[derive(Debug, Clone)]
pub struct IncomeOrder {
    order: Vec<usize>,
}

impl IncomeOrder {
    pub fn new(incomes: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..incomes.len()).collect();
        order.sort_by(|&a, &b| incomes[a].total_cmp(&incomes[b]));
        IncomeOrder { order }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }

    /// Runs of tied incomes, as ranges into the sorted order.
    fn tie_groups<'a>(&'a self, incomes: &'a [f64]) -> impl Iterator<Item = core::ops::Range<usize>> + 'a {
        let n = self.order.len();
        let mut start = 0;
        core::iter::from_fn(move || {
            if start >= n {
                return None;
            }
            let y = incomes[self.order[start]];
            let mut end = start + 1;
            while end < n && incomes[self.order[end]] == y {
                end += 1;
            }
            let r = start..end;
            start = end;
            Some(r)
        })
    }

    /// `F(y_i)` for every unit, with `F(y) = share of weight at incomes <= y`.
    pub fn ecdf_at_units(&self, incomes: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
        check_lengths(incomes, weights)?;
        let mut cum = Vec::with_capacity(self.order.len());
        let mut running = 0.0;
        let mut out = alloc::vec![0.0; incomes.len()];
        for group in self.tie_groups(incomes) {
            for &i in &self.order[group.clone()] {
                running += weights[i];
            }
            cum.push((group, running));
        }
        let total = running;
        if total <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
        for (group, c) in cum {
            let f = c / total;
            for &i in &self.order[group] {
                out[i] = f;
            }
        }
        Ok(out)
    }

    /// `1 - L(y_i)` for every unit: weighted income strictly above `y_i`
    /// over total weighted income.
    pub fn lorenz_complement_at_units(&self, incomes: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
        check_lengths(incomes, weights)?;
        let groups: Vec<_> = self.tie_groups(incomes).collect();
        let mut out = alloc::vec![0.0; incomes.len()];
        let mut above = 0.0;
        let mut tails = Vec::with_capacity(groups.len());
        for group in groups.iter().rev() {
            tails.push(above);
            for &i in &self.order[group.clone()] {
                above += weights[i] * incomes[i];
            }
        }
        let total = above;
        if total <= 0.0 {
            return Err(Error::ZeroTotalIncome);
        }
        for (group, tail) in groups.into_iter().rev().zip(tails) {
            let v = tail / total;
            for &i in &self.order[group] {
                out[i] = v;
            }
        }
        Ok(out)
    }

    pub fn ecdf(&self, incomes: &[f64], weights: &[f64]) -> Result<WeightedEcdf> {
        let at_units = self.ecdf_at_units(incomes, weights)?;
        let support = self
            .tie_groups(incomes)
            .map(|g| {
                let i = self.order[g.start];
                (incomes[i], at_units[i])
            })
            .collect();
        Ok(WeightedEcdf { support })
    }

    pub fn lorenz_complement(&self, incomes: &[f64], weights: &[f64]) -> Result<LorenzComplement> {
        let at_units = self.lorenz_complement_at_units(incomes, weights)?;
        let support = self
            .tie_groups(incomes)
            .map(|g| {
                let i = self.order[g.start];
                (incomes[i], at_units[i])
            })
            .collect();
        Ok(LorenzComplement { support })
    }

    /// Lower weighted quantile: the smallest positively weighted income `y`
    /// with `F(y) >= p`.
    pub fn quantile(&self, incomes: &[f64], weights: &[f64], p: f64) -> Result<f64> {
        check_lengths(incomes, weights)?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::POutOfRange(p));
        }
        let total = positive_total(weights)?;
        let target = p * total - QUANTILE_SLACK * total;
        let mut running = 0.0;
        let mut last = None;
        for &i in &self.order {
            if weights[i] <= 0.0 {
                continue;
            }
            running += weights[i];
            last = Some(incomes[i]);
            if running >= target {
                return Ok(incomes[i]);
            }
        }
        last.ok_or(Error::ZeroTotalWeight)
    }
}

impl IncomeOrder {
    /// Lower weighted quantiles for several nondecreasing levels in one pass.
    pub fn quantiles(&self, incomes: &[f64], weights: &[f64], levels: &[f64]) -> Result<Vec<f64>> {
        check_lengths(incomes, weights)?;
        if let Some(&p) = levels.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::POutOfRange(p));
        }
        if levels.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::BadConfig(alloc::string::String::from("quantile levels must be nondecreasing")));
        }
        let total = positive_total(weights)?;
        let mut out = Vec::with_capacity(levels.len());
        let mut running = 0.0;
        let mut last = f64::NAN;
        let mut units = self.order.iter().copied().filter(|&i| weights[i] > 0.0);
        for &p in levels {
            let target = p * total - QUANTILE_SLACK * total;
            while !(running >= target && !last.is_nan()) {
                match units.next() {
                    Some(i) => {
                        running += weights[i];
                        last = incomes[i];
                    }
                    None => break,
                }
            }
            out.push(last);
        }
        Ok(out)
    }
}

/// Step function `F(y)` over distinct incomes.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEcdf {
    support: Vec<(f64, f64)>,
}

impl WeightedEcdf {
    pub fn support(&self) -> &[(f64, f64)] {
        &self.support
    }

    pub fn eval(&self, y: f64) -> f64 {
        let k = self.support.partition_point(|&(s, _)| s <= y);
        if k == 0 {
            0.0
        } else {
            self.support[k - 1].1
        }
    }
}

/// Step function `1 - L(y)` over distinct incomes.
#[derive(Debug, Clone, PartialEq)]
pub struct LorenzComplement {
    support: Vec<(f64, f64)>,
}

impl LorenzComplement {
    pub fn support(&self) -> &[(f64, f64)] {
        &self.support
    }

    pub fn eval(&self, y: f64) -> f64 {
        let k = self.support.partition_point(|&(s, _)| s <= y);
        if k == 0 {
            1.0
        } else {
            self.support[k - 1].1
        }
    }
}

pub fn weighted_ecdf(incomes: &[f64], weights: &[f64]) -> Result<WeightedEcdf> {
    check_lengths(incomes, weights)?;
    IncomeOrder::new(incomes).ecdf(incomes, weights)
}

pub fn lorenz_complement(incomes: &[f64], weights: &[f64]) -> Result<LorenzComplement> {
    check_lengths(incomes, weights)?;
    IncomeOrder::new(incomes).lorenz_complement(incomes, weights)
}

pub fn weighted_quantile(incomes: &[f64], weights: &[f64], p: f64) -> Result<f64> {
    check_lengths(incomes, weights)?;
    IncomeOrder::new(incomes).quantile(incomes, weights, p)
}

/// 60% of the weighted (lower) median.
pub fn poverty_line(incomes: &[f64], weights: &[f64]) -> Result<f64> {
    Ok(POVERTY_LINE_SHARE * weighted_quantile(incomes, weights, 0.5)?)
}

/// Weighted share of units with income `<= tau`.
pub fn head_count_ratio(incomes: &[f64], weights: &[f64], tau: f64) -> Result<f64> {
    check_lengths(incomes, weights)?;
    let total = positive_total(weights)?;
    let poor: f64 = incomes.iter().zip(weights).filter(|(&y, _)| y <= tau).map(|(_, &w)| w).sum();
    Ok(poor / total)
}

/// Weight-normalised average membership `sum(mu_i w_i) / sum(w_i)`.
pub fn fuzzy_index(memberships: &[f64], weights: &[f64]) -> Result<f64> {
    if memberships.len() != weights.len() {
        return Err(Error::LengthMismatch { expected: weights.len(), got: memberships.len() });
    }
    if let Some(&bad) = memberships.iter().find(|m| !(0.0..=1.0).contains(*m)) {
        return Err(Error::MembershipOutOfRange(bad));
    }
    let total = positive_total(weights)?;
    let num: f64 = memberships.iter().zip(weights).map(|(m, w)| m * w).sum();
    Ok(num / total)
}

/// Weighted mean of `values` over the units in `indices`; `None` when the
/// units carry no weight.
pub fn weighted_mean_over(values: &[f64], weights: &[f64], indices: &[usize]) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for &i in indices {
        num += values[i] * weights[i];
        den += weights[i];
    }
    (den > 0.0).then(|| num / den)
}
