//! Membership functions of the fuzzy poverty set and their calibration.
//!
//! Distance-based functions (trapezoidal, Chakravarty, Belhadj 2014,
//! Zedini–Belhadj) depend on income thresholds. Distribution-based functions
//! (TFR, Betti–Verma, Betti et al. 2006) depend on the weighted ECDF and
//! Lorenz complement of the domain plus an exponent `alpha`.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::estimation::{self, IncomeOrder, LorenzComplement, WeightedEcdf};
use crate::rng::{replicate_rng, Stream};

/// Which membership function to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MembershipKind {
    /// Cerioli and Zani (1990), trapezoidal.
    CerioliZani,
    /// Belhadj (2011); identical to the trapezoidal form.
    Belhadj2011,
    /// Zedini and Belhadj (2015), 100 bootstrap-percentile triangles.
    ZediniBelhadj2015,
    /// Belhadj (2014), two power branches joined at a flex point.
    Belhadj2014,
    /// Chakravarty (2019), linear from zero income.
    Chakravarty2019,
    /// Cheli and Lemmi (1995), totally fuzzy and relative.
    CheliLemmiTfr,
    /// Betti and Verma (1999), Lorenz based.
    BettiVerma,
    /// Betti et al. (2006), ECDF and Lorenz based.
    Betti2006,
    /// Staircase `1(y <= z1)`: the crisp head-count membership.
    Crisp,
}

impl MembershipKind {
    /// The published functions, in the column order used by reports.
    pub const PUBLISHED: [MembershipKind; 8] = [
        MembershipKind::Belhadj2014,
        MembershipKind::CerioliZani,
        MembershipKind::Chakravarty2019,
        MembershipKind::CheliLemmiTfr,
        MembershipKind::BettiVerma,
        MembershipKind::Betti2006,
        MembershipKind::ZediniBelhadj2015,
        MembershipKind::Belhadj2011,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MembershipKind::CerioliZani => "CERIOLI_ZANI",
            MembershipKind::Belhadj2011 => "BELHADJ_2011",
            MembershipKind::ZediniBelhadj2015 => "ZEDINI_BELHADJ_2015",
            MembershipKind::Belhadj2014 => "BELHADJ_2014",
            MembershipKind::Chakravarty2019 => "CHAKRAVARTY_2019",
            MembershipKind::CheliLemmiTfr => "CHELI_LEMMI_TFR",
            MembershipKind::BettiVerma => "BETTI_VERMA",
            MembershipKind::Betti2006 => "BETTI_2006",
            MembershipKind::Crisp => "CRISP",
        }
    }

    pub fn is_distribution_based(self) -> bool {
        matches!(self, MembershipKind::CheliLemmiTfr | MembershipKind::BettiVerma | MembershipKind::Betti2006)
    }

    /// Kinds whose thresholds are chosen by the analyst.
    pub fn is_normative(self) -> bool {
        matches!(
            self,
            MembershipKind::CerioliZani
                | MembershipKind::Belhadj2011
                | MembershipKind::Belhadj2014
                | MembershipKind::Chakravarty2019
        )
    }

    pub fn default_provenance(self) -> Provenance {
        if self.is_normative() {
            Provenance::Normative
        } else {
            Provenance::Positive
        }
    }
}

impl fmt::Display for MembershipKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MembershipKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace(['-', ' '], "_");
        let kind = match norm.as_str() {
            "CERIOLI_ZANI" | "TRAPEZOIDAL" => MembershipKind::CerioliZani,
            "BELHADJ_2011" => MembershipKind::Belhadj2011,
            "ZEDINI_BELHADJ_2015" | "ZBM" => MembershipKind::ZediniBelhadj2015,
            "BELHADJ_2014" => MembershipKind::Belhadj2014,
            "CHAKRAVARTY_2019" | "CHAKRAVARTY" => MembershipKind::Chakravarty2019,
            "CHELI_LEMMI_TFR" | "TFR" => MembershipKind::CheliLemmiTfr,
            "BETTI_VERMA" => MembershipKind::BettiVerma,
            "BETTI_2006" => MembershipKind::Betti2006,
            "CRISP" => MembershipKind::Crisp,
            _ => return Err(Error::UnknownKind(s.to_string())),
        };
        Ok(kind)
    }
}

/// Whether a spec's parameters come from a data-driven rule or from the analyst.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Positive,
    Normative,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Positive => "POSITIVE",
            Provenance::Normative => "NORMATIVE",
        }
    }
}

/// A threshold written either as an income or as a quantile `Q(p)` of the
/// data it will be resolved against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamValue {
    Income(f64),
    Quantile(f64),
}

impl ParamValue {
    pub fn resolve(self, incomes: &[f64], weights: &[f64]) -> Result<f64> {
        match self {
            ParamValue::Income(v) => Ok(v),
            ParamValue::Quantile(p) => estimation::weighted_quantile(incomes, weights, p),
        }
    }

    pub(crate) fn resolve_with(self, order: &IncomeOrder, incomes: &[f64], weights: &[f64]) -> Result<f64> {
        match self {
            ParamValue::Income(v) => Ok(v),
            ParamValue::Quantile(p) => order.quantile(incomes, weights, p),
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Income(v) => write!(f, "{v}"),
            ParamValue::Quantile(p) => write!(f, "Q({p})"),
        }
    }
}

impl FromStr for ParamValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let bad = || Error::BadParamValue(s.to_string());
        if let Some(inner) = t.strip_prefix("Q(").or_else(|| t.strip_prefix("q(")) {
            let inner = inner.strip_suffix(')').ok_or_else(bad)?;
            let p: f64 = inner.trim().parse().map_err(|_| bad())?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::POutOfRange(p));
            }
            return Ok(ParamValue::Quantile(p));
        }
        let v: f64 = t.parse().map_err(|_| bad())?;
        if !v.is_finite() {
            return Err(bad());
        }
        Ok(ParamValue::Income(v))
    }
}

/// One triangle `(a, b, c)` of the Zedini–Belhadj construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZbmTriple {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// The 100 percentile triples and the cardinality of each fuzzy set.
#[derive(Debug, Clone, PartialEq)]
pub struct ZbmParams {
    triples: Vec<ZbmTriple>,
    cardinalities: Vec<f64>,
}

impl ZbmParams {
    pub fn new(triples: Vec<ZbmTriple>, cardinalities: Vec<f64>) -> Result<Self> {
        if triples.is_empty() {
            return Err(Error::EmptyTriples);
        }
        if triples.len() != cardinalities.len() {
            return Err(Error::LengthMismatch { expected: triples.len(), got: cardinalities.len() });
        }
        if let Some(t) = triples.iter().find(|t| !(t.a <= t.b && t.b <= t.c)) {
            return Err(Error::BadThresholds { z1: t.a, z2: t.c });
        }
        if cardinalities.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::BadConfig("ZBM cardinalities must be nonnegative".to_string()));
        }
        Ok(ZbmParams { triples, cardinalities })
    }

    pub fn triples(&self) -> &[ZbmTriple] {
        &self.triples
    }

    pub fn cardinalities(&self) -> &[f64] {
        &self.cardinalities
    }
}

/// Fully resolved membership function: every parameter is a number.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipSpec {
    pub kind: MembershipKind,
    pub z1: Option<f64>,
    pub z2: Option<f64>,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    pub zbm: Option<ZbmParams>,
    pub provenance: Provenance,
}

impl MembershipSpec {
    fn bare(kind: MembershipKind) -> Self {
        MembershipSpec {
            kind,
            z1: None,
            z2: None,
            beta: None,
            alpha: None,
            zbm: None,
            provenance: kind.default_provenance(),
        }
    }

    pub fn trapezoidal(z1: f64, z2: f64) -> Self {
        MembershipSpec { z1: Some(z1), z2: Some(z2), ..Self::bare(MembershipKind::CerioliZani) }
    }

    pub fn belhadj2011(z_min: f64, z_max: f64) -> Self {
        MembershipSpec { z1: Some(z_min), z2: Some(z_max), ..Self::bare(MembershipKind::Belhadj2011) }
    }

    pub fn chakravarty(z2: f64) -> Self {
        MembershipSpec { z2: Some(z2), ..Self::bare(MembershipKind::Chakravarty2019) }
    }

    pub fn belhadj2014(z1: f64, z2: f64, beta: f64) -> Self {
        MembershipSpec { z1: Some(z1), z2: Some(z2), beta: Some(beta), ..Self::bare(MembershipKind::Belhadj2014) }
    }

    pub fn zbm(params: ZbmParams) -> Self {
        MembershipSpec { zbm: Some(params), ..Self::bare(MembershipKind::ZediniBelhadj2015) }
    }

    /// A distribution-based spec with a fixed exponent.
    pub fn distribution(kind: MembershipKind, alpha: f64) -> Self {
        MembershipSpec { alpha: Some(alpha), ..Self::bare(kind) }
    }

    pub fn crisp(tau: f64) -> Self {
        MembershipSpec { z1: Some(tau), ..Self::bare(MembershipKind::Crisp) }
    }

    fn need(&self, v: Option<f64>, param: &'static str) -> Result<f64> {
        v.ok_or(Error::MissingParameter { kind: self.kind.name(), param })
    }

    /// Checks that the parameters required by `kind` are present and valid.
    pub fn validate(&self) -> Result<()> {
        use MembershipKind::*;
        match self.kind {
            CerioliZani | Belhadj2011 => {
                let (z1, z2) = (self.need(self.z1, "z1")?, self.need(self.z2, "z2")?);
                check_thresholds(z1, z2)
            }
            Chakravarty2019 => {
                let z2 = self.need(self.z2, "z2")?;
                check_thresholds(0.0, z2)
            }
            Belhadj2014 => {
                let (z1, z2) = (self.need(self.z1, "z1")?, self.need(self.z2, "z2")?);
                let beta = self.need(self.beta, "beta")?;
                check_belhadj2014(z1, z2, beta)
            }
            ZediniBelhadj2015 => {
                self.zbm.as_ref().ok_or(Error::MissingParameter { kind: self.kind.name(), param: "zbm_params" })?;
                Ok(())
            }
            CheliLemmiTfr | BettiVerma | Betti2006 => check_alpha(self.need(self.alpha, "alpha")?),
            Crisp => self.need(self.z1, "z1").map(|_| ()),
        }
    }
}

fn check_thresholds(z1: f64, z2: f64) -> Result<()> {
    if z1 < z2 && z1.is_finite() && z2.is_finite() {
        Ok(())
    } else {
        Err(Error::BadThresholds { z1, z2 })
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 1.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::BadAlpha(alpha))
    }
}

fn check_belhadj2014(z1: f64, z2: f64, beta: f64) -> Result<()> {
    if !(z1 > 0.0) {
        return Err(Error::BadThresholds { z1, z2 });
    }
    check_thresholds(z1, z2)?;
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::BadShape(beta))
    }
}

// ---------------------------------------------------------------------------
// Distance-based evaluators

/// Trapezoidal membership: 1 up to `z1`, linear down to 0 at `z2`.
pub fn eval_trapezoidal(y: f64, z1: f64, z2: f64) -> Result<f64> {
    check_thresholds(z1, z2)?;
    Ok(trapezoidal(y, z1, z2))
}

#[inline]
fn trapezoidal(y: f64, z1: f64, z2: f64) -> f64 {
    if y <= z1 {
        1.0
    } else if y < z2 {
        (z2 - y) / (z2 - z1)
    } else {
        0.0
    }
}

/// Chakravarty membership: `(z2 - y) / z2` below `z2`, 0 above.
pub fn eval_chakravarty(y: f64, z2: f64) -> Result<f64> {
    check_thresholds(0.0, z2)?;
    Ok(chakravarty(y, z2))
}

#[inline]
fn chakravarty(y: f64, z2: f64) -> f64 {
    if y <= 0.0 {
        1.0
    } else if y < z2 {
        (z2 - y) / z2
    } else {
        0.0
    }
}

/// Point where both Belhadj (2014) branches agree for every shape `beta`.
pub fn belhadj2014_flex_point(z1: f64, z2: f64) -> f64 {
    2.0 * z1 * z2 / (z1 + z2)
}

/// The two power branches of the Belhadj (2014) function, unclamped.
pub fn belhadj2014_branches(y: f64, z1: f64, z2: f64, beta: f64) -> (f64, f64) {
    let lower = 1.0 - 0.5 * libm::pow((y - z1) / z1, beta);
    let upper = 1.0 - 0.5 * libm::pow((z2 - y) / z2, beta);
    (lower, upper)
}

pub fn eval_belhadj2014(y: f64, z1: f64, z2: f64, beta: f64) -> Result<f64> {
    check_belhadj2014(z1, z2, beta)?;
    Ok(belhadj2014(y, z1, z2, beta, belhadj2014_flex_point(z1, z2)))
}

#[inline]
fn belhadj2014(y: f64, z1: f64, z2: f64, beta: f64, flex: f64) -> f64 {
    let mu = if y < z1 {
        1.0
    } else if y < flex {
        1.0 - 0.5 * libm::pow((y - z1) / z1, beta)
    } else if y < z2 {
        1.0 - 0.5 * libm::pow((z2 - y) / z2, beta)
    } else {
        0.0
    };
    mu.clamp(0.0, 1.0)
}

/// Membership of `y` in one ZBM triangle. A triangle with `b == c`
/// reduces to the crisp indicator `1(a <= y < c)`.
pub fn eval_zbm_set(y: f64, t: &ZbmTriple) -> f64 {
    if y < t.a || y >= t.c {
        0.0
    } else if y < t.b {
        1.0
    } else {
        (t.c - y) / (t.c - t.b)
    }
}

/// Cardinality-weighted average of the per-set memberships.
pub fn eval_zbm(y: f64, params: &ZbmParams) -> Result<f64> {
    let total: f64 = params.cardinalities.iter().sum();
    if params.triples.is_empty() {
        return Err(Error::EmptyTriples);
    }
    if total <= 0.0 {
        return Err(Error::AllZeroCardinality);
    }
    let num: f64 = params.triples.iter().zip(&params.cardinalities).map(|(t, c)| c * eval_zbm_set(y, t)).sum();
    Ok((num / total).clamp(0.0, 1.0))
}

/// Assembles the 100 triples from the percentile estimates `p_1..p_100`.
pub fn zbm_triples(percentiles: &[f64]) -> Result<Vec<ZbmTriple>> {
    if percentiles.len() != 100 {
        return Err(Error::LengthMismatch { expected: 100, got: percentiles.len() });
    }
    let p = |j: usize| percentiles[j - 1];
    let mut triples = Vec::with_capacity(100);
    triples.push(ZbmTriple { a: 0.0, b: p(1), c: p(2) });
    for j in 2..=99 {
        triples.push(ZbmTriple { a: p(j - 1), b: p(j), c: p(j + 1) });
    }
    triples.push(ZbmTriple { a: p(99), b: 0.5 * (p(99) + p(100)), c: p(100) });
    Ok(triples)
}

/// Fits ZBM parameters from explicit bootstrap resamples, each given as the
/// list of drawn unit indices.
pub fn fit_zbm_params_from_resamples<I>(incomes: &[f64], weights: &[f64], resamples: I) -> Result<ZbmParams>
where
    I: IntoIterator,
    I::Item: AsRef<[usize]>,
{
    if incomes.len() != weights.len() {
        return Err(Error::LengthMismatch { expected: incomes.len(), got: weights.len() });
    }
    if incomes.len() < 100 {
        return Err(Error::DomainTooSmall(incomes.len()));
    }
    if weights.iter().sum::<f64>() <= 0.0 {
        return Err(Error::ZeroTotalWeight);
    }
    let order = IncomeOrder::new(incomes);
    let levels: Vec<f64> = (1..=100).map(|j| j as f64 / 100.0).collect();
    let mut sums = alloc::vec![0.0; 100];
    let mut counted = 0usize;
    let mut resampled = alloc::vec![0.0; incomes.len()];
    for draw in resamples {
        resampled.iter_mut().for_each(|w| *w = 0.0);
        for &i in draw.as_ref() {
            resampled[i] += weights[i];
        }
        // A resample of only zero-weight units carries no information.
        let Ok(q) = order.quantiles(incomes, &resampled, &levels) else { continue };
        for (s, v) in sums.iter_mut().zip(q) {
            *s += v;
        }
        counted += 1;
    }
    if counted == 0 {
        return Err(Error::ZeroTotalWeight);
    }
    let percentiles: Vec<f64> = sums.iter().map(|s| s / counted as f64).collect();
    let triples = zbm_triples(&percentiles)?;
    let cardinalities = triples.iter().map(|t| incomes.iter().map(|&y| eval_zbm_set(y, t)).sum()).collect();
    ZbmParams::new(triples, cardinalities)
}

/// Fits ZBM parameters with `resamples` uniform with-replacement bootstrap
/// draws of the domain.
pub fn fit_zbm_params(incomes: &[f64], weights: &[f64], resamples: usize, seed: u64) -> Result<ZbmParams> {
    if resamples == 0 {
        return Err(Error::BadPlan("ZBM fitting needs at least one resample"));
    }
    let n = incomes.len();
    let draws = (0..resamples).map(|r| {
        let mut rng = replicate_rng(seed, Stream::ZbmFit, r as u64);
        (0..n).map(|_| rng.random_range(0..n)).collect::<Vec<usize>>()
    });
    fit_zbm_params_from_resamples(incomes, weights, draws)
}

// ---------------------------------------------------------------------------
// Distribution-based evaluators

pub fn eval_tfr(y: f64, ecdf: &WeightedEcdf, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(tfr(ecdf.eval(y), alpha))
}

pub fn eval_betti_verma(y: f64, lorenz: &LorenzComplement, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(betti_verma(lorenz.eval(y), alpha))
}

pub fn eval_betti2006(y: f64, ecdf: &WeightedEcdf, lorenz: &LorenzComplement, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(betti2006(ecdf.eval(y), lorenz.eval(y), alpha))
}

#[inline]
fn tfr(f: f64, alpha: f64) -> f64 {
    libm::pow(1.0 - f, alpha).clamp(0.0, 1.0)
}

#[inline]
fn betti_verma(lorenz_complement: f64, alpha: f64) -> f64 {
    libm::pow(lorenz_complement, alpha - 1.0).clamp(0.0, 1.0)
}

#[inline]
fn betti2006(f: f64, lorenz_complement: f64, alpha: f64) -> f64 {
    (libm::pow(1.0 - f, alpha - 1.0) * lorenz_complement).clamp(0.0, 1.0)
}

/// Per-unit ECDF and Lorenz-complement values of one weight system, which
/// is all the distribution-based kinds need.
#[derive(Debug, Clone)]
pub struct DistributionValues {
    pub ecdf: Vec<f64>,
    pub lorenz_complement: Vec<f64>,
}

impl DistributionValues {
    pub fn compute(order: &IncomeOrder, incomes: &[f64], weights: &[f64]) -> Result<Self> {
        Ok(DistributionValues {
            ecdf: order.ecdf_at_units(incomes, weights)?,
            lorenz_complement: order.lorenz_complement_at_units(incomes, weights)?,
        })
    }

    /// Memberships of every unit for a distribution-based `kind`.
    pub fn memberships(&self, kind: MembershipKind, alpha: f64) -> Result<Vec<f64>> {
        check_alpha(alpha)?;
        let out = match kind {
            MembershipKind::CheliLemmiTfr => self.ecdf.iter().map(|&f| tfr(f, alpha)).collect(),
            MembershipKind::BettiVerma => self.lorenz_complement.iter().map(|&l| betti_verma(l, alpha)).collect(),
            MembershipKind::Betti2006 => {
                self.ecdf.iter().zip(&self.lorenz_complement).map(|(&f, &l)| betti2006(f, l, alpha)).collect()
            }
            _ => return Err(Error::BadConfig(alloc::format!("{kind} is not distribution based"))),
        };
        Ok(out)
    }
}

/// Absolute tolerance on the calibrated mean membership.
pub const CALIBRATION_TOLERANCE: f64 = 1e-8;
const CALIBRATION_MAX_ITER: usize = 200;
const ALPHA_CAP: f64 = (1u64 << 20) as f64;

/// Finds `alpha >= 1` such that the weighted mean membership of a
/// distribution-based `kind` equals `target` (typically the head-count
/// ratio). The mean is nonincreasing in `alpha`, so bisection applies.
pub fn calibrate_alpha(incomes: &[f64], weights: &[f64], kind: MembershipKind, target: f64) -> Result<f64> {
    let order = IncomeOrder::new(incomes);
    let values = DistributionValues::compute(&order, incomes, weights)?;
    calibrate_alpha_with(&values, weights, kind, target)
}

pub fn calibrate_alpha_with(
    values: &DistributionValues,
    weights: &[f64],
    kind: MembershipKind,
    target: f64,
) -> Result<f64> {
    if !kind.is_distribution_based() {
        return Err(Error::BadConfig(alloc::format!("{kind} has no alpha to calibrate")));
    }
    let mean = |alpha: f64| -> Result<f64> { estimation::fuzzy_index(&values.memberships(kind, alpha)?, weights) };
    let at_one = mean(1.0)?;
    let not_bracketable = Error::TargetNotBracketable { target, at_one };
    if !(target > 0.0 && target < 1.0) {
        return Err(not_bracketable);
    }
    if (at_one - target).abs() <= CALIBRATION_TOLERANCE {
        return Ok(1.0);
    }
    if at_one < target {
        return Err(not_bracketable);
    }
    // The mean can jump at alpha = 1 (0^0 = 1 for Betti-Verma); a target
    // inside the jump has no root.
    if mean(1.0 + 1e-9)? < target - CALIBRATION_TOLERANCE {
        return Err(not_bracketable);
    }

    let mut lo = 1.0;
    let mut hi = 2.0;
    let mut at_hi = mean(hi)?;
    while at_hi > target {
        if hi >= ALPHA_CAP {
            return Err(Error::NoConvergence);
        }
        lo = hi;
        hi *= 2.0;
        at_hi = mean(hi)?;
    }
    let mut best = (hi, (at_hi - target).abs());
    for _ in 0..CALIBRATION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let m = mean(mid)?;
        let err = (m - target).abs();
        if err < best.1 {
            best = (mid, err);
        }
        if err == 0.0 {
            break;
        }
        if m > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    if best.1 <= CALIBRATION_TOLERANCE {
        Ok(best.0)
    } else {
        Err(Error::NoConvergence)
    }
}

// ---------------------------------------------------------------------------
// Dispatch

/// Memberships of every unit under `spec`. Distribution-based kinds use the
/// ECDF / Lorenz complement of the same `(incomes, weights)`.
pub fn evaluate_spec(incomes: &[f64], weights: &[f64], spec: &MembershipSpec) -> Result<Vec<f64>> {
    let order = IncomeOrder::new(incomes);
    evaluate_spec_with(&order, incomes, weights, spec)
}

pub fn evaluate_spec_with(
    order: &IncomeOrder,
    incomes: &[f64],
    weights: &[f64],
    spec: &MembershipSpec,
) -> Result<Vec<f64>> {
    if incomes.len() != weights.len() {
        return Err(Error::LengthMismatch { expected: incomes.len(), got: weights.len() });
    }
    spec.validate()?;
    if spec.kind.is_distribution_based() {
        let values = DistributionValues::compute(order, incomes, weights)?;
        return values.memberships(spec.kind, spec.alpha.unwrap_or(1.0));
    }
    evaluate_fixed(incomes, spec)
}

/// Memberships for kinds that do not depend on the weight system.
pub fn evaluate_fixed(incomes: &[f64], spec: &MembershipSpec) -> Result<Vec<f64>> {
    use MembershipKind::*;
    spec.validate()?;
    let out = match spec.kind {
        CerioliZani | Belhadj2011 => {
            let (z1, z2) = (spec.z1.unwrap_or_default(), spec.z2.unwrap_or_default());
            incomes.iter().map(|&y| trapezoidal(y, z1, z2)).collect()
        }
        Chakravarty2019 => {
            let z2 = spec.z2.unwrap_or_default();
            incomes.iter().map(|&y| chakravarty(y, z2)).collect()
        }
        Belhadj2014 => {
            let (z1, z2, beta) = (spec.z1.unwrap_or_default(), spec.z2.unwrap_or_default(), spec.beta.unwrap_or(1.0));
            let flex = belhadj2014_flex_point(z1, z2);
            incomes.iter().map(|&y| belhadj2014(y, z1, z2, beta, flex)).collect()
        }
        ZediniBelhadj2015 => {
            let params = spec.zbm.as_ref().ok_or(Error::MissingParameter { kind: spec.kind.name(), param: "zbm_params" })?;
            incomes.iter().map(|&y| eval_zbm(y, params)).collect::<Result<Vec<f64>>>()?
        }
        Crisp => {
            let tau = spec.z1.unwrap_or_default();
            incomes.iter().map(|&y| if y <= tau { 1.0 } else { 0.0 }).collect()
        }
        CheliLemmiTfr | BettiVerma | Betti2006 => {
            return Err(Error::BadConfig(alloc::format!("{} depends on the weight system", spec.kind)))
        }
    };
    Ok(out)
}

// ---------------------------------------------------------------------------
// Symbolic configuration

/// A membership function as written in a config file, before its
/// quantile-valued thresholds and data-driven parameters are resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipConfig {
    pub kind: MembershipKind,
    pub z1: Option<ParamValue>,
    pub z2: Option<ParamValue>,
    pub beta: Option<f64>,
    /// `None` calibrates alpha to the head-count ratio.
    pub alpha: Option<f64>,
}

impl MembershipConfig {
    pub fn new(kind: MembershipKind) -> Self {
        MembershipConfig { kind, z1: None, z2: None, beta: None, alpha: None }
    }

    /// Default parameters for `kind`, expressed as population quantiles.
    pub fn standard(kind: MembershipKind) -> Self {
        use MembershipKind::*;
        let q = ParamValue::Quantile;
        let mut cfg = MembershipConfig::new(kind);
        match kind {
            CerioliZani | Belhadj2011 => {
                cfg.z1 = Some(q(0.001));
                cfg.z2 = Some(q(0.99));
            }
            Belhadj2014 => {
                cfg.z1 = Some(q(0.01));
                cfg.z2 = Some(q(0.99));
                cfg.beta = Some(2.0);
            }
            Chakravarty2019 => cfg.z2 = Some(q(0.5)),
            _ => {}
        }
        cfg
    }

    pub fn with_thresholds(mut self, z1: Option<ParamValue>, z2: Option<ParamValue>) -> Self {
        self.z1 = z1;
        self.z2 = z2;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = Some(beta);
        self
    }

    fn provenance(&self) -> Provenance {
        let full_range = self.z1 == Some(ParamValue::Quantile(0.0)) && self.z2 == Some(ParamValue::Quantile(1.0));
        match self.kind {
            MembershipKind::CerioliZani | MembershipKind::Belhadj2011 if full_range => Provenance::Positive,
            k => k.default_provenance(),
        }
    }

    /// Resolves the config against a calibration dataset.
    pub fn resolve(&self, incomes: &[f64], weights: &[f64], options: &ResolveOptions) -> Result<MembershipSpec> {
        let order = IncomeOrder::new(incomes);
        self.resolve_with(&order, incomes, weights, options)
    }

    pub fn resolve_with(
        &self,
        order: &IncomeOrder,
        incomes: &[f64],
        weights: &[f64],
        options: &ResolveOptions,
    ) -> Result<MembershipSpec> {
        use MembershipKind::*;
        let resolve = |p: Option<ParamValue>| p.map(|v| v.resolve_with(order, incomes, weights)).transpose();
        let mut spec = MembershipSpec::bare(self.kind);
        spec.provenance = self.provenance();
        spec.z1 = resolve(self.z1)?;
        spec.z2 = resolve(self.z2)?;
        spec.beta = self.beta;
        match self.kind {
            CheliLemmiTfr | BettiVerma | Betti2006 => {
                spec.alpha = Some(match self.alpha {
                    Some(a) => a,
                    None => {
                        let target = match options.hcr_target {
                            Some(t) => t,
                            None => {
                                let tau = estimation::POVERTY_LINE_SHARE * order.quantile(incomes, weights, 0.5)?;
                                estimation::head_count_ratio(incomes, weights, tau)?
                            }
                        };
                        let values = DistributionValues::compute(order, incomes, weights)?;
                        calibrate_alpha_with(&values, weights, self.kind, target)?
                    }
                });
            }
            ZediniBelhadj2015 => {
                spec.zbm = Some(fit_zbm_params(incomes, weights, options.zbm_resamples, options.seed)?);
            }
            Crisp if spec.z1.is_none() => {
                spec.z1 = Some(estimation::POVERTY_LINE_SHARE * order.quantile(incomes, weights, 0.5)?);
            }
            _ => {}
        }
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for MembershipConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if let Some(z1) = self.z1 {
            write!(f, " z1={z1}")?;
        }
        if let Some(z2) = self.z2 {
            write!(f, " z2={z2}")?;
        }
        if let Some(b) = self.beta {
            write!(f, " beta={b}")?;
        }
        if let Some(a) = self.alpha {
            write!(f, " alpha={a}")?;
        }
        Ok(())
    }
}

/// Settings used while resolving data-driven parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolveOptions {
    /// Overrides the head-count ratio used to calibrate alpha.
    pub hcr_target: Option<f64>,
    /// Bootstrap resamples for the ZBM percentile estimates.
    pub zbm_resamples: usize,
    pub seed: u64,
}

impl Default for ResolveOptions {
    fn default() -> Self {
        ResolveOptions { hcr_target: None, zbm_resamples: 50, seed: 0 }
    }
}

impl ResolveOptions {
    pub fn with_seed(seed: u64) -> Self {
        ResolveOptions { seed, ..Self::default() }
    }
}
