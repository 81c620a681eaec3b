//! Microdata model: observations, design metadata and estimation domains.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// One surveyed (or simulated) person.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub unit_id: String,
    pub household_id: String,
    pub stratum: String,
    pub psu: String,
    pub area: String,
    /// Design weight.
    pub weight: f64,
    /// Poverty predicate, e.g. equivalised disposable income.
    pub income: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DesignKind {
    Srs,
    Complex,
}

impl DesignKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DesignKind::Srs => "srs",
            DesignKind::Complex => "complex",
        }
    }
}

impl fmt::Display for DesignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for DesignKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "srs" => Ok(DesignKind::Srs),
            "complex" => Ok(DesignKind::Complex),
            _ => Err(Error::BadConfig(alloc::format!("unknown design `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignInfo {
    pub kind: DesignKind,
    /// Sampling fraction `f_h` per stratum; strata not listed use 0.
    pub finite_population_corrections: BTreeMap<String, f64>,
}

impl DesignInfo {
    pub fn srs() -> Self {
        DesignInfo { kind: DesignKind::Srs, finite_population_corrections: BTreeMap::new() }
    }

    pub fn complex() -> Self {
        DesignInfo { kind: DesignKind::Complex, finite_population_corrections: BTreeMap::new() }
    }

    pub fn fpc(&self, stratum: &str) -> f64 {
        self.finite_population_corrections.get(stratum).copied().unwrap_or(0.0)
    }
}

/// A validated, immutable collection of observations.
#[derive(Debug, Clone, PartialEq)]
pub struct SurveyDataset {
    observations: Vec<Observation>,
    design: DesignInfo,
    incomes: Vec<f64>,
    weights: Vec<f64>,
}

impl SurveyDataset {
    /// Validates and wraps `observations`. Row numbers in errors are the
    /// 1-based positions in `observations`.
    pub fn new(observations: Vec<Observation>, design: DesignInfo) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for (stratum, f) in &design.finite_population_corrections {
            if !(0.0..=1.0).contains(f) {
                return Err(Error::BadFpc(stratum.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for (i, o) in observations.iter().enumerate() {
            let row = i + 1;
            if !o.income.is_finite() || !o.weight.is_finite() {
                return Err(Error::NonNumericField(row));
            }
            if o.income < 0.0 {
                return Err(Error::NegativeIncome(row));
            }
            if o.weight < 0.0 {
                return Err(Error::NegativeWeight(row));
            }
            if o.area.is_empty() {
                return Err(Error::MissingArea(row));
            }
            if design.kind == DesignKind::Complex && (o.stratum.is_empty() || o.psu.is_empty()) {
                return Err(Error::MissingDesignLabel(row));
            }
            if !seen.insert(o.unit_id.as_str()) {
                return Err(Error::DuplicateUnitId(o.unit_id.clone()));
            }
        }
        let incomes: Vec<f64> = observations.iter().map(|o| o.income).collect();
        let weights: Vec<f64> = observations.iter().map(|o| o.weight).collect();
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::ZeroTotalWeight);
        }
        Ok(SurveyDataset { observations, design, incomes, weights })
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn design(&self) -> &DesignInfo {
        &self.design
    }

    pub fn incomes(&self) -> &[f64] {
        &self.incomes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Same observations under a different design description.
    pub fn with_design(self, design: DesignInfo) -> Result<Self> {
        SurveyDataset::new(self.observations, design)
    }

    pub fn into_observations(self) -> Vec<Observation> {
        self.observations
    }
}

/// An estimation domain: one area, or the whole dataset.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Domain {
    National,
    Area(String),
}

impl Domain {
    pub fn label(&self) -> &str {
        match self {
            Domain::National => "NATIONAL",
            Domain::Area(a) => a,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Index sets of observations per area, plus the national domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainPartition {
    areas: BTreeMap<String, Vec<usize>>,
    national: Vec<usize>,
}

impl DomainPartition {
    /// Area labels in sorted order.
    pub fn area_labels(&self) -> impl Iterator<Item = &str> {
        self.areas.keys().map(String::as_str)
    }

    pub fn areas(&self) -> &BTreeMap<String, Vec<usize>> {
        &self.areas
    }

    pub fn national(&self) -> &[usize] {
        &self.national
    }

    pub fn get(&self, domain: &Domain) -> Option<&[usize]> {
        match domain {
            Domain::National => Some(&self.national),
            Domain::Area(a) => self.areas.get(a).map(Vec::as_slice),
        }
    }

    /// All domains: areas in label order followed by `National`.
    pub fn domains(&self) -> Vec<Domain> {
        let mut out: Vec<Domain> = self.areas.keys().map(|a| Domain::Area(a.clone())).collect();
        out.push(Domain::National);
        out
    }

    pub fn len(&self) -> usize {
        self.areas.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Groups observations by area label.
pub fn partition_by_area(dataset: &SurveyDataset) -> Result<DomainPartition> {
    partition_labels(dataset.observations().iter().map(|o| o.area.as_str()))
}

pub(crate) fn partition_labels<'a>(labels: impl Iterator<Item = &'a str>) -> Result<DomainPartition> {
    let mut areas: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    let mut national = Vec::new();
    for (i, label) in labels.enumerate() {
        match areas.get_mut(label) {
            Some(v) => v.push(i),
            None => {
                areas.insert(label.to_string(), alloc::vec![i]);
            }
        }
        national.push(i);
    }
    if national.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(DomainPartition { areas, national })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec;

    pub(crate) fn obs(id: usize, area: &str, weight: f64, income: f64) -> Observation {
        Observation {
            unit_id: format!("u{id}"),
            household_id: format!("h{id}"),
            stratum: area.to_string(),
            psu: format!("h{id}"),
            area: area.to_string(),
            weight,
            income,
        }
    }

    fn dataset(areas: &[&str]) -> SurveyDataset {
        let obs = areas.iter().enumerate().map(|(i, a)| obs(i, a, 1.0, 10.0)).collect();
        SurveyDataset::new(obs, DesignInfo::srs()).unwrap()
    }

    #[test]
    fn partition_two_areas() {
        let p = partition_by_area(&dataset(&["A", "A", "B"])).unwrap();
        assert_eq!(p.get(&Domain::Area("A".into())).unwrap(), &[0, 1]);
        assert_eq!(p.get(&Domain::Area("B".into())).unwrap(), &[2]);
        assert_eq!(p.national(), &[0, 1, 2]);
        assert_eq!(p.len(), 3);
    }

    #[test]
    fn partition_single_area() {
        let p = partition_by_area(&dataset(&["A", "A"])).unwrap();
        assert_eq!(p.areas().len(), 1);
        assert_eq!(p.get(&Domain::Area("A".into())).unwrap(), &[0, 1]);
        assert_eq!(p.national(), &[0, 1]);
    }

    #[test]
    fn partition_complex_scenario_sizes() {
        let sizes = [6usize, 55, 157, 124, 48, 128, 100, 187, 3];
        let mut labels = Vec::new();
        for (a, &n) in sizes.iter().enumerate() {
            for _ in 0..n {
                labels.push(format!("area{a}"));
            }
        }
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let p = partition_by_area(&dataset(&refs)).unwrap();
        assert_eq!(p.areas().len(), 9);
        assert_eq!(p.national().len(), 808);
        let total: usize = p.areas().values().map(Vec::len).sum();
        assert_eq!(total, 808);
    }

    #[test]
    fn validation_errors() {
        assert_eq!(SurveyDataset::new(vec![], DesignInfo::srs()), Err(Error::EmptyDataset));
        let bad = vec![obs(0, "A", 1.0, 1.0), obs(1, "A", 1.0, -5.0)];
        assert_eq!(SurveyDataset::new(bad, DesignInfo::srs()), Err(Error::NegativeIncome(2)));
        let bad = vec![obs(0, "A", -1.0, 1.0)];
        assert_eq!(SurveyDataset::new(bad, DesignInfo::srs()), Err(Error::NegativeWeight(1)));
        let bad = vec![obs(0, "A", 1.0, 1.0), obs(0, "B", 1.0, 1.0)];
        assert_eq!(SurveyDataset::new(bad, DesignInfo::srs()), Err(Error::DuplicateUnitId("u0".into())));
        let bad = vec![obs(0, "A", 0.0, 1.0)];
        assert_eq!(SurveyDataset::new(bad, DesignInfo::srs()), Err(Error::ZeroTotalWeight));
        let mut o = obs(0, "A", 1.0, 1.0);
        o.psu.clear();
        assert_eq!(SurveyDataset::new(vec![o.clone()], DesignInfo::complex()), Err(Error::MissingDesignLabel(1)));
        assert!(SurveyDataset::new(vec![o], DesignInfo::srs()).is_ok());
    }

    #[test]
    fn zero_weight_rows_are_kept() {
        let d = SurveyDataset::new(vec![obs(0, "A", 0.0, 1.0), obs(1, "A", 2.0, 3.0)], DesignInfo::srs()).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.total_weight(), 2.0);
    }
}
