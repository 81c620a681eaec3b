//! Run configuration (JSON) and run manifests.

use std::collections::BTreeMap;
use std::path::PathBuf;

use fuzzypov_core::membership::{MembershipConfig, MembershipKind, ParamValue};
use fuzzypov_core::resampling::{GRule, ReplicationMethod};
use fuzzypov_core::simulation::{AreaModel, PopulationConfig, SampleDesign, DEFAULT_HOUSEHOLD_SIZES};
use fuzzypov_core::survey_data::{DesignInfo, DesignKind};
use serde::{Deserialize, Serialize};

use crate::csvio::Schema;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodChoice {
    Bootstrap,
    Jackknife,
    Both,
}

impl MethodChoice {
    pub fn methods(self) -> Vec<ReplicationMethod> {
        match self {
            MethodChoice::Bootstrap => vec![ReplicationMethod::Bootstrap],
            MethodChoice::Jackknife => vec![ReplicationMethod::Jackknife],
            MethodChoice::Both => vec![ReplicationMethod::Bootstrap, ReplicationMethod::Jackknife],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DesignChoice {
    Srs,
    Complex,
}

impl From<DesignChoice> for DesignKind {
    fn from(d: DesignChoice) -> Self {
        match d {
            DesignChoice::Srs => DesignKind::Srs,
            DesignChoice::Complex => DesignKind::Complex,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GRuleChoice {
    Paper,
    Standard,
}

impl From<GRuleChoice> for GRule {
    fn from(g: GRuleChoice) -> Self {
        match g {
            GRuleChoice::Paper => GRule::Paper,
            GRuleChoice::Standard => GRule::Standard,
        }
    }
}

/// A membership function as written in JSON: `{"kind": "BELHADJ_2014",
/// "z1": "Q(0.01)", "z2": "Q(0.99)", "beta": 2}`. Omitted parameters take
/// the kind's standard values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KindConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl KindConfig {
    pub fn to_membership(&self) -> Result<MembershipConfig, CliError> {
        let kind: MembershipKind = self.kind.parse()?;
        let mut cfg = MembershipConfig::standard(kind);
        let param = |s: &Option<String>| s.as_deref().map(str::parse::<ParamValue>).transpose();
        if let Some(z1) = param(&self.z1)? {
            cfg.z1 = Some(z1);
        }
        if let Some(z2) = param(&self.z2)? {
            cfg.z2 = Some(z2);
        }
        cfg.beta = self.beta.or(cfg.beta);
        cfg.alpha = self.alpha.or(cfg.alpha);
        Ok(cfg)
    }

    pub fn from_membership(cfg: &MembershipConfig) -> Self {
        KindConfig {
            kind: cfg.kind.name().to_string(),
            z1: cfg.z1.map(|p| p.to_string()),
            z2: cfg.z2.map(|p| p.to_string()),
            beta: cfg.beta,
            alpha: cfg.alpha,
        }
    }

    /// Parses `NAME` or `NAME:key=value,key=value` from the command line.
    pub fn parse_flag(s: &str) -> Result<Self, CliError> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut out = KindConfig { kind: name.trim().to_string(), z1: None, z2: None, beta: None, alpha: None };
        for item in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (key, value) =
                item.split_once('=').ok_or_else(|| CliError::user(format!("expected key=value in `{item}`")))?;
            let number = || value.trim().parse::<f64>().map_err(|_| CliError::user(format!("bad number `{value}`")));
            match key.trim() {
                "z1" => out.z1 = Some(value.trim().to_string()),
                "z2" => out.z2 = Some(value.trim().to_string()),
                "beta" => out.beta = Some(number()?),
                "alpha" => out.alpha = Some(number()?),
                other => return Err(CliError::user(format!("unknown membership parameter `{other}`"))),
            }
        }
        Ok(out)
    }
}

/// Area of a configured synthetic population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaConfig {
    pub label: String,
    pub size: usize,
    pub log_mean: f64,
    pub log_sd: f64,
    #[serde(default = "default_household_sizes")]
    pub household_sizes: [f64; 6],
}

fn default_household_sizes() -> [f64; 6] {
    DEFAULT_HOUSEHOLD_SIZES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub scenario: DesignChoice,
    /// Monte Carlo replicates `T`.
    pub t: usize,
    /// SRS sample size; defaults to 821.
    pub srs_n: Option<usize>,
    /// Households per area for the complex scenario.
    pub households: Option<BTreeMap<String, usize>>,
    /// Population areas; defaults to the nine built-in areas.
    pub areas: Option<Vec<AreaConfig>>,
    pub refit_zbm: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig { scenario: DesignChoice::Srs, t: 500, srs_n: None, households: None, areas: None, refit_zbm: true }
    }
}

impl SimulationConfig {
    pub fn population(&self, seed: u64) -> PopulationConfig {
        match &self.areas {
            None => PopulationConfig::default_areas(seed),
            Some(areas) => PopulationConfig {
                areas: areas
                    .iter()
                    .map(|a| AreaModel {
                        label: a.label.clone(),
                        size: a.size,
                        log_mean: a.log_mean,
                        log_sd: a.log_sd,
                        household_sizes: a.household_sizes,
                    })
                    .collect(),
                seed,
            },
        }
    }

    pub fn design(&self) -> SampleDesign {
        match self.scenario {
            DesignChoice::Srs => match self.srs_n {
                Some(n) => SampleDesign::Srs { n },
                None => SampleDesign::default_srs(),
            },
            DesignChoice::Complex => match &self.households {
                Some(h) => SampleDesign::Complex { households: h.clone() },
                None => SampleDesign::default_complex(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobustnessConfig {
    /// Grid axes; `None` uses the built-in grid of each kind.
    pub z1: Option<Vec<String>>,
    pub z2: Option<Vec<String>>,
    pub beta: Option<Vec<f64>>,
    /// Compare the benchmark only with itself.
    pub benchmark_only: bool,
}

/// Every setting of a run. Flags override values read from `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub input: Option<PathBuf>,
    pub schema: Schema,
    pub design: DesignChoice,
    /// Sampling fraction per stratum.
    pub fpc: BTreeMap<String, f64>,
    pub kinds: Vec<KindConfig>,
    pub method: MethodChoice,
    /// Bootstrap replicates `R`.
    pub replicates: usize,
    pub g_rule: GRuleChoice,
    pub unequal_probability_correction: bool,
    pub recalibrate: bool,
    pub publication_cv: f64,
    pub zbm_resamples: usize,
    pub export_replicates: bool,
    pub simulation: SimulationConfig,
    pub robustness: RobustnessConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: None,
            input: None,
            schema: Schema::default(),
            design: DesignChoice::Srs,
            fpc: BTreeMap::new(),
            kinds: Vec::new(),
            method: MethodChoice::Bootstrap,
            replicates: fuzzypov_core::resampling::ReplicationPlan::DEFAULT_REPLICATES,
            g_rule: GRuleChoice::Paper,
            unequal_probability_correction: false,
            recalibrate: false,
            publication_cv: fuzzypov_core::metrics::PUBLICATION_CV_LIMIT,
            zbm_resamples: 50,
            export_replicates: false,
            simulation: SimulationConfig::default(),
            robustness: RobustnessConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn design_info(&self) -> DesignInfo {
        DesignInfo { kind: self.design.into(), finite_population_corrections: self.fpc.clone() }
    }

    pub fn memberships(&self) -> Result<Vec<MembershipConfig>, CliError> {
        self.kinds.iter().map(KindConfig::to_membership).collect()
    }

    /// Replaces empty kind lists with `defaults` and writes every omitted
    /// parameter out explicitly.
    pub fn expand_kinds(&mut self, defaults: &[MembershipKind]) -> Result<(), CliError> {
        let configs = if self.kinds.is_empty() {
            defaults.iter().map(|&k| MembershipConfig::standard(k)).collect()
        } else {
            self.memberships()?
        };
        self.kinds = configs.iter().map(KindConfig::from_membership).collect();
        Ok(())
    }

    /// Reads either a plain config or a manifest written by a previous run.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::user(format!("invalid config JSON: {e}")))?;
        let inner = match value.get("config") {
            Some(c) if value.get("version").is_some() => c.clone(),
            _ => value,
        };
        serde_json::from_value(inner).map_err(|e| CliError::user(format!("invalid config: {e}")))
    }
}

/// Echo of a finished run: everything needed to reproduce its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// Choices made by the tool that are not part of the config.
    pub notes: BTreeMap<String, String>,
    pub config: RunConfig,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed: config.seed.unwrap_or_default(),
            notes: BTreeMap::new(),
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serialises");
        s.push('\n');
        s
    }
}
