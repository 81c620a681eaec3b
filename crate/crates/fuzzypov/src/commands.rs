//! The `estimate`, `simulate` and `robustness` subcommands.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::hash::BuildHasher;
use std::path::Path;

use fuzzypov_core::membership::{MembershipConfig, MembershipKind, MembershipSpec, ParamValue, ResolveOptions};
use fuzzypov_core::resampling::{self, FuzzyIndexStatistic, ReplicationMethod, ReplicationPlan};
use fuzzypov_core::rng::{derive_seed, Stream};
use fuzzypov_core::robustness::{self, Surface, SurfaceValue, SweepGrid};
use fuzzypov_core::simulation::{self, Experiment, ExperimentResult, ScenarioConfig};
use fuzzypov_core::survey_data::{partition_by_area, DesignKind, SurveyDataset};

use crate::config::{Manifest, RunConfig};
use crate::csvio;
use crate::error::CliError;
use crate::runner;

/// Settings that affect how a run executes but not what it writes
/// (apart from the opt-in timing table).
#[derive(Debug, Clone, Default)]
pub struct ExecOptions {
    pub jobs: Option<usize>,
    pub timings: bool,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Kinds swept by `robustness` when none are configured.
pub const ROBUSTNESS_KINDS: [MembershipKind; 3] =
    [MembershipKind::Belhadj2014, MembershipKind::CerioliZani, MembershipKind::Chakravarty2019];

/// Fills in a random seed when none was given and reports it on stderr.
pub fn ensure_seed(cfg: &mut RunConfig) -> u64 {
    if let Some(s) = cfg.seed {
        return s;
    }
    let s = std::collections::hash_map::RandomState::new().hash_one(std::time::SystemTime::now());
    eprintln!("seed: {s}");
    cfg.seed = Some(s);
    s
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn write_table(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn write_manifest(out: &Path, manifest: &Manifest) -> Result<(), CliError> {
    fs::write(out.join(MANIFEST_FILE), manifest.to_json())?;
    Ok(())
}

fn resolve_options(cfg: &RunConfig, seed: u64) -> ResolveOptions {
    ResolveOptions { hcr_target: None, zbm_resamples: cfg.zbm_resamples, seed: derive_seed(seed, Stream::ZbmFit, 0) }
}

fn plans(cfg: &RunConfig, seed: u64, design: DesignKind) -> Result<Vec<ReplicationPlan>, CliError> {
    let mut out = Vec::new();
    for method in cfg.method.methods() {
        let plan = match method {
            ReplicationMethod::Bootstrap => ReplicationPlan::bootstrap(cfg.replicates, seed),
            ReplicationMethod::Jackknife => {
                if design != DesignKind::Complex {
                    return Err(CliError::user(
                        "jackknife needs a complex design with strata and PSUs; use --method bootstrap or --design complex",
                    ));
                }
                ReplicationPlan {
                    fpc: cfg.fpc.clone(),
                    unequal_probability_correction: cfg.unequal_probability_correction,
                    ..ReplicationPlan::jackknife(cfg.g_rule.into())
                }
            }
        };
        plan.validate()?;
        out.push(plan);
    }
    Ok(out)
}

fn load_input(cfg: &RunConfig) -> Result<SurveyDataset, CliError> {
    let path = cfg.input.as_deref().ok_or_else(|| CliError::user("--input is required"))?;
    Ok(csvio::load_csv(path, &cfg.schema, cfg.design_info())?)
}

/// Column labels for kinds: the kind name, suffixed when a kind repeats.
fn kind_labels(configs: &[MembershipConfig]) -> Vec<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for c in configs {
        *counts.entry(c.kind.name()).or_default() += 1;
    }
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    configs
        .iter()
        .map(|c| {
            let name = c.kind.name();
            if counts[name] == 1 {
                return name.to_string();
            }
            let i = seen.entry(name).or_default();
            *i += 1;
            format!("{name}#{i}")
        })
        .collect()
}

fn parameter_row(label: &str, config: &MembershipConfig, spec: &MembershipSpec) -> Vec<String> {
    vec![
        label.to_string(),
        config.z1.map(|p| p.to_string()).unwrap_or_default(),
        config.z2.map(|p| p.to_string()).unwrap_or_default(),
        opt_num(spec.z1),
        opt_num(spec.z2),
        opt_num(spec.beta),
        opt_num(spec.alpha),
        spec.provenance.as_str().to_string(),
    ]
}

fn parameter_header() -> Vec<String> {
    strings(&["kind", "z1_param", "z2_param", "z1", "z2", "beta", "alpha", "provenance"])
}

/// Point estimates and replication MSEs per domain for every configured
/// kind and method. Writes `estimates.csv`, `parameters.csv` and,
/// optionally, `replicates.csv`.
pub fn cmd_estimate(mut cfg: RunConfig, out: &Path, opts: &ExecOptions) -> Result<Manifest, CliError> {
    let seed = ensure_seed(&mut cfg);
    cfg.expand_kinds(&MembershipKind::PUBLISHED)?;
    let configs = cfg.memberships()?;
    let plans = plans(&cfg, seed, cfg.design.into())?;
    let dataset = load_input(&cfg)?;
    let partition = partition_by_area(&dataset)?;
    let options = resolve_options(&cfg, seed);

    let work = |config: &MembershipConfig| -> Result<_, CliError> {
        let spec = config.resolve(dataset.incomes(), dataset.weights(), &options)?;
        let stat = FuzzyIndexStatistic::all_domains(&dataset, spec.clone())?.with_recalibration(cfg.recalibrate);
        let estimates = plans
            .iter()
            .map(|plan| resampling::estimate_mse(&dataset, &stat, plan))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((spec, stat.domains().to_vec(), estimates))
    };
    let results: Vec<Result<_, CliError>> = runner::with_pool(opts.jobs, || {
        use rayon::prelude::*;
        configs.par_iter().map(work).collect()
    });

    fs::create_dir_all(out)?;
    let labels = kind_labels(&configs);
    let mut rows = Vec::new();
    let mut params = Vec::new();
    let mut replicate_rows = Vec::new();
    for ((label, config), result) in labels.iter().zip(&configs).zip(results) {
        let (spec, domains, estimates) = result?;
        params.push(parameter_row(label, config, &spec));
        for (plan, per_domain) in plans.iter().zip(&estimates) {
            for (domain, e) in domains.iter().zip(per_domain) {
                let n = partition.get(domain).map_or(0, <[usize]>::len);
                let cv = if e.point > 0.0 { e.mse.sqrt() / e.point } else { f64::NAN };
                rows.push(vec![
                    domain.label().to_string(),
                    label.clone(),
                    plan.method.as_str().to_string(),
                    n.to_string(),
                    num(e.point),
                    num(e.mse),
                    num(cv),
                    (cv.is_finite() && cv <= cfg.publication_cv).to_string(),
                ]);
                if cfg.export_replicates {
                    for (r, v) in e.replicate_values.iter().enumerate() {
                        replicate_rows.push(vec![
                            label.clone(),
                            plan.method.as_str().to_string(),
                            domain.label().to_string(),
                            r.to_string(),
                            num(*v),
                        ]);
                    }
                }
            }
        }
    }
    write_table(
        &out.join("estimates.csv"),
        &strings(&["domain", "kind", "method", "n", "H", "mse", "cv", "publishable"]),
        &rows,
    )?;
    write_table(&out.join("parameters.csv"), &parameter_header(), &params)?;
    if cfg.export_replicates {
        write_table(
            &out.join("replicates.csv"),
            &strings(&["kind", "method", "domain", "replicate_id", "value"]),
            &replicate_rows,
        )?;
    }
    let manifest = Manifest::new("estimate", &cfg);
    write_manifest(out, &manifest)?;
    Ok(manifest)
}

/// Runs the Monte Carlo experiment on a synthetic population and writes
/// the bias, CV and MSE tables.
pub fn cmd_simulate(mut cfg: RunConfig, out: &Path, opts: &ExecOptions) -> Result<(Manifest, ExperimentResult), CliError> {
    let seed = ensure_seed(&mut cfg);
    cfg.expand_kinds(&MembershipKind::PUBLISHED)?;
    let configs = cfg.memberships()?;
    let sim = &cfg.simulation;
    let plans = plans(&cfg, seed, sim.scenario.into())?;
    let population = simulation::generate_population(&sim.population(seed))?;
    let scenario = ScenarioConfig {
        plans,
        zbm_resamples: cfg.zbm_resamples,
        refit_zbm: sim.refit_zbm,
        recalibrate: cfg.recalibrate,
        ..ScenarioConfig::new(sim.design(), sim.t, seed)
    };
    let experiment = Experiment::prepare(population, scenario, &configs)?;
    let (result, timings) = runner::run_experiment(&experiment, opts.jobs)?;

    fs::create_dir_all(out)?;
    let labels = kind_labels(&configs);
    let by_size: Vec<String> = result.areas_by_size().into_iter().chain(["NATIONAL".to_string()]).collect();

    let mut header = strings(&["domain", "N"]);
    header.extend(labels.iter().cloned());
    let truth_rows: Vec<Vec<String>> = by_size
        .iter()
        .map(|d| {
            let mut row = vec![d.clone(), result.population_sizes[d].to_string()];
            row.extend(result.kinds.iter().map(|k| num(k.truth[d])));
            row
        })
        .collect();
    write_table(&out.join("truth.csv"), &header, &truth_rows)?;

    let mut header = strings(&["domain", "mean_n"]);
    header.extend(labels.iter().cloned());
    let table = |value: &dyn Fn(&simulation::KindResult, &str) -> Option<f64>| -> Vec<Vec<String>> {
        by_size
            .iter()
            .map(|d| {
                let mut row = vec![d.clone(), num(result.mean_sizes[d])];
                row.extend(result.kinds.iter().map(|k| value(k, d).map(num).unwrap_or_default()));
                row
            })
            .collect()
    };
    write_table(&out.join("bias.csv"), &header, &table(&|k, d| k.bias.get(d).copied()))?;
    for plan in &experiment.scenario().plans {
        let m = plan.method;
        let name = m.as_str();
        let metric = |f: fn(&fuzzypov_core::metrics::DomainMetrics) -> f64| {
            move |k: &simulation::KindResult, d: &str| k.metrics.get(&m).and_then(|r| r.per_domain.get(d)).map(f)
        };
        write_table(&out.join(format!("cv_{name}.csv")), &header, &table(&metric(|x| x.cv)))?;
        write_table(&out.join(format!("cv2_{name}.csv")), &header, &table(&metric(|x| x.cv2)))?;
    }
    let mut summary = Vec::new();
    for (label, k) in labels.iter().zip(&result.kinds) {
        for (method, report) in &k.metrics {
            let a = report.aggregate;
            summary.push(vec![label.clone(), method.as_str().to_string(), num(a.atmse), num(a.aemse), num(a.bmse)]);
        }
    }
    write_table(&out.join("mse_summary.csv"), &strings(&["kind", "method", "atmse", "aemse", "bmse"]), &summary)?;
    let params: Vec<Vec<String>> = labels
        .iter()
        .zip(experiment.kinds())
        .map(|(label, k)| parameter_row(label, &k.config, &k.spec))
        .collect();
    write_table(&out.join("parameters.csv"), &parameter_header(), &params)?;
    if opts.timings {
        let rows: Vec<Vec<String>> =
            labels.iter().zip(&timings).map(|(l, t)| vec![l.clone(), num(t.seconds_per_replicate())]).collect();
        write_table(&out.join("timings.csv"), &strings(&["kind", "seconds_per_replicate"]), &rows)?;
    }

    let mut manifest = Manifest::new("simulate", &cfg);
    manifest.notes.insert("true_mse".into(), "Monte Carlo MSE over all replicates".into());
    manifest.notes.insert("population_total".into(), result.population_sizes["NATIONAL"].to_string());
    write_manifest(out, &manifest)?;
    Ok((manifest, result))
}

fn parse_params(items: &[String]) -> Result<Vec<ParamValue>, CliError> {
    items.iter().map(|s| s.parse::<ParamValue>().map_err(CliError::from)).collect()
}

/// National MSE surfaces and rank stability of area orderings for each
/// threshold-based kind.
pub fn cmd_robustness(mut cfg: RunConfig, out: &Path, opts: &ExecOptions) -> Result<Manifest, CliError> {
    let seed = ensure_seed(&mut cfg);
    cfg.expand_kinds(&ROBUSTNESS_KINDS)?;
    let configs = cfg.memberships()?;
    let mut seen = BTreeSet::new();
    for c in &configs {
        if !seen.insert(c.kind) {
            return Err(CliError::user(format!("{} is listed twice", c.kind)));
        }
    }
    let rob = &cfg.robustness;
    let grids: Vec<SweepGrid> = configs
        .iter()
        .map(|c| {
            let default = robustness::default_grid(c.kind);
            Ok(SweepGrid {
                kind: c.kind,
                z1: rob.z1.as_deref().map(parse_params).transpose()?.unwrap_or(default.z1),
                z2: rob.z2.as_deref().map(parse_params).transpose()?.unwrap_or(default.z2),
                beta: rob.beta.clone().unwrap_or(default.beta),
            })
        })
        .collect::<Result<_, CliError>>()?;
    for g in &grids {
        g.configs()?;
    }
    let dataset = load_input(&cfg)?;
    let plan = ReplicationPlan::bootstrap(cfg.replicates, seed);
    let options = resolve_options(&cfg, seed);

    let mut outputs = Vec::new();
    for (config, grid) in configs.iter().zip(&grids) {
        let surface = Surface::prepare(&dataset, grid, &plan)?;
        let points = runner::run_surface(surface, opts.jobs)?;
        let mut alternatives = if rob.benchmark_only { vec![config.clone()] } else { robustness::default_alternatives(config.kind) };
        let mut sweeps = vec!["thresholds"; alternatives.len()];
        if config.kind == MembershipKind::Belhadj2014 && !rob.benchmark_only {
            for b in robustness::default_beta_sweep() {
                alternatives.push(config.clone().with_beta(b));
                sweeps.push("beta");
            }
        }
        if rob.benchmark_only {
            sweeps = vec!["benchmark"];
        }
        let report = robustness::rank_stability(&dataset, config, &alternatives, &options)?;
        outputs.push((config.kind, points, sweeps, report));
    }

    fs::create_dir_all(out)?;
    for (kind, points, sweeps, report) in outputs {
        let rows: Vec<Vec<String>> = points
            .iter()
            .map(|p| {
                let (h, mse, status) = match p.value {
                    SurfaceValue::Estimated { h, mse } => (num(h), num(mse), "ok"),
                    SurfaceValue::Skipped => (String::new(), String::new(), "skipped"),
                };
                vec![
                    p.config.z1.map(|v| v.to_string()).unwrap_or_default(),
                    p.config.z2.map(|v| v.to_string()).unwrap_or_default(),
                    opt_num(p.z1),
                    opt_num(p.z2),
                    opt_num(p.beta),
                    h,
                    mse,
                    status.to_string(),
                ]
            })
            .collect();
        write_table(
            &out.join(format!("surface_{}.csv", kind.name())),
            &strings(&["z1_param", "z2_param", "z1", "z2", "beta", "H", "mse", "status"]),
            &rows,
        )?;
        let rows: Vec<Vec<String>> = report
            .alternatives
            .iter()
            .zip(&sweeps)
            .map(|(a, sweep)| {
                vec![
                    sweep.to_string(),
                    a.config.z1.map(|v| v.to_string()).unwrap_or_default(),
                    a.config.z2.map(|v| v.to_string()).unwrap_or_default(),
                    opt_num(a.config.beta),
                    num(a.kendall),
                    num(a.spearman),
                ]
            })
            .collect();
        write_table(
            &out.join(format!("ranks_{}.csv", kind.name())),
            &strings(&["sweep", "z1", "z2", "beta", "kendall", "spearman"]),
            &rows,
        )?;
    }
    let mut manifest = Manifest::new("robustness", &cfg);
    manifest.notes.insert("robustness_mse_method".into(), "bootstrap".into());
    manifest.notes.insert("robustness_level".into(), "national".into());
    write_manifest(out, &manifest)?;
    Ok(manifest)
}
