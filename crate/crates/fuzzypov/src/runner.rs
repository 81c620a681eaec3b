//! Parallel execution of Monte Carlo replicates and surface gridpoints.
//! Work items are independent and results are collected in index order, so
//! outputs do not depend on the number of threads.

use std::time::{Duration, Instant};

use fuzzypov_core::robustness::{Surface, SurfacePoint};
use fuzzypov_core::simulation::{Experiment, ExperimentResult, ReplicateOutcome};
use fuzzypov_core::Result;
use rayon::prelude::*;

/// Runs `f` on a pool of `jobs` threads (all cores when `None`).
pub fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build() {
        Ok(pool) => pool.install(f),
        Err(e) => {
            log::warn!("cannot build thread pool ({e}); running on the global pool");
            f()
        }
    }
}

/// Wall-clock time spent estimating each kind, summed over replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct KindTiming {
    pub total: Duration,
    pub replicates: usize,
}

impl KindTiming {
    pub fn seconds_per_replicate(&self) -> f64 {
        self.total.as_secs_f64() / self.replicates.max(1) as f64
    }
}

fn timed_replicate(experiment: &Experiment, t: usize) -> Result<(ReplicateOutcome, Vec<Duration>)> {
    let sample = experiment.draw_sample(t)?;
    let sizes = experiment.domain_sizes(&sample)?;
    let mut kinds = Vec::with_capacity(experiment.kinds().len());
    let mut times = Vec::with_capacity(experiment.kinds().len());
    for k in 0..experiment.kinds().len() {
        let start = Instant::now();
        kinds.push(experiment.estimate_kind(&sample, k, t)?);
        times.push(start.elapsed());
    }
    Ok((ReplicateOutcome { replicate: t, sizes, kinds }, times))
}

pub fn run_experiment(experiment: &Experiment, jobs: Option<usize>) -> Result<(ExperimentResult, Vec<KindTiming>)> {
    let t_count = experiment.scenario().replicates;
    let results: Vec<Result<(ReplicateOutcome, Vec<Duration>)>> =
        with_pool(jobs, || (0..t_count).into_par_iter().map(|t| timed_replicate(experiment, t)).collect());
    let mut outcomes = Vec::with_capacity(t_count);
    let mut timings = vec![KindTiming { total: Duration::ZERO, replicates: t_count }; experiment.kinds().len()];
    for r in results {
        let (outcome, times) = r?;
        for (acc, d) in timings.iter_mut().zip(times) {
            acc.total += d;
        }
        outcomes.push(outcome);
    }
    Ok((experiment.summarize(outcomes)?, timings))
}

pub fn run_surface(surface: Surface<'_>, jobs: Option<usize>) -> Result<Vec<SurfacePoint>> {
    let n = surface.points().len();
    let values: Vec<Result<Option<(f64, f64)>>> =
        with_pool(jobs, || (0..n).into_par_iter().map(|i| surface.evaluate(i)).collect());
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(surface.finish(values))
}
