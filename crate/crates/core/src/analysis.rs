//! Regime evaluation: profile discovery, Monte Carlo ensembles, summary
//! statistics, pillar decomposition of efficiency gains and calibration of
//! the implementation-effectiveness parameter.
//!
//! Every regime in an evaluation is run on the same seeds, so uninformed
//! regimes share their arbitrary profile run-by-run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CountryConfig, PolicyRegime, RegimeKind, RunResult};
use crate::simulation::{derive_seed, run_seeds, sweep, RunOptions};
use crate::stats::{mean, quantile, welch_t_test, WelchTest};

const DISCOVERY_STREAM: u64 = 0xD15C_0FE2;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileAveraging {
    /// Average each run's allocation over all its periods.
    #[default]
    TimeAverage,
    /// Use each run's last allocation.
    FinalPeriod,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DiscoveryOptions {
    pub averaging: ProfileAveraging,
    pub run: RunOptions,
}

/// Seeds used by the discovery phase under `master_seed`.
pub fn discovery_seeds(master_seed: u64, m_runs: usize) -> Vec<u64> {
    run_seeds(derive_seed(master_seed, DISCOVERY_STREAM), m_runs)
}

/// Expected allocation profile of an adaptive government: the mean over
/// `m_runs` lax-uninformed runs (each starting from its own arbitrary
/// profile) of the run's allocation, renormalized to the budget.
pub fn discover_profile(
    cfg: &CountryConfig,
    m_runs: usize,
    master_seed: u64,
    opts: &DiscoveryOptions,
) -> Result<Vec<f64>> {
    if m_runs == 0 {
        return Err(Error::TooFew {
            required: 1,
            got: 0,
        });
    }
    let regime = PolicyRegime::uninformed(RegimeKind::LaxUninformed)?;
    let results = sweep(cfg, &regime, &discovery_seeds(master_seed, m_runs), &opts.run)?;
    let n = cfg.n();
    let mut acc = vec![0.0; n];
    for r in &results {
        let p = match opts.averaging {
            ProfileAveraging::TimeAverage => &r.mean_allocation,
            ProfileAveraging::FinalPeriod => &r.final_allocation,
        };
        for (a, x) in acc.iter_mut().zip(p) {
            *a += x;
        }
    }
    let total: f64 = acc.iter().sum();
    Ok(acc.iter().map(|a| cfg.budget() * a / total).collect())
}

/// One ensemble of runs per regime, all on the seeds `run_seeds(master_seed, n_runs)`.
pub fn run_ensembles(
    cfg: &CountryConfig,
    regimes: &[PolicyRegime],
    n_runs: usize,
    master_seed: u64,
    opts: &RunOptions,
) -> Result<Vec<Vec<RunResult>>> {
    let seeds = run_seeds(master_seed, n_runs);
    regimes
        .iter()
        .map(|r| sweep(cfg, r, &seeds, opts))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSummary {
    pub regime: RegimeKind,
    pub runs: usize,
    pub mean: f64,
    pub p25: f64,
    pub p50: f64,
    pub converged_fraction: f64,
    pub mean_periods: f64,
    pub samples: Vec<f64>,
}

impl RegimeSummary {
    pub fn from_results(regime: RegimeKind, results: &[RunResult]) -> Self {
        let samples: Vec<f64> = results.iter().map(|r| r.corruption).collect();
        let runs = results.len();
        let conv = results.iter().filter(|r| r.converged).count() as f64;
        let periods: f64 = results.iter().map(|r| r.periods as f64).sum();
        Self {
            regime,
            runs,
            mean: mean(&samples),
            p25: quantile(&samples, 0.25),
            p50: quantile(&samples, 0.5),
            converged_fraction: conv / runs.max(1) as f64,
            mean_periods: periods / runs.max(1) as f64,
            samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// Position of the alternative in the evaluated regime list.
    pub alternative_index: usize,
    pub alternative: RegimeKind,
    /// Mean benchmark corruption minus mean alternative corruption.
    /// Positive values are gains, negative values losses.
    pub efficiency_gain: f64,
    /// Welch test of the alternative's samples against the benchmark's.
    pub welch: WelchTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub benchmark_index: usize,
    pub regimes: Vec<RegimeSummary>,
    pub comparisons: Vec<Comparison>,
}

impl EnsembleStats {
    pub fn summary(&self, kind: RegimeKind) -> Option<&RegimeSummary> {
        self.regimes.iter().find(|s| s.regime == kind)
    }

    pub fn comparison(&self, kind: RegimeKind) -> Option<&Comparison> {
        self.comparisons.iter().find(|c| c.alternative == kind)
    }
}

fn benchmark_index(kinds: &[RegimeKind]) -> Result<usize> {
    kinds
        .iter()
        .position(|k| *k == RegimeKind::LaxUninformed)
        .ok_or_else(|| {
            Error::InvalidArgument("regime list must contain lax-uninformed as the benchmark".into())
        })
}

/// Summaries and comparisons for ensembles produced by [`run_ensembles`].
/// The first lax-uninformed entry is the benchmark; every other entry is
/// compared against it.
pub fn summarize(kinds: &[RegimeKind], ensembles: &[Vec<RunResult>]) -> Result<EnsembleStats> {
    if kinds.len() != ensembles.len() {
        return Err(Error::DimensionMismatch {
            what: "ensembles",
            got: ensembles.len(),
            expected: kinds.len(),
        });
    }
    let bench = benchmark_index(kinds)?;
    let regimes: Vec<RegimeSummary> = kinds
        .iter()
        .zip(ensembles)
        .map(|(k, r)| RegimeSummary::from_results(*k, r))
        .collect();
    let comparisons = (0..kinds.len())
        .filter(|&i| i != bench)
        .map(|i| Comparison {
            alternative_index: i,
            alternative: kinds[i],
            efficiency_gain: regimes[bench].mean - regimes[i].mean,
            welch: welch_t_test(&regimes[i].samples, &regimes[bench].samples),
        })
        .collect();
    Ok(EnsembleStats {
        benchmark_index: bench,
        regimes,
        comparisons,
    })
}

/// Runs every regime on shared seeds and summarizes the corruption
/// distributions against the lax-uninformed benchmark.
pub fn evaluate_regimes(
    cfg: &CountryConfig,
    regimes: &[PolicyRegime],
    n_runs: usize,
    master_seed: u64,
    opts: &RunOptions,
) -> Result<EnsembleStats> {
    let kinds: Vec<RegimeKind> = regimes.iter().map(PolicyRegime::kind).collect();
    benchmark_index(&kinds)?;
    let ensembles = run_ensembles(cfg, regimes, n_runs, master_seed, opts)?;
    summarize(&kinds, &ensembles)
}

/// Thematic grouping of indicators; entry `i` is the pillar of indicator `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PillarMap {
    assignment: Vec<String>,
}

impl PillarMap {
    pub const MAX_PILLARS: usize = 13;

    pub fn new(assignment: Vec<String>) -> Result<Self> {
        let map = Self { assignment };
        let k = map.pillars().len();
        if k > Self::MAX_PILLARS {
            return Err(Error::InvalidArgument(format!(
                "{k} pillars given, at most {} supported",
                Self::MAX_PILLARS
            )));
        }
        Ok(map)
    }

    pub fn assignment(&self) -> &[String] {
        &self.assignment
    }

    /// Distinct pillar labels in order of first appearance.
    pub fn pillars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for p in &self.assignment {
            if !out.contains(p) {
                out.push(p.clone());
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PillarGains {
    pub pillars: Vec<String>,
    pub sizes: Vec<usize>,
    /// Benchmark minus alternative diversion attributed to each pillar.
    pub gain: Vec<f64>,
    /// `gain` divided by the number of indicators in the pillar.
    pub gain_per_indicator: Vec<f64>,
}

impl PillarGains {
    pub fn total(&self) -> f64 {
        self.gain.iter().sum()
    }
}

fn mean_pillar_diversion(results: &[RunResult], members: &[usize], n: usize) -> Result<f64> {
    let mut acc = 0.0;
    for r in results {
        if r.per_issue_diversion.len() != n {
            return Err(Error::DimensionMismatch {
                what: "pillar map",
                got: n,
                expected: r.per_issue_diversion.len(),
            });
        }
        acc += members.iter().map(|&i| r.per_issue_diversion[i]).sum::<f64>();
    }
    Ok(acc / results.len() as f64)
}

/// Decomposes the efficiency gain of `alternative` over `benchmark` by
/// pillar. Gains over all pillars add up to the total efficiency gain.
pub fn pillar_gains(
    benchmark: &[RunResult],
    alternative: &[RunResult],
    pillars: &PillarMap,
) -> Result<PillarGains> {
    if benchmark.is_empty() || alternative.is_empty() {
        return Err(Error::TooFew {
            required: 1,
            got: 0,
        });
    }
    let n = pillars.assignment.len();
    let labels = pillars.pillars();
    let mut sizes = Vec::with_capacity(labels.len());
    let mut gain = Vec::with_capacity(labels.len());
    let mut per = Vec::with_capacity(labels.len());
    for label in &labels {
        let members: Vec<usize> = (0..n).filter(|&i| &pillars.assignment[i] == label).collect();
        let g = mean_pillar_diversion(benchmark, &members, n)?
            - mean_pillar_diversion(alternative, &members, n)?;
        sizes.push(members.len());
        gain.push(g);
        per.push(g / members.len() as f64);
    }
    Ok(PillarGains {
        pillars: labels,
        sizes,
        gain,
        gain_per_indicator: per,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub gamma: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub gamma: f64,
    pub objective: f64,
    pub grid: Vec<GridPoint>,
}

/// Mean per-period corruption of a lax-uninformed ensemble.
pub fn simulated_corruption_rate(
    cfg: &CountryConfig,
    runs: usize,
    seed: u64,
    opts: &RunOptions,
) -> Result<f64> {
    let regime = PolicyRegime::uninformed(RegimeKind::LaxUninformed)?;
    let results = sweep(cfg, &regime, &run_seeds(seed, runs), opts)?;
    let rates: Vec<f64> = results.iter().map(RunResult::corruption_rate).collect();
    Ok(mean(&rates))
}

/// Grid search for the implementation-effectiveness parameter. For every
/// candidate, each country's mean lax-uninformed corruption rate is compared
/// with its empirical value; the objective is the mean squared deviation
/// across countries. Ties go to the earlier grid point.
pub fn calibrate_gamma(
    countries: &[(CountryConfig, f64)],
    grid: &[f64],
    runs_per_point: usize,
    seed: u64,
    opts: &RunOptions,
) -> Result<CalibrationResult> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("calibration grid is empty".into()));
    }
    if let Some(g) = grid.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "grid value {g} is not strictly positive"
        )));
    }
    if countries.is_empty() || runs_per_point == 0 {
        return Err(Error::TooFew {
            required: 1,
            got: 0,
        });
    }
    let mut points = Vec::with_capacity(grid.len());
    for &gamma in grid {
        let mut sq = 0.0;
        for (c, (cfg, empirical)) in countries.iter().enumerate() {
            let cfg = cfg.with_gamma(gamma)?;
            let sim = simulated_corruption_rate(&cfg, runs_per_point, derive_seed(seed, c as u64), opts)?;
            sq += (sim - empirical) * (sim - empirical);
        }
        points.push(GridPoint {
            gamma,
            objective: sq / countries.len() as f64,
        });
    }
    let best = points
        .iter()
        .fold(points[0], |b, p| if p.objective < b.objective { *p } else { b });
    Ok(CalibrationResult {
        gamma: best.gamma,
        objective: best.objective,
        grid: points,
    })
}
