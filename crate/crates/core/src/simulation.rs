//! The run loop.
//!
//! A run is fully determined by `(config, regime, seed)`. Two ChaCha8
//! streams are derived from the seed: stream 1 draws the arbitrary profile
//! for uninformed regimes, stream 0 drives everything else. Draw order on
//! stream 0:
//!
//! 1. two bootstrap lag periods, each drawing N contributions
//!    (`u * P_i`) followed by N monitoring uniforms;
//! 2. N monitoring uniforms per simulated period.
//!
//! Within a period the order is: institutional rates from the current
//! indicators, allocation, contributions, monitoring, indicators, benefits.
//! Benefits use the updated indicators of the same period.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{
    bootstrap_contributions, compute_benefits, draw_monitoring, institutional_map,
    monitoring_probabilities, propagate_indicators, update_contributions,
};
use crate::error::Result;
use crate::government::{next_allocation, ActiveRegime, NetworkDegrees};
use crate::model::{CountryConfig, PeriodRecord, PolicyRegime, RunResult, SimState};

pub const DEFAULT_TOLERANCE: f64 = 1e-4;
pub const DEFAULT_MAX_PERIODS: usize = 10_000;

const PROFILE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// An issue counts as converged once `I >= T - tolerance`.
    pub tolerance: f64,
    pub record_trajectories: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            record_trajectories: false,
        }
    }
}

impl RunOptions {
    pub fn with_trajectories(mut self) -> Self {
        self.record_trajectories = true;
        self
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `index` under `master`: `splitmix64(master ^ splitmix64(index))`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Seeds for runs `0..n` under `master`.
pub fn run_seeds(master: u64, n: usize) -> Vec<u64> {
    (0..n as u64).map(|i| derive_seed(master, i)).collect()
}

pub fn all_converged(indicators: &[f64], targets: &[f64], tolerance: f64) -> bool {
    indicators
        .iter()
        .zip(targets)
        .all(|(i, t)| *i >= *t - tolerance)
}

pub fn dynamics_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn profile_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(PROFILE_STREAM);
    rng
}

/// Simulates one country under one regime until every indicator reaches its
/// target or `max_periods` is hit. Non-convergence is reported through
/// [`RunResult::converged`], not as an error.
pub fn run(
    cfg: &CountryConfig,
    regime: &PolicyRegime,
    seed: u64,
    opts: &RunOptions,
) -> Result<RunResult> {
    let active = ActiveRegime::resolve(regime, cfg, &mut profile_rng(seed))?;
    let n = cfg.n();
    let budget = cfg.budget();
    let targets = cfg.targets();
    let rol = cfg.rule_of_law_idx();
    let coc = cfg.control_of_corruption_idx();
    let degrees = NetworkDegrees::from_adjacency(cfg.adjacency());
    let initial = cfg.initial_indicators().to_vec();

    if all_converged(&initial, targets, opts.tolerance) {
        return Ok(RunResult {
            seed,
            corruption: 0.0,
            periods: 0,
            converged: true,
            per_issue_diversion: vec![0.0; n],
            mean_allocation: active.profile.clone(),
            final_allocation: active.profile,
            trajectories: opts.record_trajectories.then(Vec::new),
        });
    }

    let mut rng = dynamics_rng(seed);

    // Bootstrap lags under the prescribed profile and the initial indicators.
    let p0 = active.profile.clone();
    let f_r0 = institutional_map(initial[rol]);
    let f_c0 = institutional_map(initial[coc]);
    let lag = |rng: &mut ChaCha8Rng| -> Result<(Vec<f64>, Vec<f64>, Vec<bool>)> {
        let c = bootstrap_contributions(&p0, rng);
        let probs = monitoring_probabilities(&p0, &c, f_c0)?;
        let theta = draw_monitoring(&probs, rng);
        let f = compute_benefits(&initial, &p0, &c, &theta, f_r0)?;
        Ok((c, f, theta))
    };
    let (c_old, f_old, _) = lag(&mut rng)?;
    let (c_new, f_new, theta) = lag(&mut rng)?;

    let mut state = SimState {
        t: 0,
        allocations: p0.clone(),
        contributions: c_new,
        prev_contributions: c_old,
        benefits: f_new,
        prev_benefits: f_old,
        indicators: initial.clone(),
        monitoring: theta,
    };

    let mut corruption = 0.0;
    let mut per_issue = vec![0.0; n];
    let mut alloc_sum = vec![0.0; n];
    let mut periods = 0;
    let mut converged = false;
    let mut records = opts.record_trajectories.then(Vec::new);

    for t in 0..cfg.max_periods() {
        state.t = t;
        let f_r = institutional_map(state.indicators[rol]);
        let f_c = institutional_map(state.indicators[coc]);

        let p = next_allocation(&active, &state, cfg, f_r, &degrees)?;
        let c = update_contributions(&state, &p)?;
        let probs = monitoring_probabilities(&p, &c, f_c)?;
        let theta = draw_monitoring(&probs, &mut rng);
        let indicators = propagate_indicators(&state.indicators, &c, cfg)?;
        let f = compute_benefits(&indicators, &p, &c, &theta, f_r)?;

        let mut diverted = 0.0;
        for i in 0..n {
            let d = p[i] - c[i];
            diverted += d;
            per_issue[i] += d / budget;
            alloc_sum[i] += p[i];
        }
        corruption += diverted / budget;
        periods = t + 1;

        if let Some(rec) = records.as_mut() {
            rec.push(PeriodRecord {
                allocations: p.clone(),
                contributions: c.clone(),
                benefits: f.clone(),
                indicators: indicators.clone(),
                monitoring: theta.clone(),
            });
        }

        converged = all_converged(&indicators, targets, opts.tolerance);
        state.advance(p, c, f, indicators, theta);
        if converged {
            break;
        }
    }

    let mean_allocation = alloc_sum.iter().map(|s| s / periods as f64).collect();
    Ok(RunResult {
        seed,
        corruption,
        periods,
        converged,
        per_issue_diversion: per_issue,
        mean_allocation,
        final_allocation: state.allocations,
        trajectories: records,
    })
}

/// Independent runs over `seeds`, in parallel on the current rayon pool.
/// The output order follows `seeds` and does not depend on the thread count.
pub fn sweep(
    cfg: &CountryConfig,
    regime: &PolicyRegime,
    seeds: &[u64],
    opts: &RunOptions,
) -> Result<Vec<RunResult>> {
    seeds
        .par_iter()
        .map(|&seed| run(cfg, regime, seed, opts))
        .collect()
}
