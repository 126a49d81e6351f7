//! The functionaries' side of the game: indicator propagation over the
//! spillover network, monitoring, benefits and directed learning of
//! contributions.
//!
//! All functions are pure; randomness only enters through the RNG handle
//! passed to [`draw_monitoring`] and [`bootstrap_contributions`]. Every
//! Bernoulli draw consumes exactly one `f64` from the stream, whatever its
//! probability, so runs stay aligned draw-for-draw.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{CountryConfig, SimState};

fn check_len(what: &'static str, got: usize, expected: usize) -> Result<()> {
    if got == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            got,
            expected,
        })
    }
}

/// Sign with `sgn(0) = 0`.
#[inline]
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// One indicator update. Each indicator moves toward its target by
/// `gamma * gap * (own contribution + incoming spillovers)` and is clamped to
/// `[0, 1]`. Gaps are floored at zero: an indicator at or above its target
/// does not move.
pub fn propagate_indicators(
    prev: &[f64],
    contributions: &[f64],
    cfg: &CountryConfig,
) -> Result<Vec<f64>> {
    let n = cfg.n();
    check_len("indicators", prev.len(), n)?;
    check_len("contributions", contributions.len(), n)?;

    let adj = cfg.adjacency();
    let mut spill = vec![0.0; n];
    for (j, &c) in contributions.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for (s, &w) in spill.iter_mut().zip(adj.row(j)) {
            *s += c * w;
        }
    }

    let gamma = cfg.gamma();
    Ok(prev
        .iter()
        .zip(cfg.targets())
        .zip(contributions.iter().zip(&spill))
        .map(|((&i, &t), (&c, &s))| {
            let gap = (t - i).max(0.0);
            (i + gamma * gap * (c + s)).clamp(0.0, 1.0)
        })
        .collect())
}

/// Detection probability per issue: `f_c` times the issue's share of total
/// diversion. All zeros when nothing is diverted.
pub fn monitoring_probabilities(
    allocations: &[f64],
    contributions: &[f64],
    f_c: f64,
) -> Result<Vec<f64>> {
    check_len("contributions", contributions.len(), allocations.len())?;
    let diversion: Vec<f64> = allocations
        .iter()
        .zip(contributions)
        .map(|(p, c)| (p - c).max(0.0))
        .collect();
    let total: f64 = diversion.iter().sum();
    if total <= 0.0 {
        return Ok(vec![0.0; allocations.len()]);
    }
    Ok(diversion
        .into_iter()
        .map(|d| (f_c * d / total).clamp(0.0, 1.0))
        .collect())
}

/// Independent Bernoulli draws: issue `i` is caught iff `u_i < probs[i]`.
pub fn draw_monitoring<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Vec<bool> {
    probs
        .iter()
        .map(|&p| rng.random::<f64>() < p)
        .collect()
}

/// Maps an institutional indicator level in `[0, 1]` to a rate in `[0, 1]`:
/// `x / e^(1 - x)`.
#[inline]
pub fn institutional_map(level: f64) -> f64 {
    level / (1.0 - level).exp()
}

/// Functionary benefits: `(I + P - C) * (1 - theta * f_r)`.
pub fn compute_benefits(
    indicators: &[f64],
    allocations: &[f64],
    contributions: &[f64],
    monitoring: &[bool],
    f_r: f64,
) -> Result<Vec<f64>> {
    let n = indicators.len();
    check_len("allocations", allocations.len(), n)?;
    check_len("contributions", contributions.len(), n)?;
    check_len("monitoring", monitoring.len(), n)?;
    Ok((0..n)
        .map(|i| {
            let penalty = if monitoring[i] { f_r } else { 0.0 };
            (indicators[i] + (allocations[i] - contributions[i])) * (1.0 - penalty)
        })
        .collect())
}

/// Directed learning: a contribution keeps moving in the direction that
/// coincided with a benefit increase, by `|dF|` times the mean of the last
/// two contributions, and is capped to `[0, P_new]`.
pub fn update_contributions(state: &SimState, new_allocations: &[f64]) -> Result<Vec<f64>> {
    let n = state.n();
    check_len("allocations", new_allocations.len(), n)?;
    check_len("contributions", state.contributions.len(), n)?;
    check_len("prev_contributions", state.prev_contributions.len(), n)?;
    check_len("benefits", state.benefits.len(), n)?;
    check_len("prev_benefits", state.prev_benefits.len(), n)?;

    Ok((0..n)
        .map(|i| {
            let c1 = state.contributions[i];
            let c2 = state.prev_contributions[i];
            let df = state.benefits[i] - state.prev_benefits[i];
            let dc = c1 - c2;
            let d = sign(df * dc);
            let raw = c1 + d * df.abs() * (c1 + c2) / 2.0;
            raw.max(0.0).min(new_allocations[i])
        })
        .collect())
}

/// Initial contributions for the two bootstrap lag periods: uniform in
/// `[0, P_i]`, one draw per issue.
pub fn bootstrap_contributions<R: Rng + ?Sized>(allocations: &[f64], rng: &mut R) -> Vec<f64> {
    allocations
        .iter()
        .map(|&p| rng.random::<f64>() * p)
        .collect()
}
