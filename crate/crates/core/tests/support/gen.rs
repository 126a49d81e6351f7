//! Random model configurations for fuzzing.

use ppsim_core::{CountryConfig, CountryConfigParts, Matrix, PolicyRegime, Profile, RegimeKind};
use rand::Rng;

use super::oracle::OracleInput;

/// Random valid configuration with `n` issues. Roughly one issue in eight
/// starts at its target.
pub fn random_parts<R: Rng>(rng: &mut R, n: usize, max_periods: usize) -> CountryConfigParts {
    let initial: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..0.8)).collect();
    let targets: Vec<f64> = initial
        .iter()
        .map(|i| {
            if rng.random::<f64>() < 0.125 {
                *i
            } else {
                (i + rng.random_range(0.01..0.3)).min(1.0)
            }
        })
        .collect();
    let mut adj = Matrix::zeros(n);
    for j in 0..n {
        for i in 0..n {
            if i != j && rng.random::<f64>() < 0.4 {
                adj.set(j, i, rng.random_range(0.0..1.0));
            }
        }
    }
    let rol = rng.random_range(0..n);
    let coc = if n == 1 {
        0
    } else {
        (rol + rng.random_range(1..n)) % n
    };
    CountryConfigParts {
        initial_indicators: initial,
        targets,
        adjacency: adj,
        budget: rng.random_range(0.1..2.0),
        gamma: rng.random_range(0.05..1.0),
        rule_of_law_idx: rol,
        control_of_corruption_idx: coc,
        max_periods,
    }
}

pub fn random_config<R: Rng>(rng: &mut R, n: usize, max_periods: usize) -> CountryConfig {
    CountryConfig::try_from(random_parts(rng, n, max_periods)).expect("generated config is valid")
}

/// Random non-negative profile summing to `budget`.
pub fn random_profile<R: Rng>(rng: &mut R, n: usize, budget: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| budget * x / s).collect()
}

/// A regime of `kind`: informed kinds get `profile`, uninformed kinds draw
/// their profile per run.
pub fn regime(kind: RegimeKind, profile: &[f64], budget: f64) -> PolicyRegime {
    if kind.is_informed() {
        PolicyRegime::pinned(kind, profile.to_vec(), budget).unwrap()
    } else {
        PolicyRegime::uninformed(kind).unwrap()
    }
}

pub fn oracle_input(cfg: &CountryConfig, regime: &PolicyRegime, tol: f64) -> OracleInput {
    OracleInput {
        i0: cfg.initial_indicators().to_vec(),
        targets: cfg.targets().to_vec(),
        a: cfg.adjacency().rows(),
        budget: cfg.budget(),
        gamma: cfg.gamma(),
        rol: cfg.rule_of_law_idx(),
        coc: cfg.control_of_corruption_idx(),
        max_periods: cfg.max_periods(),
        tol,
        strict: regime.kind().is_strict(),
        profile: match regime.profile() {
            Profile::Pinned(p) => Some(p.clone()),
            Profile::ArbitraryPerRun => None,
        },
    }
}
