//! The central authority: propensities, budget allocation and the four
//! policy-regime allocation rules.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{CountryConfig, Matrix, Profile, PolicyRegime, RegimeKind, SimState};

/// Out-degree of every issue in the spillover network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkDegrees {
    out_degree: Vec<usize>,
}

impl NetworkDegrees {
    pub fn from_adjacency(adj: &Matrix) -> Self {
        let out_degree = (0..adj.n())
            .map(|i| adj.row(i).iter().filter(|w| **w != 0.0).count())
            .collect();
        Self { out_degree }
    }

    pub fn out_degree(&self) -> &[usize] {
        &self.out_degree
    }
}

/// Allocation propensities: `max(0, T - I) * (K + 1) * (1 - theta * f_r)`.
pub fn propensities(
    indicators: &[f64],
    monitoring: &[bool],
    f_r: f64,
    degrees: &NetworkDegrees,
    targets: &[f64],
) -> Result<Vec<f64>> {
    let n = indicators.len();
    for (what, len) in [
        ("monitoring", monitoring.len()),
        ("degrees", degrees.out_degree.len()),
        ("targets", targets.len()),
    ] {
        if len != n {
            return Err(Error::DimensionMismatch {
                what,
                got: len,
                expected: n,
            });
        }
    }
    Ok((0..n)
        .map(|i| {
            let gap = (targets[i] - indicators[i]).max(0.0);
            let penalty = if monitoring[i] { f_r } else { 0.0 };
            gap * (degrees.out_degree[i] as f64 + 1.0) * (1.0 - penalty)
        })
        .collect())
}

/// Splits the budget proportionally to `q`. Falls back to an even split
/// when every propensity is zero.
pub fn allocate(q: &[f64], budget: f64) -> Vec<f64> {
    let total: f64 = q.iter().sum();
    if total <= 0.0 {
        let share = budget / q.len() as f64;
        return vec![share; q.len()];
    }
    q.iter().map(|x| budget * x / total).collect()
}

/// Dirichlet(1, ..., 1) draw scaled to the budget. Consumes one `f64` per
/// issue: `E_i = -ln(1 - u_i)`, `A_i = B * E_i / sum(E)`.
pub fn arbitrary_profile<R: Rng + ?Sized>(n: usize, budget: f64, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    allocate(&e, budget)
}

/// A regime whose prescription has been fixed for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveRegime {
    pub kind: RegimeKind,
    pub profile: Vec<f64>,
}

impl ActiveRegime {
    /// Realizes the regime's profile. `rng` is only consumed for
    /// [`Profile::ArbitraryPerRun`].
    pub fn resolve<R: Rng + ?Sized>(
        regime: &PolicyRegime,
        cfg: &CountryConfig,
        rng: &mut R,
    ) -> Result<Self> {
        regime.check_against(cfg)?;
        let profile = match regime.profile() {
            Profile::Pinned(p) => p.clone(),
            Profile::ArbitraryPerRun => arbitrary_profile(cfg.n(), cfg.budget(), rng),
        };
        Ok(Self {
            kind: regime.kind(),
            profile,
        })
    }
}

/// Allocation for period `state.t`. Strict regimes repeat the prescribed
/// profile forever; lax regimes use it at t = 0 and afterwards adapt to the
/// latest indicators and monitoring outcome.
pub fn next_allocation(
    regime: &ActiveRegime,
    state: &SimState,
    cfg: &CountryConfig,
    f_r: f64,
    degrees: &NetworkDegrees,
) -> Result<Vec<f64>> {
    if regime.profile.len() != cfg.n() {
        return Err(Error::DimensionMismatch {
            what: "regime profile",
            got: regime.profile.len(),
            expected: cfg.n(),
        });
    }
    if regime.kind.is_strict() || state.t == 0 {
        return Ok(regime.profile.clone());
    }
    let q = propensities(
        &state.indicators,
        &state.monitoring,
        f_r,
        degrees,
        cfg.targets(),
    )?;
    Ok(allocate(&q, cfg.budget()))
}
