//! Domain types shared by the engine, the government rules and the analysis
//! layer. Everything here is a value type; the only mutable piece is
//! [`SimState`], which is owned by a single run.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used wherever an allocation profile must sum to the
/// budget.
pub const BUDGET_REL_TOL: f64 = 1e-9;

/// Dense square matrix, row-major. Serialized as a list of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<f64>>", try_from = "Vec<Vec<f64>>")]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "matrix row",
                    got: row.len(),
                    expected: n,
                });
            }
            data.extend(row);
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.n + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.n..(row + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        if m.n == 0 {
            return Vec::new();
        }
        m.rows()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Matrix::from_rows(rows)
    }
}

/// Unvalidated country parameters. Turn into a [`CountryConfig`] with
/// `CountryConfig::try_from`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryConfigParts {
    pub initial_indicators: Vec<f64>,
    pub targets: Vec<f64>,
    /// `adjacency[j][i]` is the spillover from issue `j` onto issue `i`.
    pub adjacency: Matrix,
    pub budget: f64,
    pub gamma: f64,
    pub rule_of_law_idx: usize,
    pub control_of_corruption_idx: usize,
    pub max_periods: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    Empty,
    Length {
        field: &'static str,
        got: usize,
        expected: usize,
    },
    OutOfRange {
        field: &'static str,
        index: usize,
        value: f64,
    },
    NonZeroDiagonal {
        index: usize,
        value: f64,
    },
    NonFinite {
        field: &'static str,
    },
    NonPositive {
        field: &'static str,
        value: f64,
    },
    IndexOutOfBounds {
        field: &'static str,
        index: usize,
        n: usize,
    },
    InstitutionalIndicesCoincide {
        index: usize,
    },
    ZeroMaxPeriods,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "config has no policy issues"),
            Violation::Length {
                field,
                got,
                expected,
            } => write!(f, "length of {field} is {got}, expected {expected}"),
            Violation::OutOfRange {
                field,
                index,
                value,
            } => write!(f, "{field}[{index}] = {value} is outside the range [0, 1]"),
            Violation::NonZeroDiagonal { index, value } => {
                write!(f, "adjacency diagonal entry ({index},{index}) = {value} is nonzero")
            }
            Violation::NonFinite { field } => write!(f, "{field} contains a non-finite value"),
            Violation::NonPositive { field, value } => {
                write!(f, "{field} = {value} must be strictly positive")
            }
            Violation::IndexOutOfBounds { field, index, n } => {
                write!(f, "{field} = {index} is out of bounds for {n} issues")
            }
            Violation::InstitutionalIndicesCoincide { index } => write!(
                f,
                "rule-of-law and control-of-corruption indices both point at issue {index}"
            ),
            Violation::ZeroMaxPeriods => write!(f, "max_periods must be at least 1"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mentions(&self, needle: &str) -> bool {
        self.violations
            .iter()
            .any(|v| v.to_string().contains(needle))
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msgs: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        f.write_str(&msgs.join("; "))
    }
}

/// Lists every violated invariant of `parts`. An empty report means the
/// parts can be turned into a [`CountryConfig`].
pub fn validate_config(parts: &CountryConfigParts) -> ValidationReport {
    let mut v = Vec::new();
    let n = parts.initial_indicators.len();
    if n == 0 {
        v.push(Violation::Empty);
    }
    if parts.targets.len() != n {
        v.push(Violation::Length {
            field: "targets",
            got: parts.targets.len(),
            expected: n,
        });
    }
    if parts.adjacency.n() != n {
        v.push(Violation::Length {
            field: "adjacency",
            got: parts.adjacency.n(),
            expected: n,
        });
    }
    for (field, values) in [
        ("initial_indicators", &parts.initial_indicators),
        ("targets", &parts.targets),
    ] {
        for (index, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                v.push(Violation::OutOfRange {
                    field,
                    index,
                    value,
                });
            }
        }
    }
    let adj = &parts.adjacency;
    if adj.data.iter().any(|x| !x.is_finite()) {
        v.push(Violation::NonFinite { field: "adjacency" });
    }
    for index in 0..adj.n() {
        let value = adj.get(index, index);
        if value != 0.0 {
            v.push(Violation::NonZeroDiagonal { index, value });
        }
    }
    for (field, value) in [("budget", parts.budget), ("gamma", parts.gamma)] {
        if !value.is_finite() {
            v.push(Violation::NonFinite { field });
        } else if value <= 0.0 {
            v.push(Violation::NonPositive { field, value });
        }
    }
    for (field, index) in [
        ("rule_of_law_idx", parts.rule_of_law_idx),
        ("control_of_corruption_idx", parts.control_of_corruption_idx),
    ] {
        if index >= n {
            v.push(Violation::IndexOutOfBounds { field, index, n });
        }
    }
    if n >= 2 && parts.rule_of_law_idx == parts.control_of_corruption_idx {
        v.push(Violation::InstitutionalIndicesCoincide {
            index: parts.rule_of_law_idx,
        });
    }
    if parts.max_periods == 0 {
        v.push(Violation::ZeroMaxPeriods);
    }
    ValidationReport { violations: v }
}

/// Validated country parameters. Only constructible through
/// `TryFrom<CountryConfigParts>`, so every instance satisfies the invariants
/// checked by [`validate_config`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "CountryConfigParts", try_from = "CountryConfigParts")]
pub struct CountryConfig {
    parts: CountryConfigParts,
}

impl TryFrom<CountryConfigParts> for CountryConfig {
    type Error = Error;

    fn try_from(parts: CountryConfigParts) -> Result<Self> {
        let report = validate_config(&parts);
        if report.is_valid() {
            Ok(Self { parts })
        } else {
            Err(Error::InvalidConfig(report))
        }
    }
}

impl From<CountryConfig> for CountryConfigParts {
    fn from(cfg: CountryConfig) -> Self {
        cfg.parts
    }
}

impl CountryConfig {
    pub fn n(&self) -> usize {
        self.parts.initial_indicators.len()
    }
    pub fn initial_indicators(&self) -> &[f64] {
        &self.parts.initial_indicators
    }
    pub fn targets(&self) -> &[f64] {
        &self.parts.targets
    }
    pub fn adjacency(&self) -> &Matrix {
        &self.parts.adjacency
    }
    pub fn budget(&self) -> f64 {
        self.parts.budget
    }
    pub fn gamma(&self) -> f64 {
        self.parts.gamma
    }
    pub fn rule_of_law_idx(&self) -> usize {
        self.parts.rule_of_law_idx
    }
    pub fn control_of_corruption_idx(&self) -> usize {
        self.parts.control_of_corruption_idx
    }
    pub fn max_periods(&self) -> usize {
        self.parts.max_periods
    }
    pub fn parts(&self) -> &CountryConfigParts {
        &self.parts
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        let mut parts = self.parts.clone();
        parts.gamma = gamma;
        Self::try_from(parts)
    }

    pub fn with_max_periods(&self, max_periods: usize) -> Result<Self> {
        let mut parts = self.parts.clone();
        parts.max_periods = max_periods;
        Self::try_from(parts)
    }

    /// Issues whose target is already met at t = 0.
    pub fn pre_converged(&self) -> Vec<bool> {
        self.initial_indicators()
            .iter()
            .zip(self.targets())
            .map(|(i0, t)| t <= i0)
            .collect()
    }
}

/// Mutable state of one run between periods: the most recent allocation,
/// the last two contribution and benefit vectors, the indicators and the
/// last monitoring outcome.
///
/// Diversion is never stored; it is `allocations - contributions`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: usize,
    pub allocations: Vec<f64>,
    /// C at the latest completed period.
    pub contributions: Vec<f64>,
    /// C one period before `contributions`.
    pub prev_contributions: Vec<f64>,
    pub benefits: Vec<f64>,
    pub prev_benefits: Vec<f64>,
    pub indicators: Vec<f64>,
    pub monitoring: Vec<bool>,
}

impl SimState {
    pub fn n(&self) -> usize {
        self.indicators.len()
    }

    /// Shift a completed period into the state.
    pub fn advance(
        &mut self,
        allocations: Vec<f64>,
        contributions: Vec<f64>,
        benefits: Vec<f64>,
        indicators: Vec<f64>,
        monitoring: Vec<bool>,
    ) {
        self.allocations = allocations;
        self.prev_contributions = std::mem::replace(&mut self.contributions, contributions);
        self.prev_benefits = std::mem::replace(&mut self.benefits, benefits);
        self.indicators = indicators;
        self.monitoring = monitoring;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeKind {
    LaxUninformed,
    StrictUninformed,
    LaxInformed,
    StrictInformed,
}

impl RegimeKind {
    pub const ALL: [RegimeKind; 4] = [
        RegimeKind::LaxUninformed,
        RegimeKind::StrictUninformed,
        RegimeKind::LaxInformed,
        RegimeKind::StrictInformed,
    ];

    pub fn is_strict(self) -> bool {
        matches!(self, RegimeKind::StrictUninformed | RegimeKind::StrictInformed)
    }

    pub fn is_informed(self) -> bool {
        matches!(self, RegimeKind::LaxInformed | RegimeKind::StrictInformed)
    }

    pub fn label(self) -> &'static str {
        match self {
            RegimeKind::LaxUninformed => "lax-uninformed",
            RegimeKind::StrictUninformed => "strict-uninformed",
            RegimeKind::LaxInformed => "lax-informed",
            RegimeKind::StrictInformed => "strict-informed",
        }
    }
}

impl fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for RegimeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RegimeKind::ALL
            .into_iter()
            .find(|k| k.label() == s.trim())
            .ok_or_else(|| Error::InvalidRegime(format!("unknown regime `{s}`")))
    }
}

/// Where a regime's prescribed profile comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// A fixed vector, identical for every run.
    Pinned(Vec<f64>),
    /// A fresh Dirichlet(1, ..., 1) profile scaled by the budget, drawn from
    /// each run's seed. Only valid for uninformed regimes.
    ArbitraryPerRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyRegime {
    kind: RegimeKind,
    profile: Profile,
}

fn check_profile(profile: &[f64], budget: f64) -> Result<()> {
    if let Some(x) = profile.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::InvalidRegime(format!(
            "profile entry {x} is negative or non-finite"
        )));
    }
    let sum: f64 = profile.iter().sum();
    if (sum - budget).abs() > BUDGET_REL_TOL * budget {
        return Err(Error::InvalidRegime(format!(
            "profile sums to {sum}, budget is {budget}"
        )));
    }
    Ok(())
}

impl PolicyRegime {
    pub fn new(kind: RegimeKind, profile: Profile, budget: f64) -> Result<Self> {
        match &profile {
            Profile::Pinned(p) => check_profile(p, budget)?,
            Profile::ArbitraryPerRun if kind.is_informed() => {
                return Err(Error::InvalidRegime(format!(
                    "{kind} requires a pinned discovered profile"
                )))
            }
            Profile::ArbitraryPerRun => {}
        }
        Ok(Self { kind, profile })
    }

    /// Uninformed regime with a fresh random prescription in every run.
    pub fn uninformed(kind: RegimeKind) -> Result<Self> {
        Self::new(kind, Profile::ArbitraryPerRun, 1.0)
    }

    pub fn pinned(kind: RegimeKind, profile: Vec<f64>, budget: f64) -> Result<Self> {
        Self::new(kind, Profile::Pinned(profile), budget)
    }

    pub fn kind(&self) -> RegimeKind {
        self.kind
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// Checks the regime against a country's dimensions and budget.
    pub fn check_against(&self, cfg: &CountryConfig) -> Result<()> {
        if let Profile::Pinned(p) = &self.profile {
            if p.len() != cfg.n() {
                return Err(Error::DimensionMismatch {
                    what: "pinned profile",
                    got: p.len(),
                    expected: cfg.n(),
                });
            }
            check_profile(p, cfg.budget())?;
        }
        Ok(())
    }
}

/// One period of a recorded trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub allocations: Vec<f64>,
    pub contributions: Vec<f64>,
    pub benefits: Vec<f64>,
    /// Indicator levels at the end of the period.
    pub indicators: Vec<f64>,
    pub monitoring: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub seed: u64,
    /// Budget-normalized diversion summed over issues and periods.
    pub corruption: f64,
    pub periods: usize,
    pub converged: bool,
    /// Per-issue share of `corruption`; sums to it up to rounding.
    pub per_issue_diversion: Vec<f64>,
    /// Allocation averaged over executed periods (the t = 0 profile when no
    /// period was executed).
    pub mean_allocation: Vec<f64>,
    pub final_allocation: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<Vec<PeriodRecord>>,
}

impl RunResult {
    /// Corruption per executed period; zero for pre-converged runs.
    pub fn corruption_rate(&self) -> f64 {
        if self.periods == 0 {
            0.0
        } else {
            self.corruption / self.periods as f64
        }
    }
}
