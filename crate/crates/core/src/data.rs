//! Raw panel ingestion: pooled normalization, per-country imputation and
//! construction of country configurations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CountryConfig, CountryConfigParts, Matrix};
use crate::network::{estimate_network, DirectedSpilloverNetwork, IndicatorPanel, OrientOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelRecord {
    pub country: String,
    pub year: i32,
    /// One entry per indicator; `None` marks a missing observation.
    pub values: Vec<Option<f64>>,
}

/// Long-format panel of all countries and years, possibly with gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelTable {
    labels: Vec<String>,
    records: Vec<PanelRecord>,
}

impl PanelTable {
    pub fn new(labels: Vec<String>, records: Vec<PanelRecord>) -> Result<Self> {
        for (k, l) in labels.iter().enumerate() {
            if labels[..k].contains(l) {
                return Err(Error::InvalidPanel(format!("duplicate indicator label {l:?}")));
            }
        }
        for r in &records {
            if r.values.len() != labels.len() {
                return Err(Error::DimensionMismatch {
                    what: "panel record",
                    got: r.values.len(),
                    expected: labels.len(),
                });
            }
            if r.values.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidPanel(format!(
                    "{} {}: non-finite value",
                    r.country, r.year
                )));
            }
        }
        let mut keys: Vec<(&str, i32)> = records.iter().map(|r| (r.country.as_str(), r.year)).collect();
        keys.sort_unstable();
        if let Some(w) = keys.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidPanel(format!(
                "{} {} appears more than once",
                w[0].0, w[0].1
            )));
        }
        Ok(Self { labels, records })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn records(&self) -> &[PanelRecord] {
        &self.records
    }

    pub fn label_index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::LabelNotFound(label.to_string()))
    }

    /// Country names in order of first appearance.
    pub fn countries(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.records {
            if !out.contains(&r.country) {
                out.push(r.country.clone());
            }
        }
        out
    }

    /// Records of one country sorted by year.
    pub fn country_records(&self, country: &str) -> Vec<&PanelRecord> {
        let mut rs: Vec<&PanelRecord> = self.records.iter().filter(|r| r.country == country).collect();
        rs.sort_by_key(|r| r.year);
        rs
    }
}

/// Resolves `(label, reversed)` pairs into one flag per panel column.
/// Columns not listed keep their orientation.
pub fn polarity_flags(labels: &[String], pairs: &[(String, bool)]) -> Result<Vec<bool>> {
    let mut flags = vec![false; labels.len()];
    for (label, reversed) in pairs {
        let j = labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::LabelNotFound(label.clone()))?;
        flags[j] = *reversed;
    }
    Ok(flags)
}

/// Min-max normalization pooled over all countries and years, so that the
/// worst observed outcome maps to 0 and the best to 1. Columns flagged in
/// `reversed` are flipped so that higher always means better.
pub fn normalize_panel(table: &PanelTable, reversed: &[bool]) -> Result<PanelTable> {
    let n = table.labels.len();
    if reversed.len() != n {
        return Err(Error::DimensionMismatch {
            what: "polarity flags",
            got: reversed.len(),
            expected: n,
        });
    }
    let mut bounds = Vec::with_capacity(n);
    for j in 0..n {
        let (lo, hi) = table
            .records
            .iter()
            .filter_map(|r| r.values[j])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if !(lo < hi) {
            return Err(Error::ConstantColumn(table.labels[j].clone()));
        }
        bounds.push((lo, hi));
    }
    let records = table
        .records
        .iter()
        .map(|r| PanelRecord {
            country: r.country.clone(),
            year: r.year,
            values: r
                .values
                .iter()
                .zip(&bounds)
                .zip(reversed)
                .map(|((v, (lo, hi)), rev)| {
                    v.map(|x| {
                        let s = (x - lo) / (hi - lo);
                        if *rev {
                            1.0 - s
                        } else {
                            s
                        }
                    })
                })
                .collect(),
        })
        .collect();
    Ok(PanelTable {
        labels: table.labels.clone(),
        records,
    })
}

/// Fills gaps in a yearly series: linear interpolation between observed
/// neighbours, nearest observation at the ends. `None` when more than half
/// of the series is missing.
pub fn impute_series(years: &[i32], values: &[Option<f64>]) -> Option<Vec<f64>> {
    let observed: Vec<(i32, f64)> = years
        .iter()
        .zip(values)
        .filter_map(|(y, v)| v.map(|v| (*y, v)))
        .collect();
    let missing = values.len() - observed.len();
    if observed.is_empty() || 2 * missing > values.len() {
        return None;
    }
    let out = years
        .iter()
        .zip(values)
        .map(|(&y, v)| {
            if let Some(v) = v {
                return *v;
            }
            let after = observed.iter().position(|(oy, _)| *oy > y);
            match after {
                None => observed[observed.len() - 1].1,
                Some(0) => observed[0].1,
                Some(k) => {
                    let (y0, v0) = observed[k - 1];
                    let (y1, v1) = observed[k];
                    v0 + (v1 - v0) * f64::from(y - y0) / f64::from(y1 - y0)
                }
            }
        })
        .collect();
    Some(out)
}

/// Imputed time series of one country.
pub fn country_panel(table: &PanelTable, country: &str) -> Result<IndicatorPanel> {
    let recs = table.country_records(country);
    if recs.is_empty() {
        return Err(Error::LabelNotFound(country.to_string()));
    }
    let years: Vec<i32> = recs.iter().map(|r| r.year).collect();
    let n = table.labels.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let raw: Vec<Option<f64>> = recs.iter().map(|r| r.values[j]).collect();
        let col = impute_series(&years, &raw).ok_or_else(|| {
            Error::InvalidPanel(format!(
                "{country}: indicator {} is more than half missing",
                table.labels[j]
            ))
        })?;
        cols.push(col);
    }
    let rows = (0..years.len())
        .map(|t| cols.iter().map(|c| c[t]).collect())
        .collect();
    IndicatorPanel::new(table.labels.clone(), years, rows)
}

/// Country-level settings that do not come from the panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigParams {
    pub budget: f64,
    pub gamma: f64,
    pub rule_of_law: String,
    pub control_of_corruption: String,
    pub max_periods: usize,
}

/// Initial conditions from the earliest year, targets from the latest,
/// spillovers from `adjacency` (`adjacency[j][i]` is the effect of `j` on `i`).
pub fn build_config(
    panel: &IndicatorPanel,
    adjacency: &Matrix,
    params: &ConfigParams,
) -> Result<CountryConfig> {
    if adjacency.n() != panel.n_indicators() {
        return Err(Error::DimensionMismatch {
            what: "network",
            got: adjacency.n(),
            expected: panel.n_indicators(),
        });
    }
    let find = |label: &str| {
        panel
            .labels()
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::LabelNotFound(label.to_string()))
    };
    CountryConfig::try_from(CountryConfigParts {
        initial_indicators: panel.first_row().to_vec(),
        targets: panel.last_row().to_vec(),
        adjacency: adjacency.clone(),
        budget: params.budget,
        gamma: params.gamma,
        rule_of_law_idx: find(&params.rule_of_law)?,
        control_of_corruption_idx: find(&params.control_of_corruption)?,
        max_periods: params.max_periods,
    })
}

/// Everything the simulation needs about one country.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedCountry {
    pub name: String,
    pub panel: IndicatorPanel,
    pub network: DirectedSpilloverNetwork,
    pub config: CountryConfig,
}

/// Imputation, network estimation and configuration for one country of an
/// already normalized panel.
pub fn prepare_country(
    normalized: &PanelTable,
    country: &str,
    params: &ConfigParams,
    orient: OrientOptions,
) -> Result<PreparedCountry> {
    let panel = country_panel(normalized, country)?;
    let network = estimate_network(&panel, orient)?;
    let config = build_config(&panel, &network.adjacency(), params)?;
    Ok(PreparedCountry {
        name: country.to_string(),
        panel,
        network,
        config,
    })
}
