//! Seeded synthetic country panel standing in for a real indicator database.
//!
//! Generation, all from one ChaCha8 stream:
//!
//! - 12 countries in 4 planted groups of 3. Group `g` has a latent
//!   development level `0.2 + 0.2 g`, a yearly growth rate and a budget
//!   share; each country adds its own uniform offset to all three.
//! - 20 indicators in 5 pillars of 4. Each pillar follows a random walk
//!   driven by Laplace innovations; an indicator is its country level plus
//!   a loading on the pillar walk plus Laplace noise, for the years
//!   2006-2016.
//! - Each indicator is mapped to raw units by a random affine map.
//!   Indicators where lower raw values are better are stored with a
//!   negative slope and flagged in the polarity table.
//! - About 3% of the cells are blanked, at most two per country and
//!   indicator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{PanelRecord, PanelTable};

pub const FIRST_YEAR: i32 = 2006;
pub const LAST_YEAR: i32 = 2016;
pub const GROUPS: usize = 4;
pub const COUNTRIES_PER_GROUP: usize = 3;
pub const RULE_OF_LAW: &str = "rule_of_law";
pub const CONTROL_OF_CORRUPTION: &str = "control_of_corruption";

/// `(pillar, [(indicator, lower raw value is better)])`
const INDICATORS: [(&str, [(&str, bool); 4]); 5] = [
    (
        "governance",
        [
            (RULE_OF_LAW, false),
            (CONTROL_OF_CORRUPTION, false),
            ("government_effectiveness", false),
            ("voice_accountability", false),
        ],
    ),
    (
        "education",
        [
            ("primary_enrolment", false),
            ("secondary_enrolment", false),
            ("adult_literacy", false),
            ("pupil_teacher_ratio", true),
        ],
    ),
    (
        "health",
        [
            ("life_expectancy", false),
            ("infant_mortality", true),
            ("immunization", false),
            ("hospital_beds", false),
        ],
    ),
    (
        "infrastructure",
        [
            ("electricity_access", false),
            ("road_quality", false),
            ("internet_users", false),
            ("water_access", false),
        ],
    ),
    (
        "economy",
        [
            ("gdp_per_capita", false),
            ("inflation", true),
            ("unemployment", true),
            ("export_diversity", false),
        ],
    ),
];

#[derive(Debug, Clone, PartialEq)]
pub struct CountryInfo {
    pub name: String,
    pub group: usize,
    pub budget: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFixture {
    /// Raw units, with gaps.
    pub panel: PanelTable,
    /// `(indicator, reversed)` for every indicator.
    pub polarity: Vec<(String, bool)>,
    /// `(indicator, pillar)` for every indicator.
    pub pillars: Vec<(String, String)>,
    pub countries: Vec<CountryInfo>,
}

impl SyntheticFixture {
    pub fn labels(&self) -> &[String] {
        self.panel.labels()
    }
}

fn laplace(rng: &mut ChaCha8Rng, scale: f64) -> f64 {
    let u: f64 = rng.random::<f64>() - 0.5;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

fn round_to(x: f64, digits: i32) -> f64 {
    let f = 10f64.powi(digits);
    (x * f).round() / f
}

pub fn generate(seed: u64) -> SyntheticFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let years: Vec<i32> = (FIRST_YEAR..=LAST_YEAR).collect();

    let mut labels = Vec::new();
    let mut polarity = Vec::new();
    let mut pillars = Vec::new();
    for (pillar, members) in INDICATORS {
        for (name, reversed) in members {
            labels.push(name.to_string());
            polarity.push((name.to_string(), reversed));
            pillars.push((name.to_string(), pillar.to_string()));
        }
    }
    let n = labels.len();

    // raw = offset + slope * latent, slope < 0 for reversed indicators
    let units: Vec<(f64, f64)> = polarity
        .iter()
        .map(|(_, reversed)| {
            let offset = rng.random_range(0.0..50.0);
            let slope = rng.random_range(5.0..100.0);
            (offset, if *reversed { -slope } else { slope })
        })
        .collect();
    let loadings: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();

    let mut countries = Vec::new();
    let mut records = Vec::new();
    for g in 0..GROUPS {
        for c in 0..COUNTRIES_PER_GROUP {
            let name = format!("C{:02}", g * COUNTRIES_PER_GROUP + c + 1);
            let level = 0.2 + 0.2 * g as f64 + rng.random_range(-0.05..0.05);
            let growth = 0.02 - 0.004 * g as f64 + rng.random_range(-0.003..0.003);
            let budget = round_to(0.3 - 0.04 * g as f64 + rng.random_range(-0.02..0.02), 3);
            countries.push(CountryInfo {
                name: name.clone(),
                group: g,
                budget,
            });

            let mut walks = vec![0.0; INDICATORS.len()];
            let mut rows: Vec<Vec<Option<f64>>> = Vec::with_capacity(years.len());
            for _ in &years {
                for w in walks.iter_mut() {
                    *w += growth + laplace(&mut rng, 0.01);
                }
                let row = (0..n)
                    .map(|k| {
                        let latent = level + loadings[k] * walks[k / 4] + laplace(&mut rng, 0.005);
                        let (offset, slope) = units[k];
                        Some(round_to(offset + slope * latent, 4))
                    })
                    .collect();
                rows.push(row);
            }
            for k in 0..n {
                let mut blanked = 0;
                for row in rows.iter_mut() {
                    if blanked < 2 && rng.random::<f64>() < 0.03 {
                        row[k] = None;
                        blanked += 1;
                    }
                }
            }
            for (year, values) in years.iter().zip(rows) {
                records.push(PanelRecord {
                    country: name.clone(),
                    year: *year,
                    values,
                });
            }
        }
    }

    SyntheticFixture {
        panel: PanelTable::new(labels, records).expect("generated panel is well formed"),
        polarity,
        pillars,
        countries,
    }
}
