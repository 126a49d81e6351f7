//! Writes the synthetic fixture as a ready-to-run input directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Result;
use ppsim_core::analysis::simulated_corruption_rate;
use ppsim_core::fixture::{self, SyntheticFixture, CONTROL_OF_CORRUPTION, RULE_OF_LAW};
use ppsim_core::RegimeKind;

use crate::io::{self, Provenance};
use crate::manifest::{sha256_hex, BudgetSource, CalibrationSpec, RunManifest};
use crate::pipeline::{inputs, Job};

pub const DEFAULT_SEED: u64 = 2024;

/// Implementation effectiveness of the bundled evaluation manifest. Large
/// enough that most strict-informed runs converge well before the period cap.
pub const FIXTURE_GAMMA: f64 = 1.0;

/// Period cap for the calibration manifest. Lax runs rarely converge, so
/// their per-period corruption rate settles long before this.
const CALIBRATION_MAX_PERIODS: usize = 500;
const CALIBRATION_GRID: [f64; 5] = [0.5, 0.75, 1.0, 1.25, 1.5];
const CORRUPTION_RUNS: usize = 100;

fn base_manifest(fx: &SyntheticFixture, seed: u64) -> RunManifest {
    let budgets: BTreeMap<String, f64> = fx.countries.iter().map(|c| (c.name.clone(), c.budget)).collect();
    RunManifest {
        panel: "panel.csv".into(),
        polarity: Some("polarity.csv".into()),
        pillars: Some("pillars.csv".into()),
        networks: None,
        countries: None,
        regimes: RegimeKind::ALL.to_vec(),
        n_runs: 1000,
        discovery_runs: 200,
        discovery_averaging: Default::default(),
        master_seed: seed,
        gamma: Some(FIXTURE_GAMMA),
        calibration: None,
        budget: BudgetSource::PerCountry(budgets),
        rule_of_law: RULE_OF_LAW.into(),
        control_of_corruption: CONTROL_OF_CORRUPTION.into(),
        out_dir: "out".into(),
        max_periods: ppsim_core::simulation::DEFAULT_MAX_PERIODS,
        tolerance: ppsim_core::simulation::DEFAULT_TOLERANCE,
        signed_weights: false,
        clusters: Some(4),
    }
}

fn write_manifest(path: &Path, m: &RunManifest) -> Result<String> {
    let mut text = serde_json::to_string_pretty(m)?;
    text.push('\n');
    fs::write(path, &text)?;
    Ok(sha256_hex(text.as_bytes()))
}

fn write_panel(path: &Path, prov: &Provenance, fx: &SyntheticFixture) -> Result<()> {
    let mut w = io::csv_writer(path, prov)?;
    let mut header = vec!["country".to_string(), "year".to_string()];
    header.extend(fx.labels().iter().cloned());
    w.write_record(&header)?;
    for r in fx.panel.records() {
        let mut row = vec![r.country.clone(), r.year.to_string()];
        row.extend(r.values.iter().map(|v| v.map_or_else(String::new, |x| x.to_string())));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_pairs<'a>(
    path: &Path,
    prov: &Provenance,
    header: [&str; 2],
    rows: impl IntoIterator<Item = (&'a str, String)>,
) -> Result<()> {
    let mut w = io::csv_writer(path, prov)?;
    w.write_record(header)?;
    for (a, b) in rows {
        w.write_record([a, &b])?;
    }
    w.flush()?;
    Ok(())
}

/// Empirical corruption scores produced by the model itself at
/// `FIXTURE_GAMMA`, so calibrating on the fixture has a known answer.
fn write_corruption(dir: &Path, prov: &Provenance, calib: &RunManifest, seed: u64) -> Result<()> {
    let mut m = calib.clone();
    m.gamma = Some(FIXTURE_GAMMA);
    m.calibration = None;
    m.panel = dir.join(&m.panel);
    m.polarity = m.polarity.map(|p| dir.join(p));
    let job = Job {
        manifest: m,
        sha256: prov.manifest_sha256.clone(),
    };
    let inp = inputs(&job)?;
    let mut rows = Vec::new();
    for c in &inp.countries {
        let rate = simulated_corruption_rate(
            &c.prepared.config,
            CORRUPTION_RUNS,
            ppsim_core::derive_seed(seed, c.stream),
            &Default::default(),
        )?;
        rows.push((c.name().to_string(), format!("{rate:.4}")));
    }
    write_pairs(
        &dir.join("corruption.csv"),
        prov,
        ["country", "corruption"],
        rows.iter().map(|(a, b)| (a.as_str(), b.clone())),
    )
}

/// Writes panel, sidecar tables and two manifests: `manifest.json` for
/// evaluation at a fixed gamma and `calibrate.json` for the gamma search.
pub fn write(dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let fx = fixture::generate(seed);

    let manifest = base_manifest(&fx, seed);
    let manifest_path = dir.join("manifest.json");
    let sha = write_manifest(&manifest_path, &manifest)?;
    let prov = Provenance {
        seed: Some(seed),
        manifest_sha256: sha,
    };

    let mut calib = manifest.clone();
    calib.gamma = None;
    calib.n_runs = 100;
    calib.max_periods = CALIBRATION_MAX_PERIODS;
    calib.calibration = Some(CalibrationSpec {
        grid: CALIBRATION_GRID.to_vec(),
        runs_per_point: 20,
        empirical: "corruption.csv".into(),
    });
    calib.out_dir = "out-calibration".into();
    let calib_path = dir.join("calibrate.json");
    write_manifest(&calib_path, &calib)?;

    write_panel(&dir.join("panel.csv"), &prov, &fx)?;
    write_pairs(
        &dir.join("polarity.csv"),
        &prov,
        ["indicator", "reversed"],
        fx.polarity.iter().map(|(l, r)| (l.as_str(), r.to_string())),
    )?;
    write_pairs(
        &dir.join("pillars.csv"),
        &prov,
        ["indicator", "pillar"],
        fx.pillars.iter().map(|(l, p)| (l.as_str(), p.clone())),
    )?;
    let mut w = io::csv_writer(&dir.join("countries.csv"), &prov)?;
    w.write_record(["country", "group", "budget"])?;
    for c in &fx.countries {
        w.write_record([c.name.as_str(), &c.group.to_string(), &c.budget.to_string()])?;
    }
    w.flush()?;
    write_corruption(dir, &prov, &calib, seed)?;

    Ok(["manifest.json", "calibrate.json", "panel.csv", "polarity.csv", "pillars.csv", "countries.csv", "corruption.csv"]
        .iter()
        .map(|f| dir.join(f))
        .collect())
}
