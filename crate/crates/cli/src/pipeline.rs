//! The subcommands as library functions. Each one reads its inputs, runs
//! the model and writes its result files, returning the paths written.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use ppsim_core::analysis::{
    calibrate_gamma, discover_profile, pillar_gains, run_ensembles, summarize, CalibrationResult,
    DiscoveryOptions, EnsembleStats, PillarGains, PillarMap,
};
use ppsim_core::cluster::ward_clusters;
use ppsim_core::data::{
    build_config, country_panel, normalize_panel, polarity_flags, prepare_country, ConfigParams,
    PanelTable, PreparedCountry,
};
use ppsim_core::network::{estimate_network, DirectedSpilloverNetwork, OrientOptions};
use ppsim_core::{derive_seed, PolicyRegime, RegimeKind, RunOptions, RunResult};
use serde::Serialize;

use crate::io::{self, NetworkFile, Provenance};
use crate::manifest::{self, LoadedManifest, ManifestError, RunManifest};

/// Command-line overrides of manifest fields.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub out: Option<PathBuf>,
    pub max_periods: Option<usize>,
    pub tolerance: Option<f64>,
    pub regimes: Option<Vec<RegimeKind>>,
}

impl Overrides {
    fn apply(&self, m: &mut RunManifest) {
        if let Some(s) = self.seed {
            m.master_seed = s;
        }
        if let Some(r) = self.runs {
            m.n_runs = r;
        }
        if let Some(o) = &self.out {
            m.out_dir = o.clone();
        }
        if let Some(p) = self.max_periods {
            m.max_periods = p;
        }
        if let Some(t) = self.tolerance {
            m.tolerance = t;
        }
        if let Some(r) = &self.regimes {
            m.regimes = r.clone();
        }
    }
}

/// A loaded manifest with overrides applied.
#[derive(Debug, Clone)]
pub struct Job {
    pub manifest: RunManifest,
    pub sha256: String,
}

impl Job {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let LoadedManifest { mut manifest, sha256 } = manifest::load(path)?;
        overrides.apply(&mut manifest);
        manifest.validate()?;
        Ok(Self { manifest, sha256 })
    }

    pub fn provenance(&self) -> Provenance {
        Provenance {
            seed: Some(self.manifest.master_seed),
            manifest_sha256: self.sha256.clone(),
        }
    }

    fn run_options(&self) -> RunOptions {
        RunOptions {
            tolerance: self.manifest.tolerance,
            ..RunOptions::default()
        }
    }

    fn orient(&self) -> OrientOptions {
        OrientOptions {
            signed_weights: self.manifest.signed_weights,
        }
    }

    fn out(&self, name: &str) -> PathBuf {
        self.manifest.out_dir.join(name)
    }
}

/// One country ready for simulation.
#[derive(Debug, Clone)]
pub struct Country {
    pub prepared: PreparedCountry,
    /// Stream index under the master seed: the country's position in the
    /// panel, so selecting a subset does not change its results.
    pub stream: u64,
}

impl Country {
    pub fn name(&self) -> &str {
        &self.prepared.name
    }

    fn seed(&self, master: u64) -> u64 {
        derive_seed(master, self.stream)
    }
}

/// Normalized panel, selected countries and the gamma in force.
pub struct Inputs {
    pub labels: Vec<String>,
    pub countries: Vec<Country>,
    pub gamma: f64,
    pub calibration: Option<CalibrationResult>,
}

fn normalized_panel(panel: &Path, polarity: Option<&Path>) -> Result<PanelTable> {
    let table = io::read_panel(panel)?;
    let reversed = match polarity {
        Some(p) => polarity_flags(table.labels(), &io::read_polarity(p)?)?,
        None => vec![false; table.labels().len()],
    };
    Ok(normalize_panel(&table, &reversed)?)
}

fn load_network_file(dir: &Path, country: &str, labels: &[String]) -> Result<DirectedSpilloverNetwork> {
    let path = dir.join(format!("{country}.json"));
    let file = io::read_network(&path)?;
    if file.labels != labels {
        bail!("{}: indicator labels differ from the panel", path.display());
    }
    Ok(DirectedSpilloverNetwork::from_adjacency(file.labels, &file.matrix)?)
}

/// Builds every selected country at `gamma`.
fn build_countries(job: &Job, table: &PanelTable, gamma: f64) -> Result<Vec<Country>> {
    let m = &job.manifest;
    let all = table.countries();
    let selected = m.countries.clone().unwrap_or_else(|| all.clone());
    let mut out = Vec::with_capacity(selected.len());
    for name in &selected {
        let stream = all
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| ManifestError(format!("country {name} is not in the panel")))?;
        let params = ConfigParams {
            budget: m.budget_for(name)?,
            gamma,
            rule_of_law: m.rule_of_law.clone(),
            control_of_corruption: m.control_of_corruption.clone(),
            max_periods: m.max_periods,
        };
        let prepared = match &m.networks {
            Some(dir) => {
                let panel = country_panel(table, name)?;
                let network = load_network_file(dir, name, table.labels())?;
                let config = build_config(&panel, &network.adjacency(), &params)?;
                PreparedCountry {
                    name: name.clone(),
                    panel,
                    network,
                    config,
                }
            }
            None => prepare_country(table, name, &params, job.orient())
                .with_context(|| format!("preparing {name}"))?,
        };
        out.push(Country {
            prepared,
            stream: stream as u64,
        });
    }
    Ok(out)
}

fn run_calibration(job: &Job, countries: &[Country]) -> Result<CalibrationResult> {
    let spec = job
        .manifest
        .calibration
        .as_ref()
        .ok_or_else(|| ManifestError("no calibration block".into()))?;
    let empirical = io::read_country_values(&spec.empirical)?;
    let mut pairs = Vec::with_capacity(countries.len());
    for c in countries {
        let value = empirical
            .iter()
            .find(|(n, _)| n == c.name())
            .map(|(_, v)| *v)
            .ok_or_else(|| ManifestError(format!("no empirical corruption value for {}", c.name())))?;
        pairs.push((c.prepared.config.clone(), value));
    }
    Ok(calibrate_gamma(
        &pairs,
        &spec.grid,
        spec.runs_per_point,
        job.manifest.master_seed,
        &job.run_options(),
    )?)
}

/// Loads the panel and countries, calibrating gamma first when the manifest
/// asks for it.
pub fn inputs(job: &Job) -> Result<Inputs> {
    let m = &job.manifest;
    let table = normalized_panel(&m.panel, m.polarity.as_deref())?;
    let labels = table.labels().to_vec();
    match (m.gamma, &m.calibration) {
        (Some(gamma), _) => Ok(Inputs {
            labels,
            countries: build_countries(job, &table, gamma)?,
            gamma,
            calibration: None,
        }),
        (None, Some(spec)) => {
            let mut countries = build_countries(job, &table, spec.grid[0])?;
            let cal = run_calibration(job, &countries)?;
            for c in &mut countries {
                c.prepared.config = c.prepared.config.with_gamma(cal.gamma)?;
            }
            Ok(Inputs {
                labels,
                countries,
                gamma: cal.gamma,
                calibration: Some(cal),
            })
        }
        (None, None) => Err(ManifestError("one of gamma or calibration is required".into()).into()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CountryProfile {
    pub country: String,
    pub budget: f64,
    pub profile: Vec<f64>,
}

#[derive(Serialize)]
struct ProfilesBody<'a> {
    labels: &'a [String],
    discovery_runs: usize,
    countries: &'a [CountryProfile],
}

fn discover_all(job: &Job, inp: &Inputs) -> Result<Vec<CountryProfile>> {
    let opts = DiscoveryOptions {
        averaging: job.manifest.discovery_averaging,
        run: job.run_options(),
    };
    inp.countries
        .iter()
        .map(|c| {
            let cfg = &c.prepared.config;
            Ok(CountryProfile {
                country: c.name().to_string(),
                budget: cfg.budget(),
                profile: discover_profile(
                    cfg,
                    job.manifest.discovery_runs,
                    c.seed(job.manifest.master_seed),
                    &opts,
                )?,
            })
        })
        .collect()
}

fn write_profiles(job: &Job, labels: &[String], profiles: &[CountryProfile]) -> Result<Vec<PathBuf>> {
    let prov = job.provenance();
    let json = job.out("discovered_profiles.json");
    io::write_json(
        &json,
        &prov,
        &ProfilesBody {
            labels,
            discovery_runs: job.manifest.discovery_runs,
            countries: profiles,
        },
    )?;
    let csv_path = job.out("discovered_profiles.csv");
    let mut w = io::csv_writer(&csv_path, &prov)?;
    w.write_record(["country", "indicator", "allocation"])?;
    for p in profiles {
        for (label, x) in labels.iter().zip(&p.profile) {
            w.write_record([p.country.as_str(), label, &x.to_string()])?;
        }
    }
    w.flush()?;
    Ok(vec![json, csv_path])
}

pub fn discover(job: &Job) -> Result<Vec<PathBuf>> {
    let inp = inputs(job)?;
    let profiles = discover_all(job, &inp)?;
    write_profiles(job, &inp.labels, &profiles)
}

fn regimes_for(job: &Job, country: &Country, profile: Option<&CountryProfile>) -> Result<Vec<PolicyRegime>> {
    job.manifest
        .regimes
        .iter()
        .map(|&kind| {
            if kind.is_informed() {
                let p = profile.expect("informed regimes come with a discovered profile");
                Ok(PolicyRegime::pinned(kind, p.profile.clone(), country.prepared.config.budget())?)
            } else {
                Ok(PolicyRegime::uninformed(kind)?)
            }
        })
        .collect()
}

/// Ensembles for every country: `(country, regimes, results per regime)`.
struct Simulated {
    profiles: Option<Vec<CountryProfile>>,
    ensembles: Vec<Vec<Vec<RunResult>>>,
}

fn simulate_all(job: &Job, inp: &Inputs) -> Result<Simulated> {
    let profiles = if job.manifest.regimes.iter().any(|k| k.is_informed()) {
        Some(discover_all(job, inp)?)
    } else {
        None
    };
    let mut ensembles = Vec::with_capacity(inp.countries.len());
    for (i, c) in inp.countries.iter().enumerate() {
        let regimes = regimes_for(job, c, profiles.as_ref().map(|p| &p[i]))?;
        ensembles.push(run_ensembles(
            &c.prepared.config,
            &regimes,
            job.manifest.n_runs,
            c.seed(job.manifest.master_seed),
            &job.run_options(),
        )?);
    }
    Ok(Simulated { profiles, ensembles })
}

fn write_runs(path: &Path, prov: &Provenance, kinds: &[RegimeKind], inp: &Inputs, sim: &Simulated) -> Result<()> {
    let mut w = io::csv_writer(path, prov)?;
    w.write_record(["country", "regime", "run", "seed", "corruption", "periods", "converged"])?;
    for (c, per_regime) in inp.countries.iter().zip(&sim.ensembles) {
        for (kind, results) in kinds.iter().zip(per_regime) {
            for (k, r) in results.iter().enumerate() {
                w.write_record([
                    c.name(),
                    kind.label(),
                    &k.to_string(),
                    &r.seed.to_string(),
                    &r.corruption.to_string(),
                    &r.periods.to_string(),
                    &r.converged.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn simulate(job: &Job) -> Result<Vec<PathBuf>> {
    let inp = inputs(job)?;
    let sim = simulate_all(job, &inp)?;
    let path = job.out("runs.csv");
    write_runs(&path, &job.provenance(), &job.manifest.regimes, &inp, &sim)?;
    Ok(vec![path])
}

#[derive(Debug, Clone, Serialize)]
pub struct CountryStats {
    pub country: String,
    pub budget: f64,
    pub stats: EnsembleStats,
}

#[derive(Serialize)]
struct StatsBody<'a> {
    gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    calibration: Option<&'a CalibrationResult>,
    n_runs: usize,
    regimes: &'a [RegimeKind],
    countries: &'a [CountryStats],
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimePillarGains {
    pub regime: RegimeKind,
    pub total_gain: f64,
    pub gains: PillarGains,
}

#[derive(Debug, Clone, Serialize)]
pub struct CountryPillarGains {
    pub country: String,
    pub regimes: Vec<RegimePillarGains>,
}

#[derive(Serialize)]
struct PillarBody<'a> {
    countries: &'a [CountryPillarGains],
}

fn write_regime_summary(path: &Path, prov: &Provenance, stats: &[CountryStats]) -> Result<()> {
    let mut w = io::csv_writer(path, prov)?;
    w.write_record([
        "country",
        "regime",
        "runs",
        "mean",
        "p25",
        "p50",
        "converged_fraction",
        "mean_periods",
        "efficiency_gain",
        "welch_t",
        "welch_df",
        "welch_p",
    ])?;
    for cs in stats {
        for s in &cs.stats.regimes {
            let cmp = cs.stats.comparison(s.regime);
            let field = |f: fn(&ppsim_core::analysis::Comparison) -> f64| {
                cmp.map_or_else(String::new, |c| f(c).to_string())
            };
            w.write_record([
                cs.country.as_str(),
                s.regime.label(),
                &s.runs.to_string(),
                &s.mean.to_string(),
                &s.p25.to_string(),
                &s.p50.to_string(),
                &s.converged_fraction.to_string(),
                &s.mean_periods.to_string(),
                &field(|c| c.efficiency_gain),
                &field(|c| c.welch.t),
                &field(|c| c.welch.df),
                &field(|c| c.welch.p),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_pillar_csv(path: &Path, prov: &Provenance, gains: &[CountryPillarGains]) -> Result<()> {
    let mut w = io::csv_writer(path, prov)?;
    w.write_record(["country", "regime", "pillar", "size", "gain", "gain_per_indicator"])?;
    for cg in gains {
        for rg in &cg.regimes {
            let g = &rg.gains;
            for k in 0..g.pillars.len() {
                w.write_record([
                    cg.country.as_str(),
                    rg.regime.label(),
                    &g.pillars[k],
                    &g.sizes[k].to_string(),
                    &g.gain[k].to_string(),
                    &g.gain_per_indicator[k].to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn write_features(path: &Path, prov: &Provenance, labels: &[String], countries: &[Country]) -> Result<()> {
    let mut w = io::csv_writer(path, prov)?;
    let mut header = vec!["country".to_string()];
    header.extend(labels.iter().cloned());
    w.write_record(&header)?;
    for c in countries {
        let mut row = vec![c.name().to_string()];
        row.extend(c.prepared.panel.column_means().iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Full evaluation output, also returned for in-process callers.
pub struct Evaluation {
    pub gamma: f64,
    pub stats: Vec<CountryStats>,
    pub pillar_gains: Option<Vec<CountryPillarGains>>,
    pub files: Vec<PathBuf>,
}

pub fn evaluate(job: &Job) -> Result<Evaluation> {
    let inp = inputs(job)?;
    let kinds = job.manifest.regimes.clone();
    let sim = simulate_all(job, &inp)?;
    let prov = job.provenance();
    let mut files = Vec::new();

    let mut stats = Vec::with_capacity(inp.countries.len());
    for (c, ens) in inp.countries.iter().zip(&sim.ensembles) {
        stats.push(CountryStats {
            country: c.name().to_string(),
            budget: c.prepared.config.budget(),
            stats: summarize(&kinds, ens)?,
        });
    }
    let path = job.out("ensemble_stats.json");
    io::write_json(
        &path,
        &prov,
        &StatsBody {
            gamma: inp.gamma,
            calibration: inp.calibration.as_ref(),
            n_runs: job.manifest.n_runs,
            regimes: &kinds,
            countries: &stats,
        },
    )?;
    files.push(path);

    let path = job.out("regime_summary.csv");
    write_regime_summary(&path, &prov, &stats)?;
    files.push(path);

    let path = job.out("distributions.csv");
    write_runs(&path, &prov, &kinds, &inp, &sim)?;
    files.push(path);

    let pillar_gains = match &job.manifest.pillars {
        Some(p) => {
            let map = io::read_pillars(p, &inp.labels)?;
            let gains = country_pillar_gains(&kinds, &stats, &sim, &map)?;
            let json = job.out("pillar_gains.json");
            io::write_json(&json, &prov, &PillarBody { countries: &gains })?;
            let csv_path = job.out("pillar_gains.csv");
            write_pillar_csv(&csv_path, &prov, &gains)?;
            files.extend([json, csv_path]);
            Some(gains)
        }
        None => None,
    };

    if let Some(profiles) = &sim.profiles {
        files.extend(write_profiles(job, &inp.labels, profiles)?);
    }

    let path = job.out("country_features.csv");
    write_features(&path, &prov, &inp.labels, &inp.countries)?;
    files.push(path.clone());

    if let Some(k) = job.manifest.clusters {
        let (_, clusters) = cluster_with(&path, k, &job.manifest.out_dir, prov)?;
        files.push(clusters);
    }

    Ok(Evaluation {
        gamma: inp.gamma,
        stats,
        pillar_gains,
        files,
    })
}

fn country_pillar_gains(
    kinds: &[RegimeKind],
    stats: &[CountryStats],
    sim: &Simulated,
    map: &PillarMap,
) -> Result<Vec<CountryPillarGains>> {
    stats
        .iter()
        .zip(&sim.ensembles)
        .map(|(cs, ens)| {
            let bench = cs.stats.benchmark_index;
            let regimes = cs
                .stats
                .comparisons
                .iter()
                .map(|cmp| {
                    Ok(RegimePillarGains {
                        regime: kinds[cmp.alternative_index],
                        total_gain: cmp.efficiency_gain,
                        gains: pillar_gains(&ens[bench], &ens[cmp.alternative_index], map)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(CountryPillarGains {
                country: cs.country.clone(),
                regimes,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct CalibrationBody<'a> {
    countries: Vec<&'a str>,
    #[serde(flatten)]
    result: &'a CalibrationResult,
}

pub fn calibrate(job: &Job) -> Result<(CalibrationResult, Vec<PathBuf>)> {
    if job.manifest.calibration.is_none() {
        return Err(ManifestError("calibrate needs a calibration block".into()).into());
    }
    let inp = inputs(job)?;
    let cal = inp.calibration.expect("calibration ran");
    let prov = job.provenance();
    let json = job.out("calibration.json");
    io::write_json(
        &json,
        &prov,
        &CalibrationBody {
            countries: inp.countries.iter().map(Country::name).collect(),
            result: &cal,
        },
    )?;
    let csv_path = job.out("calibration.csv");
    let mut w = io::csv_writer(&csv_path, &prov)?;
    w.write_record(["gamma", "objective"])?;
    for p in &cal.grid {
        w.write_record([p.gamma.to_string(), p.objective.to_string()])?;
    }
    w.flush()?;
    Ok((cal, vec![json, csv_path]))
}

fn file_provenance(path: &Path) -> Result<Provenance> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Provenance {
        seed: None,
        manifest_sha256: manifest::sha256_hex(&bytes),
    })
}

/// Estimates one network per country of a raw panel. Writes
/// `<country>_edges.csv` and `<country>_network.json` into `out`.
pub fn estimate_networks(
    panel: &Path,
    polarity: Option<&Path>,
    country: Option<&str>,
    signed_weights: bool,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    let prov = file_provenance(panel)?;
    let table = normalized_panel(panel, polarity)?;
    let names = match country {
        Some(c) => vec![c.to_string()],
        None => table.countries(),
    };
    let mut files = Vec::new();
    for name in names {
        let ip = country_panel(&table, &name)?;
        let net = estimate_network(&ip, OrientOptions { signed_weights })?;
        let edges = out.join(format!("{name}_edges.csv"));
        let mut w = io::csv_writer(&edges, &prov)?;
        w.write_record(["source", "target", "weight", "tie"])?;
        for e in &net.edges {
            w.write_record([
                net.labels[e.source].as_str(),
                &net.labels[e.target],
                &e.weight.to_string(),
                &e.tie.to_string(),
            ])?;
        }
        w.flush()?;
        let json = out.join(format!("{name}_network.json"));
        io::write_json(
            &json,
            &prov,
            &NetworkFile {
                provenance: None,
                labels: net.labels.clone(),
                matrix: net.adjacency(),
            },
        )?;
        files.extend([edges, json]);
    }
    Ok(files)
}

/// Ward clusters of a country feature table; writes `clusters.csv`.
pub fn cluster(features: &Path, k: usize, out: &Path) -> Result<(Vec<(String, usize)>, PathBuf)> {
    cluster_with(features, k, out, file_provenance(features)?)
}

fn cluster_with(features: &Path, k: usize, out: &Path, prov: Provenance) -> Result<(Vec<(String, usize)>, PathBuf)> {
    let (names, rows) = io::read_features(features)?;
    let labels = ward_clusters(&rows, k)?;
    let path = out.join("clusters.csv");
    let mut w = io::csv_writer(&path, &prov)?;
    w.write_record(["country", "cluster"])?;
    for (n, l) in names.iter().zip(&labels) {
        w.write_record([n.as_str(), &l.to_string()])?;
    }
    w.flush()?;
    Ok((names.into_iter().zip(labels).collect(), path))
}

#[derive(Debug, Clone, Serialize)]
pub struct RegimeReport {
    pub regime: RegimeKind,
    pub countries: usize,
    /// Mean over countries of the mean corruption.
    pub mean_corruption: f64,
    /// Mean over countries of the efficiency gain against the benchmark.
    pub mean_gain: Option<f64>,
    /// Countries where the gain is positive with Welch p < 0.05.
    pub significant_gains: Option<usize>,
    /// Countries where the gain is negative with Welch p < 0.05.
    pub significant_losses: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub countries: usize,
    /// Countries where strict-informed <= lax-informed <= lax-uninformed
    /// in mean corruption, when all three were evaluated.
    pub ordered_countries: Option<usize>,
    pub regimes: Vec<RegimeReport>,
}

/// Cross-country summary of an `evaluate` output directory.
pub fn report(dir: &Path) -> Result<(Report, Vec<PathBuf>)> {
    #[derive(serde::Deserialize)]
    struct Stats {
        provenance: Provenance,
        regimes: Vec<RegimeKind>,
        countries: Vec<CountryStatsIn>,
    }
    #[derive(serde::Deserialize)]
    struct CountryStatsIn {
        stats: EnsembleStats,
    }
    let src = dir.join("ensemble_stats.json");
    let text = fs::read_to_string(&src).with_context(|| format!("reading {}", src.display()))?;
    let stats: Stats = serde_json::from_str(&text).with_context(|| format!("parsing {}", src.display()))?;

    let n = stats.countries.len();
    let mut regimes = Vec::new();
    for &kind in &stats.regimes {
        let mut means = Vec::with_capacity(n);
        let mut gains = Vec::new();
        let (mut sig_gain, mut sig_loss) = (0, 0);
        for c in &stats.countries {
            if let Some(s) = c.stats.summary(kind) {
                means.push(s.mean);
            }
            if let Some(cmp) = c.stats.comparison(kind) {
                gains.push(cmp.efficiency_gain);
                if cmp.welch.p < 0.05 {
                    if cmp.efficiency_gain > 0.0 {
                        sig_gain += 1;
                    } else if cmp.efficiency_gain < 0.0 {
                        sig_loss += 1;
                    }
                }
            }
        }
        let has_cmp = !gains.is_empty();
        regimes.push(RegimeReport {
            regime: kind,
            countries: means.len(),
            mean_corruption: ppsim_core::stats::mean(&means),
            mean_gain: has_cmp.then(|| ppsim_core::stats::mean(&gains)),
            significant_gains: has_cmp.then_some(sig_gain),
            significant_losses: has_cmp.then_some(sig_loss),
        });
    }
    let ordered_countries = {
        let mean_of = |c: &CountryStatsIn, k| c.stats.summary(k).map(|s| s.mean);
        let counts: Option<Vec<bool>> = stats
            .countries
            .iter()
            .map(|c| {
                let si = mean_of(c, RegimeKind::StrictInformed)?;
                let li = mean_of(c, RegimeKind::LaxInformed)?;
                let lu = mean_of(c, RegimeKind::LaxUninformed)?;
                Some(si <= li && li <= lu)
            })
            .collect();
        counts.map(|v| v.into_iter().filter(|&b| b).count())
    };
    let rep = Report {
        countries: n,
        ordered_countries,
        regimes,
    };

    let prov = stats.provenance;
    let json = dir.join("report.json");
    io::write_json(&json, &prov, &rep)?;
    let csv_path = dir.join("report.csv");
    let mut w = io::csv_writer(&csv_path, &prov)?;
    w.write_record([
        "regime",
        "countries",
        "mean_corruption",
        "mean_gain",
        "significant_gains",
        "significant_losses",
    ])?;
    let opt = |x: Option<String>| x.unwrap_or_default();
    for r in &rep.regimes {
        w.write_record([
            r.regime.label(),
            &r.countries.to_string(),
            &r.mean_corruption.to_string(),
            &opt(r.mean_gain.map(|g| g.to_string())),
            &opt(r.significant_gains.map(|g| g.to_string())),
            &opt(r.significant_losses.map(|g| g.to_string())),
        ])?;
    }
    w.flush()?;
    Ok((rep, vec![json, csv_path]))
}
