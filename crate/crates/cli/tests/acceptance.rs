//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits nonzero if any failed.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use ppsim_cli::manifest::RunManifest;
use ppsim_cli::pipeline::{self, Evaluation, Job, Overrides};
use ppsim_core::analysis::{calibrate_gamma, discover_profile, simulated_corruption_rate, DiscoveryOptions};
use ppsim_core::government::{allocate, propensities, NetworkDegrees};
use ppsim_core::network::{lr_measure, orient_edges, standardize, tmfg, IndicatorPanel, OrientOptions};
use ppsim_core::{run, CountryConfig, CountryConfigParts, Matrix, RegimeKind, RunOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::gen::{oracle_input, random_config, random_parts, random_profile, regime};
use support::oracle::oracle_run;
use support::planarity::is_stacked_triangulation;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/synthetic")
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn oracle_equivalence() -> Outcome {
    const TOL: f64 = 1e-12;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let opts = RunOptions::default().with_trajectories();
    let mut mismatches = Vec::new();
    for case in 0..20 {
        let n = rng.random_range(1..=5);
        let max_periods = rng.random_range(1..=200);
        let cfg = random_config(&mut rng, n, max_periods);
        let profile = random_profile(&mut rng, n, cfg.budget());
        for kind in RegimeKind::ALL {
            let reg = regime(kind, &profile, cfg.budget());
            let seed = rng.random::<u64>();
            let got = run(&cfg, &reg, seed, &opts).expect("run");
            let want = oracle_run(&oracle_input(&cfg, &reg, opts.tolerance), seed);
            let traj = got.trajectories.as_ref().expect("trajectories");
            let same = (got.corruption - want.l).abs() <= TOL
                && got.periods == want.periods
                && got.converged == want.converged
                && traj.len() == want.steps.len()
                && traj.iter().zip(&want.steps).all(|(a, b)| {
                    close(&a.allocations, &b.p, TOL)
                        && close(&a.contributions, &b.c, TOL)
                        && close(&a.benefits, &b.f, TOL)
                        && close(&a.indicators, &b.i, TOL)
                        && a.monitoring == b.theta
                });
            if !same {
                mismatches.push(format!("case {case} {kind}"));
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches.is_empty() && elapsed < Duration::from_secs(10),
        format!(
            "20 configs x 4 regimes, {} mismatches, {:.2}s",
            mismatches.len(),
            elapsed.as_secs_f64()
        ),
    )
}

/// Fuzzed runs with trajectories until `periods` periods have been seen
/// under each regime.
fn fuzz_periods(periods_per_regime: usize, mut check: impl FnMut(&CountryConfig, RegimeKind, &ppsim_core::PeriodRecord)) {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let opts = RunOptions::default().with_trajectories();
    for kind in RegimeKind::ALL {
        let mut seen = 0;
        while seen < periods_per_regime {
            let n = rng.random_range(1..=8);
            let periods = rng.random_range(1..=400);
            let cfg = random_config(&mut rng, n, periods);
            let profile = random_profile(&mut rng, n, cfg.budget());
            let r = run(&cfg, &regime(kind, &profile, cfg.budget()), rng.random(), &opts).expect("run");
            for rec in r.trajectories.as_ref().expect("trajectories") {
                check(&cfg, kind, rec);
            }
            seen += r.periods;
        }
    }
}

fn budget_conservation() -> Outcome {
    let (mut periods, mut bad, mut worst) = (0usize, 0usize, 0.0f64);
    fuzz_periods(25_000, |cfg, _, rec| {
        let b = cfg.budget();
        let err = (rec.allocations.iter().sum::<f64>() - b).abs() / b;
        worst = worst.max(err);
        if err > 1e-9 {
            bad += 1;
        }
        periods += 1;
    });
    outcome(
        bad == 0 && periods >= 100_000,
        format!("{periods} periods, {bad} violations, worst relative error {worst:.1e}"),
    )
}

fn contribution_bounds() -> Outcome {
    let (mut steps, mut bad) = (0usize, 0usize);
    fuzz_periods(25_000, |_, _, rec| {
        for (c, p) in rec.contributions.iter().zip(&rec.allocations) {
            steps += 1;
            if !(*c >= 0.0 && c <= p) {
                bad += 1;
            }
        }
    });
    outcome(bad == 0, format!("{steps} issue-periods, {bad} out of bounds"))
}

fn regime_constancy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let opts = RunOptions::default().with_trajectories();
    let (mut strict_bad, mut lax_bad, mut checked) = (0, 0, 0);
    for _ in 0..200 {
        let n = rng.random_range(1..=8);
        let cfg = random_config(&mut rng, n, 300);
        let profile = random_profile(&mut rng, n, cfg.budget());
        let degrees = NetworkDegrees::from_adjacency(cfg.adjacency());
        for kind in RegimeKind::ALL {
            let r = run(&cfg, &regime(kind, &profile, cfg.budget()), rng.random(), &opts).expect("run");
            let traj = r.trajectories.expect("trajectories");
            if kind.is_strict() {
                if traj.iter().any(|p| p.allocations != traj[0].allocations) {
                    strict_bad += 1;
                }
            } else {
                for t in 1..traj.len() {
                    let prev = &traj[t - 1];
                    let f_r = ppsim_core::dynamics::institutional_map(prev.indicators[cfg.rule_of_law_idx()]);
                    let q = propensities(&prev.indicators, &prev.monitoring, f_r, &degrees, cfg.targets())
                        .expect("propensities");
                    if traj[t].allocations != allocate(&q, cfg.budget()) {
                        lax_bad += 1;
                    }
                    checked += 1;
                }
            }
        }
    }
    outcome(
        strict_bad == 0 && lax_bad == 0,
        format!("strict runs not constant: {strict_bad}; lax periods recomputed: {checked}, mismatched: {lax_bad}"),
    )
}

fn tmfg_structure() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut ok = 0;
    for &n in &[4usize, 10, 30, 60] {
        for _ in 0..50 {
            let mut m = Matrix::zeros(n);
            for i in 0..n {
                m.set(i, i, 1.0);
                for j in 0..i {
                    let s = rng.random::<f64>();
                    m.set(i, j, s);
                    m.set(j, i, s);
                }
            }
            let t = tmfg(&m).expect("tmfg");
            if t.edges.len() == 3 * (n - 2) && is_stacked_triangulation(n, &t.edges) {
                ok += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        ok == 200 && elapsed < Duration::from_secs(30),
        format!("{ok}/200 trials planar with 3(N-2) edges, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn laplace(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random::<f64>() - 0.5;
    -u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

fn orientation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(3..300);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v - 0.5 * v + laplace(&mut rng)).collect();
        let (xs, ys) = (standardize(&x), standardize(&y));
        worst = worst.max((lr_measure(&xs, &ys) + lr_measure(&ys, &xs)).abs());
    }
    let mut hits = 0;
    for rep in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(7000 + rep);
        let x: Vec<f64> = (0..500).map(|_| laplace(&mut rng)).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.8 * v + rng.random_range(-1.0..1.0)).collect();
        let rows = x.iter().zip(&y).map(|(a, b)| vec![*a, *b]).collect();
        let panel = IndicatorPanel::new(vec!["x".into(), "y".into()], (0..500).collect(), rows).expect("panel");
        let net = orient_edges(&panel, &[(0, 1)], OrientOptions::default()).expect("orient");
        if (net.edges[0].source, net.edges[0].target) == (0, 1) {
            hits += 1;
        }
    }
    outcome(
        worst < 1e-12 && hits >= 80,
        format!("max |R(x,y)+R(y,x)| = {worst:.1e} over 1000 pairs; causal pairs recovered {hits}/100"),
    )
}

fn fixture_evaluation(out: &Path) -> anyhow::Result<(Evaluation, Duration)> {
    let overrides = Overrides {
        out: Some(out.to_path_buf()),
        ..Overrides::default()
    };
    let job = Job::load(&fixture_dir().join("manifest.json"), &overrides)?;
    let start = Instant::now();
    let ev = pipeline::evaluate(&job)?;
    Ok((ev, start.elapsed()))
}

fn directional_reproduction(ev: &Evaluation, elapsed: Duration) -> Outcome {
    let mean = |cs: &pipeline::CountryStats, k| cs.stats.summary(k).map(|s| s.mean).unwrap_or(f64::NAN);
    let ordered: Vec<&str> = ev
        .stats
        .iter()
        .filter(|cs| {
            let (si, li, lu) = (
                mean(cs, RegimeKind::StrictInformed),
                mean(cs, RegimeKind::LaxInformed),
                mean(cs, RegimeKind::LaxUninformed),
            );
            si <= li && li <= lu
        })
        .map(|cs| cs.country.as_str())
        .collect();

    // medium/high corruption: benchmark mean at or above the cross-country median
    let mut bench: Vec<f64> = ev.stats.iter().map(|cs| mean(cs, RegimeKind::LaxUninformed)).collect();
    bench.sort_by(f64::total_cmp);
    let median = ppsim_core::stats::quantile_sorted(&bench, 0.5);
    let mut significant = 0;
    let mut upper = 0;
    for cs in &ev.stats {
        if mean(cs, RegimeKind::LaxUninformed) < median {
            continue;
        }
        upper += 1;
        let cmp = cs.stats.comparison(RegimeKind::StrictInformed).expect("strict-informed evaluated");
        if cmp.welch.p < 0.05 && cmp.efficiency_gain > 0.0 {
            significant += 1;
        }
    }
    let threads = rayon::current_num_threads();
    outcome(
        ordered.len() >= 9 && significant == upper,
        format!(
            "ordering holds in {}/{} countries; strict-informed significant in {significant}/{upper} medium/high countries; {:.0}s on {threads} thread(s)",
            ordered.len(),
            ev.stats.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn discovery_symmetry() -> Outcome {
    let n = 6;
    let mut adj = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                adj.set(i, j, 0.1);
            }
        }
    }
    let cfg = CountryConfig::try_from(CountryConfigParts {
        initial_indicators: vec![0.3; n],
        targets: vec![0.8; n],
        adjacency: adj,
        budget: 0.3,
        gamma: 1.0,
        rule_of_law_idx: 0,
        control_of_corruption_idx: 1,
        max_periods: 2000,
    })
    .expect("config");
    let p = discover_profile(&cfg, 500, 808, &DiscoveryOptions::default()).expect("discover");
    let fair = cfg.budget() / n as f64;
    let dev: Vec<f64> = p.iter().map(|x| (x - fair) / fair).collect();
    let worst = dev.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let shown: Vec<String> = dev.iter().map(|d| format!("{:+.1}%", 100.0 * d)).collect();
    outcome(
        worst <= 0.05,
        format!(
            "max relative deviation from uniform {:.2}% (per issue {}; issue 0 is rule of law, issue 1 control of corruption)",
            100.0 * worst,
            shown.join(" ")
        ),
    )
}

fn pillar_identity(ev: &Evaluation) -> Outcome {
    let Some(gains) = &ev.pillar_gains else {
        return outcome(false, "no pillar gains produced");
    };
    let mut worst = 0.0f64;
    let mut checked = 0;
    for cg in gains {
        for rg in &cg.regimes {
            worst = worst.max((rg.gains.total() - rg.total_gain).abs());
            checked += 1;
        }
    }
    outcome(
        worst <= 1e-9 && checked > 0,
        format!("{checked} country-regime decompositions, max |sum - total| = {worst:.1e}"),
    )
}

fn calibration_recovery() -> Outcome {
    const TRUE_GAMMA: f64 = 0.05;
    let grid: Vec<f64> = (1..=11).map(|k| 0.01 * k as f64).collect();
    let step = 0.01;
    let opts = RunOptions::default();
    let mut recovered = Vec::new();
    for rep in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1010 + rep);
        let countries: Vec<(CountryConfig, f64)> = (0..4)
            .map(|c| {
                let mut parts = random_parts(&mut rng, 4, 300);
                parts.gamma = TRUE_GAMMA;
                let cfg = CountryConfig::try_from(parts).expect("config");
                let empirical =
                    simulated_corruption_rate(&cfg, 50, 0xE3_0000 + 100 * rep + c, &opts).expect("simulate");
                (cfg, empirical)
            })
            .collect();
        let cal = calibrate_gamma(&countries, &grid, 50, 0xCA_0000 + rep, &opts).expect("calibrate");
        recovered.push(cal.gamma);
    }
    let hits = recovered
        .iter()
        .filter(|g| (*g - TRUE_GAMMA).abs() <= step + 1e-12)
        .count();
    let shown: Vec<String> = recovered.iter().map(|g| format!("{g:.2}")).collect();
    outcome(
        hits >= 9,
        format!("recovered within one grid step in {hits}/10 repetitions (argmins {})", shown.join(" ")),
    )
}

fn evaluate_cli(manifest: &Path, out: &Path, threads: &str) -> anyhow::Result<()> {
    let status = Command::new(env!("CARGO_BIN_EXE_ppsim"))
        .arg("evaluate")
        .arg(manifest)
        .arg("--out")
        .arg(out)
        .env("PPSIM_THREADS", threads)
        .output()?;
    anyhow::ensure!(
        status.status.success(),
        "evaluate failed: {}",
        String::from_utf8_lossy(&status.stderr)
    );
    Ok(())
}

fn dir_contents(dir: &Path) -> anyhow::Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::new();
    for e in std::fs::read_dir(dir)? {
        let e = e?;
        files.push((e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path())?));
    }
    files.sort();
    Ok(files)
}

fn determinism(tmp: &Path) -> anyhow::Result<Outcome> {
    let fx = fixture_dir().canonicalize()?;
    let text = std::fs::read_to_string(fx.join("manifest.json"))?;
    let mut m = RunManifest::from_json(&text)?;
    m.panel = fx.join("panel.csv");
    m.polarity = Some(fx.join("polarity.csv"));
    m.pillars = Some(fx.join("pillars.csv"));
    m.countries = Some(vec!["C01".into(), "C05".into(), "C10".into()]);
    m.n_runs = 40;
    m.discovery_runs = 50;
    m.max_periods = 1500;
    m.clusters = Some(2);
    let manifest = tmp.join("reduced.json");
    std::fs::write(&manifest, serde_json::to_string_pretty(&m)?)?;

    let runs = [("1", "a"), ("4", "b"), ("1", "c"), ("3", "d")];
    let mut outputs = Vec::new();
    for (threads, name) in runs {
        let out = tmp.join(name);
        evaluate_cli(&manifest, &out, threads)?;
        outputs.push(dir_contents(&out)?);
    }
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    Ok(outcome(
        identical && !outputs[0].is_empty(),
        format!(
            "{} files compared across PPSIM_THREADS=1,4,1,3: {}",
            outputs[0].len(),
            if identical { "byte-identical" } else { "differ" }
        ),
    ))
}

fn main() {
    let tmp = tempfile::tempdir().expect("tempdir");
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();

    results.push((1, "oracle equivalence", oracle_equivalence()));
    results.push((2, "budget conservation", budget_conservation()));
    results.push((3, "contribution bounds", contribution_bounds()));
    results.push((4, "regime constancy", regime_constancy()));
    results.push((5, "TMFG structure", tmfg_structure()));
    results.push((6, "orientation antisymmetry and recovery", orientation()));
    match fixture_evaluation(&tmp.path().join("fixture")) {
        Ok((ev, elapsed)) => {
            results.push((7, "directional ordering on the fixture", directional_reproduction(&ev, elapsed)));
            results.push((8, "discovery symmetry", discovery_symmetry()));
            results.push((9, "pillar partition identity", pillar_identity(&ev)));
        }
        Err(e) => {
            results.push((7, "directional ordering on the fixture", outcome(false, format!("{e:#}"))));
            results.push((8, "discovery symmetry", discovery_symmetry()));
            results.push((9, "pillar partition identity", outcome(false, format!("{e:#}"))));
        }
    }
    results.push((10, "calibration recovery", calibration_recovery()));
    let det = determinism(tmp.path()).unwrap_or_else(|e| outcome(false, format!("{e:#}")));
    results.push((11, "determinism", det));

    let mut failed = 0;
    for (k, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("criterion {k:>2} {tag}  {name}: {}", o.detail);
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
