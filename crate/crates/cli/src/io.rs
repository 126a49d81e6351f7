//! CSV and JSON readers and writers. Every file written carries the run's
//! provenance: a `#` comment line in CSV, a `provenance` field in JSON.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use ppsim_core::analysis::PillarMap;
use ppsim_core::data::{PanelRecord, PanelTable};
use ppsim_core::Matrix;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    /// SHA-256 of the manifest, or of the input file for commands that take
    /// no manifest.
    pub manifest_sha256: String,
}

impl Provenance {
    pub fn header(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!("# ppsim seed={seed} manifest=sha256:{}", self.manifest_sha256)
    }
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))
}

fn parse_cell(cell: &str, path: &Path, line: u64) -> Result<Option<f64>> {
    if cell.is_empty() || cell.eq_ignore_ascii_case("na") {
        return Ok(None);
    }
    cell.parse::<f64>()
        .map(Some)
        .map_err(|_| anyhow!("{}:{line}: {cell:?} is not a number", path.display()))
}

/// Long-format panel: header `country,year,<indicator>...`.
pub fn read_panel(path: &Path) -> Result<PanelTable> {
    let mut rdr = reader(path)?;
    let header = rdr.headers()?.clone();
    if header.len() < 3 || &header[0] != "country" || &header[1] != "year" {
        bail!("{}: header must start with country,year", path.display());
    }
    let labels: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let year: i32 = row[1]
            .parse()
            .map_err(|_| anyhow!("{}:{line}: bad year {:?}", path.display(), &row[1]))?;
        let values = row
            .iter()
            .skip(2)
            .map(|c| parse_cell(c, path, line))
            .collect::<Result<Vec<_>>>()?;
        records.push(PanelRecord {
            country: row[0].to_string(),
            year,
            values,
        });
    }
    Ok(PanelTable::new(labels, records)?)
}

pub fn read_polarity(path: &Path) -> Result<Vec<(String, bool)>> {
    let mut out = Vec::new();
    for row in reader(path)?.records() {
        let row = row?;
        let flag = match row.get(1).unwrap_or("").to_ascii_lowercase().as_str() {
            "true" | "1" | "yes" => true,
            "false" | "0" | "no" => false,
            other => bail!("{}: reversed flag {other:?} is not a boolean", path.display()),
        };
        out.push((row[0].to_string(), flag));
    }
    Ok(out)
}

/// Pillar assignment for `labels`; every indicator needs exactly one row.
pub fn read_pillars(path: &Path, labels: &[String]) -> Result<PillarMap> {
    let mut assignment: Vec<Option<String>> = vec![None; labels.len()];
    for row in reader(path)?.records() {
        let row = row?;
        let j = labels
            .iter()
            .position(|l| l == &row[0])
            .ok_or_else(|| anyhow!("{}: unknown indicator {:?}", path.display(), &row[0]))?;
        if assignment[j].replace(row[1].to_string()).is_some() {
            bail!("{}: indicator {} listed twice", path.display(), labels[j]);
        }
    }
    let missing: Vec<&str> = labels
        .iter()
        .zip(&assignment)
        .filter(|(_, a)| a.is_none())
        .map(|(l, _)| l.as_str())
        .collect();
    if !missing.is_empty() {
        bail!("pillar map is not total; missing {}", missing.join(", "));
    }
    Ok(PillarMap::new(assignment.into_iter().flatten().collect())?)
}

/// `country,<value>` pairs, such as empirical corruption scores.
pub fn read_country_values(path: &Path) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for row in reader(path)?.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let v = parse_cell(row.get(1).unwrap_or(""), path, line)?
            .ok_or_else(|| anyhow!("{}:{line}: missing value", path.display()))?;
        out.push((row[0].to_string(), v));
    }
    Ok(out)
}

/// Country feature table: `country,<feature>...`.
pub fn read_features(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut names = Vec::new();
    let mut rows = Vec::new();
    for row in reader(path)?.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        names.push(row[0].to_string());
        rows.push(
            row.iter()
                .skip(1)
                .map(|c| parse_cell(c, path, line)?.ok_or_else(|| anyhow!("{}:{line}: missing value", path.display())))
                .collect::<Result<Vec<f64>>>()?,
        );
    }
    Ok((names, rows))
}

/// Dense network file: indicator labels plus `matrix[source][target]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    pub labels: Vec<String>,
    pub matrix: Matrix,
}

pub fn read_network(path: &Path) -> Result<NetworkFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// CSV writer that starts with the provenance comment.
pub fn csv_writer(path: &Path, prov: &Provenance) -> Result<csv::Writer<BufWriter<File>>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{}", prov.header())?;
    Ok(csv::Writer::from_writer(w))
}

#[derive(Serialize)]
struct WithProvenance<'a, T: Serialize> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON object with a leading `provenance` field. `body` must
/// serialize to a JSON object.
pub fn write_json<T: Serialize>(path: &Path, prov: &Provenance, body: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(&WithProvenance {
        provenance: prov,
        body,
    })?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
