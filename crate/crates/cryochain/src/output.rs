//! Report files: one CSV per table plus metrics, parameters and a
//! checksum manifest, all under `<out>/<experiment>/`.

use std::fs;
use std::path::{Path, PathBuf};

use cryochain_core::experiments::{ExperimentReport, Table};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Name of the checksum manifest inside each experiment directory.
pub const MANIFEST: &str = "manifest.sha256";

/// Shortest text that parses back to the same `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v}")
}

fn csv_bytes<I, R>(header: &[String], rows: I) -> Result<Vec<u8>, CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Runtime(format!("csv encoding failed: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r.into_iter().collect::<Vec<_>>()).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Runtime(format!("csv encoding failed: {e}")))
}

/// CSV text of a table; labelled tables get a leading `label` column.
pub fn table_csv(t: &Table) -> Result<Vec<u8>, CliError> {
    let labelled = !t.labels.is_empty();
    let mut header = Vec::with_capacity(t.columns.len() + 1);
    if labelled {
        header.push("label".to_string());
    }
    header.extend(t.columns.iter().cloned());
    let rows = t.rows.iter().enumerate().map(|(i, r)| {
        let mut out = Vec::with_capacity(r.len() + 1);
        if labelled {
            out.push(t.labels[i].clone());
        }
        out.extend(r.iter().map(|&v| format_value(v)));
        out
    });
    csv_bytes(&header, rows)
}

pub fn metrics_csv(r: &ExperimentReport) -> Result<Vec<u8>, CliError> {
    let header = ["metric", "unit", "value"].map(String::from);
    let rows = r
        .scalar_metrics
        .iter()
        .map(|m| vec![m.name.clone(), m.unit.clone(), format_value(m.value)]);
    csv_bytes(&header, rows)
}

pub fn parameters_csv(r: &ExperimentReport) -> Result<Vec<u8>, CliError> {
    let header = ["parameter", "value"].map(String::from);
    let mut rows = vec![vec!["seed".to_string(), r.seed.to_string()]];
    rows.extend(r.parameters.iter().map(|(k, v)| vec![k.clone(), v.clone()]));
    csv_bytes(&header, rows)
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Files written for one report, relative to the experiment directory.
#[derive(Debug, Clone, PartialEq)]
pub struct WrittenReport {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

fn write_file(dir: &Path, rel: &str, bytes: &[u8]) -> Result<(), CliError> {
    let path = dir.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(format!("cannot create {}", parent.display()), e))?;
    }
    fs::write(&path, bytes).map_err(|e| CliError::io(format!("cannot write {}", path.display()), e))
}

/// Everything a report serializes to, as (relative path, contents).
pub fn report_files(r: &ExperimentReport, scenario_toml: &str) -> Result<Vec<(String, Vec<u8>)>, CliError> {
    let mut files = vec![
        ("metrics.csv".to_string(), metrics_csv(r)?),
        ("parameters.csv".to_string(), parameters_csv(r)?),
        ("scenario.toml".to_string(), scenario_toml.as_bytes().to_vec()),
    ];
    for t in &r.tables {
        files.push((format!("{}.csv", t.name), table_csv(t)?));
    }
    Ok(files)
}

/// Writes the report under `<out>/<report name>/`. With `svg`, plots
/// rendered from the CSVs go to `svg/`. The manifest lists every other
/// file with its checksum, in `sha256sum` format.
pub fn write_report(out: &Path, r: &ExperimentReport, scenario_toml: &str, svg: bool) -> Result<WrittenReport, CliError> {
    let dir = out.join(&r.name);
    let mut files = report_files(r, scenario_toml)?;
    if svg {
        let plots = crate::svg::render_report(&r.name, &files)?;
        files.extend(plots);
    }
    let mut manifest = String::new();
    for (rel, bytes) in &files {
        write_file(&dir, rel, bytes)?;
        manifest.push_str(&format!("{}  {}\n", sha256_hex(bytes), rel));
    }
    write_file(&dir, MANIFEST, manifest.as_bytes())?;
    let mut names: Vec<String> = files.into_iter().map(|(rel, _)| rel).collect();
    names.push(MANIFEST.to_string());
    Ok(WrittenReport { dir, files: names })
}

/// Re-hashes every manifest entry; returns the entries that do not match.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>, CliError> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(format!("cannot read {}", path.display()), e))?;
    let mut bad = Vec::new();
    for line in text.lines() {
        let Some((hash, rel)) = line.split_once("  ") else {
            bad.push(line.to_string());
            continue;
        };
        match fs::read(dir.join(rel)) {
            Ok(bytes) if sha256_hex(&bytes) == hash => {}
            _ => bad.push(rel.to_string()),
        }
    }
    Ok(bad)
}
