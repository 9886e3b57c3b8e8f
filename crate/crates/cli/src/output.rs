//! CSV result files and the JSON metadata sidecar.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::run::{BeamReport, HeuristicPoint, NonlinearReport, RegionPoint};
use crate::CliError;

fn num(x: f64) -> String {
    format!("{x:.9}")
}

fn order_label(o: [usize; 2]) -> String {
    format!("{}-{}", o[0] + 1, o[1] + 1)
}

fn to_csv(header: Vec<String>, rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(|e| CliError::Io(e.to_string()))?;
    for r in rows {
        w.write_record(&r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn indexed(prefix: &str, l: usize) -> impl Iterator<Item = String> + '_ {
    (1..=l).map(move |i| format!("{prefix}_{i}"))
}

/// Columns `w1, w2, order, r1_bits, r2_bits, lambda_1..L, slack_1..L, iters, g_gap`.
pub fn region_csv(points: &[RegionPoint], l: usize) -> Result<String, CliError> {
    let mut header: Vec<String> = ["w1", "w2", "order", "r1_bits", "r2_bits"].map(String::from).to_vec();
    header.extend(indexed("lambda", l));
    header.extend(indexed("slack", l));
    header.extend(["iters", "g_gap"].map(String::from));
    let rows = points
        .iter()
        .map(|p| {
            let mut r = vec![
                num(p.weights[0]),
                num(p.weights[1]),
                order_label(p.order),
                num(p.rates_bits[0]),
                num(p.rates_bits[1]),
            ];
            r.extend(p.lambda.iter().map(|&x| num(x)));
            r.extend(p.slacks.iter().map(|&x| num(x)));
            r.push(p.iterations.to_string());
            r.push(format!("{:.3e}", p.g_gap));
            r
        })
        .collect();
    to_csv(header, rows)
}

pub fn heuristic_csv(points: &[HeuristicPoint], l: usize) -> Result<String, CliError> {
    let mut header: Vec<String> = ["w1", "w2", "order", "r1_bits", "r2_bits", "scale"].map(String::from).to_vec();
    header.extend(indexed("slack", l));
    let rows = points
        .iter()
        .map(|p| {
            let mut r = vec![
                num(p.weights[0]),
                num(p.weights[1]),
                order_label(p.order),
                num(p.rates_bits[0]),
                num(p.rates_bits[1]),
                num(p.scale),
            ];
            r.extend(p.slacks.iter().map(|&x| num(x)));
            r
        })
        .collect();
    to_csv(header, rows)
}

/// Outer-loop trace of the beamforming modes.
pub fn beam_trace_csv(report: &BeamReport) -> Result<String, CliError> {
    let l = report.lambda.len();
    let mut header: Vec<String> = ["iter", "value", "accepted", "step"].map(String::from).to_vec();
    header.extend(indexed("lambda", l));
    let rows = report
        .trace
        .iter()
        .map(|t| {
            let mut r = vec![t.iteration.to_string(), num(t.value), t.accepted.to_string(), num(t.step)];
            r.extend(t.lambda.iter().map(|&x| num(x)));
            r
        })
        .collect();
    to_csv(header, rows)
}

pub fn cut_trace_csv(report: &NonlinearReport) -> Result<String, CliError> {
    let header = ["cut", "value_bits", "phi"].map(String::from).to_vec();
    let rows = report.trace.iter().map(|c| vec![c.cut.to_string(), num(c.value_bits), num(c.phi)]).collect();
    to_csv(header, rows)
}

/// Git-style blob digest (`"blob <len>\0" + content`), hashed with SHA-256.
pub fn blob_hash(content: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub blob_sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Sidecar<'a, S: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'a str,
    /// `"complete"` or `"partial"`.
    pub status: &'a str,
    pub config: &'a ScenarioConfig,
    pub files: Vec<FileEntry>,
    pub summary: S,
}

/// Writes the CSV files plus `<stem>.json` and returns the written paths.
pub fn write_results<S: Serialize>(
    dir: &Path,
    stem: &str,
    subcommand: &str,
    partial: bool,
    cfg: &ScenarioConfig,
    files: Vec<(String, String)>,
    summary: S,
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let mut entries = Vec::new();
    for (name, content) in files {
        let path = dir.join(&name);
        std::fs::write(&path, &content).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        entries.push(FileEntry { blob_sha256: blob_hash(content.as_bytes()), name });
        written.push(path);
    }
    let side = Sidecar {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        subcommand,
        status: if partial { "partial" } else { "complete" },
        config: cfg,
        files: entries,
        summary,
    };
    let path = dir.join(format!("{stem}.json"));
    let mut text = serde_json::to_string_pretty(&side).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    written.push(path);
    Ok(written)
}
