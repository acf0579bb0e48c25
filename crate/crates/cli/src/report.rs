use std::io::Write;
use std::path::Path;

use mixbound::montecarlo::{CertifyReport, Verdict};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CSV_HEADER: &str = "chain,bound,p,n,tau,sigma,bound_value,empirical_value,std_error,ratio,holds";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub chain: String,
    pub bound: String,
    pub p: f64,
    pub n: usize,
    pub tau: usize,
    pub sigma: f64,
    pub bound_value: f64,
    pub empirical_value: f64,
    pub std_error: f64,
    pub ratio: Option<f64>,
    pub holds: bool,
}

impl ReportRow {
    pub fn from_verdict(chain: &str, tau: usize, sigma: f64, v: &Verdict) -> Self {
        Self {
            chain: chain.to_string(),
            bound: v.bound_name.clone(),
            p: v.p,
            n: v.n,
            tau,
            sigma,
            bound_value: v.bound_value,
            empirical_value: v.empirical_value,
            std_error: v.std_error,
            ratio: v.ratio,
            holds: v.holds,
        }
    }
}

pub fn report_rows(chain: &str, report: &CertifyReport) -> Vec<ReportRow> {
    report
        .verdicts
        .iter()
        .map(|v| ReportRow::from_verdict(chain, report.tau, report.sigma, v))
        .collect()
}

pub fn rows_to_csv(rows: &[ReportRow]) -> Result<Vec<u8>, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row)?;
    }
    if rows.is_empty() {
        writer.write_record(CSV_HEADER.split(','))?;
    }
    writer
        .into_inner()
        .map_err(|e| CliError::Usage(format!("csv buffer: {e}")))
}

pub fn rows_from_csv(bytes: &[u8]) -> Result<Vec<ReportRow>, CliError> {
    let mut reader = csv::Reader::from_reader(bytes);
    let header = reader.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(CliError::Parse(format!("unexpected csv header `{header}`")));
    }
    Ok(reader.deserialize().collect::<Result<_, _>>()?)
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.flush().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
