//! Parameter sweeps and report emission.

use std::io::Write;
use std::path::Path;

use bpr_core::rng::derive_seed;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, KChoice};
use crate::error::{BenchError, Result};
use crate::trial::{run_indexed_trial, TrialRecord};

pub const CSV_HEADER: &str =
    "N,K,alpha,beta,snr_db,trials,nmse_median,nmse_mean,blocking_s,tuning_s,total_s,monolithic_s,speedup";

/// Seed index of the discarded warm-up trial at each sweep point.
const WARMUP_STREAM: u64 = u64::MAX;

#[derive(Clone, Debug, PartialEq)]
pub enum SweepVariable {
    N(Vec<usize>),
    K(Vec<usize>),
}

/// Aggregate over the trials of one sweep point. Metrics are `None` when the
/// point failed (see `error`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub snr_db: Option<f64>,
    pub trials: usize,
    pub nmse_median: Option<f64>,
    pub nmse_mean: Option<f64>,
    pub blocking_s: Option<f64>,
    pub tuning_s: Option<f64>,
    pub total_s: Option<f64>,
    pub monolithic_s: Option<f64>,
    pub speedup: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let v: Vec<f64> = values.into_iter().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}

impl SweepRow {
    pub fn from_trials(cfg: &ExperimentConfig, records: &[TrialRecord]) -> Self {
        let nmse: Vec<f64> = records.iter().map(|r| r.nmse).collect();
        let optional_mean = |f: fn(&TrialRecord) -> Option<f64>| {
            let v: Vec<f64> = records.iter().filter_map(f).collect();
            if v.len() == records.len() {
                mean(v)
            } else {
                None
            }
        };
        SweepRow {
            n: cfg.n,
            k: records.first().map(|r| r.k),
            alpha: cfg.alpha,
            beta: cfg.beta,
            snr_db: cfg.snr_db,
            trials: records.len(),
            nmse_median: median(&nmse),
            nmse_mean: mean(nmse.iter().copied()),
            blocking_s: mean(records.iter().map(|r| r.blocking_s)),
            tuning_s: mean(records.iter().map(|r| r.tuning_s)),
            total_s: mean(records.iter().map(|r| r.total_s)),
            monolithic_s: optional_mean(|r| r.monolithic_s),
            speedup: optional_mean(|r| r.speedup),
            error: None,
        }
    }

    fn failed(cfg: &ExperimentConfig, k: Option<usize>, error: String) -> Self {
        SweepRow {
            n: cfg.n,
            k,
            alpha: cfg.alpha,
            beta: cfg.beta,
            snr_db: cfg.snr_db,
            trials: cfg.trials,
            nmse_median: None,
            nmse_mean: None,
            blocking_s: None,
            tuning_s: None,
            total_s: None,
            monolithic_s: None,
            speedup: None,
            error: Some(error),
        }
    }
}

/// Runs `cfg.trials` trials at one setting after one discarded warm-up
/// trial of the block pipeline. Trials run one at a time so their wall-clock
/// timings stay clean.
pub fn run_point(cfg: &ExperimentConfig, compare_monolithic: bool) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    run_indexed_trial(cfg, usize::MAX, derive_seed(cfg.seed, WARMUP_STREAM), false)?;
    (0..cfg.trials)
        .map(|t| run_indexed_trial(cfg, t, derive_seed(cfg.seed, t as u64), compare_monolithic))
        .collect()
}

/// Sweeps `N` or `K`. A failing point is recorded with its error and the
/// sweep moves on.
pub fn sweep(template: &ExperimentConfig, variable: &SweepVariable, compare_monolithic: bool) -> Result<SweepTable> {
    let points: Vec<ExperimentConfig> = match variable {
        SweepVariable::N(list) => list
            .iter()
            .map(|&n| ExperimentConfig { n, ..template.clone() })
            .collect(),
        SweepVariable::K(list) => list
            .iter()
            .map(|&k| ExperimentConfig {
                k: KChoice::Fixed(k),
                ..template.clone()
            })
            .collect(),
    };
    if points.is_empty() {
        return Err(BenchError::Config("sweep list is empty".into()));
    }
    let rows = points
        .iter()
        .map(|cfg| match run_point(cfg, compare_monolithic) {
            Ok(records) => SweepRow::from_trials(cfg, &records),
            Err(e) => SweepRow::failed(cfg, cfg.resolved_k().ok(), e.to_string()),
        })
        .collect();
    Ok(SweepTable { rows })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(BenchError::Config(format!("unknown format `{other}`"))),
        }
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn write_csv<W: Write>(table: &SweepTable, w: &mut W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.k.map(|k| k.to_string()).unwrap_or_default(),
            r.alpha,
            r.beta,
            r.snr_db.map_or_else(|| "inf".to_string(), |s| s.to_string()),
            r.trials,
            cell(r.nmse_median),
            cell(r.nmse_mean),
            cell(r.blocking_s),
            cell(r.tuning_s),
            cell(r.total_s),
            cell(r.monolithic_s),
            cell(r.speedup),
        )?;
    }
    Ok(())
}

pub fn write_report<W: Write>(table: &SweepTable, format: ReportFormat, w: &mut W) -> Result<()> {
    match format {
        ReportFormat::Csv => write_csv(table, w),
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut *w, table)?;
            writeln!(w)?;
            Ok(())
        }
    }
}

pub fn emit_report(table: &SweepTable, format: ReportFormat, path: &Path) -> Result<()> {
    if table.rows.is_empty() {
        return Err(BenchError::Config("refusing to write an empty table".into()));
    }
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_report(table, format, &mut file)?;
    file.flush()?;
    Ok(())
}

pub fn read_json_report(path: &Path) -> Result<SweepTable> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> SweepRow {
        SweepRow {
            n: 256,
            k: Some(4),
            alpha: 6.0,
            beta: 20.0,
            snr_db: Some(30.0),
            trials: 10,
            nmse_median: Some(1.5e-4),
            nmse_mean: Some(2e-4),
            blocking_s: Some(0.01),
            tuning_s: Some(0.001),
            total_s: Some(0.011),
            monolithic_s: None,
            speedup: None,
            error: None,
        }
    }

    #[test]
    fn single_row_csv_has_two_lines() {
        let mut buf = Vec::new();
        write_csv(&SweepTable { rows: vec![row()] }, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("256,4,6,20,30,10,1.5e-4,"));
        assert!(lines[1].ends_with(",,"));
    }

    #[test]
    fn json_roundtrip_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        let mut failed = row();
        failed.error = Some("boom".into());
        failed.nmse_median = None;
        let table = SweepTable {
            rows: vec![row(), failed],
        };
        emit_report(&table, ReportFormat::Json, &path).unwrap();
        assert_eq!(read_json_report(&path).unwrap(), table);
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let table = SweepTable { rows: vec![row()] };
        let err = emit_report(&table, ReportFormat::Csv, Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(matches!(err, BenchError::Io(_)));
    }

    #[test]
    fn empty_sweep_is_rejected() {
        let err = sweep(&ExperimentConfig::default(), &SweepVariable::N(vec![]), false).unwrap_err();
        assert!(matches!(err, BenchError::Config(_)));
    }

    #[test]
    fn median_of_even_count() {
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
