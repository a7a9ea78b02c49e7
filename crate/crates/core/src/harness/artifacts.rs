use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::experiment::{ExperimentReport, StrategySummary};
use super::HarnessError;

fn io_err(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}

/// Write one JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), HarnessError> {
    let f = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = BufWriter::new(f);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| io_err(path, e))?;
        w.write_all(b"\n").map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let f = File::open(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| HarnessError::Parse {
            path: path.display().to_string(),
            line: i + 1,
            msg: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    r.deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| HarnessError::Parse {
                path: path.display().to_string(),
                line: i + 2,
                msg: e.to_string(),
            })
        })
        .collect()
}

/// File names used by [`write_report`].
pub const TASKS_FILE: &str = "tasks.jsonl";
pub const RUNS_FILE: &str = "runs.jsonl";
pub const RUNS_CSV: &str = "runs.csv";
pub const HISTORIES_FILE: &str = "histories.jsonl";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TRAINING_FILE: &str = "training.csv";
pub const VIOLATIONS_FILE: &str = "violations.txt";

/// Write every artifact of `report` into `dir`, returning the paths written.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: &str| {
        let p = dir.join(name);
        written.push(p.clone());
        p
    };
    write_jsonl(&put(TASKS_FILE), &report.tasks)?;
    if !report.runs.is_empty() {
        write_jsonl(&put(RUNS_FILE), &report.runs)?;
        write_csv(&put(RUNS_CSV), &report.runs)?;
    }
    if !report.histories.is_empty() {
        write_jsonl(&put(HISTORIES_FILE), &report.histories)?;
    }
    if !report.summaries.is_empty() {
        write_csv(&put(SUMMARY_FILE), &report.summaries)?;
    }
    if let Some(t) = &report.training {
        let p = put(TRAINING_FILE);
        fs::write(&p, t.to_csv()).map_err(|e| io_err(&p, e))?;
    }
    let p = put(VIOLATIONS_FILE);
    let text: String = report.violations.iter().map(|v| format!("{v}\n")).collect();
    fs::write(&p, text).map_err(|e| io_err(&p, e))?;
    Ok(written)
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{:.2}", 100.0 * v))
}

/// Fixed-width comparison table across strategies.
pub fn comparison_table(summaries: &[StrategySummary]) -> String {
    let mut s = format!(
        "{:<18} {:>6} {:>10} {:>7} {:>7} {:>7} {:>7} {:>8} {:>8} {:>8} {:>10} {:>10}\n",
        "strategy", "tasks", "surviving", "sem%", "gen%", "fe%", "exact%", "cov5%", "cov6%", "cov100%", "calls/step", "rej/step"
    );
    for r in summaries {
        s.push_str(&format!(
            "{:<18} {:>6} {:>10.2} {:>7.2} {:>7.2} {:>7.2} {:>7.2} {:>8} {:>8} {:>8} {:>10.2} {:>10.2}\n",
            r.strategy.as_str(),
            r.tasks - r.failures,
            r.mean_surviving,
            100.0 * r.semantics_rate,
            100.0 * r.generalization_rate,
            100.0 * r.fe_rate,
            100.0 * r.exact_rate,
            opt(r.cov_semantics),
            opt(r.cov_generalization),
            opt(r.cov_fe),
            r.calls_per_step,
            r.rejected_per_step,
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_experiment, Dsl, ExperimentConfig, HistoryRecord, RunRecord, Stage, TaskRecord};

    #[test]
    fn every_artifact_round_trips() {
        let mut cfg = ExperimentConfig::desk(Dsl::Karel);
        cfg.tasks = 2;
        cfg.pool.distractors = 10;
        cfg.heldout = 10;
        cfg.strategy.candidates = 10;
        cfg.fspace.iterations = 2;
        cfg.fspace.training_programs = 3;
        let report = run_experiment(&cfg, Stage::Full).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let written = write_report(&report, dir.path()).unwrap();
        assert!(written.iter().all(|p| p.exists()));
        let tasks: Vec<TaskRecord> = read_jsonl(&dir.path().join(TASKS_FILE)).unwrap();
        assert_eq!(tasks, report.tasks);
        let runs: Vec<RunRecord> = read_jsonl(&dir.path().join(RUNS_FILE)).unwrap();
        assert_eq!(runs, report.runs);
        let runs_csv: Vec<RunRecord> = read_csv(&dir.path().join(RUNS_CSV)).unwrap();
        assert_eq!(runs_csv.len(), report.runs.len());
        for (a, b) in runs_csv.iter().zip(&report.runs) {
            assert_eq!(a.metrics(), b.metrics());
            assert_eq!(a.predicted, b.predicted);
            assert_eq!(a.surviving, b.surviving);
        }
        let hist: Vec<HistoryRecord> = read_jsonl(&dir.path().join(HISTORIES_FILE)).unwrap();
        assert_eq!(hist, report.histories);
        let sums: Vec<StrategySummary> = read_csv(&dir.path().join(SUMMARY_FILE)).unwrap();
        assert_eq!(sums.len(), report.summaries.len());
        for (a, b) in sums.iter().zip(&report.summaries) {
            assert_eq!((a.strategy, a.fe, a.semantics), (b.strategy, b.fe, b.semantics));
            assert!((a.mean_surviving - b.mean_surviving).abs() < 1e-12);
        }
        assert!(comparison_table(&report.summaries).lines().count() == report.summaries.len() + 1);
    }

    #[test]
    fn malformed_lines_report_their_position() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.jsonl");
        fs::write(&p, "{\"task\":1}\nnot json\n").unwrap();
        match read_jsonl::<serde_json::Value>(&p) {
            Err(HarnessError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
