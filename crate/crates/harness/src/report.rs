//! CSV output of sweep rows and per-cell summaries.

use std::fs::{self, File};
use std::io::Write;
use std::path::Path;

use crate::error::{HarnessError, Result};
use crate::sweep::ResultRow;

pub const CSV_HEADER: &str = "trial,K,N,T,L1,L2,width,clustering_accuracy,avg_markov_error,avg_realization_error,kmeans_sse,min_sv_U,runtime_ms,error_flag";

pub const SUMMARY_HEADER: &str = "width,N,T,trials,failures,failure_rate,median_markov_error,q25_markov_error,q75_markov_error,median_accuracy";

/// 17 significant digits.
fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<File> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| HarnessError::io(parent, e))?;
    }
    File::create(path).map_err(|e| HarnessError::io(path, e))
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    if rows.is_empty() {
        return Err(HarnessError::EmptyRows);
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        w.write_record([
            r.trial.to_string(),
            r.clusters.to_string(),
            r.per_cluster.to_string(),
            r.len.to_string(),
            r.l1.to_string(),
            r.l2.to_string(),
            float(r.width),
            float(r.clustering_accuracy),
            float(r.avg_markov_error),
            float(r.avg_realization_error),
            float(r.kmeans_sse),
            float(r.min_sv_u),
            r.runtime_ms.to_string(),
            u8::from(r.failed()).to_string(),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::io("<csv>", e))?;
    Ok(())
}

/// Writes `rows` to `path`, creating parent directories.
pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(HarnessError::EmptyRows);
    }
    write_csv(rows, create(path)?)
}

/// Reads a file written by [`emit_csv`]. Error messages are not stored in
/// the CSV; failed rows come back with a generic message.
pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let header = reader.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(HarnessError::Config(format!(
            "{}: unexpected header {header}",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let bad = |field: &str| HarnessError::Config(format!("{}: bad {field} in {record:?}", path.display()));
        let int = |i: usize, name: &str| record[i].parse::<usize>().map_err(|_| bad(name));
        let num = |i: usize, name: &str| record[i].parse::<f64>().map_err(|_| bad(name));
        rows.push(ResultRow {
            trial: int(0, "trial")?,
            clusters: int(1, "K")?,
            per_cluster: int(2, "N")?,
            len: int(3, "T")?,
            l1: int(4, "L1")?,
            l2: int(5, "L2")?,
            width: num(6, "width")?,
            clustering_accuracy: num(7, "clustering_accuracy")?,
            avg_markov_error: num(8, "avg_markov_error")?,
            avg_realization_error: num(9, "avg_realization_error")?,
            kmeans_sse: num(10, "kmeans_sse")?,
            min_sv_u: num(11, "min_sv_U")?,
            runtime_ms: record[12].parse().map_err(|_| bad("runtime_ms"))?,
            error: (&record[13] != "0").then(|| "trial failed".to_string()),
        });
    }
    Ok(rows)
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let pos = q * (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
        }
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

/// Statistics of one `(width, N, T)` cell over its successful trials.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub width: f64,
    pub per_cluster: usize,
    pub len: usize,
    pub trials: usize,
    pub failures: usize,
    pub median_error: f64,
    pub q25_error: f64,
    pub q75_error: f64,
    pub median_accuracy: f64,
}

impl CellSummary {
    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }
}

/// Groups rows by cell in first-seen order. Failed trials are excluded from
/// the statistics and counted in `failures`.
pub fn summarize(rows: &[ResultRow]) -> Vec<CellSummary> {
    let mut keys: Vec<(u64, usize, usize)> = Vec::new();
    for r in rows {
        let key = (r.width.to_bits(), r.per_cluster, r.len);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.into_iter()
        .map(|(w, n, t)| {
            let cell: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| r.width.to_bits() == w && r.per_cluster == n && r.len == t)
                .collect();
            let ok: Vec<&&ResultRow> = cell.iter().filter(|r| !r.failed()).collect();
            let mut errors: Vec<f64> = ok.iter().map(|r| r.avg_markov_error).collect();
            errors.sort_by(f64::total_cmp);
            let accuracy: Vec<f64> = ok.iter().map(|r| r.clustering_accuracy).collect();
            CellSummary {
                width: f64::from_bits(w),
                per_cluster: n,
                len: t,
                trials: cell.len(),
                failures: cell.len() - ok.len(),
                median_error: quantile(&errors, 0.5),
                q25_error: quantile(&errors, 0.25),
                q75_error: quantile(&errors, 0.75),
                median_accuracy: median(&accuracy),
            }
        })
        .collect()
}

pub fn emit_summary(rows: &[ResultRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(HarnessError::EmptyRows);
    }
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(create(path)?);
    w.write_record(SUMMARY_HEADER.split(','))?;
    for s in summarize(rows) {
        w.write_record([
            float(s.width),
            s.per_cluster.to_string(),
            s.len.to_string(),
            s.trials.to_string(),
            s.failures.to_string(),
            float(s.failure_rate()),
            float(s.median_error),
            float(s.q25_error),
            float(s.q75_error),
            float(s.median_accuracy),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(trial: usize, error: f64) -> ResultRow {
        ResultRow {
            trial,
            clusters: 3,
            per_cluster: 4,
            len: 64,
            l1: 4,
            l2: 7,
            width: 0.0,
            clustering_accuracy: 1.0,
            avg_markov_error: error,
            avg_realization_error: 0.5,
            kmeans_sse: 0.25,
            min_sv_u: 7.0,
            runtime_ms: 3,
            error: None,
        }
    }

    #[test]
    fn header_is_exact() {
        let mut buf = Vec::new();
        write_csv(&[row(0, 0.1)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "trial,K,N,T,L1,L2,width,clustering_accuracy,avg_markov_error,avg_realization_error,kmeans_sse,min_sv_U,runtime_ms,error_flag"
        );
        assert_eq!(
            lines.next().unwrap(),
            "0,3,4,64,4,7,0.0000000000000000e0,1.0000000000000000e0,1.0000000000000001e-1,5.0000000000000000e-1,2.5000000000000000e-1,7.0000000000000000e0,3,0"
        );
    }

    #[test]
    fn empty_rows_are_refused() {
        assert!(matches!(write_csv(&[], Vec::new()), Err(HarnessError::EmptyRows)));
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            emit_csv(&[], &dir.path().join("x.csv")),
            Err(HarnessError::EmptyRows)
        ));
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("rows.csv");
        let mut failed = row(1, f64::NAN);
        failed.error = Some("boom".into());
        let rows = vec![row(0, 0.123456789012345678), failed];
        emit_csv(&rows, &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back[0], rows[0]);
        assert!(back[1].failed() && back[1].avg_markov_error.is_nan());
    }

    #[test]
    fn unwritable_path_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = emit_csv(&[row(0, 1.0)], &blocker.join("rows.csv")).unwrap_err();
        assert!(matches!(err, HarnessError::Io { .. }));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn summary_excludes_failures() {
        let mut rows: Vec<_> = (0..4).map(|i| row(i, i as f64)).collect();
        rows[3].error = Some("x".into());
        rows[3].avg_markov_error = f64::NAN;
        let s = summarize(&rows);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].failures, 1);
        assert_eq!(s[0].median_error, 1.0);
        assert_eq!(s[0].q25_error, 0.5);
        assert_eq!(s[0].q75_error, 1.5);
    }
}
