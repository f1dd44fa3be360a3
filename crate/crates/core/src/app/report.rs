//! Result tables and summaries, written all-or-nothing.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use super::AppError;
use crate::chsh::{ChshResult, Curve, ParamId, ThresholdOutcome};

/// Output files staged in memory; nothing touches the disk until [`commit`].
///
/// [`commit`]: OutputSet::commit
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Writes every file to a temporary sibling first and renames them into
    /// place only after all writes succeeded.
    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>, AppError> {
        let io = |e: std::io::Error| AppError::Io(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        let mut staged = Vec::with_capacity(self.files.len());
        for (name, contents) in self.files {
            let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
            tmp.write_all(&contents).map_err(io)?;
            tmp.as_file().sync_all().map_err(io)?;
            staged.push((tmp, dir.join(name)));
        }
        let mut written = Vec::with_capacity(staged.len());
        for (tmp, path) in staged {
            tmp.persist(&path)
                .map_err(|e| AppError::Io(format!("{}: {}", path.display(), e.error)))?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn fmt_num(v: f64) -> String {
    format!("{v:.12}")
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>, AppError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| AppError::Io(e.to_string());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    w.into_inner().map_err(|e| AppError::Io(e.to_string()))
}

/// Fixed column contract: scenario id, every parameter (blank where the
/// measurement menu has no such parameter), the four correlators, S.
pub fn results_header() -> Vec<String> {
    let mut h = vec!["scenario_id".to_string()];
    h.extend(ParamId::ALL.iter().map(|p| p.name().to_string()));
    h.extend(["e11", "e12", "e21", "e22", "s"].map(String::from));
    h
}

pub fn results_row(id: &str, r: &ChshResult) -> Vec<String> {
    let mut row = vec![id.to_string()];
    row.extend(
        ParamId::ALL
            .iter()
            .map(|&p| r.scenario.get(p).ok().filter(|_| r.scenario.applies(p)).map_or(String::new(), fmt_num)),
    );
    row.extend(r.correlators.iter().map(|&e| fmt_num(e)));
    row.push(fmt_num(r.s_value));
    row
}

pub fn results_csv(rows: &[(String, &ChshResult)]) -> Result<Vec<u8>, AppError> {
    let body: Vec<_> = rows.iter().map(|(id, r)| results_row(id, r)).collect();
    csv_bytes(&results_header(), &body)
}

pub fn describe_result(out: &mut String, r: &ChshResult) {
    let _ = writeln!(out, "S = {:.4}  (S = {:.12})", r.s_value, r.s_value);
    let _ = writeln!(
        out,
        "violates the classical bound: {}",
        if r.violates() { "yes" } else { "no" }
    );
    let e = r.correlators;
    let _ = writeln!(out, "E11 = {:.10}  E12 = {:.10}", e[0], e[1]);
    let _ = writeln!(out, "E21 = {:.10}  E22 = {:.10}", e[2], e[3]);
    let _ = writeln!(out, "parameters:");
    for (id, v) in r.params() {
        let _ = writeln!(out, "  {:<12} {:.10}", id.name(), v);
    }
    if let Some(t) = &r.trace {
        let _ = writeln!(
            out,
            "optimizer: {} starts, {} converged, {} evaluations",
            t.starts, t.converged, t.evaluations
        );
    }
}

/// Scan and bisection probes of a threshold search.
pub fn threshold_csv(id: &str, param: ParamId, out: &ThresholdOutcome) -> Result<Vec<u8>, AppError> {
    let header = ["scenario_id", "stage", param.name(), "s"].map(String::from);
    let mut rows: Vec<Vec<String>> = out
        .scan()
        .iter()
        .map(|&(x, s)| vec![id.to_string(), "scan".into(), fmt_num(x), fmt_num(s)])
        .collect();
    if let ThresholdOutcome::Crossing { probes, .. } = out {
        rows.extend(
            probes
                .iter()
                .map(|&(x, s)| vec![id.to_string(), "bisection".into(), fmt_num(x), fmt_num(s)]),
        );
    }
    csv_bytes(&header, &rows)
}

/// One row per η_t, one S* column per curve.
pub fn fig2_wide_csv(curves: &[Curve]) -> Result<Vec<u8>, AppError> {
    let mut header = vec!["eta_t".to_string()];
    header.extend(curves.iter().map(|c| format!("s_{}", c.label)));
    let n = curves.first().map_or(0, |c| c.points.len());
    let rows: Vec<Vec<String>> = (0..n)
        .map(|k| {
            let mut row = vec![fmt_num(curves[0].points[k].eta_t)];
            row.extend(curves.iter().map(|c| fmt_num(c.points[k].result.s_value)));
            row
        })
        .collect();
    csv_bytes(&header, &rows)
}

/// Every optimum of the sweep under the standard result columns.
pub fn fig2_long_csv(curves: &[Curve]) -> Result<Vec<u8>, AppError> {
    let mut rows = Vec::new();
    for c in curves {
        for p in &c.points {
            rows.push(results_row(&c.label, &p.result));
        }
    }
    csv_bytes(&results_header(), &rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chsh::{evaluate, Scenario};

    #[test]
    fn results_columns_line_up() {
        let r = evaluate(&Scenario::counting_homodyne()).unwrap();
        let row = results_row("x", &r);
        assert_eq!(row.len(), results_header().len());
        // Bob counts on his first arm, so there is no ζ₁.
        assert_eq!(row[7], "");
        assert_eq!(row.last().unwrap(), &fmt_num(r.s_value));
    }

    #[test]
    fn commit_writes_everything() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputSet::default();
        out.add("a.txt", "alpha");
        out.add("b.txt", "beta");
        let written = out.commit(dir.path()).unwrap();
        assert_eq!(written.len(), 2);
        assert_eq!(std::fs::read_to_string(dir.path().join("b.txt")).unwrap(), "beta");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
    }
}
