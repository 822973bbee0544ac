use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use newton_anderson::problems::slug;
use newton_anderson::IterationRecord;
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::experiment::{MethodResult, RunReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// One line of the summary file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub problem: String,
    pub algorithm: String,
    /// Iteration count, or `F` when the method did not converge.
    pub iterations: String,
    pub f_evals: usize,
    pub final_res: f64,
    pub lm_ls_pg: String,
}

impl SummaryRow {
    fn new(problem: &str, m: &MethodResult) -> Self {
        Self {
            problem: problem.to_string(),
            algorithm: m.method.as_str().to_string(),
            iterations: if m.converged {
                m.iterations.to_string()
            } else {
                "F".into()
            },
            f_evals: m.f_evals,
            final_res: m.final_res,
            lm_ls_pg: m.split_column(),
        }
    }

    fn csv_record(&self) -> [String; 6] {
        [
            self.problem.clone(),
            self.algorithm.clone(),
            self.iterations.clone(),
            self.f_evals.to_string(),
            fmt_float(self.final_res),
            self.lm_ls_pg.clone(),
        ]
    }
}

pub const SUMMARY_HEADER: [&str; 6] = ["problem", "algorithm", "iterations", "f_evals", "final_res", "lm_ls_pg"];
pub const HISTORY_HEADER: [&str; 9] = [
    "k",
    "res_norm",
    "step_norm",
    "gamma_raw",
    "lambda",
    "gamma_used",
    "theta",
    "step_kind",
    "ls_evals",
];

pub fn summary_rows(reports: &[RunReport]) -> Vec<SummaryRow> {
    reports
        .iter()
        .flat_map(|r| r.methods.iter().map(move |m| SummaryRow::new(&r.problem, m)))
        .collect()
}

fn history_record(r: &IterationRecord) -> [String; 9] {
    [
        r.k.to_string(),
        fmt_float(r.res_norm),
        fmt_float(r.step_norm),
        r.gamma_raw.map(fmt_float).unwrap_or_default(),
        fmt_float(r.lambda),
        fmt_float(r.gamma_used),
        fmt_float(r.theta),
        r.step_kind.as_str().to_string(),
        r.ls_evals.to_string(),
    ]
}

#[derive(Serialize)]
struct HistoryJson<'a> {
    problem: &'a str,
    algorithm: &'a str,
    records: &'a [IterationRecord],
    iterates: &'a Option<Vec<Vec<f64>>>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_csv<R, I, S>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    let csv_err = |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| HarnessError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Name of the per-method history file.
pub fn history_file_name(problem: &str, method: &MethodResult, format: Format) -> String {
    format!(
        "history_{}_{}.{}",
        slug(problem),
        method.method.as_str(),
        format.extension()
    )
}

/// Write `summary.<ext>` for all reports and one history file per
/// (problem, method) into `dir`. Returns the paths written, summary first.
pub fn emit_reports(reports: &[RunReport], format: Format, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();

    let summary = dir.join(format!("summary.{}", format.extension()));
    let rows = summary_rows(reports);
    match format {
        Format::Csv => write_csv(&summary, &SUMMARY_HEADER, rows.iter().map(SummaryRow::csv_record))?,
        Format::Json => write_json(&summary, &rows)?,
    }
    written.push(summary);

    for report in reports {
        for m in &report.methods {
            let path = dir.join(history_file_name(&report.problem, m, format));
            match format {
                Format::Csv => {
                    write_csv(&path, &HISTORY_HEADER, m.trace.iter().map(history_record))?;
                    if let Some(xs) = &m.iterates {
                        let ipath = path.with_file_name(format!(
                            "iterates_{}_{}.csv",
                            slug(&report.problem),
                            m.method.as_str()
                        ));
                        let header: Vec<String> = std::iter::once("k".to_string())
                            .chain((0..xs.first().map_or(0, Vec::len)).map(|i| format!("x{i}")))
                            .collect();
                        let header: Vec<&str> = header.iter().map(String::as_str).collect();
                        let rows = xs.iter().enumerate().map(|(k, x)| {
                            std::iter::once(k.to_string())
                                .chain(x.iter().map(|v| fmt_float(*v)))
                                .collect::<Vec<_>>()
                        });
                        write_csv(&ipath, &header, rows)?;
                        written.push(ipath);
                    }
                }
                Format::Json => write_json(
                    &path,
                    &HistoryJson {
                        problem: &report.problem,
                        algorithm: m.method.as_str(),
                        records: &m.trace,
                        iterates: &m.iterates,
                    },
                )?,
            }
            written.push(path);
        }
    }
    Ok(written)
}

pub fn emit_report(report: &RunReport, format: Format, dir: &Path) -> Result<Vec<PathBuf>> {
    emit_reports(std::slice::from_ref(report), format, dir)
}

/// Aligned text table, one group per problem, failed rows dashed out.
pub fn compare_table(reports: &[RunReport]) -> String {
    const HEAD: [&str; 5] = ["Algorithm", "Iterations", "f-evals", "||f(x)||", "LM/LS/PG"];
    let mut out = String::new();
    for report in reports {
        let rows: Vec<[String; 5]> = report
            .methods
            .iter()
            .map(|m| {
                if m.converged {
                    [
                        m.label.clone(),
                        m.iterations.to_string(),
                        m.f_evals.to_string(),
                        format!("{:.3e}", m.final_res),
                        m.split_column(),
                    ]
                } else {
                    [m.label.clone(), "F".into(), "-".into(), "-".into(), "-".into()]
                }
            })
            .collect();
        let mut widths = HEAD.map(|h| h.chars().count());
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| -> String {
            let mut s = String::new();
            for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
                let pad = w - cell.chars().count();
                if i == 0 {
                    s.push_str(cell);
                    s.push_str(&" ".repeat(pad));
                } else {
                    s.push_str("  ");
                    s.push_str(&" ".repeat(pad));
                    s.push_str(cell);
                }
            }
            s
        };
        let _ = writeln!(out, "{}", report.problem);
        let _ = writeln!(out, "{}", line(&HEAD.map(String::from)));
        for row in &rows {
            let _ = writeln!(out, "{}", line(row));
        }
        out.push('\n');
    }
    out
}
