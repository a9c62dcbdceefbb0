//! Reads a result table written by the experiment runners and pivots it into
//! one aligned text table per experiment: sweep points down, architectures
//! across, mean latency in the cells.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use indexmap::IndexMap;
use thiserror::Error;

use crate::experiments::RESULT_COLUMNS;

#[derive(Debug, Error, PartialEq)]
pub enum ReportError {
    #[error("line {line}: {message}")]
    Format { line: u64, message: String },
}

/// One parsed data row of a result table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub experiment: String,
    pub arch: String,
    pub frs_count: usize,
    pub robots: usize,
    pub target_ms: Option<f64>,
    pub mean_ms: Option<f64>,
    pub p95_ms: Option<f64>,
    pub deadline_met_fraction: Option<f64>,
    pub samples: usize,
}

fn format_error(line: u64, message: impl Into<String>) -> ReportError {
    ReportError::Format {
        line,
        message: message.into(),
    }
}

fn column(name: &str) -> usize {
    RESULT_COLUMNS
        .iter()
        .position(|c| *c == name)
        .expect("known result column")
}

fn optional(field: &str, name: &str, line: u64) -> Result<Option<f64>, ReportError> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| format_error(line, format!("{name}: not a number: {field:?}")))
}

fn count(field: &str, name: &str, line: u64) -> Result<usize, ReportError> {
    field
        .parse()
        .map_err(|_| format_error(line, format!("{name}: not a count: {field:?}")))
}

/// Parses the data rows, skipping `#` metadata lines.
pub fn parse_results(text: &str) -> Result<Vec<ReportRow>, ReportError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| format_error(1, e.to_string()))?
        .clone();
    if header.is_empty() {
        return Ok(Vec::new());
    }
    if header.iter().ne(RESULT_COLUMNS.iter().copied()) {
        let line = header.position().map_or(1, |p| p.line());
        return Err(format_error(
            line,
            format!("unexpected header; expected {}", RESULT_COLUMNS.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            let message = match e.kind() {
                csv::ErrorKind::UnequalLengths {
                    len, expected_len, ..
                } => {
                    format!("expected {expected_len} fields, found {len}")
                }
                _ => e.to_string(),
            };
            format_error(line, message)
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let f = |name: &str| &record[column(name)];
        rows.push(ReportRow {
            experiment: f("experiment").to_owned(),
            arch: f("arch").to_owned(),
            frs_count: count(f("frs_count"), "frs_count", line)?,
            robots: count(f("robots"), "robots", line)?,
            target_ms: optional(f("target"), "target", line)?,
            mean_ms: optional(f("lat_mean_ms"), "lat_mean_ms", line)?,
            p95_ms: optional(f("lat_p95_ms"), "lat_p95_ms", line)?,
            deadline_met_fraction: optional(
                f("deadline_met_fraction"),
                "deadline_met_fraction",
                line,
            )?,
            samples: count(f("samples"), "samples", line)?,
        });
    }
    Ok(rows)
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |x| format!("{x:.2}"))
}

fn render_grid(out: &mut String, grid: &[Vec<String>]) {
    let widths: Vec<usize> = (0..grid[0].len())
        .map(|c| grid.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    for row in grid {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(s, w)| format!("{s:>w$}"))
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
}

/// Sweep axis of one experiment: the FRS count when it varies within an
/// architecture, otherwise the robot count.
fn axis(rows: &[&ReportRow]) -> &'static str {
    let mut per_arch: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for r in rows {
        per_arch.entry(&r.arch).or_default().push(r.frs_count);
    }
    let varies = per_arch.values().any(|v| v.iter().any(|x| *x != v[0]));
    if varies {
        "frs_count"
    } else {
        "robots"
    }
}

/// Aligned mean-latency tables, one per experiment in order of appearance.
pub fn render_report(text: &str) -> Result<String, ReportError> {
    let rows = parse_results(text)?;
    if rows.is_empty() {
        return Ok("no rows\n".to_owned());
    }
    let mut by_experiment: IndexMap<&str, Vec<&ReportRow>> = IndexMap::new();
    for r in &rows {
        by_experiment.entry(&r.experiment).or_default().push(r);
    }
    let mut out = String::new();
    for (i, (experiment, rows)) in by_experiment.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let axis = axis(rows);
        let key = |r: &ReportRow| {
            if axis == "frs_count" {
                r.frs_count
            } else {
                r.robots
            }
        };
        let mut archs: Vec<&str> = Vec::new();
        let mut points: Vec<usize> = Vec::new();
        for r in rows {
            if !archs.contains(&r.arch.as_str()) {
                archs.push(&r.arch);
            }
            if !points.contains(&key(r)) {
                points.push(key(r));
            }
        }
        points.sort_unstable();
        let _ = writeln!(out, "{experiment}: mean latency (ms) by {axis}");
        let mut grid = vec![std::iter::once(axis.to_owned())
            .chain(archs.iter().map(|a| (*a).to_owned()))
            .collect()];
        for p in &points {
            let mut line = vec![p.to_string()];
            for a in &archs {
                let r = rows.iter().find(|r| r.arch == *a && key(r) == *p);
                line.push(r.map_or_else(|| "-".to_owned(), |r| cell(r.mean_ms)));
            }
            grid.push(line);
        }
        render_grid(&mut out, &grid);
        if rows.iter().any(|r| r.deadline_met_fraction.is_some()) {
            let _ = writeln!(out, "{experiment}: deadline met fraction");
            let mut grid = vec![vec![
                "arch".to_owned(),
                "met".to_owned(),
                "p95_ms".to_owned(),
            ]];
            for r in rows {
                let met = r
                    .deadline_met_fraction
                    .map_or_else(|| "-".to_owned(), |f| format!("{f:.4}"));
                grid.push(vec![r.arch.clone(), met, cell(r.p95_ms)]);
            }
            render_grid(&mut out, &grid);
        }
    }
    Ok(out)
}
