use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::analysis::{aggregate, fit_optimizers, Aggregate, FitFilter, OptimizerFit};
use super::experiment::ExperimentRecord;
use super::spec::{ExperimentSpec, OutputFormat};
use crate::error::{Error, Result};

pub const CSV_SCHEMA_VERSION: u32 = 1;
pub const SUMMARY_SCHEMA_VERSION: u32 = 1;

const RUNS_HEADER: [&str; 11] = [
    "size",
    "optimizer",
    "seed",
    "delta_min",
    "epochs",
    "success",
    "termination",
    "runtime",
    "evaluations",
    "max_abs_y",
    "backend",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub csv_schema_version: u32,
    pub spec: ExperimentSpec,
    pub aggregates: Vec<Aggregate>,
    pub fits: Vec<OptimizerFit>,
    /// Full records, present only when traces are kept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<ExperimentRecord>>,
}

impl Summary {
    pub fn new(spec: &ExperimentSpec, records: &[ExperimentRecord]) -> Self {
        let aggregates = aggregate(records);
        let fits = fit_optimizers(&aggregates, FitFilter::default());
        Self {
            schema_version: SUMMARY_SCHEMA_VERSION,
            csv_schema_version: CSV_SCHEMA_VERSION,
            spec: spec.clone(),
            aggregates,
            fits,
            records: spec.output.keep_traces.then(|| records.to_vec()),
        }
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| Error::format(path, e))
}

fn write_rows<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| Error::format(path, e))?;
    for row in rows {
        let row: Vec<String> = row.into_iter().collect();
        w.write_record(&row).map_err(|e| Error::format(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes the requested result files into `dir` and returns their paths.
pub fn emit(
    spec: &ExperimentSpec,
    records: &[ExperimentRecord],
    dir: &Path,
    formats: &[OutputFormat],
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let summary = Summary::new(spec, records);
    let mut written = Vec::new();

    if formats.contains(&OutputFormat::Csv) {
        let path = dir.join("runs.csv");
        write_rows(
            &path,
            &RUNS_HEADER,
            records.iter().map(|r| {
                vec![
                    r.size.to_string(),
                    r.optimizer.clone(),
                    r.run.seed.to_string(),
                    r.run.delta_min.to_string(),
                    r.run.epochs.to_string(),
                    r.run.success.to_string(),
                    r.run.termination.to_string(),
                    r.runtime.to_string(),
                    r.run.evaluations.to_string(),
                    r.max_abs_y.map(|v| v.to_string()).unwrap_or_default(),
                    r.backend.as_str().to_string(),
                ]
            }),
        )?;
        written.push(path);

        let path = dir.join("delta_vs_n.csv");
        write_rows(
            &path,
            &["size", "optimizer", "seed", "delta_min"],
            records.iter().map(|r| {
                vec![
                    r.size.to_string(),
                    r.optimizer.clone(),
                    r.run.seed.to_string(),
                    r.run.delta_min.to_string(),
                ]
            }),
        )?;
        written.push(path);

        let path = dir.join("epochs_vs_n.csv");
        write_rows(
            &path,
            &["size", "optimizer", "mean_epochs", "fit_epochs"],
            summary.aggregates.iter().map(|a| {
                let fit = summary
                    .fits
                    .iter()
                    .find(|f| f.optimizer == a.optimizer)
                    .and_then(|f| f.fit.as_ref());
                vec![
                    a.size.to_string(),
                    a.optimizer.clone(),
                    a.mean_epochs.map(|v| v.to_string()).unwrap_or_default(),
                    fit.map(|f| f.predict(a.size as f64).to_string())
                        .unwrap_or_default(),
                ]
            }),
        )?;
        written.push(path);

        let path = dir.join("runtime_vs_n.csv");
        write_rows(
            &path,
            &["size", "optimizer", "seed", "runtime"],
            records.iter().map(|r| {
                vec![
                    r.size.to_string(),
                    r.optimizer.clone(),
                    r.run.seed.to_string(),
                    r.runtime.to_string(),
                ]
            }),
        )?;
        written.push(path);
    }

    if formats.contains(&OutputFormat::Json) {
        let path = dir.join("summary.json");
        let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::format(&path, e))?;
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }

    if formats.contains(&OutputFormat::Svg) {
        let path = dir.join("delta_vs_n.svg");
        fs::write(&path, render_svg(records)).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }

    Ok(written)
}

const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Scatter of `log10 δ_min` against system size, one color per optimizer.
pub fn render_svg(records: &[ExperimentRecord]) -> String {
    let (w, h, pad) = (640.0, 420.0, 60.0);
    let floor = -16.0;
    let sizes = records.iter().map(|r| r.size as f64);
    let x_min = sizes.clone().fold(f64::INFINITY, f64::min);
    let x_max = sizes.fold(f64::NEG_INFINITY, f64::max);
    let (x_min, x_max) = if x_min.is_finite() {
        (x_min - 1.0, x_max + 1.0)
    } else {
        (0.0, 1.0)
    };
    let y_of = |d: f64| d.max(1e-16).log10().clamp(floor, 1.0);
    let px = |x: f64| pad + (x - x_min) / (x_max - x_min) * (w - 2.0 * pad);
    let py = |y: f64| pad + (1.0 - y) / (1.0 - floor) * (h - 2.0 * pad);

    let mut labels: Vec<(usize, &str)> = records
        .iter()
        .map(|r| (r.optimizer_index, r.optimizer.as_str()))
        .collect();
    labels.sort();
    labels.dedup();

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{pad}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        h - pad,
        w - pad,
        h - pad
    );
    let _ = writeln!(
        s,
        r#"<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{}" stroke="black"/>"#,
        h - pad
    );
    for e in (floor as i32..=0).step_by(4) {
        let y = py(e as f64);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">1e{e}</text>"#,
            pad - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">N</text>"#,
        w / 2.0,
        h - pad / 3.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">delta_min</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (k, (idx, name)) in labels.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="{color}">{name}</text>"#,
            w - pad - 120.0,
            pad + 14.0 * k as f64
        );
        for r in records.iter().filter(|r| r.optimizer_index == *idx) {
            // Spread optimizers slightly so overlapping points stay visible.
            let jitter = (k as f64 - labels.len() as f64 / 2.0) * 0.15;
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}" fill-opacity="0.6"/>"#,
                px(r.size as f64 + jitter),
                py(y_of(r.run.delta_min))
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
