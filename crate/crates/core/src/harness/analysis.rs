use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::experiment::ExperimentRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessRatio {
    pub size: usize,
    pub optimizer: String,
    pub runs: usize,
    pub successes: usize,
    pub ratio: f64,
}

/// Success ratio per (size, optimizer), in record order.
pub fn classify(records: &[ExperimentRecord]) -> Vec<SuccessRatio> {
    group(records)
        .into_iter()
        .map(|((size, _), rs)| {
            let successes = rs.iter().filter(|r| r.run.success).count();
            SuccessRatio {
                size,
                optimizer: rs[0].optimizer.clone(),
                runs: rs.len(),
                successes,
                ratio: successes as f64 / rs.len() as f64,
            }
        })
        .collect()
}

fn group(records: &[ExperimentRecord]) -> BTreeMap<(usize, usize), Vec<&ExperimentRecord>> {
    let mut groups: BTreeMap<(usize, usize), Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.size, r.optimizer_index))
            .or_default()
            .push(r);
    }
    groups
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub size: usize,
    pub optimizer_index: usize,
    pub optimizer: String,
    pub runs: usize,
    pub successes: usize,
    pub success_ratio: f64,
    /// Mean epochs over successful runs.
    pub mean_epochs: Option<f64>,
    pub median_delta_min: f64,
    pub mean_runtime: f64,
}

pub fn aggregate(records: &[ExperimentRecord]) -> Vec<Aggregate> {
    group(records)
        .into_iter()
        .map(|((size, optimizer_index), rs)| {
            let ok: Vec<_> = rs.iter().filter(|r| r.run.success).collect();
            let mut deltas: Vec<f64> = rs.iter().map(|r| r.run.delta_min).collect();
            deltas.sort_by(f64::total_cmp);
            let mid = deltas.len() / 2;
            let median = if deltas.len() % 2 == 1 {
                deltas[mid]
            } else {
                0.5 * (deltas[mid - 1] + deltas[mid])
            };
            Aggregate {
                size,
                optimizer_index,
                optimizer: rs[0].optimizer.clone(),
                runs: rs.len(),
                successes: ok.len(),
                success_ratio: ok.len() as f64 / rs.len() as f64,
                mean_epochs: (!ok.is_empty())
                    .then(|| ok.iter().map(|r| r.run.epochs as f64).sum::<f64>() / ok.len() as f64),
                median_delta_min: median,
                mean_runtime: rs.iter().map(|r| r.runtime).sum::<f64>() / rs.len() as f64,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitFilter {
    /// Use every point.
    None,
    /// Walking up in size, stop at the first point whose value exceeds
    /// `factor` times the monomial fitted to the points below it.
    Jump { factor: f64 },
}

impl Default for FitFilter {
    fn default() -> Self {
        Self::Jump { factor: 10.0 }
    }
}

/// `y ≈ prefactor · N^exponent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub prefactor: f64,
    pub exponent: f64,
    pub sizes: Vec<f64>,
    pub excluded: Vec<f64>,
    /// Root-mean-square residual in `ln y`.
    pub residual: f64,
}

impl FitResult {
    pub fn predict(&self, size: f64) -> f64 {
        self.prefactor * size.powf(self.exponent)
    }
}

fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let m = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln(), b + y.ln()));
    let (mx, my) = (sx / m, sy / m);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in points {
        let dx = x.ln() - mx;
        sxx += dx * dx;
        sxy += dx * (y.ln() - my);
    }
    let b = sxy / sxx;
    let ln_a = my - b * mx;
    let rss: f64 = points
        .iter()
        .map(|(x, y)| (y.ln() - ln_a - b * x.ln()).powi(2))
        .sum();
    (ln_a.exp(), b, (rss / m).sqrt())
}

/// Least-squares fit of `ln y = ln a + b ln N` over the points kept by
/// `filter`.
pub fn fit_scaling(sizes: &[f64], values: &[f64], filter: FitFilter) -> Result<FitResult> {
    if sizes.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: sizes.len(),
            actual: values.len(),
        });
    }
    let mut points: Vec<(f64, f64)> = sizes.iter().copied().zip(values.iter().copied()).collect();
    if let Some((x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::InvalidConfig(format!(
            "fit points must be positive, got ({x}, {y})"
        )));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut kept = points.len();
    if let FitFilter::Jump { factor } = filter {
        for i in 2..points.len() {
            let (a, b, _) = least_squares(&points[..i]);
            let (x, y) = points[i];
            if y > factor * a * x.powf(b) {
                kept = i;
                break;
            }
        }
    }
    let distinct = {
        let mut xs: Vec<f64> = points[..kept].iter().map(|p| p.0).collect();
        xs.dedup();
        xs.len()
    };
    if distinct < 2 {
        return Err(Error::InsufficientPoints(distinct));
    }
    let (prefactor, exponent, residual) = least_squares(&points[..kept]);
    Ok(FitResult {
        prefactor,
        exponent,
        sizes: points[..kept].iter().map(|p| p.0).collect(),
        excluded: points[kept..].iter().map(|p| p.0).collect(),
        residual,
    })
}

/// Smallest size the jump filter excludes, if any.
pub fn jump_size(fit: &FitResult) -> Option<f64> {
    fit.excluded.first().copied()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerFit {
    pub optimizer: String,
    pub fit: Option<FitResult>,
    pub error: Option<String>,
}

/// One scaling fit of mean epochs against size per optimizer.
pub fn fit_optimizers(aggregates: &[Aggregate], filter: FitFilter) -> Vec<OptimizerFit> {
    let mut by_opt: BTreeMap<usize, (String, Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for a in aggregates {
        let e = by_opt
            .entry(a.optimizer_index)
            .or_insert_with(|| (a.optimizer.clone(), vec![], vec![]));
        if let Some(m) = a.mean_epochs.filter(|m| *m > 0.0) {
            e.1.push(a.size as f64);
            e.2.push(m);
        }
    }
    by_opt
        .into_values()
        .map(|(optimizer, xs, ys)| match fit_scaling(&xs, &ys, filter) {
            Ok(fit) => OptimizerFit {
                optimizer,
                fit: Some(fit),
                error: None,
            },
            Err(e) => OptimizerFit {
                optimizer,
                fit: None,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

/// `(size, value sum, count)` keyed by the bit pattern of the size.
type SizeSums = BTreeMap<u64, (f64, f64, usize)>;

/// Fits read from CSV: either a runs file (`size`, `optimizer`, `epochs`,
/// `success` columns; successful runs are averaged) or a table with `size`
/// and `mean_epochs` columns and an optional `optimizer` column.
pub fn fits_from_csv(path: &Path, filter: FitFilter) -> Result<Vec<OptimizerFit>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::format(path, e))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::format(path, e))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let size_col = col("size").ok_or_else(|| Error::format(path, "missing 'size' column"))?;
    let opt_col = col("optimizer");
    let (value_col, success_col) = match (col("mean_epochs"), col("epochs")) {
        (Some(c), _) => (c, None),
        (None, Some(c)) => (c, col("success")),
        _ => {
            return Err(Error::format(
                path,
                "need an 'epochs' or 'mean_epochs' column",
            ))
        }
    };

    let mut series: Vec<(String, SizeSums)> = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::format(path, e))?;
        let field = |c: usize| row.get(c).unwrap_or("");
        let parse = |c: usize| -> Result<f64> {
            field(c).parse::<f64>().map_err(|_| {
                Error::format(path, format!("row {}: bad number '{}'", line + 2, field(c)))
            })
        };
        if let Some(c) = success_col {
            if field(c) != "true" {
                continue;
            }
        }
        let size = parse(size_col)?;
        let value = parse(value_col)?;
        let name = opt_col.map(|c| field(c).to_string()).unwrap_or_default();
        let idx = match series.iter().position(|(n, _)| *n == name) {
            Some(i) => i,
            None => {
                series.push((name, BTreeMap::new()));
                series.len() - 1
            }
        };
        let e = series[idx]
            .1
            .entry(size.to_bits())
            .or_insert((size, 0.0, 0));
        e.1 += value;
        e.2 += 1;
    }

    Ok(series
        .into_iter()
        .map(|(optimizer, points)| {
            let (xs, ys): (Vec<f64>, Vec<f64>) =
                points.values().map(|(x, s, c)| (*x, s / *c as f64)).unzip();
            match fit_scaling(&xs, &ys, filter) {
                Ok(fit) => OptimizerFit {
                    optimizer,
                    fit: Some(fit),
                    error: None,
                },
                Err(e) => OptimizerFit {
                    optimizer,
                    fit: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn synthetic(a: f64, b: f64, sizes: &[f64]) -> Vec<f64> {
        sizes.iter().map(|n| a * n.powf(b)).collect()
    }

    #[test]
    fn exact_monomial_is_recovered() {
        let sizes = [8.0, 12.0, 16.0, 20.0, 24.0];
        let fit = fit_scaling(&sizes, &synthetic(2.0, 2.1, &sizes), FitFilter::default()).unwrap();
        assert!((fit.prefactor - 2.0).abs() < 1e-9);
        assert!((fit.exponent - 2.1).abs() < 1e-9);
        assert!(fit.excluded.is_empty());
    }

    #[test]
    fn jump_and_everything_above_is_dropped() {
        let sizes = [8.0, 12.0, 16.0, 20.0, 24.0];
        let mut y = synthetic(2.0, 2.1, &sizes);
        y[3] *= 100.0;
        let fit = fit_scaling(&sizes, &y, FitFilter::default()).unwrap();
        assert_eq!(fit.excluded, vec![20.0, 24.0]);
        assert_eq!(jump_size(&fit), Some(20.0));
        assert!((fit.exponent - 2.1).abs() < 1e-9);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            fit_scaling(&[8.0], &[3.0], FitFilter::None),
            Err(Error::InsufficientPoints(1))
        ));
        assert!(fit_scaling(&[8.0, 8.0], &[3.0, 4.0], FitFilter::None).is_err());
    }

    #[test]
    fn rejects_non_positive_values() {
        assert!(fit_scaling(&[8.0, 10.0], &[0.0, 4.0], FitFilter::None).is_err());
    }

    proptest! {
        #[test]
        fn any_monomial_is_recovered(a in 0.1f64..100.0, b in 0.5f64..4.0) {
            let sizes = [4.0, 6.0, 8.0, 10.0, 14.0];
            let fit = fit_scaling(&sizes, &synthetic(a, b, &sizes), FitFilter::default()).unwrap();
            prop_assert!((fit.exponent - b).abs() < 1e-8);
            prop_assert!((fit.prefactor / a - 1.0).abs() < 1e-8);
        }
    }
}
