//! Positioning accuracy: Euclidean errors, mean / population standard deviation,
//! nearest-rank percentiles and empirical CDFs.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const REPORTED_PERCENTILES: [u32; 4] = [50, 80, 90, 95];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Test,
}

impl fmt::Display for SplitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitTag::Train => "train",
            SplitTag::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_samples: usize,
    pub mean_error_m: f64,
    pub std_error_m: f64,
    /// Keyed by percentile (50, 80, 90, 95).
    pub percentiles: BTreeMap<u32, f64>,
    /// Sorted `(error_m, cumulative_fraction)` pairs, one per sample.
    pub cdf: Vec<(f64, f64)>,
    pub split: SplitTag,
    pub descriptor: String,
}

/// Distance between each prediction and its label, in input order.
pub fn euclidean_errors(predictions: &[[f64; 2]], labels: &[[f64; 2]]) -> Result<Vec<f64>> {
    if predictions.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: labels.len(),
            actual: predictions.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::Data("no predictions to evaluate".into()));
    }
    Ok(predictions
        .iter()
        .zip(labels)
        .map(|(p, l)| (p[0] - l[0]).hypot(p[1] - l[1]))
        .collect())
}

/// Nearest-rank percentile of an ascending slice: element `ceil(p/100 * n)` (1-based).
pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil().clamp(1.0, n as f64) as usize;
    sorted[rank - 1]
}

pub fn summarize(errors: &[f64]) -> Result<EvalReport> {
    if errors.is_empty() {
        return Err(Error::Data("cannot summarize an empty error list".into()));
    }
    if let Some(bad) = errors.iter().find(|e| !e.is_finite() || **e < 0.0) {
        return Err(Error::Data(format!("invalid error value {bad}")));
    }
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let std = (errors.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let percentiles = REPORTED_PERCENTILES
        .iter()
        .map(|&p| (p, nearest_rank(&sorted, f64::from(p))))
        .collect();
    let len = sorted.len();
    let cdf = sorted
        .iter()
        .enumerate()
        .map(|(i, &e)| (e, if i + 1 == len { 1.0 } else { (i + 1) as f64 / n }))
        .collect();
    Ok(EvalReport {
        n_samples: errors.len(),
        mean_error_m: mean,
        std_error_m: std,
        percentiles,
        cdf,
        split: SplitTag::Test,
        descriptor: String::new(),
    })
}

impl EvalReport {
    pub fn tagged(mut self, split: SplitTag, descriptor: impl Into<String>) -> Self {
        self.split = split;
        self.descriptor = descriptor.into();
        self
    }

    /// Empirical CDF as `error_m,fraction` CSV with a header line.
    pub fn cdf_csv(&self) -> String {
        let mut out = String::from("error_m,fraction\n");
        for (e, f) in &self.cdf {
            let _ = writeln!(out, "{e},{f}");
        }
        out
    }

    pub fn percentile(&self, p: u32) -> Option<f64> {
        self.percentiles.get(&p).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub descriptor: String,
    pub split: SplitTag,
    pub n_samples: usize,
    pub mean_error_m: f64,
    pub std_error_m: f64,
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

/// Tabulates mean/std per report and marks the lowest mean (first one on ties).
pub fn compare(reports: &[EvalReport]) -> Result<ComparisonTable> {
    if reports.len() < 2 {
        return Err(Error::Data("comparison needs at least two reports".into()));
    }
    let best = reports
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.mean_error_m < reports[b].mean_error_m { i } else { b });
    Ok(ComparisonTable {
        rows: reports
            .iter()
            .enumerate()
            .map(|(i, r)| ComparisonRow {
                descriptor: r.descriptor.clone(),
                split: r.split,
                n_samples: r.n_samples,
                mean_error_m: r.mean_error_m,
                std_error_m: r.std_error_m,
                best: i == best,
            })
            .collect(),
    })
}

impl ComparisonTable {
    pub fn best(&self) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.best)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}

impl fmt::Display for ComparisonTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self
            .rows
            .iter()
            .map(|r| r.descriptor.len())
            .max()
            .unwrap_or(0)
            .max("config".len());
        writeln!(f, "  {:<w$}  {:>5}  {:>7}  {:>8}  {:>8}", "config", "split", "n", "mean_m", "std_m")?;
        for r in &self.rows {
            writeln!(
                f,
                "{} {:<w$}  {:>5}  {:>7}  {:>8.3}  {:>8.3}",
                if r.best { "*" } else { " " },
                r.descriptor,
                r.split.to_string(),
                r.n_samples,
                r.mean_error_m,
                r.std_error_m
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_four_five() {
        assert_eq!(euclidean_errors(&[[3.0, 4.0]], &[[0.0, 0.0]]).unwrap(), vec![5.0]);
        assert_eq!(euclidean_errors(&[[1.0, 2.0]], &[[1.0, 2.0]]).unwrap(), vec![0.0]);
        assert!(euclidean_errors(&[[1.0, 2.0]], &[]).is_err());
        let a = euclidean_errors(&[[3.0, 1.0], [-2.0, 7.5]], &[[0.5, 0.5], [1.0, 1.0]]).unwrap();
        let b = euclidean_errors(&[[13.0, -9.0], [8.0, -2.5]], &[[10.5, -9.5], [11.0, -9.0]]).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn summary_values() {
        assert_eq!(summarize(&[3.0, 4.0, 5.0]).unwrap().mean_error_m, 4.0);
        assert_eq!(summarize(&[2.0, 2.0, 2.0]).unwrap().std_error_m, 0.0);
        let r = summarize(&[0.0, 10.0]).unwrap();
        assert_eq!((r.mean_error_m, r.std_error_m), (5.0, 5.0));
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn percentiles_and_cdf() {
        let errors: Vec<f64> = (1..=10).rev().map(f64::from).collect();
        let r = summarize(&errors).unwrap();
        assert_eq!(r.percentile(50), Some(5.0));
        assert_eq!(r.percentile(80), Some(8.0));
        assert_eq!(r.percentile(95), Some(10.0));
        assert_eq!(r.cdf.first(), Some(&(1.0, 0.1)));
        assert_eq!(r.cdf.last(), Some(&(10.0, 1.0)));
        assert!(r.cdf_csv().starts_with("error_m,fraction\n1,0.1\n"));
    }

    #[test]
    fn comparison_marks_best() {
        let a = summarize(&[3.0]).unwrap().tagged(SplitTag::Test, "a");
        let b = summarize(&[2.0]).unwrap().tagged(SplitTag::Test, "b");
        let t = compare(&[a.clone(), b]).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.best().unwrap().descriptor, "b");
        let t = compare(&[a.clone(), a.clone()]).unwrap();
        assert!(t.rows[0].best && !t.rows[1].best);
        assert!(compare(&[a]).is_err());
        assert!(t.to_string().contains("* a"));
    }
}
