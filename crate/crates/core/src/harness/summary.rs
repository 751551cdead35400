//! Aggregation of result rows.

use std::fmt;

use crate::error::{CsmError, Result};
use crate::tracking::config::Algorithm;
use crate::tracking::weights::WeightScheme;
use crate::tracking::world::EpochMetrics;

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Targets observed, over rounds.
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

/// One algorithm (and weight scheme) across all rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSummary {
    pub algorithm: Algorithm,
    pub weight_scheme: Option<WeightScheme>,
    pub per_epoch: Vec<EpochStats>,
    pub mean_observed: f64,
    pub std_observed: f64,
    pub mean_objective: f64,
    pub connectivity_rate: f64,
    pub mean_deviation: f64,
    pub rows: usize,
}

impl SeriesSummary {
    pub fn label(&self) -> String {
        match self.weight_scheme {
            Some(s) => format!("{}/{}", self.algorithm, s),
            None => self.algorithm.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Summary {
    /// In order of first appearance.
    pub series: Vec<SeriesSummary>,
}

impl Summary {
    pub fn get(&self, algorithm: Algorithm) -> Option<&SeriesSummary> {
        self.series.iter().find(|s| s.algorithm == algorithm)
    }
}

pub fn summarize(rows: &[EpochMetrics]) -> Result<Summary> {
    if rows.is_empty() {
        return Err(CsmError::EmptyInput);
    }
    let mut keys: Vec<(Algorithm, Option<WeightScheme>)> = vec![];
    for m in rows {
        let k = (m.algorithm, m.weight_scheme);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    let series = keys
        .into_iter()
        .map(|(algorithm, weight_scheme)| {
            let mine: Vec<&EpochMetrics> = rows
                .iter()
                .filter(|m| m.algorithm == algorithm && m.weight_scheme == weight_scheme)
                .collect();
            let mut epochs: Vec<usize> = mine.iter().map(|m| m.epoch).collect();
            epochs.sort_unstable();
            epochs.dedup();
            let per_epoch = epochs
                .into_iter()
                .map(|epoch| {
                    let xs: Vec<f64> = mine
                        .iter()
                        .filter(|m| m.epoch == epoch)
                        .map(|m| m.observed as f64)
                        .collect();
                    let (mean, std) = mean_std(&xs);
                    EpochStats {
                        epoch,
                        mean,
                        std,
                        n: xs.len(),
                    }
                })
                .collect();
            let observed: Vec<f64> = mine.iter().map(|m| m.observed as f64).collect();
            let (mean_observed, std_observed) = mean_std(&observed);
            let n = mine.len() as f64;
            SeriesSummary {
                algorithm,
                weight_scheme,
                per_epoch,
                mean_observed,
                std_observed,
                mean_objective: mine.iter().map(|m| m.objective).sum::<f64>() / n,
                connectivity_rate: mine.iter().filter(|m| m.connected).count() as f64 / n,
                mean_deviation: mine.iter().map(|m| m.deviation_m).sum::<f64>() / n,
                rows: mine.len(),
            }
        })
        .collect();
    Ok(Summary { series })
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<18} {:>6} {:>10} {:>8} {:>10} {:>10} {:>12}",
            "series", "rows", "observed", "std", "objective", "connected", "deviation_m"
        )?;
        for s in &self.series {
            writeln!(
                f,
                "{:<18} {:>6} {:>10.2} {:>8.2} {:>10.2} {:>9.1}% {:>12.3}",
                s.label(),
                s.rows,
                s.mean_observed,
                s.std_observed,
                s.mean_objective,
                100.0 * s.connectivity_rate,
                s.mean_deviation
            )?;
        }
        Ok(())
    }
}
