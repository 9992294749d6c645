//! Privacy and utility measures: Shannon entropy, k-anonymity and a
//! summary-statistic utility report.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strategies::parse_number;

/// Base-2 Shannon entropy of the empirical distribution of `values`.
pub fn information_entropy<T: Eq + Hash>(values: &[T]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("entropy of an empty list".into()));
    }
    let mut counts: HashMap<&T, usize> = HashMap::new();
    for v in values {
        *counts.entry(v).or_insert(0) += 1;
    }
    let n = values.len() as f64;
    let mut counts: Vec<usize> = counts.into_values().collect();
    // Summation order fixed so the result does not depend on hash order.
    counts.sort_unstable();
    Ok(counts
        .into_iter()
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0))
}

/// Minimum equivalence-class size over the given rows of quasi-identifier
/// values.
pub fn k_anonymity_rows<T: Eq + Hash>(rows: &[Vec<T>]) -> Result<usize> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("k-anonymity of an empty table".into()));
    }
    if rows[0].is_empty() {
        return Err(Error::InvalidInput("k-anonymity needs at least one column".into()));
    }
    let mut classes: HashMap<&[T], usize> = HashMap::new();
    for row in rows {
        *classes.entry(row.as_slice()).or_insert(0) += 1;
    }
    Ok(classes.into_values().min().expect("non-empty"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnUtility {
    pub column: String,
    pub mean_rel_error: f64,
    pub std_rel_error: f64,
    pub min_rel_error: f64,
    pub max_rel_error: f64,
    /// Fraction of consecutive-row deltas whose sign is unchanged.
    pub trend_agreement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityReport {
    pub columns: Vec<ColumnUtility>,
    /// Mean relative error over all summary statistics, in percent. This is
    /// a proxy for downstream model degradation, not a measured F1 drop.
    pub information_loss_pct: f64,
    pub information_loss_method: String,
    pub excluded_columns: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
struct Summary {
    mean: f64,
    std: f64,
    min: f64,
    max: f64,
}

fn summarize(values: &[f64]) -> Summary {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Summary {
        mean,
        std: var.sqrt(),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

fn rel_error(original: f64, obfuscated: f64) -> f64 {
    let diff = (obfuscated - original).abs();
    if original == 0.0 {
        diff
    } else {
        diff / original.abs()
    }
}

/// Compares numeric columns of two aligned tables. Each column is a list of
/// optional cell strings, one per row. Columns where any non-null cell of
/// either side fails to parse as a number are excluded.
pub fn utility_report(
    original: &[(String, Vec<Option<String>>)],
    obfuscated: &[(String, Vec<Option<String>>)],
) -> Result<UtilityReport> {
    if original.len() != obfuscated.len() {
        return Err(Error::InvalidInput(format!(
            "column count mismatch: {} vs {}",
            original.len(),
            obfuscated.len()
        )));
    }
    let mut columns = Vec::new();
    let mut excluded = Vec::new();
    for ((name, a), (other, b)) in original.iter().zip(obfuscated) {
        if name != other {
            return Err(Error::InvalidInput(format!("column mismatch: {name} vs {other}")));
        }
        if a.len() != b.len() {
            return Err(Error::InvalidInput(format!(
                "row count mismatch in {name}: {} vs {}",
                a.len(),
                b.len()
            )));
        }
        let mut pairs = Vec::with_capacity(a.len());
        let mut numeric = true;
        for (x, y) in a.iter().zip(b) {
            match (x, y) {
                (Some(x), Some(y)) => match (parse_number(x), parse_number(y)) {
                    (Ok(x), Ok(y)) => pairs.push((x, y)),
                    _ => {
                        numeric = false;
                        break;
                    }
                },
                (None, None) => {}
                _ => {
                    numeric = false;
                    break;
                }
            }
        }
        if !numeric || pairs.is_empty() {
            excluded.push(name.clone());
            continue;
        }
        let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let (sa, sb) = (summarize(&xs), summarize(&ys));
        let deltas = pairs.len().saturating_sub(1);
        let agree = pairs
            .windows(2)
            .filter(|w| (w[1].0 - w[0].0).signum() == (w[1].1 - w[0].1).signum())
            .count();
        columns.push(ColumnUtility {
            column: name.clone(),
            mean_rel_error: rel_error(sa.mean, sb.mean),
            std_rel_error: rel_error(sa.std, sb.std),
            min_rel_error: rel_error(sa.min, sb.min),
            max_rel_error: rel_error(sa.max, sb.max),
            trend_agreement: if deltas == 0 { 1.0 } else { agree as f64 / deltas as f64 },
        });
    }
    let stats: Vec<f64> = columns
        .iter()
        .flat_map(|c| [c.mean_rel_error, c.std_rel_error, c.min_rel_error, c.max_rel_error])
        .collect();
    let information_loss_pct = if stats.is_empty() {
        0.0
    } else {
        100.0 * stats.iter().sum::<f64>() / stats.len() as f64
    };
    Ok(UtilityReport {
        columns,
        information_loss_pct,
        information_loss_method: "mean relative error of summary statistics (proxy)".into(),
        excluded_columns: excluded,
    })
}
