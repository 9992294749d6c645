//! Privacy metrics over a table, shared by the `metrics` command and the
//! service.

use serde::Serialize;
use tableguard_core::tabular::{k_anonymity, TableData};
use tableguard_core::{information_entropy, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrivacyMetrics {
    pub rows: usize,
    pub quasi_identifiers: Vec<String>,
    /// `None` when the dictionary declares no quasi-identifiers or the table
    /// is empty.
    pub k_anonymity: Option<usize>,
    pub entropy: Vec<ColumnEntropy>,
}

/// Base-2 entropy of a column's non-missing values; `None` if all missing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnEntropy {
    pub column: String,
    pub bits: Option<f64>,
}

pub fn column_entropy(table: &TableData, index: usize) -> Result<Option<f64>> {
    let values: Vec<&str> = table.rows.iter().filter_map(|r| r[index].as_deref()).collect();
    if values.is_empty() {
        return Ok(None);
    }
    information_entropy(&values).map(Some)
}

pub fn privacy_metrics(table: &TableData) -> Result<PrivacyMetrics> {
    let qi = table.dictionary.quasi_identifiers();
    let qi: Vec<&str> = qi.into_iter().filter(|c| table.columns.iter().any(|t| t == c)).collect();
    let k = if qi.is_empty() || table.rows.is_empty() {
        None
    } else {
        Some(k_anonymity(table, &qi)?)
    };
    let entropy = (0..table.columns.len())
        .map(|i| {
            Ok(ColumnEntropy {
                column: table.columns[i].clone(),
                bits: column_entropy(table, i)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(PrivacyMetrics {
        rows: table.rows.len(),
        quasi_identifiers: qi.into_iter().map(String::from).collect(),
        k_anonymity: k,
        entropy,
    })
}
