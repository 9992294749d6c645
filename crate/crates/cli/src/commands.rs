//! The `obfuscate` and `metrics` subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use tableguard_core::tabular::{
    load_table, obfuscate_table_with, table_utility, write_csv, write_jsonl, TableFormat,
};
use tableguard_core::{DataDictionary, Engine, Error, Gazetteer, Ledger, LoadOptions, Policy, UtilityReport};

use crate::report::{privacy_metrics, PrivacyMetrics};
use crate::{exit_code, EXIT_USAGE};

/// A failed command: exit code plus message for standard error.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ObfuscateArgs {
    pub input: PathBuf,
    pub policy: PathBuf,
    pub dictionary: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub export_ledger: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    /// Document output as the full JSON result instead of plain text.
    pub json: bool,
}

/// What a command produced: bytes for standard output and a JSON summary
/// for standard error.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: Vec<u8>,
    pub summary: serde_json::Value,
}

enum InputKind {
    Document,
    Table,
}

fn input_kind(path: &Path) -> Result<InputKind, CliError> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("txt") => Ok(InputKind::Document),
        Some("csv" | "jsonl" | "ndjson") => Ok(InputKind::Table),
        _ => Err(CliError::usage(format!(
            "{}: input must be .txt, .csv or .jsonl",
            path.display()
        ))),
    }
}

fn write_output(path: Option<&Path>, bytes: Vec<u8>) -> Result<Vec<u8>, CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, &bytes).map_err(|e| Error::io(p, e))?;
            Ok(Vec::new())
        }
        None => Ok(bytes),
    }
}

fn export(ledger: &Ledger, path: Option<&Path>) -> Result<Option<usize>, CliError> {
    path.map(|p| ledger.export(p)).transpose().map_err(CliError::from)
}

pub fn obfuscate(args: &ObfuscateArgs, g: &Gazetteer) -> Result<Outcome, CliError> {
    let kind = input_kind(&args.input)?;
    if let (InputKind::Table, Some(out)) = (&kind, &args.output) {
        if TableFormat::from_path(out).ok() != Some(TableFormat::from_path(&args.input)?) {
            return Err(CliError::usage("table output must use the input's format"));
        }
    }
    let mut policy = Policy::load(&args.policy)?;
    if let Some(seed) = args.seed {
        policy.seed = seed;
    }
    match kind {
        InputKind::Document => {
            let text = std::fs::read_to_string(&args.input).map_err(|e| Error::io(&args.input, e))?;
            let engine = Engine::new(policy, g)?;
            let result = engine.obfuscate(&text).map_err(|e| e.at(args.input.display().to_string()))?;
            let exported = export(&result.ledger, args.export_ledger.as_deref())?;
            let summary = json!({
                "input": args.input,
                "kind": "document",
                "spans_found": result.spans_found,
                "replaced": result.replacements.len(),
                "residuals": result.residual_scan.len(),
                "ledger_entries": result.ledger.len(),
                "ledger_exported": exported,
            });
            let bytes = if args.json {
                let mut v = serde_json::to_vec_pretty(&result).map_err(Error::from)?;
                v.push(b'\n');
                v
            } else {
                result.text.into_bytes()
            };
            Ok(Outcome {
                stdout: write_output(args.output.as_deref(), bytes)?,
                summary,
            })
        }
        InputKind::Table => {
            let dictionary = args.dictionary.as_deref().map(DataDictionary::load).transpose()?;
            let table = load_table(&args.input, dictionary.as_ref(), &LoadOptions::default())?;
            let result = obfuscate_table_with(&table, &policy, g, Ledger::new(), args.threads)
                .map_err(|e| e.at(args.input.display().to_string()))?;
            let exported = export(&result.ledger, args.export_ledger.as_deref())?;
            let mut bytes = Vec::new();
            match table.format {
                TableFormat::Csv => write_csv(&result.table, &mut bytes)?,
                TableFormat::Jsonl => write_jsonl(&result.table, &mut bytes)?,
            }
            let summary = json!({
                "input": args.input,
                "kind": "table",
                "rows_read": table.stats.rows_read,
                "duplicates_removed": table.stats.duplicates_removed,
                "missing_values": table.stats.missing_values,
                "rows_written": result.table.rows.len(),
                "cells_changed": result.report.cells_changed,
                "residuals": result.report.residual_scan.len(),
                "ledger_entries": result.ledger.len(),
                "ledger_exported": exported,
            });
            Ok(Outcome {
                stdout: write_output(args.output.as_deref(), bytes)?,
                summary,
            })
        }
    }
}

#[derive(Debug, Clone)]
pub struct MetricsArgs {
    pub original: PathBuf,
    pub obfuscated: PathBuf,
    pub dictionary: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsReport {
    pub original: PrivacyMetrics,
    pub obfuscated: PrivacyMetrics,
    pub utility: UtilityReport,
}

/// Compares an original table with its obfuscated output. The original is
/// deduplicated as `obfuscate` does; the obfuscated file is read as is.
pub fn metrics(args: &MetricsArgs) -> Result<MetricsReport, CliError> {
    let dictionary = DataDictionary::load(&args.dictionary)?;
    let original = load_table(&args.original, Some(&dictionary), &LoadOptions::default())?;
    let obfuscated = load_table(&args.obfuscated, Some(&dictionary), &LoadOptions { dedup: false })?;
    if original.rows.len() != obfuscated.rows.len() {
        return Err(Error::InvalidInput(format!(
            "row count mismatch: {} original rows after deduplication, {} obfuscated",
            original.rows.len(),
            obfuscated.rows.len()
        ))
        .into());
    }
    Ok(MetricsReport {
        original: privacy_metrics(&original)?,
        obfuscated: privacy_metrics(&obfuscated)?,
        utility: table_utility(&original, &obfuscated)?,
    })
}

fn fmt_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

pub fn render_metrics(r: &MetricsReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "rows: {}", r.original.rows);
    let _ = writeln!(
        s,
        "k-anonymity over [{}]: original {}, obfuscated {}",
        r.original.quasi_identifiers.join(", "),
        fmt_opt(r.original.k_anonymity),
        fmt_opt(r.obfuscated.k_anonymity)
    );
    let _ = writeln!(s, "\n{:<24} {:>14} {:>14}", "column", "entropy orig", "entropy obf");
    for (a, b) in r.original.entropy.iter().zip(&r.obfuscated.entropy) {
        let bits = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(s, "{:<24} {:>14} {:>14}", a.column, bits(a.bits), bits(b.bits));
    }
    let _ = writeln!(
        s,
        "\n{:<24} {:>10} {:>10} {:>10} {:>10} {:>8}",
        "numeric column", "mean err", "std err", "min err", "max err", "trend"
    );
    for c in &r.utility.columns {
        let _ = writeln!(
            s,
            "{:<24} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>8.3}",
            c.column, c.mean_rel_error, c.std_rel_error, c.min_rel_error, c.max_rel_error, c.trend_agreement
        );
    }
    let _ = writeln!(
        s,
        "\ninformation loss: {:.3}% ({})",
        r.utility.information_loss_pct, r.utility.information_loss_method
    );
    let _ = writeln!(s, "excluded (non-numeric): {}", r.utility.excluded_columns.len());
    s
}
