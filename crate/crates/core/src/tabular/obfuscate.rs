use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::gazetteer::Gazetteer;
use crate::ledger::Ledger;
use crate::metrics::{k_anonymity_rows, utility_report, UtilityReport};
use crate::model::{cluster_key, EntityCluster, EntityKind, EntitySpan};
use crate::policy::{DefaultAction, Policy, StrategyParams};
use crate::recognize::Recognition;
use crate::strategies::{dp_laplace, fnv1a, format_like, parse_number, perturb_gaussian, DeterministicStream};
use crate::tabular::dictionary::ColumnKind;
use crate::tabular::io::TableData;

#[derive(Debug, Clone, PartialEq)]
enum Plan {
    Pass,
    /// Whole-cell entities assigned through the ledger.
    Cluster(EntityKind, StrategyParams),
    Numeric(StrategyParams),
    Scan,
}

/// A covered entity still detectable in an obfuscated free-text cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResidual {
    pub row: usize,
    pub column: String,
    pub span: EntitySpan,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub rows: usize,
    pub cells_changed: usize,
    pub ledger_entries: usize,
    pub residual_scan: Vec<CellResidual>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableResult {
    pub table: TableData,
    pub ledger: Ledger,
    pub report: TableReport,
}

fn plan_column(table: &TableData, policy: &Policy, column: &str) -> Result<Plan> {
    let kind = table.dictionary.column(column).map(|c| c.kind.clone());
    let entity = kind.as_ref().and_then(ColumnKind::entity);
    let Some(rule) = policy.resolve(entity, Some(column)) else {
        return match (kind, policy.default_action) {
            (Some(ColumnKind::FreeText), _) => Ok(Plan::Scan),
            (Some(ColumnKind::Entity(k)), DefaultAction::Reject) => {
                Err(Error::policy_gap(&k).at(format!("column '{column}'")))
            }
            _ => Ok(Plan::Pass),
        };
    };
    let kind = entity
        .cloned()
        .unwrap_or_else(|| EntityKind::Custom(column.to_string()));
    Ok(match &rule.params {
        StrategyParams::Pass => Plan::Pass,
        StrategyParams::Scan => Plan::Scan,
        p @ (StrategyParams::Gaussian(_) | StrategyParams::Laplace(_)) => Plan::Numeric(p.clone()),
        p @ (StrategyParams::Mask(_) | StrategyParams::Surrogate(_)) => Plan::Cluster(kind, p.clone()),
    })
}

/// Decade label such as `1970s` from `YYYY-MM-DD` or `MM/DD/YYYY`.
pub fn birth_decade(cell: &str) -> Option<String> {
    let year = if let Some((y, _)) = cell.split_once('-') {
        y
    } else {
        cell.rsplit('/').next().filter(|_| cell.contains('/'))?
    };
    if year.len() != 4 {
        return None;
    }
    let year: u32 = year.parse().ok()?;
    Some(format!("{}s", year - year % 10))
}

fn birth_column(table: &TableData) -> Option<usize> {
    if let Some(name) = &table.dictionary.birth_date_column {
        return table.columns.iter().position(|c| c == name);
    }
    table.columns.iter().position(|c| {
        let c = c.to_ascii_lowercase();
        c == "dob" || c.contains("birth")
    })
}

fn row_fingerprint(row: &[Option<String>]) -> u64 {
    let mut bytes = Vec::new();
    for cell in row {
        match cell {
            Some(v) => {
                bytes.push(1);
                bytes.extend_from_slice(v.as_bytes());
            }
            None => bytes.push(0),
        }
        bytes.push(0x1f);
    }
    fnv1a(&bytes)
}

fn cell_span(value: &str, kind: &EntityKind) -> Result<EntitySpan> {
    EntitySpan::from_text(value, 0, value.len(), kind.clone(), 1.0)
}

fn era_of<'a>(params: &StrategyParams, eras: &'a [Option<String>], row: usize) -> Option<&'a String> {
    match params {
        StrategyParams::Surrogate(p) if p.era_aware => eras[row].as_ref(),
        _ => None,
    }
}

fn cell_key(kind: &EntityKind, value: &str, era: Option<&String>) -> String {
    let key = cluster_key(kind, &crate::model::normalize(kind, value));
    match era {
        Some(era) => format!("{key}|{era}"),
        None => key,
    }
}

// A name in free text that equals the row's name-column value, or a lone
// given name equal to its first token, takes that cell's cluster key.
fn link_row_subjects(
    table: &TableData,
    plans: &[Plan],
    eras: &[Option<String>],
    scan_cols: &[usize],
    recognitions: &mut [Vec<Option<Recognition>>],
) {
    for (r, recs) in recognitions.iter_mut().enumerate() {
        let row = &table.rows[r];
        let subjects: Vec<(String, String, String, Option<&String>)> = plans
            .iter()
            .enumerate()
            .filter_map(|(c, plan)| match (plan, &row[c]) {
                (Plan::Cluster(kind, params), Some(v)) if kind.is_name() => {
                    let era = era_of(params, eras, r);
                    let normalized = crate::model::normalize(kind, v);
                    let first = normalized.split(' ').next().unwrap_or_default().to_string();
                    Some((normalized, first, cell_key(kind, v, era), era))
                }
                _ => None,
            })
            .collect();
        if subjects.is_empty() {
            continue;
        }
        for rec in recs.iter_mut().take(scan_cols.len()).flatten() {
            for cluster in rec.clusters.iter_mut().filter(|c| c.kind.is_name()) {
                let rep = &cluster.representative().normalized;
                let lone = cluster.members.iter().all(|m| m.token_count() == 1);
                let subject = subjects
                    .iter()
                    .find(|s| *rep == s.0 || (lone && *rep == s.1));
                if let Some((_, _, key, era)) = subject {
                    cluster.cluster_key = key.clone();
                    if let Some(era) = era {
                        cluster.attributes.insert("era".into(), (*era).clone());
                    }
                }
            }
        }
    }
}

/// Obfuscates a table under `policy` on the global thread pool.
pub fn obfuscate_table(table: &TableData, policy: &Policy, g: &Gazetteer) -> Result<TableResult> {
    obfuscate_table_with(table, policy, g, Ledger::new(), None)
}

/// Obfuscates a table, continuing from `ledger`. Output does not depend on
/// row order or thread count: entities are assigned in sorted key order and
/// numeric noise is keyed by row content.
pub fn obfuscate_table_with(
    table: &TableData,
    policy: &Policy,
    g: &Gazetteer,
    ledger: Ledger,
    threads: Option<usize>,
) -> Result<TableResult> {
    match threads {
        None => run(table, policy, g, ledger),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Internal(e.to_string()))?
            .install(|| run(table, policy, g, ledger)),
    }
}

fn run(table: &TableData, policy: &Policy, g: &Gazetteer, mut ledger: Ledger) -> Result<TableResult> {
    let engine = Engine::new(policy.clone(), g)?;
    let plans = table
        .columns
        .iter()
        .map(|c| plan_column(table, policy, c))
        .collect::<Result<Vec<_>>>()?;
    let eras: Vec<Option<String>> = match birth_column(table) {
        Some(i) => table
            .rows
            .iter()
            .map(|r| r[i].as_deref().and_then(birth_decade))
            .collect(),
        None => vec![None; table.rows.len()],
    };

    // Whole-cell clusters, canonical member = smallest surface per key.
    let mut cell_clusters: BTreeMap<String, (String, EntityKind, &StrategyParams, Option<&String>)> =
        BTreeMap::new();
    for (c, plan) in plans.iter().enumerate() {
        let Plan::Cluster(kind, params) = plan else {
            continue;
        };
        for (r, row) in table.rows.iter().enumerate() {
            let Some(value) = &row[c] else { continue };
            let era = era_of(params, &eras, r);
            let key = cell_key(kind, value, era);
            let slot = cell_clusters
                .entry(key)
                .or_insert_with(|| (value.clone(), kind.clone(), params, era));
            if *value < slot.0 {
                slot.0 = value.clone();
            }
        }
    }
    for (key, (value, kind, params, era)) in &cell_clusters {
        let mut cluster = EntityCluster::new(vec![cell_span(value, kind)?])?;
        cluster.cluster_key = key.clone();
        if let Some(era) = era {
            cluster.attributes.insert("era".into(), (*era).clone());
        }
        ledger
            .assign_with(&cluster, params, policy.seed, g)
            .map_err(|e| e.at(format!("cluster {key}")))?;
    }

    // Free-text cells: recognize in parallel, assign in key order, rewrite.
    let scan_cols: Vec<usize> = (0..plans.len()).filter(|&c| plans[c] == Plan::Scan).collect();
    let recognitions: Vec<Vec<Option<Recognition>>> = table
        .rows
        .par_iter()
        .enumerate()
        .map(|(r, row)| {
            scan_cols
                .iter()
                .map(|&c| {
                    row[c]
                        .as_deref()
                        .map(|v| engine.recognize(v))
                        .transpose()
                        .map_err(|e| e.at(format!("row {r}, column '{}'", table.columns[c])))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut recognitions = recognitions;
    link_row_subjects(table, &plans, &eras, &scan_cols, &mut recognitions);
    let mut text_clusters: BTreeMap<&str, &EntityCluster> = BTreeMap::new();
    for cluster in recognitions.iter().flatten().flatten().flat_map(|rec| &rec.clusters) {
        let slot = text_clusters.entry(&cluster.cluster_key).or_insert(cluster);
        if cluster.representative().surface < slot.representative().surface {
            *slot = cluster;
        }
    }
    for (key, cluster) in &text_clusters {
        ledger
            .assign(cluster, policy, g)
            .map_err(|e| e.at(format!("cluster {key}")))?;
    }

    let mut dp_columns = Vec::new();
    for (c, plan) in plans.iter().enumerate() {
        if let Plan::Numeric(StrategyParams::Laplace(_)) = plan {
            dp_columns.push(c);
        }
    }
    for &c in &dp_columns {
        ledger.note_dp_release(&table.columns[c]);
    }

    let ledger_ref = &ledger;
    let processed: Vec<(Vec<Option<String>>, Vec<CellResidual>)> = table
        .rows
        .par_iter()
        .zip(recognitions.par_iter())
        .enumerate()
        .map(|(r, (row, recs))| {
            let mut out = row.clone();
            let mut residual = Vec::new();
            let fingerprint = row_fingerprint(row);
            for (c, plan) in plans.iter().enumerate() {
                let Some(value) = &row[c] else { continue };
                let at = |e: Error| e.at(format!("row {r}, column '{}'", table.columns[c]));
                match plan {
                    Plan::Pass | Plan::Scan => {}
                    Plan::Cluster(kind, params) => {
                        let key = cell_key(kind, value, era_of(params, &eras, r));
                        let entry = ledger_ref
                            .get(&key)
                            .ok_or_else(|| Error::Internal(format!("no ledger entry for {key}")))?;
                        out[c] = Some(entry.render(&cell_span(value, kind)?).map_err(at)?);
                    }
                    Plan::Numeric(params) => {
                        let key = format!("numeric:{}:{fingerprint:016x}", table.columns[c]);
                        let mut stream = DeterministicStream::new(policy.seed, &key);
                        let x = parse_number(value).map_err(at)?;
                        let y = match params {
                            StrategyParams::Gaussian(p) => perturb_gaussian(x, p.sigma, &mut stream),
                            StrategyParams::Laplace(p) => dp_laplace(x, p.epsilon, p.sensitivity, &mut stream),
                            _ => unreachable!("numeric plans hold noise parameters"),
                        }
                        .map_err(at)?;
                        out[c] = Some(format_like(value, y));
                    }
                }
            }
            for (&c, rec) in scan_cols.iter().zip(recs) {
                let (Some(value), Some(rec)) = (&row[c], rec) else { continue };
                let rw = engine
                    .rewrite(value, rec, ledger_ref)
                    .map_err(|e| e.at(format!("row {r}, column '{}'", table.columns[c])))?;
                residual.extend(rw.residual_scan.into_iter().map(|span| CellResidual {
                    row: r,
                    column: table.columns[c].clone(),
                    span,
                }));
                out[c] = Some(rw.text);
            }
            Ok((out, residual))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(processed.len());
    let mut residual_scan = Vec::new();
    let mut cells_changed = 0;
    for ((out, res), orig) in processed.into_iter().zip(&table.rows) {
        cells_changed += out.iter().zip(orig).filter(|(a, b)| a != b).count();
        residual_scan.extend(res);
        rows.push(out);
    }
    let report = TableReport {
        rows: rows.len(),
        cells_changed,
        ledger_entries: ledger.len(),
        residual_scan,
    };
    Ok(TableResult {
        table: TableData {
            rows,
            ..table.clone()
        },
        ledger,
        report,
    })
}

/// Smallest equivalence class over the named quasi-identifier columns.
/// Missing cells form their own value.
pub fn k_anonymity(table: &TableData, quasi_identifiers: &[&str]) -> Result<usize> {
    if quasi_identifiers.is_empty() {
        return Err(Error::InvalidInput("k-anonymity needs at least one column".into()));
    }
    let idx = quasi_identifiers
        .iter()
        .map(|c| table.column_index(c))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<Option<&str>>> = table
        .rows
        .iter()
        .map(|r| idx.iter().map(|&i| r[i].as_deref()).collect())
        .collect();
    k_anonymity_rows(&rows)
}

/// Utility of an obfuscated table against its source, over columns present
/// in both.
pub fn table_utility(original: &TableData, obfuscated: &TableData) -> Result<UtilityReport> {
    if original.columns != obfuscated.columns {
        return Err(Error::InvalidInput("tables have different columns".into()));
    }
    let cols = |t: &TableData| -> Vec<(String, Vec<Option<String>>)> {
        (0..t.columns.len())
            .map(|i| (t.columns[i].clone(), t.column_values(i)))
            .collect()
    };
    utility_report(&cols(original), &cols(obfuscated))
}
