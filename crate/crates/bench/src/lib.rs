//! Shared inputs for the criterion benchmarks.

use tableguard_core::tabular::TableFormat;
use tableguard_core::{synth, Gazetteer, LoadOptions, Policy, TableData};

pub const FNOL: &str = include_str!("../../core/fixtures/fnol.txt");
const DEMO_POLICY: &str = include_str!("../../core/fixtures/demo_policy.json");

pub fn demo_policy() -> Policy {
    Policy::from_json(DEMO_POLICY).expect("bundled demo policy")
}

/// Synthetic table of `n` rows with the synthetic dictionary applied.
pub fn synthetic_table(n: usize, g: &Gazetteer) -> TableData {
    TableData::from_raw(
        synth::COLUMNS.iter().map(|c| c.to_string()).collect(),
        synth::rows(n, 7, g),
        Some(&synth::dictionary()),
        &LoadOptions::default(),
        TableFormat::Csv,
    )
    .expect("synthetic table")
}
