//! Tables: loading with a data dictionary, obfuscation and table metrics.

mod dictionary;
mod io;
mod obfuscate;

pub use dictionary::{ColumnKind, ColumnSpec, DataDictionary, TableMetadata};
pub use io::{
    load_table, read_csv, read_jsonl, write_csv, write_jsonl, write_table, LoadOptions, LoadStats,
    TableData, TableFormat,
};
pub use obfuscate::{
    birth_decade, k_anonymity, obfuscate_table, obfuscate_table_with, table_utility, CellResidual,
    TableReport, TableResult,
};
