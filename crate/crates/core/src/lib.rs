//! Deterministic, policy-driven PII obfuscation for documents and tables.
//!
//! A [`Policy`] maps entity kinds and column names to strategies. Detected
//! entities are clustered so every mention of one entity receives the same
//! replacement, recorded in a [`Ledger`]. All randomness derives from the
//! policy seed and the entity, never from wall-clock or thread order.

pub mod engine;
pub mod error;
pub mod gazetteer;
pub mod ledger;
pub mod metrics;
pub mod model;
pub mod policy;
pub mod recognize;
pub mod strategies;
pub mod synth;
pub mod tabular;

pub use engine::{obfuscate_document, Engine, ObfuscationResult, Rewrite};
pub use error::{Error, Result};
pub use gazetteer::{Gazetteer, Gender, NamePart, NameRecord};
pub use ledger::{Ledger, LedgerEntry, SurrogateValue};
pub use metrics::{information_entropy, k_anonymity_rows, utility_report, UtilityReport};
pub use model::{EntityCluster, EntityKind, EntitySpan, IdSubtype, KindSelector, Replacement, SurrogateRecord};
pub use policy::{DefaultAction, Policy, Rule, Selector, StrategyKind, StrategyParams};
pub use recognize::{recognize, Recognition, Recognizer, RecognizerConfig};
pub use tabular::{k_anonymity, load_table, obfuscate_table, DataDictionary, LoadOptions, TableData};
