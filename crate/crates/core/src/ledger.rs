//! Run-scoped mapping from cluster keys to surrogates.
//!
//! The first assignment for a key wins, so every mention of an entity gets
//! the same replacement. Entries keep insertion order, which the engine makes
//! equal to first-occurrence order.

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gazetteer::Gazetteer;
use crate::model::{EntityCluster, EntityKind, EntitySpan, SurrogateRecord};
use crate::policy::{DefaultAction, Policy, StrategyKind, StrategyParams};
use crate::strategies::{
    apply_mask, dp_laplace, format_like, mirror_case, parse_number, perturb_gaussian,
    surrogate_person_name, surrogate_weekday, DeterministicStream,
};

/// Redraws allowed when a surrogate collides with another cluster's.
pub const MAX_REDRAWS: u64 = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SurrogateValue {
    Name(SurrogateRecord),
    Text { value: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub cluster_key: String,
    pub kind: EntityKind,
    pub original_representative: String,
    pub surrogate: SurrogateValue,
    pub strategy: StrategyKind,
    pub params: StrategyParams,
    pub draw_count: u64,
}

impl LedgerEntry {
    /// Replacement text for one mention of this entry's cluster.
    pub fn render(&self, span: &EntitySpan) -> Result<String> {
        if !span.kind.compatible(&self.kind) {
            return Err(Error::Internal(format!(
                "span of kind {} rendered with entry {} ({})",
                span.kind, self.cluster_key, self.kind
            )));
        }
        match &self.surrogate {
            SurrogateValue::Name(name) => {
                if span.token_count() >= 2 {
                    Ok(name.full.clone())
                } else {
                    Ok(mirror_case(&span.surface, &name.given))
                }
            }
            SurrogateValue::Text { value } => match &self.params {
                StrategyParams::Mask(p) if span.surface != self.original_representative => {
                    apply_mask(&span.kind, &span.surface, p)
                }
                StrategyParams::Surrogate(_) if self.kind == EntityKind::WeekdayName => {
                    Ok(mirror_case(&span.surface, value))
                }
                _ => Ok(value.clone()),
            },
        }
    }

    pub fn text(&self) -> &str {
        match &self.surrogate {
            SurrogateValue::Name(n) => &n.full,
            SurrogateValue::Text { value } => value,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Ledger {
    entries: IndexMap<String, LedgerEntry>,
    used_names: HashSet<String>,
    dp_releases: HashMap<String, usize>,
}

impl Serialize for Ledger {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.entries.values())
    }
}

impl<'de> Deserialize<'de> for Ledger {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let entries = Vec::<LedgerEntry>::deserialize(deserializer)?;
        let mut ledger = Ledger::new();
        for entry in entries {
            if ledger.entries.contains_key(&entry.cluster_key) {
                return Err(serde::de::Error::custom(format!(
                    "duplicate cluster key {}",
                    entry.cluster_key
                )));
            }
            ledger.insert(entry);
        }
        Ok(ledger)
    }
}

impl PartialEq for Ledger {
    fn eq(&self, other: &Self) -> bool {
        self.entries.len() == other.entries.len()
            && self.entries.values().eq(other.entries.values())
    }
}

impl Ledger {
    pub fn new() -> Self {
        Ledger::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, cluster_key: &str) -> Option<&LedgerEntry> {
        self.entries.get(cluster_key)
    }

    pub fn entries(&self) -> impl Iterator<Item = &LedgerEntry> {
        self.entries.values()
    }

    /// Resolves the policy rule for the cluster's kind and assigns through it.
    /// Returns `None` when the cluster passes through unchanged.
    pub fn assign(
        &mut self,
        cluster: &EntityCluster,
        policy: &Policy,
        g: &Gazetteer,
    ) -> Result<Option<&LedgerEntry>> {
        match policy.resolve(Some(&cluster.kind), None) {
            Some(rule) => match rule.params {
                StrategyParams::Pass | StrategyParams::Scan => Ok(None),
                ref params => self.assign_with(cluster, params, policy.seed, g).map(Some),
            },
            None => match policy.default_action {
                DefaultAction::PassThrough => Ok(None),
                DefaultAction::Reject => Err(Error::policy_gap(&cluster.kind)),
            },
        }
    }

    /// Assigns with explicit strategy parameters. An existing entry for the
    /// cluster key is returned unchanged.
    pub fn assign_with(
        &mut self,
        cluster: &EntityCluster,
        params: &StrategyParams,
        seed: u64,
        g: &Gazetteer,
    ) -> Result<&LedgerEntry> {
        if self.entries.contains_key(&cluster.cluster_key) {
            return Ok(&self.entries[&cluster.cluster_key]);
        }
        let rep = cluster.representative();
        let mut stream = DeterministicStream::new(seed, &cluster.cluster_key);
        let mut draw_count = 1;
        let surrogate = match params {
            StrategyParams::Mask(p) => SurrogateValue::Text {
                value: apply_mask(&rep.kind, &rep.surface, p)?,
            },
            StrategyParams::Gaussian(p) => {
                let v = perturb_gaussian(parse_number(&rep.surface)?, p.sigma, &mut stream)?;
                SurrogateValue::Text {
                    value: format_like(&rep.surface, v),
                }
            }
            StrategyParams::Laplace(p) => {
                let v = dp_laplace(parse_number(&rep.surface)?, p.epsilon, p.sensitivity, &mut stream)?;
                SurrogateValue::Text {
                    value: format_like(&rep.surface, v),
                }
            }
            StrategyParams::Surrogate(p) if cluster.kind.is_name() => {
                let mut name = surrogate_person_name(cluster, g, p, &mut stream)?;
                while self.used_names.contains(&name.full.to_lowercase()) {
                    if draw_count > MAX_REDRAWS {
                        log::warn!(
                            "surrogate '{}' reused after {MAX_REDRAWS} redraws for {}",
                            name.full,
                            cluster.cluster_key
                        );
                        break;
                    }
                    name = surrogate_person_name(cluster, g, p, &mut stream)?;
                    draw_count += 1;
                }
                self.used_names.insert(name.full.to_lowercase());
                SurrogateValue::Name(name)
            }
            StrategyParams::Surrogate(_) if cluster.kind == EntityKind::WeekdayName => {
                SurrogateValue::Text {
                    value: surrogate_weekday(&rep.surface, &mut stream)?,
                }
            }
            StrategyParams::Surrogate(_) => {
                return Err(Error::InvalidParams(format!(
                    "no surrogate generator for {}",
                    cluster.kind
                )))
            }
            StrategyParams::Pass | StrategyParams::Scan => {
                return Err(Error::Internal(format!(
                    "{} is not an assignable strategy",
                    params.kind().as_str()
                )))
            }
        };
        let entry = LedgerEntry {
            cluster_key: cluster.cluster_key.clone(),
            kind: cluster.kind.clone(),
            original_representative: rep.surface.clone(),
            surrogate,
            strategy: params.kind(),
            params: params.clone(),
            draw_count,
        };
        Ok(self.insert(entry))
    }

    fn insert(&mut self, entry: LedgerEntry) -> &LedgerEntry {
        if let SurrogateValue::Name(n) = &entry.surrogate {
            self.used_names.insert(n.full.to_lowercase());
        }
        let key = entry.cluster_key.clone();
        self.entries.entry(key).or_insert(entry)
    }

    /// Records a differentially private release of `column`. Budgets are not
    /// composed; a repeated release only logs a warning. Returns whether the
    /// column had been released before.
    pub fn note_dp_release(&mut self, column: &str) -> bool {
        let count = self.dp_releases.entry(column.to_string()).or_insert(0);
        *count += 1;
        if *count > 1 {
            log::warn!(
                "column '{column}' released {count} times under one policy; privacy budgets are not composed"
            );
        }
        *count > 1
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for entry in self.entries.values() {
            out.push_str(&serde_json::to_string(entry)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut ledger = Ledger::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry: LedgerEntry = serde_json::from_str(line).map_err(|e| Error::Parse {
                source_name: "ledger".into(),
                line: i + 1,
                message: e.to_string(),
            })?;
            if ledger.entries.contains_key(&entry.cluster_key) {
                return Err(Error::Parse {
                    source_name: "ledger".into(),
                    line: i + 1,
                    message: format!("duplicate cluster key {}", entry.cluster_key),
                });
            }
            ledger.insert(entry);
        }
        Ok(ledger)
    }

    /// Writes one JSON object per line; returns the number of entries.
    pub fn export(&self, path: &Path) -> Result<usize> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        for entry in self.entries.values() {
            serde_json::to_writer(&mut w, entry)?;
            w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(self.entries.len())
    }

    pub fn import(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut text = String::new();
        for line in BufReader::new(file).lines() {
            text.push_str(&line.map_err(|e| Error::io(path, e))?);
            text.push('\n');
        }
        Ledger::from_jsonl(&text).map_err(|e| e.at(path.display().to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{MaskParams, SurrogateParams};

    fn span(text: &str, start: usize, end: usize, kind: EntityKind) -> EntitySpan {
        EntitySpan::from_text(text, start, end, kind, 1.0).unwrap()
    }

    fn cluster_of(text: &str, kind: EntityKind) -> EntityCluster {
        EntityCluster::new(vec![span(text, 0, text.len(), kind)]).unwrap()
    }

    fn policy() -> Policy {
        Policy::new(42)
            .with_kind("person_name", StrategyParams::Surrogate(SurrogateParams::default()))
            .with_kind("given_name_only", StrategyParams::Surrogate(SurrogateParams::default()))
            .with_kind("phone_number", StrategyParams::Mask(MaskParams::default()))
    }

    #[test]
    fn first_assignment_wins() {
        let g = Gazetteer::bundled();
        let mut ledger = Ledger::new();
        let c = cluster_of("Homer Simpson", EntityKind::PersonName);
        let first = ledger.assign(&c, &policy(), &g).unwrap().unwrap().clone();
        let again = ledger.assign(&c, &policy(), &g).unwrap().unwrap().clone();
        assert_eq!(first, again);
        assert_eq!(first.draw_count, 1);
        assert_eq!(ledger.len(), 1);
    }

    #[test]
    fn policy_gap_in_reject_mode() {
        let g = Gazetteer::bundled();
        let mut p = policy();
        p.default_action = DefaultAction::Reject;
        let c = cluster_of("a@b.org", EntityKind::EmailAddress);
        match Ledger::new().assign(&c, &p, &g) {
            Err(Error::PolicyGap { kind }) => assert_eq!(kind, "email_address"),
            other => panic!("{other:?}"),
        }
        p.default_action = DefaultAction::PassThrough;
        assert!(Ledger::new().assign(&c, &p, &g).unwrap().is_none());
    }

    #[test]
    fn render_full_and_given() {
        let text = "Beth Sanchez. Beth. BETH";
        let members = vec![
            span(text, 0, 12, EntityKind::PersonName),
            span(text, 14, 18, EntityKind::GivenNameOnly),
            span(text, 20, 24, EntityKind::GivenNameOnly),
        ];
        let c = EntityCluster::new(members.clone()).unwrap();
        let entry = LedgerEntry {
            cluster_key: c.cluster_key.clone(),
            kind: EntityKind::PersonName,
            original_representative: "Beth Sanchez".into(),
            surrogate: SurrogateValue::Name(SurrogateRecord {
                full: "Annie Edison".into(),
                given: "Annie".into(),
            }),
            strategy: StrategyKind::Surrogate,
            params: StrategyParams::Surrogate(SurrogateParams::default()),
            draw_count: 1,
        };
        assert_eq!(entry.render(&members[0]).unwrap(), "Annie Edison");
        assert_eq!(entry.render(&members[1]).unwrap(), "Annie");
        assert_eq!(entry.render(&members[2]).unwrap(), "ANNIE");
        let phone = span("555-555-1234", 0, 12, EntityKind::PhoneNumber);
        assert!(matches!(entry.render(&phone), Err(Error::Internal(_))));
    }

    #[test]
    fn render_masks_each_member_layout() {
        let g = Gazetteer::bundled();
        let text = "(555) 555-1234 or 555-555-1234";
        let c = EntityCluster::new(vec![
            span(text, 0, 14, EntityKind::PhoneNumber),
            span(text, 18, 30, EntityKind::PhoneNumber),
        ])
        .unwrap();
        let mut ledger = Ledger::new();
        let entry = ledger.assign(&c, &policy(), &g).unwrap().unwrap().clone();
        assert_eq!(entry.text(), "(555) XXX-XXXX");
        assert_eq!(entry.render(&c.members[0]).unwrap(), "(555) XXX-XXXX");
        assert_eq!(entry.render(&c.members[1]).unwrap(), "555-XXX-XXXX");
    }

    #[test]
    fn forced_collision_is_allowed_after_redraws() {
        // Both clusters can only become "Bart Flanders".
        let g = Gazetteer::parse(
            "name\tpart\tgender\trank\tera\n\
             homer\tfirst\tmale\t1\t-\nbart\tfirst\tmale\t2\t-\n\
             simpson\tlast\tunknown\t1\t-\nflanders\tlast\tunknown\t2\t-\n",
            "t",
        )
        .unwrap();
        let mut ledger = Ledger::new();
        let a = cluster_of("Homer Simpson", EntityKind::PersonName);
        let b = cluster_of("Homer Q Simpson", EntityKind::PersonName);
        let ea = ledger.assign(&a, &policy(), &g).unwrap().unwrap().clone();
        let eb = ledger.assign(&b, &policy(), &g).unwrap().unwrap().clone();
        assert_eq!(ea.text(), "Bart Flanders");
        assert_eq!(eb.text(), "Bart Flanders");
        assert_eq!(ea.draw_count, 1);
        assert_eq!(eb.draw_count, MAX_REDRAWS + 1);
    }

    #[test]
    fn distinct_people_rarely_collide() {
        let g = Gazetteer::bundled();
        let mut collisions = 0;
        for seed in 0..1000 {
            let mut ledger = Ledger::new();
            let p = Policy { seed, ..policy() };
            let a = ledger
                .assign(&cluster_of("Homer Simpson", EntityKind::PersonName), &p, &g)
                .unwrap()
                .unwrap()
                .clone();
            let b = ledger
                .assign(&cluster_of("Ned Flanders", EntityKind::PersonName), &p, &g)
                .unwrap()
                .unwrap()
                .clone();
            if a.text().eq_ignore_ascii_case(b.text()) {
                collisions += 1;
            }
        }
        assert_eq!(collisions, 0);
    }

    #[test]
    fn surrogate_for_unsupported_kind_errors() {
        let g = Gazetteer::bundled();
        let c = cluster_of("555-555-1234", EntityKind::PhoneNumber);
        let mut ledger = Ledger::new();
        let r = ledger.assign_with(&c, &StrategyParams::Surrogate(SurrogateParams::default()), 1, &g);
        assert!(matches!(r, Err(Error::InvalidParams(_))));
    }

    #[test]
    fn export_import_round_trip() {
        let g = Gazetteer::bundled();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ledger.jsonl");
        assert_eq!(Ledger::new().export(&path).unwrap(), 0);
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "");

        let mut ledger = Ledger::new();
        for text in ["Homer Simpson", "Beth Sanchez"] {
            ledger.assign(&cluster_of(text, EntityKind::PersonName), &policy(), &g).unwrap();
        }
        ledger
            .assign(&cluster_of("555.192.9277", EntityKind::PhoneNumber), &policy(), &g)
            .unwrap();
        assert_eq!(ledger.export(&path).unwrap(), 3);
        let back = Ledger::import(&path).unwrap();
        assert_eq!(back, ledger);
        assert_eq!(back.to_jsonl().unwrap(), ledger.to_jsonl().unwrap());
        let keys: Vec<&str> = back.entries().map(|e| e.cluster_key.as_str()).collect();
        assert_eq!(
            keys,
            ["person_name|homer simpson", "person_name|beth sanchez", "phone_number|5551929277"]
        );
    }

    #[test]
    fn repeated_dp_release_is_flagged() {
        let mut ledger = Ledger::new();
        assert!(!ledger.note_dp_release("amount"));
        assert!(ledger.note_dp_release("amount"));
        assert!(!ledger.note_dp_release("score"));
    }
}
