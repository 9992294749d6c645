//! Overlap resolution and rule-based coreference clustering.

use std::collections::HashMap;

use crate::model::{EntityCluster, EntityKind, EntitySpan};

/// Keeps a non-overlapping subset, preferring longer spans, then higher
/// confidence, then kind priority, then the leftmost span. Output is sorted.
pub fn resolve_overlaps(mut spans: Vec<EntitySpan>) -> Vec<EntitySpan> {
    spans.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then(b.confidence.total_cmp(&a.confidence))
            .then(a.kind.priority().cmp(&b.kind.priority()))
            .then(a.start.cmp(&b.start))
            .then_with(|| a.position_cmp(b))
    });
    let mut kept: Vec<EntitySpan> = Vec::with_capacity(spans.len());
    for s in spans {
        if kept.iter().all(|k| !k.overlaps(&s)) {
            kept.push(s);
        }
    }
    kept.sort_by(EntitySpan::position_cmp);
    kept
}

fn first_token(span: &EntitySpan) -> String {
    span.surface
        .split_whitespace()
        .next()
        .unwrap_or_default()
        .to_lowercase()
}

/// Groups finalized spans into clusters, ordered by first occurrence.
///
/// Full names with the same normalized form share a cluster. A lone given
/// name joins the nearest preceding full name whose first token matches it;
/// otherwise it clusters with identical lone given names. Every other kind
/// clusters by normalized value.
pub fn link_coreferences(_text: &str, spans: &[EntitySpan]) -> Vec<EntityCluster> {
    let mut groups: Vec<Vec<EntitySpan>> = Vec::new();
    let mut by_key: HashMap<(String, String), usize> = HashMap::new();
    // (first token, group) for every full-name mention seen so far.
    let mut full_names: Vec<(String, usize)> = Vec::new();

    for span in spans {
        let group_key = match &span.kind {
            EntityKind::GivenNameOnly => {
                let token = first_token(span);
                if let Some(&(_, group)) = full_names.iter().rev().find(|(t, _)| *t == token) {
                    groups[group].push(span.clone());
                    continue;
                }
                ("given".to_string(), span.normalized.clone())
            }
            EntityKind::PersonName => ("person".to_string(), span.normalized.clone()),
            other => (other.to_string(), span.normalized.clone()),
        };
        let group = *by_key.entry(group_key).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[group].push(span.clone());
        if span.kind == EntityKind::PersonName {
            full_names.push((first_token(span), group));
        }
    }

    groups
        .into_iter()
        .map(|members| EntityCluster::new(members).expect("groups are non-empty and kind-compatible"))
        .collect()
}
