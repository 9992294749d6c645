//! Document obfuscation: recognize, cluster, assign through the ledger, then
//! rewrite the text right to left over the original offsets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gazetteer::Gazetteer;
use crate::ledger::Ledger;
use crate::model::{EntitySpan, Replacement};
use crate::policy::Policy;
use crate::recognize::{Recognition, Recognizer};

pub use crate::metrics::information_entropy;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObfuscationResult {
    pub text: String,
    /// Sorted by start, in source coordinates.
    pub replacements: Vec<Replacement>,
    /// Covered PII still detectable in the output, outside inserted replacements.
    pub residual_scan: Vec<EntitySpan>,
    pub spans_found: usize,
    pub ledger: Ledger,
}

impl ObfuscationResult {
    /// Checks that every byte outside the replaced ranges is unchanged.
    pub fn preserves_untouched_text(&self, input: &str) -> bool {
        let mut out_pos = 0;
        let mut in_pos = 0;
        for r in &self.replacements {
            let keep = &input.as_bytes()[in_pos..r.start];
            if self.text.as_bytes().get(out_pos..out_pos + keep.len()) != Some(keep) {
                return false;
            }
            out_pos += keep.len() + r.replacement.len();
            in_pos = r.end;
        }
        self.text.as_bytes().get(out_pos..) == Some(&input.as_bytes()[in_pos..])
    }
}

/// What one text rewrite produced, without the ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct Rewrite {
    pub text: String,
    pub replacements: Vec<Replacement>,
    pub residual_scan: Vec<EntitySpan>,
    pub spans_found: usize,
}

/// Policy, gazetteer and a compiled recognizer, reusable across documents.
#[derive(Debug, Clone)]
pub struct Engine<'g> {
    policy: Policy,
    gazetteer: &'g Gazetteer,
    recognizer: Recognizer,
}

impl<'g> Engine<'g> {
    pub fn new(policy: Policy, gazetteer: &'g Gazetteer) -> Result<Self> {
        policy.validate()?;
        let recognizer = Recognizer::from_policy(&policy)?;
        Ok(Engine {
            policy,
            gazetteer,
            recognizer,
        })
    }

    pub fn policy(&self) -> &Policy {
        &self.policy
    }

    pub fn recognizer(&self) -> &Recognizer {
        &self.recognizer
    }

    pub fn recognize(&self, text: &str) -> Result<Recognition> {
        self.recognizer.recognize(text, self.gazetteer)
    }

    /// Obfuscates one document with a fresh ledger.
    pub fn obfuscate(&self, text: &str) -> Result<ObfuscationResult> {
        let mut ledger = Ledger::new();
        let rw = self.obfuscate_with(text, &mut ledger)?;
        Ok(ObfuscationResult {
            text: rw.text,
            replacements: rw.replacements,
            residual_scan: rw.residual_scan,
            spans_found: rw.spans_found,
            ledger,
        })
    }

    /// Obfuscates against an existing ledger, so entities already assigned
    /// keep their surrogate.
    pub fn obfuscate_with(&self, text: &str, ledger: &mut Ledger) -> Result<Rewrite> {
        let recognition = self.recognize(text)?;
        for cluster in &recognition.clusters {
            let first = cluster.representative();
            ledger
                .assign(cluster, &self.policy, self.gazetteer)
                .map_err(|e| e.at(format!("bytes {}..{}", first.start, first.end)))?;
        }
        self.rewrite(text, &recognition, ledger)
    }

    /// Rewrites `text` using entries already in the ledger. Clusters without
    /// an entry pass through.
    pub fn rewrite(&self, text: &str, recognition: &Recognition, ledger: &Ledger) -> Result<Rewrite> {
        let mut replacements = Vec::new();
        for cluster in &recognition.clusters {
            let Some(entry) = ledger.get(&cluster.cluster_key) else {
                continue;
            };
            for member in &cluster.members {
                let replacement = entry
                    .render(member)
                    .map_err(|e| e.at(format!("bytes {}..{}", member.start, member.end)))?;
                replacements.push(Replacement {
                    start: member.start,
                    end: member.end,
                    original: member.surface.clone(),
                    replacement,
                    kind: member.kind.clone(),
                    strategy: entry.strategy,
                    cluster_key: entry.cluster_key.clone(),
                });
            }
        }
        replacements.sort_by_key(|r| r.start);

        let mut out = text.to_string();
        for r in replacements.iter().rev() {
            out.replace_range(r.start..r.end, &r.replacement);
        }
        let residual_scan = self.residual_scan(&out, &replacements)?;
        Ok(Rewrite {
            text: out,
            replacements,
            residual_scan,
            spans_found: recognition.spans.len(),
        })
    }

    // Spans of policy-replaced kinds in the output that are not wholly inside
    // text we inserted.
    fn residual_scan(&self, output: &str, replacements: &[Replacement]) -> Result<Vec<EntitySpan>> {
        let mut inserted = Vec::with_capacity(replacements.len());
        let mut shift: isize = 0;
        for r in replacements {
            let start = (r.start as isize + shift) as usize;
            inserted.push((start, start + r.replacement.len()));
            shift += r.replacement.len() as isize - (r.end - r.start) as isize;
        }
        let found = self.recognize(output)?;
        Ok(found
            .spans
            .into_iter()
            .filter(|s| self.policy.replaces(&s.kind))
            .filter(|s| !inserted.iter().any(|&(a, b)| a <= s.start && s.end <= b))
            .collect())
    }

    /// Obfuscates independent documents in parallel, each with its own ledger.
    pub fn obfuscate_many(&self, texts: &[String], threads: usize) -> Result<Vec<ObfuscationResult>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| Error::Internal(e.to_string()))?;
        pool.install(|| texts.par_iter().map(|t| self.obfuscate(t)).collect())
    }
}

/// Obfuscates a single document under `policy`.
pub fn obfuscate_document(text: &str, policy: &Policy, g: &Gazetteer) -> Result<ObfuscationResult> {
    Engine::new(policy.clone(), g)?.obfuscate(text)
}
