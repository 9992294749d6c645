//! Regular-expression detectors for structured PII.

use regex::Regex;

use crate::error::{Error, Result};
use crate::model::{EntityKind, EntitySpan, IdSubtype};
use crate::recognize::RecognizerConfig;

const PHONE: &str = r"\(\d{3}\) \d{3}-\d{4}|\d{3}\.\d{3}\.\d{4}|\d{3}-\d{3}-\d{4}";
const CARD: &str = r"\d{4} \d{4} \d{4} \d{4}|\d{4}-\d{4}-\d{4}-\d{4}|\d{16}";
const EMAIL: &str = r"[A-Za-z0-9._%+\-]+@[A-Za-z0-9\-]+(?:\.[A-Za-z0-9\-]+)*\.[A-Za-z]{2,}";
const NUMERIC_DATE: &str = r"\d{1,2}/\d{1,2}/\d{2,4}|\d{4}-\d{2}-\d{2}";
const MONTHS: [&str; 12] = [
    "January", "February", "March", "April", "May", "June", "July", "August", "September",
    "October", "November", "December",
];
const WEEKDAYS: [&str; 7] = [
    "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday",
];
const STREET_SUFFIXES: &str = "Street|St|Avenue|Ave|Road|Rd|Boulevard|Blvd|Lane|Ln|Drive|Dr|\
    Court|Ct|Way|Place|Pl|Terrace|Ter|Parkway|Pkwy|Highway|Hwy|Circle|Cir";

fn case_variants(words: &[&str], lowercase_too: bool) -> String {
    words
        .iter()
        .flat_map(|w| {
            let mut v = vec![w.to_string(), w.to_uppercase()];
            if lowercase_too {
                v.push(w.to_lowercase());
            }
            v
        })
        .collect::<Vec<_>>()
        .join("|")
}

fn compile(pattern: &str) -> Result<Regex> {
    Regex::new(pattern).map_err(|e| Error::InvalidParams(format!("bad pattern {pattern:?}: {e}")))
}

/// Compiled detectors for one [`RecognizerConfig`].
#[derive(Debug, Clone)]
pub struct PatternDetector {
    detectors: Vec<(EntityKind, Regex)>,
}

impl PatternDetector {
    pub fn new(config: &RecognizerConfig) -> Result<Self> {
        let month = format!(
            r"\b(?:{})(?: \d{{1,2}}(?:st|nd|rd|th)?)?(?:,? \d{{4}})?\b",
            case_variants(&MONTHS, false)
        );
        let weekday = format!(r"\b(?:{})\b", case_variants(&WEEKDAYS, true));
        let street = format!(r"\b\d{{1,6}}(?: [A-Z0-9][A-Za-z0-9'\-]*){{1,4}} (?:{STREET_SUFFIXES})\b");

        // Order matters only for identical spans of one family: the policy
        // number pattern is tried before the broader license pattern.
        let mut candidates = vec![
            (EntityKind::CreditCardNumber, CARD.to_string()),
            (EntityKind::PhoneNumber, PHONE.to_string()),
            (EntityKind::EmailAddress, EMAIL.to_string()),
            (
                EntityKind::AlphanumericId(IdSubtype::PolicyNumber),
                config.policy_number_pattern.clone(),
            ),
            (
                EntityKind::AlphanumericId(IdSubtype::DriversLicense),
                config.drivers_license_pattern.clone(),
            ),
            (EntityKind::StreetAddress, street),
            (EntityKind::DateExpression, NUMERIC_DATE.to_string()),
            (EntityKind::DateExpression, month),
            (EntityKind::WeekdayName, weekday),
        ];
        for custom in &config.custom_patterns {
            candidates.push((EntityKind::Custom(custom.label.clone()), custom.pattern.clone()));
        }
        let detectors = candidates
            .into_iter()
            .filter(|(kind, _)| config.is_enabled(kind))
            .map(|(kind, pat)| compile(&pat).map(|re| (kind, re)))
            .collect::<Result<_>>()?;
        Ok(PatternDetector { detectors })
    }

    pub fn detect(&self, text: &str) -> Vec<EntitySpan> {
        let bytes = text.as_bytes();
        let clear = |i: Option<&u8>| i.is_none_or(|b| !b.is_ascii_alphanumeric());
        let mut out: Vec<EntitySpan> = Vec::new();
        for (kind, re) in &self.detectors {
            for m in re.find_iter(text) {
                let (s, e) = (m.start(), m.end());
                if s == e {
                    continue;
                }
                let before = s.checked_sub(1).and_then(|i| bytes.get(i));
                if !clear(before) || !clear(bytes.get(e)) {
                    continue;
                }
                // Same range, same family: the earlier detector already claimed it.
                if out
                    .iter()
                    .any(|o| o.start == s && o.end == e && o.kind.family() == kind.family())
                {
                    continue;
                }
                out.push(EntitySpan {
                    start: s,
                    end: e,
                    kind: kind.clone(),
                    surface: m.as_str().to_string(),
                    normalized: crate::model::normalize(kind, m.as_str()),
                    confidence: 1.0,
                });
            }
        }
        out.sort_by(EntitySpan::position_cmp);
        out
    }
}

/// Runs the pattern detectors. Spans may overlap; see `resolve_overlaps`.
pub fn detect_pattern_entities(text: &str, config: &RecognizerConfig) -> Result<Vec<EntitySpan>> {
    Ok(PatternDetector::new(config)?.detect(text))
}
