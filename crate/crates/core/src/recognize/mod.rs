//! Entity recognition: pattern and gazetteer detectors, overlap resolution
//! and coreference clustering behind a swappable backend.

mod coref;
mod names;
mod patterns;

use std::io::Write;
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gazetteer::Gazetteer;
use crate::model::{normalize, EntityCluster, EntityKind, EntitySpan, KindSelector};
use crate::policy::{Policy, RecognizerChoice};

pub use coref::{link_coreferences, resolve_overlaps};
pub use names::{detect_name_entities, FULL_NAME_CONFIDENCE, GIVEN_NAME_CONFIDENCE};
pub use patterns::{detect_pattern_entities, PatternDetector};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CustomPattern {
    pub label: String,
    pub pattern: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecognizerConfig {
    pub enabled_kinds: Vec<KindSelector>,
    pub confidence_threshold: f64,
    pub locale: String,
    pub policy_number_pattern: String,
    pub drivers_license_pattern: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub custom_patterns: Vec<CustomPattern>,
}

impl Default for RecognizerConfig {
    fn default() -> Self {
        RecognizerConfig {
            enabled_kinds: EntityKind::FAMILIES.iter().map(|f| KindSelector::new(*f)).collect(),
            confidence_threshold: 0.5,
            locale: "en-US".into(),
            policy_number_pattern: r"[A-Z]{2}\d{8}".into(),
            drivers_license_pattern: r"[A-Z]{1,4}\d{6,8}".into(),
            custom_patterns: Vec::new(),
        }
    }
}

impl RecognizerConfig {
    pub fn is_enabled(&self, kind: &EntityKind) -> bool {
        self.enabled_kinds.iter().any(|s| s.matches(kind))
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.confidence_threshold) {
            return Err(Error::InvalidParams(format!(
                "confidence_threshold must be in [0, 1], got {}",
                self.confidence_threshold
            )));
        }
        if self.locale != "en-US" {
            return Err(Error::InvalidParams(format!("unsupported locale '{}'", self.locale)));
        }
        for sel in &self.enabled_kinds {
            sel.validate()?;
        }
        let mut labels = std::collections::HashSet::new();
        for c in &self.custom_patterns {
            if c.label.trim().is_empty() || !labels.insert(c.label.as_str()) {
                return Err(Error::InvalidParams(format!(
                    "custom pattern labels must be non-empty and unique ('{}')",
                    c.label
                )));
            }
        }
        PatternDetector::new(self).map(|_| ())
    }
}

/// Finalized detections: sorted non-overlapping spans and their clusters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Recognition {
    pub spans: Vec<EntitySpan>,
    pub clusters: Vec<EntityCluster>,
}

#[derive(Debug, Clone)]
enum Backend {
    Builtin(PatternDetector),
    External(String),
}

#[derive(Serialize)]
struct ExternalRequest<'a> {
    text: &'a str,
    config: &'a RecognizerConfig,
}

// External recognizers may omit the normalized form.
#[derive(Deserialize)]
struct ExternalSpan {
    start: usize,
    end: usize,
    kind: EntityKind,
    surface: String,
    #[serde(default)]
    normalized: Option<String>,
    confidence: f64,
}

/// A configured recognizer. Construction compiles the detectors once.
#[derive(Debug, Clone)]
pub struct Recognizer {
    config: RecognizerConfig,
    backend: Backend,
}

impl Recognizer {
    pub fn builtin(config: RecognizerConfig) -> Result<Self> {
        let detector = PatternDetector::new(&config)?;
        Ok(Recognizer {
            config,
            backend: Backend::Builtin(detector),
        })
    }

    pub fn external(command: impl Into<String>, config: RecognizerConfig) -> Self {
        Recognizer {
            config,
            backend: Backend::External(command.into()),
        }
    }

    pub fn from_policy(policy: &Policy) -> Result<Self> {
        match &policy.recognizer {
            RecognizerChoice::Builtin => Recognizer::builtin(policy.detection.clone()),
            RecognizerChoice::External(cmd) => Ok(Recognizer::external(cmd.clone(), policy.detection.clone())),
        }
    }

    pub fn config(&self) -> &RecognizerConfig {
        &self.config
    }

    /// Raw detections before thresholding and overlap resolution.
    pub fn detect(&self, text: &str, g: &Gazetteer) -> Result<Vec<EntitySpan>> {
        match &self.backend {
            Backend::Builtin(patterns) => {
                let mut spans = patterns.detect(text);
                spans.extend(detect_name_entities(text, g, &self.config));
                Ok(spans)
            }
            Backend::External(cmd) => run_external(cmd, text, &self.config),
        }
    }

    /// detect, then threshold, resolve overlaps and link coreferences.
    pub fn recognize(&self, text: &str, g: &Gazetteer) -> Result<Recognition> {
        let threshold = self.config.confidence_threshold;
        let spans: Vec<EntitySpan> = self
            .detect(text, g)?
            .into_iter()
            .filter(|s| s.confidence >= threshold && self.config.is_enabled(&s.kind))
            .collect();
        let spans = resolve_overlaps(spans);
        let mut clusters = link_coreferences(text, &spans);
        for c in &mut clusters {
            annotate(c, g);
        }
        Ok(Recognition { spans, clusters })
    }
}

fn annotate(cluster: &mut EntityCluster, g: &Gazetteer) {
    if !cluster.kind.is_name() {
        return;
    }
    let first = cluster.representative().surface.split_whitespace().next().map(str::to_string);
    if let Some(record) = first.and_then(|t| g.lookup_first(&t)) {
        cluster.attributes.insert("gender".into(), record.gender.to_string());
        if let Some(era) = &record.era_bucket {
            cluster.attributes.insert("era".into(), era.clone());
        }
    }
}

fn run_external(cmd: &str, text: &str, config: &RecognizerConfig) -> Result<Vec<EntitySpan>> {
    let request = serde_json::to_vec(&ExternalRequest { text, config })?;
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(cmd)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::External(format!("spawning '{cmd}': {e}")))?;
    let mut stdin = child.stdin.take().expect("stdin is piped");
    let writer = std::thread::spawn(move || stdin.write_all(&request));
    let output = child
        .wait_with_output()
        .map_err(|e| Error::External(format!("waiting for '{cmd}': {e}")))?;
    // A recognizer may exit without reading stdin; that is not an error here.
    let _ = writer.join();
    if !output.status.success() {
        return Err(Error::External(format!(
            "'{cmd}' exited with {}: {}",
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        )));
    }
    let raw: Vec<ExternalSpan> = serde_json::from_slice(&output.stdout)
        .map_err(|e| Error::External(format!("'{cmd}' returned invalid JSON: {e}")))?;
    raw.into_iter()
        .map(|s| {
            let span = EntitySpan {
                normalized: s.normalized.unwrap_or_else(|| normalize(&s.kind, &s.surface)),
                start: s.start,
                end: s.end,
                kind: s.kind,
                surface: s.surface,
                confidence: s.confidence,
            };
            if !(0.0..=1.0).contains(&span.confidence) {
                return Err(Error::External(format!("confidence {} out of range", span.confidence)));
            }
            span.check(text).map_err(|e| Error::External(e.to_string()))?;
            Ok(span)
        })
        .collect()
}

/// Built-in recognition pipeline: pattern and name detection, threshold,
/// overlap resolution, coreference linking.
pub fn recognize(text: &str, g: &Gazetteer, config: &RecognizerConfig) -> Result<Recognition> {
    Recognizer::builtin(config.clone())?.recognize(text, g)
}
