//! Declarative obfuscation policy: which strategy applies to which entity kind
//! or table column, plus the run seed.
//!
//! ```json
//! {
//!   "seed": 42,
//!   "default_action": "pass_through",
//!   "rules": [
//!     { "selector": { "kind": "phone_number" }, "strategy": "mask" },
//!     { "selector": { "column": "amount*" }, "strategy": "laplace", "epsilon": 0.5 }
//!   ]
//! }
//! ```

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EntityKind, KindSelector};
use crate::recognize::RecognizerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Mask,
    Gaussian,
    Laplace,
    Surrogate,
    Scan,
    Pass,
}

impl StrategyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Mask => "mask",
            StrategyKind::Gaussian => "gaussian",
            StrategyKind::Laplace => "laplace",
            StrategyKind::Surrogate => "surrogate",
            StrategyKind::Scan => "scan",
            StrategyKind::Pass => "pass",
        }
    }
}

/// Mask parameters. With both windows unset, the kind's canonical mask is
/// used (phone keeps the area code, credit card keeps digits 1, 4 and
/// 13-16, email keeps the TLD, address masks the house number). Setting a
/// window switches to a generic keep-prefix/keep-suffix mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaskParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keep_prefix: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub keep_suffix: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask_char: Option<char>,
    pub preserve_separators: bool,
}

impl Default for MaskParams {
    fn default() -> Self {
        MaskParams {
            keep_prefix: None,
            keep_suffix: None,
            mask_char: None,
            preserve_separators: true,
        }
    }
}

impl MaskParams {
    pub fn window(keep_prefix: usize, keep_suffix: usize) -> Self {
        MaskParams {
            keep_prefix: Some(keep_prefix),
            keep_suffix: Some(keep_suffix),
            ..Default::default()
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.keep_prefix.is_none() && self.keep_suffix.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplaceParams {
    pub epsilon: f64,
    #[serde(default = "one")]
    pub sensitivity: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurrogateParams {
    pub rank_band_width: u32,
    pub era_aware: bool,
    pub gender_match: bool,
}

impl Default for SurrogateParams {
    fn default() -> Self {
        SurrogateParams {
            rank_band_width: 100,
            era_aware: true,
            gender_match: true,
        }
    }
}

/// Strategy plus its parameters, tagged by `strategy` in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum StrategyParams {
    Mask(MaskParams),
    Gaussian(GaussianParams),
    Laplace(LaplaceParams),
    Surrogate(SurrogateParams),
    /// Run the document recognizer over free-text cells.
    Scan,
    Pass,
}

impl StrategyParams {
    pub fn kind(&self) -> StrategyKind {
        match self {
            StrategyParams::Mask(_) => StrategyKind::Mask,
            StrategyParams::Gaussian(_) => StrategyKind::Gaussian,
            StrategyParams::Laplace(_) => StrategyKind::Laplace,
            StrategyParams::Surrogate(_) => StrategyKind::Surrogate,
            StrategyParams::Scan => StrategyKind::Scan,
            StrategyParams::Pass => StrategyKind::Pass,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StrategyParams::Mask(p) => {
                if let Some(c) = p.mask_char {
                    if !c.is_ascii() || c.is_ascii_control() {
                        return Err(Error::InvalidParams(format!(
                            "mask_char must be a printable ASCII character, got {c:?}"
                        )));
                    }
                }
                Ok(())
            }
            StrategyParams::Gaussian(p) => {
                if !(p.sigma.is_finite() && p.sigma >= 0.0) {
                    return Err(Error::InvalidParams(format!(
                        "sigma must be finite and >= 0, got {}",
                        p.sigma
                    )));
                }
                Ok(())
            }
            StrategyParams::Laplace(p) => {
                if !(p.epsilon.is_finite() && p.epsilon > 0.0) {
                    return Err(Error::InvalidParams(format!(
                        "epsilon must be > 0, got {}",
                        p.epsilon
                    )));
                }
                if !(p.sensitivity.is_finite() && p.sensitivity > 0.0) {
                    return Err(Error::InvalidParams(format!(
                        "sensitivity must be > 0, got {}",
                        p.sensitivity
                    )));
                }
                Ok(())
            }
            StrategyParams::Surrogate(_) | StrategyParams::Scan | StrategyParams::Pass => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    Kind(KindSelector),
    /// Column-name glob; `*` matches any run of characters, case-insensitive.
    Column(String),
}

impl Selector {
    fn matches(&self, kind: Option<&EntityKind>, column: Option<&str>) -> bool {
        match (self, kind, column) {
            (Selector::Kind(sel), Some(k), _) => sel.matches(k),
            (Selector::Column(pat), _, Some(col)) => glob_match(pat, col),
            _ => false,
        }
    }
}

fn glob_match(pattern: &str, name: &str) -> bool {
    let pattern = pattern.to_ascii_lowercase();
    let name = name.to_ascii_lowercase();
    let parts: Vec<&str> = pattern.split('*').collect();
    if parts.len() == 1 {
        return pattern == name;
    }
    let mut rest = name.as_str();
    let (first, last) = (parts[0], parts[parts.len() - 1]);
    if !rest.starts_with(first) {
        return false;
    }
    rest = &rest[first.len()..];
    for mid in &parts[1..parts.len() - 1] {
        match rest.find(mid) {
            Some(i) => rest = &rest[i + mid.len()..],
            None => return false,
        }
    }
    rest.len() >= last.len() && rest.ends_with(last)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub selector: Selector,
    #[serde(flatten)]
    pub params: StrategyParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DefaultAction {
    #[default]
    PassThrough,
    Reject,
}

/// Which recognizer backs detection: the built-in rules or a subprocess
/// speaking JSON on stdin/stdout (`external:<command>`).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum RecognizerChoice {
    #[default]
    Builtin,
    External(String),
}

impl From<RecognizerChoice> for String {
    fn from(c: RecognizerChoice) -> Self {
        match c {
            RecognizerChoice::Builtin => "builtin".into(),
            RecognizerChoice::External(cmd) => format!("external:{cmd}"),
        }
    }
}

impl TryFrom<String> for RecognizerChoice {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        if s == "builtin" {
            Ok(RecognizerChoice::Builtin)
        } else if let Some(cmd) = s.strip_prefix("external:") {
            if cmd.trim().is_empty() {
                return Err(Error::InvalidInput("external recognizer needs a command".into()));
            }
            Ok(RecognizerChoice::External(cmd.to_string()))
        } else {
            Err(Error::InvalidInput(format!("unknown recognizer '{s}'")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub rules: Vec<Rule>,
    pub seed: u64,
    #[serde(default)]
    pub default_action: DefaultAction,
    #[serde(default)]
    pub recognizer: RecognizerChoice,
    #[serde(default)]
    pub detection: RecognizerConfig,
}

impl Policy {
    pub fn new(seed: u64) -> Self {
        Policy {
            rules: Vec::new(),
            seed,
            default_action: DefaultAction::PassThrough,
            recognizer: RecognizerChoice::Builtin,
            detection: RecognizerConfig::default(),
        }
    }

    pub fn with_rule(mut self, selector: Selector, params: StrategyParams) -> Self {
        self.rules.push(Rule { selector, params });
        self
    }

    pub fn with_kind(self, kind: &str, params: StrategyParams) -> Self {
        self.with_rule(Selector::Kind(KindSelector::new(kind)), params)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let policy: Policy = serde_json::from_str(json)?;
        policy.validate()?;
        Ok(policy)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Policy::from_json(&text).map_err(|e| e.at(path.display().to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let mut labels = HashSet::new();
        for (i, rule) in self.rules.iter().enumerate() {
            rule.params.validate().map_err(|e| e.at(format!("rule {i}")))?;
            match &rule.selector {
                Selector::Kind(sel) => {
                    sel.validate().map_err(|e| e.at(format!("rule {i}")))?;
                    if let Some(label) = sel.0.strip_prefix("custom:") {
                        if !labels.insert(label.to_string()) {
                            return Err(Error::InvalidInput(format!(
                                "rule {i}: custom label '{label}' appears twice"
                            )));
                        }
                    }
                }
                Selector::Column(pat) if pat.is_empty() => {
                    return Err(Error::InvalidInput(format!("rule {i}: empty column pattern")));
                }
                Selector::Column(_) => {}
            }
        }
        self.detection.validate()
    }

    /// First rule matching the kind or the column, if any.
    pub fn resolve(&self, kind: Option<&EntityKind>, column: Option<&str>) -> Option<&Rule> {
        self.rules.iter().find(|r| r.selector.matches(kind, column))
    }

    /// Policy as JSON with the seed removed, for display to third parties.
    pub fn sanitized(&self) -> serde_json::Value {
        let mut value = serde_json::to_value(self).expect("policy serializes");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("seed");
        }
        value
    }

    /// Kinds that some rule replaces (everything except `pass`).
    pub fn replaces(&self, kind: &EntityKind) -> bool {
        matches!(
            self.resolve(Some(kind), None),
            Some(rule) if rule.params.kind() != StrategyKind::Pass
        )
    }
}
