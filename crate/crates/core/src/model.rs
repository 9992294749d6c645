//! Shared domain types: entity kinds, detected spans, coreference clusters and
//! surrogate records. Everything here is plain data with no I/O.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Subtype tag carried by [`EntityKind::AlphanumericId`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IdSubtype {
    PolicyNumber,
    DriversLicense,
    Custom,
}

impl IdSubtype {
    fn as_str(self) -> &'static str {
        match self {
            IdSubtype::PolicyNumber => "policy_number",
            IdSubtype::DriversLicense => "drivers_license",
            IdSubtype::Custom => "custom",
        }
    }
}

/// The kind of PII a span represents.
///
/// Serialized as a compact string: `person_name`, `alphanumeric_id:policy_number`,
/// `custom:<label>` and so on. The part before `:` is the kind's family.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum EntityKind {
    PersonName,
    GivenNameOnly,
    StreetAddress,
    Location,
    PhoneNumber,
    CreditCardNumber,
    EmailAddress,
    AlphanumericId(IdSubtype),
    DateExpression,
    WeekdayName,
    NumericValue,
    Custom(String),
}

impl EntityKind {
    pub const FAMILIES: [&'static str; 12] = [
        "person_name",
        "given_name_only",
        "street_address",
        "location",
        "phone_number",
        "credit_card_number",
        "email_address",
        "alphanumeric_id",
        "date_expression",
        "weekday_name",
        "numeric_value",
        "custom",
    ];

    pub fn family(&self) -> &'static str {
        match self {
            EntityKind::PersonName => "person_name",
            EntityKind::GivenNameOnly => "given_name_only",
            EntityKind::StreetAddress => "street_address",
            EntityKind::Location => "location",
            EntityKind::PhoneNumber => "phone_number",
            EntityKind::CreditCardNumber => "credit_card_number",
            EntityKind::EmailAddress => "email_address",
            EntityKind::AlphanumericId(_) => "alphanumeric_id",
            EntityKind::DateExpression => "date_expression",
            EntityKind::WeekdayName => "weekday_name",
            EntityKind::NumericValue => "numeric_value",
            EntityKind::Custom(_) => "custom",
        }
    }

    /// Overlap tie-break rank; lower wins.
    pub fn priority(&self) -> u8 {
        match self {
            EntityKind::CreditCardNumber => 0,
            EntityKind::PhoneNumber => 1,
            EntityKind::EmailAddress => 2,
            EntityKind::AlphanumericId(_) => 3,
            EntityKind::PersonName => 4,
            EntityKind::StreetAddress => 5,
            EntityKind::DateExpression => 6,
            EntityKind::WeekdayName => 7,
            EntityKind::Location => 8,
            EntityKind::GivenNameOnly => 9,
            EntityKind::NumericValue => 10,
            EntityKind::Custom(_) => 11,
        }
    }

    pub fn is_name(&self) -> bool {
        matches!(self, EntityKind::PersonName | EntityKind::GivenNameOnly)
    }

    /// Whether two kinds may share a coreference cluster.
    pub fn compatible(&self, other: &EntityKind) -> bool {
        self == other || (self.is_name() && other.is_name())
    }

    fn tag_cmp(&self, other: &EntityKind) -> Ordering {
        self.priority()
            .cmp(&other.priority())
            .then_with(|| self.to_string().cmp(&other.to_string()))
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntityKind::AlphanumericId(sub) => write!(f, "alphanumeric_id:{}", sub.as_str()),
            EntityKind::Custom(label) => write!(f, "custom:{label}"),
            other => f.write_str(other.family()),
        }
    }
}

impl FromStr for EntityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (family, tag) = match s.split_once(':') {
            Some((f, t)) => (f, Some(t)),
            None => (s, None),
        };
        let kind = match (family, tag) {
            ("person_name", None) => EntityKind::PersonName,
            ("given_name_only", None) => EntityKind::GivenNameOnly,
            ("street_address", None) => EntityKind::StreetAddress,
            ("location", None) => EntityKind::Location,
            ("phone_number", None) => EntityKind::PhoneNumber,
            ("credit_card_number", None) => EntityKind::CreditCardNumber,
            ("email_address", None) => EntityKind::EmailAddress,
            ("alphanumeric_id", Some("policy_number")) => {
                EntityKind::AlphanumericId(IdSubtype::PolicyNumber)
            }
            ("alphanumeric_id", Some("drivers_license")) => {
                EntityKind::AlphanumericId(IdSubtype::DriversLicense)
            }
            ("alphanumeric_id", Some("custom") | None) => {
                EntityKind::AlphanumericId(IdSubtype::Custom)
            }
            ("date_expression", None) => EntityKind::DateExpression,
            ("weekday_name", None) => EntityKind::WeekdayName,
            ("numeric_value", None) => EntityKind::NumericValue,
            ("custom", Some(label)) if !label.trim().is_empty() => {
                EntityKind::Custom(label.to_string())
            }
            ("custom", _) => {
                return Err(Error::InvalidInput("custom kinds need a non-empty label".into()))
            }
            _ => return Err(Error::InvalidInput(format!("unknown entity kind '{s}'"))),
        };
        Ok(kind)
    }
}

impl From<EntityKind> for String {
    fn from(kind: EntityKind) -> Self {
        kind.to_string()
    }
}

impl TryFrom<String> for EntityKind {
    type Error = Error;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

/// A kind pattern: either a full kind (`alphanumeric_id:policy_number`) or a
/// bare family (`alphanumeric_id`) that matches every subtype.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KindSelector(pub String);

impl KindSelector {
    pub fn new(s: impl Into<String>) -> Self {
        KindSelector(s.into())
    }

    pub fn matches(&self, kind: &EntityKind) -> bool {
        let sel = self.0.as_str();
        if sel.contains(':') {
            sel == kind.to_string()
        } else {
            sel == kind.family()
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.0.contains(':') {
            self.0.parse::<EntityKind>().map(|_| ())
        } else if EntityKind::FAMILIES.contains(&self.0.as_str()) {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("unknown entity kind '{}'", self.0)))
        }
    }
}

impl From<&EntityKind> for KindSelector {
    fn from(kind: &EntityKind) -> Self {
        KindSelector(kind.to_string())
    }
}

/// One detected PII occurrence. Offsets are byte offsets into the source text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    pub kind: EntityKind,
    pub surface: String,
    pub normalized: String,
    pub confidence: f64,
}

impl EntitySpan {
    /// Builds a span from `text[start..end]`, computing the normalized form.
    pub fn from_text(
        text: &str,
        start: usize,
        end: usize,
        kind: EntityKind,
        confidence: f64,
    ) -> Result<Self, Error> {
        if start >= end || end > text.len() {
            return Err(Error::InvalidInput(format!(
                "span [{start}, {end}) out of bounds for text of length {}",
                text.len()
            )));
        }
        let surface = text
            .get(start..end)
            .ok_or_else(|| {
                Error::InvalidInput(format!("span [{start}, {end}) splits a UTF-8 character"))
            })?
            .to_string();
        let normalized = normalize(&kind, &surface);
        Ok(EntitySpan {
            start,
            end,
            kind,
            surface,
            normalized,
            confidence,
        })
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn overlaps(&self, other: &EntitySpan) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Checks the structural invariants against the source text.
    pub fn check(&self, text: &str) -> Result<(), Error> {
        if self.start >= self.end || self.end > text.len() {
            return Err(Error::InvalidInput(format!(
                "span [{}, {}) out of bounds",
                self.start, self.end
            )));
        }
        match text.get(self.start..self.end) {
            Some(s) if s == self.surface => Ok(()),
            _ => Err(Error::InvalidInput(format!(
                "span [{}, {}) surface does not match the source text",
                self.start, self.end
            ))),
        }
    }

    /// Total order by start, then end, then kind tag.
    pub fn position_cmp(&self, other: &EntitySpan) -> Ordering {
        self.start
            .cmp(&other.start)
            .then(self.end.cmp(&other.end))
            .then_with(|| self.kind.tag_cmp(&other.kind))
    }

    pub fn token_count(&self) -> usize {
        self.surface.split_whitespace().count()
    }
}

/// Canonical form used for clustering: digits only for numbers, case-folded
/// names, upper-cased identifiers.
pub fn normalize(kind: &EntityKind, surface: &str) -> String {
    match kind {
        EntityKind::PhoneNumber | EntityKind::CreditCardNumber => {
            surface.chars().filter(|c| c.is_ascii_digit()).collect()
        }
        EntityKind::AlphanumericId(_) => surface.trim().to_uppercase(),
        EntityKind::NumericValue => surface.trim().to_string(),
        EntityKind::EmailAddress => surface.trim().to_lowercase(),
        _ => surface
            .split_whitespace()
            .collect::<Vec<_>>()
            .join(" ")
            .to_lowercase(),
    }
}

/// Set of mentions that refer to one entity and share one surrogate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityCluster {
    pub cluster_key: String,
    pub kind: EntityKind,
    pub members: Vec<EntitySpan>,
    /// Index into `members`: the longest surface, earliest on ties.
    pub representative: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: BTreeMap<String, String>,
}

impl EntityCluster {
    /// Builds a cluster, picking the representative and deriving the key.
    /// Name clusters are keyed as `person_name` when any member is a full name.
    pub fn new(members: Vec<EntitySpan>) -> Result<Self, Error> {
        let first = members
            .first()
            .ok_or_else(|| Error::Internal("empty cluster".into()))?;
        if let Some(bad) = members.iter().find(|m| !m.kind.compatible(&first.kind)) {
            return Err(Error::Internal(format!(
                "cluster mixes {} and {}",
                first.kind, bad.kind
            )));
        }
        let mut representative = 0;
        for (i, m) in members.iter().enumerate() {
            let best = &members[representative];
            let longer = m.surface.len() > best.surface.len();
            let tie_earlier = m.surface.len() == best.surface.len() && m.start < best.start;
            if longer || tie_earlier {
                representative = i;
            }
        }
        let kind = if members.iter().any(|m| m.kind == EntityKind::PersonName) {
            EntityKind::PersonName
        } else {
            members[representative].kind.clone()
        };
        let cluster_key = cluster_key(&kind, &members[representative].normalized);
        Ok(EntityCluster {
            cluster_key,
            kind,
            members,
            representative,
            attributes: BTreeMap::new(),
        })
    }

    pub fn representative(&self) -> &EntitySpan {
        &self.members[self.representative]
    }

    pub fn first_occurrence(&self) -> usize {
        self.members.iter().map(|m| m.start).min().unwrap_or(0)
    }

    pub fn contains(&self, span: &EntitySpan) -> bool {
        self.members
            .iter()
            .any(|m| m.start == span.start && m.end == span.end && m.surface == span.surface)
    }
}

pub fn cluster_key(kind: &EntityKind, normalized: &str) -> String {
    format!("{kind}|{normalized}")
}

/// Replacement identity for a name cluster: `full` renders multi-token
/// mentions, `given` renders single-token mentions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurrogateRecord {
    pub full: String,
    pub given: String,
}

/// A single rewrite applied to the source text, in source coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replacement {
    pub start: usize,
    pub end: usize,
    pub original: String,
    pub replacement: String,
    pub kind: EntityKind,
    pub strategy: crate::policy::StrategyKind,
    pub cluster_key: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn span(start: usize, end: usize, kind: EntityKind) -> EntitySpan {
        EntitySpan {
            start,
            end,
            kind,
            surface: String::new(),
            normalized: String::new(),
            confidence: 1.0,
        }
    }

    #[test]
    fn kind_string_forms() {
        let kinds = [
            EntityKind::PersonName,
            EntityKind::AlphanumericId(IdSubtype::PolicyNumber),
            EntityKind::AlphanumericId(IdSubtype::DriversLicense),
            EntityKind::Custom("claim_ref".into()),
            EntityKind::WeekdayName,
        ];
        for k in kinds {
            let s = k.to_string();
            assert_eq!(s.parse::<EntityKind>().unwrap(), k);
        }
        assert_eq!(
            serde_json::to_string(&EntityKind::AlphanumericId(IdSubtype::PolicyNumber)).unwrap(),
            "\"alphanumeric_id:policy_number\""
        );
        assert!("custom:".parse::<EntityKind>().is_err());
        assert!("custom".parse::<EntityKind>().is_err());
        assert!("pet_name".parse::<EntityKind>().is_err());
    }

    #[test]
    fn selector_family_and_exact() {
        let policy = EntityKind::AlphanumericId(IdSubtype::PolicyNumber);
        let license = EntityKind::AlphanumericId(IdSubtype::DriversLicense);
        assert!(KindSelector::new("alphanumeric_id").matches(&policy));
        assert!(KindSelector::new("alphanumeric_id").matches(&license));
        assert!(KindSelector::new("alphanumeric_id:policy_number").matches(&policy));
        assert!(!KindSelector::new("alphanumeric_id:policy_number").matches(&license));
        assert!(KindSelector::new("bogus").validate().is_err());
    }

    #[test]
    fn span_from_text_checks_bounds() {
        let text = "call (555) 555-1234";
        let s = EntitySpan::from_text(text, 5, 19, EntityKind::PhoneNumber, 1.0).unwrap();
        assert_eq!(s.surface, "(555) 555-1234");
        assert_eq!(s.normalized, "5555551234");
        s.check(text).unwrap();
        assert!(EntitySpan::from_text(text, 5, 5, EntityKind::PhoneNumber, 1.0).is_err());
        assert!(EntitySpan::from_text(text, 5, 40, EntityKind::PhoneNumber, 1.0).is_err());
        assert!(EntitySpan::from_text("é", 0, 1, EntityKind::Location, 1.0).is_err());
    }

    #[test]
    fn cluster_representative_and_key() {
        let text = "Beth Sanchez called. Beth left.";
        let full = EntitySpan::from_text(text, 0, 12, EntityKind::PersonName, 0.9).unwrap();
        let given = EntitySpan::from_text(text, 21, 25, EntityKind::GivenNameOnly, 0.6).unwrap();
        let a = EntityCluster::new(vec![full.clone(), given.clone()]).unwrap();
        let b = EntityCluster::new(vec![given, full]).unwrap();
        assert_eq!(a.representative().surface, "Beth Sanchez");
        assert_eq!(a.cluster_key, "person_name|beth sanchez");
        assert_eq!(a.cluster_key, b.cluster_key);

        let phone = EntitySpan::from_text("555-555-1234", 0, 12, EntityKind::PhoneNumber, 1.0)
            .unwrap();
        let name = EntitySpan::from_text(text, 0, 4, EntityKind::GivenNameOnly, 0.6).unwrap();
        assert!(EntityCluster::new(vec![phone, name]).is_err());
        assert!(EntityCluster::new(vec![]).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let text = "AB19010721";
        let s = EntitySpan::from_text(
            text,
            0,
            10,
            EntityKind::AlphanumericId(IdSubtype::PolicyNumber),
            1.0,
        )
        .unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"start\":0"));
        assert_eq!(serde_json::from_str::<EntitySpan>(&json).unwrap(), s);
        let c = EntityCluster::new(vec![s]).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<EntityCluster>(&json).unwrap(), c);
    }

    fn arb_kind() -> impl Strategy<Value = EntityKind> {
        prop_oneof![
            Just(EntityKind::PersonName),
            Just(EntityKind::GivenNameOnly),
            Just(EntityKind::PhoneNumber),
            Just(EntityKind::AlphanumericId(IdSubtype::PolicyNumber)),
            Just(EntityKind::AlphanumericId(IdSubtype::DriversLicense)),
            "[a-z]{1,4}".prop_map(EntityKind::Custom),
        ]
    }

    proptest! {
        #[test]
        fn position_order_is_total(
            a in (0usize..5, 1usize..5, arb_kind()),
            b in (0usize..5, 1usize..5, arb_kind()),
            c in (0usize..5, 1usize..5, arb_kind()),
        ) {
            let a = span(a.0, a.0 + a.1, a.2);
            let b = span(b.0, b.0 + b.1, b.2);
            let c = span(c.0, c.0 + c.1, c.2);
            prop_assert_eq!(a.position_cmp(&b), b.position_cmp(&a).reverse());
            if a.position_cmp(&b).is_le() && b.position_cmp(&c).is_le() {
                prop_assert!(a.position_cmp(&c).is_le());
            }
            if a.position_cmp(&b).is_eq() {
                prop_assert_eq!((a.start, a.end, &a.kind), (b.start, b.end, &b.kind));
            }
        }

        #[test]
        fn kind_round_trips_through_json(kind in arb_kind()) {
            let json = serde_json::to_string(&kind).unwrap();
            prop_assert_eq!(serde_json::from_str::<EntityKind>(&json).unwrap(), kind);
        }
    }
}
