use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EntityKind;

/// Declared content of a column: an entity kind, or free text that is
/// scanned with the document recognizer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ColumnKind {
    Entity(EntityKind),
    FreeText,
}

impl ColumnKind {
    pub fn entity(&self) -> Option<&EntityKind> {
        match self {
            ColumnKind::Entity(k) => Some(k),
            ColumnKind::FreeText => None,
        }
    }
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnKind::Entity(k) => k.fmt(f),
            ColumnKind::FreeText => f.write_str("free_text"),
        }
    }
}

impl FromStr for ColumnKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free_text" => Ok(ColumnKind::FreeText),
            "numeric" => Ok(ColumnKind::Entity(EntityKind::NumericValue)),
            other => other.parse().map(ColumnKind::Entity),
        }
    }
}

impl From<ColumnKind> for String {
    fn from(k: ColumnKind) -> Self {
        k.to_string()
    }
}

impl TryFrom<String> for ColumnKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub quasi_identifier: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
}

/// Column declarations for one table. In strict mode every table column
/// must be declared and every declared column must exist.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DataDictionary {
    #[serde(default)]
    pub table: TableMetadata,
    pub columns: Vec<ColumnSpec>,
    #[serde(default)]
    pub strict: bool,
    /// Column holding dates of birth, used for era-aware surrogates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub birth_date_column: Option<String>,
}

impl DataDictionary {
    pub fn from_json(json: &str) -> Result<Self> {
        let d: DataDictionary = serde_json::from_str(json)?;
        d.validate()?;
        Ok(d)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        DataDictionary::from_json(&text).map_err(|e| e.at(path.display().to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for c in &self.columns {
            if c.name.is_empty() {
                return Err(Error::InvalidInput("dictionary column with an empty name".into()));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "column '{}' declared twice in the dictionary",
                    c.name
                )));
            }
        }
        if let Some(dob) = &self.birth_date_column {
            if !seen.contains(dob.as_str()) && self.strict {
                return Err(Error::InvalidInput(format!(
                    "birth_date_column '{dob}' is not declared"
                )));
            }
        }
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn quasi_identifiers(&self) -> Vec<&str> {
        self.columns
            .iter()
            .filter(|c| c.quasi_identifier)
            .map(|c| c.name.as_str())
            .collect()
    }

    /// Checks the dictionary against a table header.
    pub fn check_header(&self, header: &[String]) -> Result<()> {
        for h in header {
            if self.column(h).is_none() {
                if self.strict {
                    return Err(Error::InvalidInput(format!(
                        "column '{h}' is not declared in the dictionary"
                    )));
                }
                log::warn!("column '{h}' is not declared in the dictionary; only column rules apply");
            }
        }
        for c in &self.columns {
            if !header.contains(&c.name) {
                if self.strict {
                    return Err(Error::InvalidInput(format!(
                        "declared column '{}' is missing from the table",
                        c.name
                    )));
                }
                log::warn!("declared column '{}' is missing from the table", c.name);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DICT: &str = r#"{
        "table": {"name": "claims", "description": "first notice of loss"},
        "strict": true,
        "birth_date_column": "dob",
        "columns": [
            {"name": "claimant", "kind": "person_name", "quasi_identifier": false},
            {"name": "dob", "kind": "date_expression", "quasi_identifier": true},
            {"name": "amount", "kind": "numeric"},
            {"name": "notes", "kind": "free_text"},
            {"name": "policy", "kind": "alphanumeric_id:policy_number"}
        ]
    }"#;

    #[test]
    fn parses_kinds() {
        let d = DataDictionary::from_json(DICT).unwrap();
        assert_eq!(d.column("amount").unwrap().kind, ColumnKind::Entity(EntityKind::NumericValue));
        assert_eq!(d.column("notes").unwrap().kind, ColumnKind::FreeText);
        assert_eq!(d.quasi_identifiers(), ["dob"]);
        assert_eq!(d.table.name, "claims");
    }

    #[test]
    fn rejects_bad_dictionaries() {
        assert!(DataDictionary::from_json(r#"{"columns": [{"name": "a", "kind": "nope"}]}"#).is_err());
        let dup = r#"{"columns": [{"name": "a", "kind": "free_text"}, {"name": "a", "kind": "free_text"}]}"#;
        assert!(DataDictionary::from_json(dup).is_err());
        let dob = r#"{"strict": true, "birth_date_column": "x", "columns": []}"#;
        assert!(DataDictionary::from_json(dob).is_err());
    }

    #[test]
    fn strict_header_check() {
        let d = DataDictionary::from_json(DICT).unwrap();
        let header: Vec<String> = ["claimant", "dob", "amount", "notes", "policy"].map(String::from).into();
        d.check_header(&header).unwrap();
        assert!(d.check_header(&header[..4]).is_err());
        let mut extra = header.clone();
        extra.push("zip".into());
        assert!(d.check_header(&extra).is_err());
        let lax = DataDictionary { strict: false, ..d };
        lax.check_header(&extra).unwrap();
    }
}
