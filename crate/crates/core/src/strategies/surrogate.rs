//! Surrogate generation for person names and weekdays.

use crate::error::{Error, Result};
use crate::gazetteer::{Gazetteer, NamePart};
use crate::model::{EntityCluster, SurrogateRecord};
use crate::policy::SurrogateParams;
use crate::strategies::DeterministicStream;

pub const WEEKDAYS: [&str; 7] = [
    "monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday",
];

/// Copies the capitalization style of `template` onto `word`: all caps, all
/// lowercase, or title case.
pub fn mirror_case(template: &str, word: &str) -> String {
    let letters: Vec<char> = template.chars().filter(|c| c.is_alphabetic()).collect();
    if letters.len() > 1 && letters.iter().all(|c| c.is_uppercase()) {
        word.to_uppercase()
    } else if !letters.is_empty() && letters.iter().all(|c| c.is_lowercase()) {
        word.to_lowercase()
    } else {
        let mut chars = word.chars();
        match chars.next() {
            Some(first) => first.to_uppercase().chain(chars.flat_map(char::to_lowercase)).collect(),
            None => String::new(),
        }
    }
}

/// Picks a replacement identity for a name cluster. The given name is drawn
/// near the first token's rank and gender; the family name near the last
/// token's rank, or uniformly when that surname is not in the gazetteer.
pub fn surrogate_person_name(
    cluster: &EntityCluster,
    g: &Gazetteer,
    params: &SurrogateParams,
    stream: &mut DeterministicStream,
) -> Result<SurrogateRecord> {
    if !cluster.kind.is_name() {
        return Err(Error::InvalidInput(format!(
            "surrogate names need a name cluster, got {}",
            cluster.kind
        )));
    }
    let rep = cluster.representative();
    let tokens: Vec<&str> = rep.surface.split_whitespace().collect();
    let (first, last) = match tokens.as_slice() {
        [] => return Err(Error::InvalidInput("empty name".into())),
        [only] => (*only, None),
        [first, .., last] => (*first, Some(*last)),
    };
    let era = cluster.attributes.get("era").filter(|_| params.era_aware);

    let given = match g.lookup_first(first) {
        Some(record) => {
            let mut original = record.clone();
            if let Some(era) = era {
                original.era_bucket = Some(era.clone());
            }
            g.pick_surrogate(&original, params, stream)?
        }
        None => g.pick_any(NamePart::First, None, first, stream)?,
    };
    let given = mirror_case(first, &given.name);

    let full = match last {
        None => given.clone(),
        Some(last) => {
            let family = match g.lookup_last(last) {
                Some(record) => g.pick_surrogate(record, params, stream)?,
                None => g.pick_any(NamePart::Last, None, last, stream)?,
            };
            format!("{given} {}", mirror_case(last, &family.name))
        }
    };
    Ok(SurrogateRecord { full, given })
}

/// A different weekday, uniformly among the other six.
pub fn surrogate_weekday(surface: &str, stream: &mut DeterministicStream) -> Result<String> {
    let lower = surface.to_lowercase();
    let idx = WEEKDAYS
        .iter()
        .position(|d| *d == lower)
        .ok_or_else(|| Error::format("surrogate_weekday", format!("'{surface}' is not a weekday")))?;
    let mut pick = stream.next_below(6);
    if pick >= idx {
        pick += 1;
    }
    Ok(mirror_case(surface, WEEKDAYS[pick]))
}
