use crate::gazetteer::Gazetteer;
use crate::model::{EntityKind, EntitySpan};
use crate::recognize::RecognizerConfig;

pub const FULL_NAME_CONFIDENCE: f64 = 0.9;
pub const GIVEN_NAME_CONFIDENCE: f64 = 0.6;

// Capitalized function words that would otherwise hit the name tables at the
// start of a sentence.
const STOPWORDS: [&str; 40] = [
    "a", "an", "and", "as", "at", "be", "but", "by", "dear", "do", "dr", "for", "he", "her",
    "his", "i", "if", "in", "is", "it", "its", "mr", "mrs", "ms", "my", "no", "of", "on", "or",
    "our", "she", "so", "that", "the", "they", "this", "to", "we", "you", "your",
];

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    start: usize,
    end: usize,
    text: &'a str,
}

impl Token<'_> {
    fn capitalized(&self) -> bool {
        self.text.chars().next().is_some_and(char::is_uppercase)
    }
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-')
}

// Runs of letters; an apostrophe or hyphen joins two letter runs unless it
// starts a possessive "'s".
fn tokenize(text: &str) -> Vec<Token<'_>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].1.is_alphabetic() {
            i += 1;
            continue;
        }
        let start = chars[i].0;
        let mut j = i + 1;
        loop {
            if j < chars.len() && chars[j].1.is_alphabetic() {
                j += 1;
                continue;
            }
            let joins = j + 1 < chars.len()
                && is_joiner(chars[j].1)
                && chars[j + 1].1.is_alphabetic()
                && !(chars[j].1 != '-'
                    && matches!(chars[j + 1].1, 's' | 'S')
                    && chars.get(j + 2).is_none_or(|c| !c.1.is_alphabetic()));
            if joins {
                j += 2;
            } else {
                break;
            }
        }
        let end = chars.get(j).map_or(text.len(), |c| c.0);
        tokens.push(Token {
            start,
            end,
            text: &text[start..end],
        });
        i = j;
    }
    tokens
}

fn is_stopword(token: &str) -> bool {
    STOPWORDS.contains(&token.to_lowercase().as_str())
}

/// Capitalized first-name hits, extended by one following capitalized token
/// that is a known surname or unknown to the gazetteer.
pub fn detect_name_entities(text: &str, g: &Gazetteer, config: &RecognizerConfig) -> Vec<EntitySpan> {
    let want_full = config.is_enabled(&EntityKind::PersonName);
    let want_given = config.is_enabled(&EntityKind::GivenNameOnly);
    if !want_full && !want_given {
        return Vec::new();
    }
    let tokens = tokenize(text);
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let tok = tokens[i];
        let starts_name = tok.capitalized()
            && tok.text.chars().count() >= 2
            && !is_stopword(tok.text)
            && g.lookup_first(tok.text).is_some();
        if !starts_name {
            i += 1;
            continue;
        }
        let surname = tokens.get(i + 1).filter(|next| {
            &text[tok.end..next.start] == " "
                && next.capitalized()
                && !is_stopword(next.text)
                && (g.lookup_last(next.text).is_some() || g.lookup_name(next.text).is_none())
        });
        match surname {
            Some(next) if want_full => {
                out.push(span(text, tok.start, next.end, EntityKind::PersonName, FULL_NAME_CONFIDENCE));
                i += 2;
            }
            _ => {
                if want_given {
                    out.push(span(text, tok.start, tok.end, EntityKind::GivenNameOnly, GIVEN_NAME_CONFIDENCE));
                }
                i += 1;
            }
        }
    }
    out
}

fn span(text: &str, start: usize, end: usize, kind: EntityKind, confidence: f64) -> EntitySpan {
    EntitySpan::from_text(text, start, end, kind, confidence).expect("token boundaries are valid")
}
