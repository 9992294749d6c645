//! Seeded synthetic claim rows for benchmarks and tests.

use crate::gazetteer::{Gazetteer, NamePart};
use crate::policy::Policy;
use crate::strategies::DeterministicStream;
use crate::tabular::DataDictionary;

pub const COLUMNS: [&str; 8] = ["id", "name", "dob", "phone", "email", "card", "amount", "score"];

pub const DICTIONARY: &str = r#"{
  "table": {"name": "synthetic_claims", "description": "generated claim rows"},
  "strict": true,
  "birth_date_column": "dob",
  "columns": [
    {"name": "id", "kind": "alphanumeric_id:policy_number"},
    {"name": "name", "kind": "person_name"},
    {"name": "dob", "kind": "date_expression", "quasi_identifier": true},
    {"name": "phone", "kind": "phone_number"},
    {"name": "email", "kind": "email_address"},
    {"name": "card", "kind": "credit_card_number"},
    {"name": "amount", "kind": "numeric"},
    {"name": "score", "kind": "numeric"}
  ]
}"#;

pub const POLICY: &str = r#"{
  "seed": 7,
  "rules": [
    {"selector": {"kind": "alphanumeric_id:policy_number"}, "strategy": "mask", "keep_prefix": 4, "keep_suffix": 1},
    {"selector": {"kind": "person_name"}, "strategy": "surrogate"},
    {"selector": {"kind": "phone_number"}, "strategy": "mask"},
    {"selector": {"kind": "email_address"}, "strategy": "mask"},
    {"selector": {"kind": "credit_card_number"}, "strategy": "mask"},
    {"selector": {"column": "amount"}, "strategy": "laplace", "epsilon": 1.0, "sensitivity": 100.0},
    {"selector": {"column": "score"}, "strategy": "gaussian", "sigma": 0.1}
  ]
}"#;

pub fn dictionary() -> DataDictionary {
    DataDictionary::from_json(DICTIONARY).expect("bundled dictionary is valid")
}

pub fn policy() -> Policy {
    Policy::from_json(POLICY).expect("bundled policy is valid")
}

fn digits(s: &mut DeterministicStream, n: usize) -> String {
    (0..n).map(|_| char::from(b'0' + s.next_below(10) as u8)).collect()
}

/// `n` rows of [`COLUMNS`], deterministic in `seed`. Names are drawn from the
/// gazetteer's most common first and last names.
pub fn rows(n: usize, seed: u64, g: &Gazetteer) -> Vec<Vec<String>> {
    let pool = |part: NamePart| -> Vec<&str> {
        let mut v: Vec<_> = g.records().iter().filter(|r| r.part == part).collect();
        v.sort_by_key(|r| (r.rank, r.name.clone()));
        v.into_iter().take(500).map(|r| r.name.as_str()).collect()
    };
    let (firsts, lasts) = (pool(NamePart::First), pool(NamePart::Last));
    (0..n)
        .map(|i| {
            let mut s = DeterministicStream::new(seed, &format!("synth:{i}"));
            let first = firsts[s.next_below(firsts.len())];
            let last = lasts[s.next_below(lasts.len())];
            let year = 1940 + s.next_below(65);
            let dob = format!("{year}-{:02}-{:02}", 1 + s.next_below(12), 1 + s.next_below(28));
            let phone = format!("{}-{}-{}", digits(&mut s, 3), digits(&mut s, 3), digits(&mut s, 4));
            let email = format!("{}.{}{}@example.com", first.to_lowercase(), last.to_lowercase(), i);
            let card = format!(
                "{} {} {} {}",
                digits(&mut s, 4),
                digits(&mut s, 4),
                digits(&mut s, 4),
                digits(&mut s, 4)
            );
            let amount = format!("{:.2}", 100.0 + s.next_f64() * 9900.0);
            let score = format!("{:.3}", s.next_f64());
            vec![
                format!("CL{i:08}"),
                format!("{first} {last}"),
                dob,
                phone,
                email,
                card,
                amount,
                score,
            ]
        })
        .collect()
}

/// Rows as CSV text with a header line.
pub fn csv(n: usize, seed: u64, g: &Gazetteer) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS).expect("in-memory write");
    for row in rows(n, seed, g) {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
}
