//! Name gazetteer: case-folded lookup of first and last names with gender and
//! popularity rank, and deterministic surrogate selection within a rank band.
//!
//! On disk the gazetteer is a TSV file with the header
//! `name<TAB>part<TAB>gender<TAB>rank<TAB>era`, where `era` is a decade label
//! such as `1970s` or `-` when unknown.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::SurrogateParams;
use crate::strategies::DeterministicStream;

const HEADER: [&str; 5] = ["name", "part", "gender", "rank", "era"];
const BUNDLED: &str = include_str!("../data/gazetteer.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamePart {
    First,
    Last,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gender {
    Male,
    Female,
    Unisex,
    Unknown,
}

impl fmt::Display for NamePart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NamePart::First => "first",
            NamePart::Last => "last",
        })
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Unisex => "unisex",
            Gender::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NameRecord {
    pub name: String,
    pub part: NamePart,
    pub gender: Gender,
    pub rank: u32,
    pub era_bucket: Option<String>,
}

type PoolKey = (NamePart, Option<Gender>);

#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    records: Vec<NameRecord>,
    first: HashMap<String, usize>,
    last: HashMap<String, usize>,
    // Record indices ordered by (rank, gender, name); `None` pools span all genders.
    pools: HashMap<PoolKey, Vec<usize>>,
}

impl Gazetteer {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Gazetteer::parse(&text, &path.display().to_string())
    }

    /// The desk-scale gazetteer compiled into the crate.
    pub fn bundled() -> Self {
        Gazetteer::parse(BUNDLED, "bundled gazetteer").expect("bundled gazetteer is valid")
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let perr = |line: usize, message: String| Error::Parse {
            source_name: source_name.to_string(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim_end().split('\t').eq(HEADER) => {}
            Some(_) => return Err(perr(1, format!("expected header '{}'", HEADER.join("\\t")))),
            None => return Err(perr(1, "missing header".into())),
        }

        let mut g = Gazetteer::default();
        let mut ranks: HashMap<(NamePart, Gender, u32), usize> = HashMap::new();
        for (idx, raw) in lines {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 5 {
                return Err(perr(line_no, format!("expected 5 fields, found {}", fields.len())));
            }
            let name = fields[0].trim().to_lowercase();
            if name.is_empty() {
                return Err(perr(line_no, "empty name".into()));
            }
            let part = match fields[1].trim() {
                "first" => NamePart::First,
                "last" => NamePart::Last,
                other => return Err(perr(line_no, format!("invalid part '{other}'"))),
            };
            let gender = match fields[2].trim() {
                "male" => Gender::Male,
                "female" => Gender::Female,
                "unisex" => Gender::Unisex,
                "unknown" | "-" => Gender::Unknown,
                other => return Err(perr(line_no, format!("invalid gender '{other}'"))),
            };
            let rank: u32 = fields[3]
                .trim()
                .parse()
                .ok()
                .filter(|r| *r > 0)
                .ok_or_else(|| perr(line_no, format!("invalid rank '{}'", fields[3])))?;
            let era_bucket = match fields[4].trim() {
                "" | "-" => None,
                era => Some(era.to_string()),
            };

            let table = match part {
                NamePart::First => &mut g.first,
                NamePart::Last => &mut g.last,
            };
            if table.contains_key(&name) {
                return Err(Error::DuplicateName {
                    name,
                    part: part.to_string(),
                    line: line_no,
                });
            }
            if ranks.insert((part, gender, rank), line_no).is_some() {
                return Err(perr(
                    line_no,
                    format!("rank {rank} repeated for {part}/{gender}"),
                ));
            }
            table.insert(name.clone(), g.records.len());
            g.records.push(NameRecord {
                name,
                part,
                gender,
                rank,
                era_bucket,
            });
        }
        g.build_pools();
        Ok(g)
    }

    fn build_pools(&mut self) {
        let mut pools: HashMap<PoolKey, Vec<usize>> = HashMap::new();
        for (i, r) in self.records.iter().enumerate() {
            pools.entry((r.part, Some(r.gender))).or_default().push(i);
            pools.entry((r.part, None)).or_default().push(i);
        }
        for pool in pools.values_mut() {
            pool.sort_by(|&a, &b| {
                let (ra, rb) = (&self.records[a], &self.records[b]);
                (ra.rank, ra.gender, &ra.name).cmp(&(rb.rank, rb.gender, &rb.name))
            });
        }
        self.pools = pools;
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[NameRecord] {
        &self.records
    }

    /// Case-insensitive lookup, preferring the first-name table.
    pub fn lookup_name(&self, token: &str) -> Option<&NameRecord> {
        self.lookup_first(token).or_else(|| self.lookup_last(token))
    }

    pub fn lookup_first(&self, token: &str) -> Option<&NameRecord> {
        self.first.get(&token.to_lowercase()).map(|&i| &self.records[i])
    }

    pub fn lookup_last(&self, token: &str) -> Option<&NameRecord> {
        self.last.get(&token.to_lowercase()).map(|&i| &self.records[i])
    }

    fn pool(&self, part: NamePart, gender: Option<Gender>) -> &[usize] {
        self.pools
            .get(&(part, gender))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Picks a replacement for `original` of the same part, never `original`
    /// itself. Candidates are restricted to the original's gender when
    /// `gender_match` is set and the gender is known, then to the same era
    /// bucket when `era_aware` is set and any candidate shares it, then to
    /// the rank band `|rank - original.rank| <= rank_band_width`. If the band
    /// is empty the nearest rank wins, with ties broken by the stream.
    pub fn pick_surrogate(
        &self,
        original: &NameRecord,
        params: &SurrogateParams,
        stream: &mut DeterministicStream,
    ) -> Result<NameRecord> {
        let gender = (params.gender_match && original.gender != Gender::Unknown)
            .then_some(original.gender);
        let pool = self.pool(original.part, gender);
        let is_original = |i: usize| self.records[i].name == original.name;
        if pool.len() < 2 || pool.iter().all(|&i| is_original(i)) {
            return Err(Error::InsufficientGazetteer(format!(
                "{} names of gender {}",
                original.part,
                gender.map_or("any".to_string(), |g| g.to_string())
            )));
        }

        let era = original.era_bucket.as_deref().filter(|_| params.era_aware);
        let same_era = |i: usize| era.is_none() || self.records[i].era_bucket.as_deref() == era;
        let era_constrained = era.is_some()
            && pool.iter().any(|&i| !is_original(i) && same_era(i));
        let eligible = |i: usize| !is_original(i) && (!era_constrained || same_era(i));

        let lo_rank = original.rank.saturating_sub(params.rank_band_width);
        let hi_rank = original.rank.saturating_add(params.rank_band_width);
        let lo = pool.partition_point(|&i| self.records[i].rank < lo_rank);
        let hi = pool.partition_point(|&i| self.records[i].rank <= hi_rank);
        let banded: Vec<usize> = pool[lo..hi].iter().copied().filter(|&i| eligible(i)).collect();
        if !banded.is_empty() {
            let pick = banded[stream.next_below(banded.len())];
            return Ok(self.records[pick].clone());
        }

        let distance = |i: usize| self.records[i].rank.abs_diff(original.rank);
        let best = pool
            .iter()
            .copied()
            .filter(|&i| eligible(i))
            .map(distance)
            .min()
            .ok_or_else(|| Error::Internal("no eligible surrogate".into()))?;
        let nearest: Vec<usize> = pool
            .iter()
            .copied()
            .filter(|&i| eligible(i) && distance(i) == best)
            .collect();
        let pick = nearest[stream.next_below(nearest.len())];
        Ok(self.records[pick].clone())
    }

    /// Uniform pick from a part/gender pool, excluding `exclude`
    /// (case-insensitive). Used when the original name is not in the
    /// gazetteer, so no rank band exists.
    pub fn pick_any(
        &self,
        part: NamePart,
        gender: Option<Gender>,
        exclude: &str,
        stream: &mut DeterministicStream,
    ) -> Result<NameRecord> {
        let exclude = exclude.to_lowercase();
        let pool: Vec<usize> = self
            .pool(part, gender)
            .iter()
            .copied()
            .filter(|&i| self.records[i].name != exclude)
            .collect();
        if pool.is_empty() {
            return Err(Error::InsufficientGazetteer(format!("{part} names")));
        }
        Ok(self.records[pool[stream.next_below(pool.len())]].clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FIXTURE: &str = "name\tpart\tgender\trank\tera\n\
        homer\tfirst\tmale\t412\t1950s\n\
        beth\tfirst\tfemale\t88\t1970s\n\
        simpson\tlast\tunknown\t733\t-\n";

    fn fixture() -> Gazetteer {
        Gazetteer::parse(FIXTURE, "fixture").unwrap()
    }

    fn record(g: &Gazetteer, name: &str) -> NameRecord {
        g.lookup_name(name).unwrap().clone()
    }

    fn tsv(rows: &[(&str, &str, &str, u32, &str)]) -> Gazetteer {
        let mut s = String::from("name\tpart\tgender\trank\tera\n");
        for (n, p, g, r, e) in rows {
            s.push_str(&format!("{n}\t{p}\t{g}\t{r}\t{e}\n"));
        }
        Gazetteer::parse(&s, "test").unwrap()
    }

    #[test]
    fn loads_fixture_records() {
        let g = fixture();
        assert_eq!(g.len(), 3);
        let homer = g.lookup_name("Homer").unwrap();
        assert_eq!(
            homer,
            &NameRecord {
                name: "homer".into(),
                part: NamePart::First,
                gender: Gender::Male,
                rank: 412,
                era_bucket: Some("1950s".into()),
            }
        );
        assert_eq!(g.lookup_name("HOMER"), Some(homer));
        assert_eq!(g.lookup_name("Simpson").unwrap().part, NamePart::Last);
        assert_eq!(g.lookup_name("simpson").unwrap().era_bucket, None);
        assert!(g.lookup_name("Zzyzx").is_none());
    }

    #[test]
    fn loads_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("names.tsv");
        std::fs::write(&path, FIXTURE).unwrap();
        assert_eq!(Gazetteer::load(&path).unwrap().len(), 3);
        assert!(matches!(
            Gazetteer::load(&dir.path().join("missing.tsv")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn header_only_is_empty() {
        let g = Gazetteer::parse("name\tpart\tgender\trank\tera\n", "t").unwrap();
        assert!(g.is_empty());
        assert!(g.lookup_name("homer").is_none());
    }

    #[test]
    fn parse_errors_name_the_line() {
        let bad = "name\tpart\tgender\trank\tera\nhomer\tfirst\tmale\tabc\t-\n";
        match Gazetteer::parse(bad, "t") {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("abc"));
            }
            other => panic!("{other:?}"),
        }
        let dup = "name\tpart\tgender\trank\tera\nhomer\tfirst\tmale\t1\t-\nHOMER\tfirst\tmale\t2\t-\n";
        assert!(matches!(
            Gazetteer::parse(dup, "t"),
            Err(Error::DuplicateName { line: 3, .. })
        ));
        let same_rank = "name\tpart\tgender\trank\tera\na\tfirst\tmale\t1\t-\nb\tfirst\tmale\t1\t-\n";
        assert!(matches!(Gazetteer::parse(same_rank, "t"), Err(Error::Parse { line: 3, .. })));
        assert!(Gazetteer::parse("name\tpart\n", "t").is_err());
        assert!(Gazetteer::parse("", "t").is_err());
        // Same name as first and last is allowed.
        let both = "name\tpart\tgender\trank\tera\npaul\tfirst\tmale\t1\t-\npaul\tlast\tunknown\t1\t-\n";
        assert_eq!(Gazetteer::parse(both, "t").unwrap().len(), 2);
    }

    #[test]
    fn bundled_loads() {
        let g = Gazetteer::bundled();
        assert!(g.len() > 3000);
        assert_eq!(g.lookup_first("Homer").unwrap().gender, Gender::Male);
        assert_eq!(g.lookup_first("Beth").unwrap().gender, Gender::Female);
        assert!(g.lookup_last("Simpson").is_some());
        assert!(g.lookup_last("Sanchez").is_some());
    }

    #[test]
    fn beth_gets_a_female_name_within_band() {
        let g = tsv(&[
            ("beth", "first", "female", 88, "-"),
            ("annie", "first", "female", 61, "-"),
            ("mary", "first", "female", 1, "-"),
            ("zelda", "first", "female", 900, "-"),
            ("paul", "first", "male", 13, "-"),
        ]);
        let beth = record(&g, "beth");
        let params = SurrogateParams {
            rank_band_width: 100,
            ..Default::default()
        };
        for seed in 0..200 {
            let mut s = DeterministicStream::new(seed, "person_name|beth sanchez");
            let pick = g.pick_surrogate(&beth, &params, &mut s).unwrap();
            assert_ne!(pick.name, "beth");
            assert_eq!(pick.gender, Gender::Female);
            assert!((1..=188).contains(&pick.rank), "{pick:?}");
        }
    }

    #[test]
    fn forced_choice_with_two_records() {
        let g = tsv(&[("homer", "first", "male", 1, "-"), ("bart", "first", "male", 2, "-")]);
        let homer = record(&g, "homer");
        for seed in 0..20 {
            let mut s = DeterministicStream::new(seed, "x");
            let pick = g
                .pick_surrogate(&homer, &SurrogateParams::default(), &mut s)
                .unwrap();
            assert_eq!(pick.name, "bart");
        }
    }

    #[test]
    fn nearest_rank_fallback_matches_brute_force() {
        let g = tsv(&[
            ("homer", "first", "male", 50, "-"),
            ("bart", "first", "male", 10, "-"),
            ("moe", "first", "male", 57, "-"),
            ("ned", "first", "male", 43, "-"),
            ("barney", "first", "male", 90, "-"),
        ]);
        let homer = record(&g, "homer");
        let params = SurrogateParams {
            rank_band_width: 0,
            ..Default::default()
        };
        // Brute force: minimal |rank - 50| over the others is 7 (moe and ned).
        let best = g
            .records()
            .iter()
            .filter(|r| r.name != "homer")
            .map(|r| r.rank.abs_diff(50))
            .min()
            .unwrap();
        assert_eq!(best, 7);
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..64 {
            let mut s = DeterministicStream::new(seed, "x");
            let pick = g.pick_surrogate(&homer, &params, &mut s).unwrap();
            assert_eq!(pick.rank.abs_diff(50), best);
            seen.insert(pick.name);
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), ["moe", "ned"]);
    }

    #[test]
    fn insufficient_pool() {
        let g = tsv(&[("homer", "first", "male", 1, "-"), ("marge", "first", "female", 1, "-")]);
        let homer = record(&g, "homer");
        let mut s = DeterministicStream::new(0, "x");
        assert!(matches!(
            g.pick_surrogate(&homer, &SurrogateParams::default(), &mut s),
            Err(Error::InsufficientGazetteer(_))
        ));
        let any = SurrogateParams {
            gender_match: false,
            ..Default::default()
        };
        assert_eq!(g.pick_surrogate(&homer, &any, &mut s).unwrap().name, "marge");
    }

    #[test]
    fn era_filter_applies_when_available() {
        let g = tsv(&[
            ("homer", "first", "male", 10, "1950s"),
            ("abe", "first", "male", 11, "1920s"),
            ("ned", "first", "male", 12, "1950s"),
            ("bart", "first", "male", 13, "1980s"),
        ]);
        let homer = record(&g, "homer");
        let params = SurrogateParams::default();
        for seed in 0..50 {
            let mut s = DeterministicStream::new(seed, "x");
            assert_eq!(g.pick_surrogate(&homer, &params, &mut s).unwrap().name, "ned");
        }
        let mut lost = homer.clone();
        lost.era_bucket = Some("2010s".into());
        let mut names = std::collections::BTreeSet::new();
        for seed in 0..50 {
            let mut s = DeterministicStream::new(seed, "x");
            names.insert(g.pick_surrogate(&lost, &params, &mut s).unwrap().name);
        }
        assert_eq!(names.len(), 3, "no era match falls back to all candidates");
    }

    proptest! {
        #[test]
        fn surrogate_properties(seed: u64, idx in 0usize..1800, band in 0u32..300, gender_match: bool) {
            let g = Gazetteer::bundled();
            let firsts: Vec<&NameRecord> =
                g.records().iter().filter(|r| r.part == NamePart::First).collect();
            let original = firsts[idx % firsts.len()].clone();
            let params = SurrogateParams { rank_band_width: band, era_aware: false, gender_match };
            let mut s1 = DeterministicStream::new(seed, &original.name);
            let mut s2 = DeterministicStream::new(seed, &original.name);
            let a = g.pick_surrogate(&original, &params, &mut s1).unwrap();
            let b = g.pick_surrogate(&original, &params, &mut s2).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_ne!(&a.name, &original.name);
            prop_assert_eq!(a.part, NamePart::First);
            if gender_match {
                prop_assert_eq!(a.gender, original.gender);
            }
        }
    }
}
