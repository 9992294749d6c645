//! Load-time benchmark: plain load versus load plus obfuscation over
//! synthetic tables of increasing size.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use tableguard_core::tabular::{load_table, obfuscate_table_with};
use tableguard_core::{synth, Error, Gazetteer, Ledger, LoadOptions, Policy};

use crate::load_gazetteer;

#[derive(Debug, Clone)]
pub struct BenchArgs {
    pub rows: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub threads: usize,
}

impl Default for BenchArgs {
    fn default() -> Self {
        BenchArgs {
            rows: vec![100, 1_000, 10_000, 100_000],
            trials: 3,
            seed: 7,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timing {
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl Timing {
    fn of(mut samples: Vec<f64>) -> Self {
        samples.sort_by(f64::total_cmp);
        let n = samples.len();
        let median = if n % 2 == 1 {
            samples[n / 2]
        } else {
            (samples[n / 2 - 1] + samples[n / 2]) / 2.0
        };
        Timing {
            median,
            min: samples[0],
            max: samples[n - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub rows: usize,
    /// Gazetteer load, table load and obfuscation, in seconds.
    pub with_obfuscation: Timing,
    /// Table load only, in seconds.
    pub no_obfuscation: Timing,
    pub ratio: f64,
    pub gazetteer_load: Timing,
    pub obfuscate_only: Timing,
    pub obfuscate_rows_per_sec: f64,
}

fn secs(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}

fn measure(path: &Path, rows: usize, args: &BenchArgs, policy: &Policy) -> Result<BenchRow, Error> {
    let dictionary = synth::dictionary();
    let (mut plain, mut with, mut gaz, mut obf) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for _ in 0..args.trials.max(1) {
        let t = Instant::now();
        let table = load_table(path, Some(&dictionary), &LoadOptions::default())?;
        plain.push(secs(t));
        drop(table);

        let t = Instant::now();
        let g = load_gazetteer()?;
        let t_gaz = secs(t);
        let table = load_table(path, Some(&dictionary), &LoadOptions::default())?;
        let t_obf = Instant::now();
        let result = obfuscate_table_with(&table, policy, &g, Ledger::new(), Some(args.threads))?;
        obf.push(secs(t_obf));
        with.push(secs(t));
        gaz.push(t_gaz);
        debug_assert_eq!(result.table.rows.len(), rows);
    }
    let (with, plain, obf) = (Timing::of(with), Timing::of(plain), Timing::of(obf));
    Ok(BenchRow {
        rows,
        ratio: with.median / plain.median,
        with_obfuscation: with,
        no_obfuscation: plain,
        gazetteer_load: Timing::of(gaz),
        obfuscate_rows_per_sec: rows as f64 / obf.median,
        obfuscate_only: obf,
    })
}

/// Runs the benchmark. Each table is generated once per size and written to
/// a temporary CSV so both measurements include file parsing.
pub fn run(args: &BenchArgs) -> Result<Vec<BenchRow>, Error> {
    let g = Gazetteer::bundled();
    let policy = synth::policy();
    let dir = tempfile::tempdir().map_err(|e| Error::io(std::env::temp_dir(), e))?;
    let mut out = Vec::new();
    for &n in &args.rows {
        let path = dir.path().join(format!("synth_{n}.csv"));
        std::fs::write(&path, synth::csv(n, args.seed, &g)).map_err(|e| Error::io(&path, e))?;
        out.push(measure(&path, n, args, &policy)?);
        log::info!("bench: {n} rows done");
    }
    Ok(out)
}

/// Three-column load-time table plus the ratio column.
pub fn render_text(rows: &[BenchRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>10} {:>34} {:>32} {:>8}",
        "Rows", "With Obfuscation Load time (s)", "No Obfuscation Load time (s)", "Ratio"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:>10} {:>34.4} {:>32.4} {:>8.2}",
            r.rows, r.with_obfuscation.median, r.no_obfuscation.median, r.ratio
        );
    }
    let _ = writeln!(s, "\n{:>10} {:>20} {:>20} {:>16}", "Rows", "with min..max", "plain min..max", "obf rows/s");
    for r in rows {
        let _ = writeln!(
            s,
            "{:>10} {:>9.4}..{:<9.4} {:>9.4}..{:<9.4} {:>16.0}",
            r.rows,
            r.with_obfuscation.min,
            r.with_obfuscation.max,
            r.no_obfuscation.min,
            r.no_obfuscation.max,
            r.obfuscate_rows_per_sec
        );
    }
    if let Some(r) = rows.first() {
        let _ = writeln!(s, "\ngazetteer load (fixed cost): {:.4} s median", r.gazetteer_load.median);
    }
    s
}

pub fn render_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from(
        "rows,with_obfuscation_s,no_obfuscation_s,ratio,with_min_s,with_max_s,plain_min_s,plain_max_s,gazetteer_load_s,obfuscate_rows_per_s\n",
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.6},{:.6},{:.4},{:.6},{:.6},{:.6},{:.6},{:.6},{:.1}",
            r.rows,
            r.with_obfuscation.median,
            r.no_obfuscation.median,
            r.ratio,
            r.with_obfuscation.min,
            r.with_obfuscation.max,
            r.no_obfuscation.min,
            r.no_obfuscation.max,
            r.gazetteer_load.median,
            r.obfuscate_rows_per_sec
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_min_max() {
        let t = Timing::of(vec![3.0, 1.0, 2.0]);
        assert_eq!((t.median, t.min, t.max), (2.0, 1.0, 3.0));
        assert_eq!(Timing::of(vec![4.0, 1.0]).median, 2.5);
    }

    #[test]
    fn small_run_renders() {
        let rows = run(&BenchArgs {
            rows: vec![50, 100],
            trials: 1,
            ..Default::default()
        })
        .unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.ratio > 1.0));
        assert_eq!(render_csv(&rows).lines().count(), 3);
        assert!(render_text(&rows).contains("With Obfuscation Load time (s)"));
    }
}
