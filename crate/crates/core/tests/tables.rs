use std::path::{Path, PathBuf};

use tableguard_core::tabular::{
    k_anonymity, load_table, obfuscate_table_with, read_csv, table_utility, write_csv, LoadOptions,
};
use tableguard_core::{obfuscate_table, DataDictionary, Gazetteer, Ledger, Policy};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn claims() -> (tableguard_core::TableData, Policy) {
    let dict = DataDictionary::load(&fixture("claims_dictionary.json")).unwrap();
    let table = load_table(&fixture("claims.csv"), Some(&dict), &LoadOptions::default()).unwrap();
    (table, Policy::load(&fixture("claims_policy.json")).unwrap())
}

#[test]
fn claims_table_is_obfuscated() {
    let (table, policy) = claims();
    assert_eq!(table.rows.len(), 12);
    let r = obfuscate_table(&table, &policy, &Gazetteer::bundled()).unwrap();
    let name = table.column_index("claimant").unwrap();
    let out = &r.table.rows;
    // Rows 0, 3 and 8 hold the same person.
    assert_eq!(out[0][name], out[3][name]);
    assert_eq!(out[0][name], out[8][name]);
    assert_ne!(out[0][name].as_deref(), Some("Homer Simpson"));
    let phone = table.column_index("phone").unwrap();
    assert_eq!(out[0][phone].as_deref(), Some("(555) XXX-XXXX"));
    assert_eq!(out[1][phone].as_deref(), Some("555-XXX-XXXX"));
    let id = table.column_index("claim_id").unwrap();
    assert_eq!(out[0][id].as_deref(), Some("AB19XXXXX1"));
    let license = table.column_index("license").unwrap();
    assert_eq!(out[0][license].as_deref(), Some("WXXXXXXX56"));
    assert!(r.report.residual_scan.is_empty(), "{:?}", r.report.residual_scan);

    // The free-text surrogate matches the column surrogate for the same person.
    let notes = table.column_index("notes").unwrap();
    let surrogate = out[8][name].clone().unwrap();
    assert!(out[8][notes].as_ref().unwrap().contains(&surrogate), "{:?}", out[8][notes]);
    let given = surrogate.split(' ').next().unwrap();
    assert!(out[3][notes].as_ref().unwrap().contains(given), "{:?}", out[3][notes]);

    for row in out {
        let line = row.iter().flatten().cloned().collect::<Vec<_>>().join(",");
        for raw in ["Homer", "Beth", "555-1234", "homer@mrplow.com", "WILR123456", "Tuesday"] {
            assert!(!line.contains(raw), "{raw} in {line}");
        }
    }
}

#[test]
fn quasi_identifiers_and_utility() {
    let (table, policy) = claims();
    let qi = table.dictionary.quasi_identifiers();
    assert_eq!(qi, ["dob", "zip"]);
    assert_eq!(k_anonymity(&table, &qi).unwrap(), 1);
    assert_eq!(k_anonymity(&table, &["zip"]).unwrap(), 6);
    assert!(k_anonymity(&table, &[]).is_err());
    assert!(k_anonymity(&table, &["nope"]).is_err());

    let r = obfuscate_table(&table, &policy, &Gazetteer::bundled()).unwrap();
    let u = table_utility(&table, &r.table).unwrap();
    let cols: Vec<&str> = u.columns.iter().map(|c| c.column.as_str()).collect();
    assert_eq!(cols, ["amount", "zip"]);
    assert!(u.columns[0].mean_rel_error > 0.0);
    assert_eq!(u.columns[1].mean_rel_error, 0.0);
    assert!(u.information_loss_pct > 0.0);
    assert!(u.excluded_columns.contains(&"claimant".to_string()));
}

#[test]
fn row_permutation_permutes_output() {
    let (table, policy) = claims();
    let g = Gazetteer::bundled();
    let base = obfuscate_table(&table, &policy, &g).unwrap();
    let mut shuffled = table.clone();
    let perm: Vec<usize> = vec![11, 3, 7, 0, 9, 1, 5, 10, 2, 8, 4, 6];
    shuffled.rows = perm.iter().map(|&i| table.rows[i].clone()).collect();
    let other = obfuscate_table(&shuffled, &policy, &g).unwrap();
    for (j, &i) in perm.iter().enumerate() {
        assert_eq!(other.table.rows[j], base.table.rows[i], "row {i}");
    }
    assert_eq!(other.ledger.to_jsonl().unwrap(), base.ledger.to_jsonl().unwrap());
}

#[test]
fn thread_count_does_not_change_output() {
    let (table, policy) = claims();
    let g = Gazetteer::bundled();
    let one = obfuscate_table_with(&table, &policy, &g, Ledger::new(), Some(1)).unwrap();
    let four = obfuscate_table_with(&table, &policy, &g, Ledger::new(), Some(4)).unwrap();
    assert_eq!(one, four);
}

#[test]
fn reject_mode_names_the_column() {
    let (table, mut policy) = claims();
    policy.default_action = tableguard_core::DefaultAction::Reject;
    let err = obfuscate_table(&table, &policy, &Gazetteer::bundled()).unwrap_err();
    assert!(err.to_string().contains("column 'dob'"), "{err}");
}

#[test]
fn non_numeric_noise_cell_is_located() {
    let dict = DataDictionary::from_json(r#"{"columns": [{"name": "amount", "kind": "numeric"}]}"#).unwrap();
    let t = read_csv("amount\n12\nabc\n".as_bytes(), "t.csv", Some(&dict), &LoadOptions::default()).unwrap();
    let p = Policy::from_json(r#"{"seed": 1, "rules": [{"selector": {"column": "amount"}, "strategy": "gaussian", "sigma": 1.0}]}"#).unwrap();
    let err = obfuscate_table(&t, &p, &Gazetteer::bundled()).unwrap_err();
    assert!(err.to_string().starts_with("row 1, column 'amount'"), "{err}");
}

#[test]
fn output_round_trips_through_csv() {
    let (table, policy) = claims();
    let r = obfuscate_table(&table, &policy, &Gazetteer::bundled()).unwrap();
    let mut buf = Vec::new();
    write_csv(&r.table, &mut buf).unwrap();
    let back = read_csv(buf.as_slice(), "out.csv", None, &LoadOptions { dedup: false }).unwrap();
    assert_eq!(back.rows, r.table.rows);
}
