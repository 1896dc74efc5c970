//! Replays the checked-in fuzz corpus through the parsers.

use std::fs;
use std::path::PathBuf;

use rgld_core::harness::csv::{
    parse_aggregate, parse_chain, validate_aggregate_rows, validate_chain_rows,
};
use rgld_core::harness::{ConfigFile, SeedList};

fn corpus(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read_to_string(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "empty corpus for {target}");
    out
}

#[test]
fn config_seeds() {
    for (name, text) in corpus("config_parse") {
        let specs = ConfigFile::parse(&text)
            .and_then(ConfigFile::into_specs)
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        for s in specs {
            s.prepare().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }
}

#[test]
fn seed_list_seeds() {
    for (name, text) in corpus("seed_list") {
        let parsed = text.parse::<SeedList>();
        assert_eq!(parsed.is_ok(), name != "reversed", "{name}");
    }
}

#[test]
fn chain_csv_seeds() {
    for (name, text) in corpus("chain_csv") {
        match (name.as_str(), parse_chain(&text)) {
            ("valid.csv", Ok(rows)) => validate_chain_rows(&rows).unwrap(),
            ("nonfinite.csv", Ok(rows)) => assert!(validate_chain_rows(&rows).is_err()),
            ("out_of_sequence.csv", r) => assert!(r.is_err()),
            (n, r) => panic!("{n}: unexpected {r:?}"),
        }
    }
}

#[test]
fn aggregate_csv_seeds() {
    for (name, text) in corpus("aggregate_csv") {
        let rows = parse_aggregate(&text).unwrap();
        assert_eq!(
            validate_aggregate_rows(&rows).is_ok(),
            name == "valid.csv",
            "{name}"
        );
    }
}
