#![no_main]
use libfuzzer_sys::fuzz_target;
use rgld_core::harness::csv::{parse_aggregate, validate_aggregate_rows};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rows) = parse_aggregate(text) {
            let _ = validate_aggregate_rows(&rows);
        }
    }
});
