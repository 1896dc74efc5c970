#![no_main]
use libfuzzer_sys::fuzz_target;
use rgld_core::harness::csv::{parse_chain, validate_chain_rows};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(rows) = parse_chain(text) {
            for (k, r) in rows.iter().enumerate() {
                assert_eq!(r.step, k as u64);
            }
            let _ = validate_chain_rows(&rows);
        }
    }
});
