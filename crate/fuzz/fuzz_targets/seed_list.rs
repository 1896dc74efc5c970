#![no_main]
use libfuzzer_sys::fuzz_target;
use rgld_core::harness::SeedList;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(list) = text.parse::<SeedList>() {
            assert!(!list.0.is_empty());
        }
    }
});
