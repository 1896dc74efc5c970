#![no_main]
use libfuzzer_sys::fuzz_target;
use rgld_core::harness::ConfigFile;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = ConfigFile::parse(text) {
            let _ = cfg.into_specs();
        }
    }
});
