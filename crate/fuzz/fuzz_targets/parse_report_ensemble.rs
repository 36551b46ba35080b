#![no_main]
use libfuzzer_sys::fuzz_target;
use mixed_unitary::format;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(e) = format::parse_report_ensemble(s) {
            assert!(!e.is_empty());
        }
    }
});
