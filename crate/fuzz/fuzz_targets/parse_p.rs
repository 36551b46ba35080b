#![no_main]
use libfuzzer_sys::fuzz_target;
use mixu::{parse_p, MixingParam};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(MixingParam::Value(p)) = parse_p(s) {
            assert!(p.is_finite() && p >= 0.0);
        }
    }
});
