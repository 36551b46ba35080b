#![no_main]
use libfuzzer_sys::fuzz_target;
use mixu::{parse_sample_list, MAX_SAMPLES};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(ns) = parse_sample_list(s) {
            assert!(ns.iter().all(|&n| n >= 1 && n as u64 <= MAX_SAMPLES));
        }
    }
});
