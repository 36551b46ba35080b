#![no_main]
use libfuzzer_sys::fuzz_target;
use mixed_unitary::format;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(channel) = format::parse_channel(s) {
            // anything accepted must serialize and parse back
            let text = format::channel_to_json(&channel);
            assert!(format::parse_channel(&text).is_ok());
            let _ = channel.to_choi();
        }
    }
});
