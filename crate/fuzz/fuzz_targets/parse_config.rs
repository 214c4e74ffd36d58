#![no_main]

use biot_core::cli::{parse_config, render_config};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // Never panics; anything accepted survives a render/parse round trip.
    if let Ok(config) = parse_config(text) {
        let again = parse_config(&render_config(&config)).expect("rendered config parses");
        assert_eq!(again, config);
    }
});
