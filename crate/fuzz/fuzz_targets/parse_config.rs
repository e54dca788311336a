#![no_main]

use cnls::config::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = parse_config(text) {
        // Anything accepted must survive a write/parse cycle unchanged.
        let again = parse_config(&cfg.to_text()).expect("rendered config must parse");
        assert_eq!(again, cfg);
    }
});
