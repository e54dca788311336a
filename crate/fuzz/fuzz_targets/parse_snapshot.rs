#![no_main]

use cnls::io::parse_snapshot;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(snap) = parse_snapshot(text) {
        assert_eq!(snap.x.len(), snap.u1.len());
        assert_eq!(snap.x.len(), snap.u2.len());
    }
});
