#![no_main]

use cnls::io::{parse_diagnostics, write_diagnostics_header, write_diagnostics_row};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(rows) = parse_diagnostics(text) else {
        return;
    };
    let mut buf = Vec::new();
    write_diagnostics_header(&mut buf).unwrap();
    for r in &rows {
        write_diagnostics_row(&mut buf, r).unwrap();
    }
    let back = parse_diagnostics(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(back.len(), rows.len());
    for (a, b) in back.iter().zip(&rows) {
        for (x, y) in [
            (a.t, b.t),
            (a.m1, b.m1),
            (a.m2, b.m2),
            (a.energy, b.energy),
            (a.momentum, b.momentum),
            (a.ploc1, b.ploc1),
            (a.ploc2, b.ploc2),
        ] {
            assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
        }
    }
});
