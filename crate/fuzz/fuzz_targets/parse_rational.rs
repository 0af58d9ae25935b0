#![no_main]

use charsum::parse::{parse_rational, parse_unit_interval};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(r) = parse_rational(s) {
            assert!(*r.denom() > 0);
            assert_eq!(parse_rational(&r.to_string()).unwrap(), r);
        }
        let _ = parse_unit_interval(s);
    }
});
