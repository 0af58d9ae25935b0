#![no_main]

use charsum::parse::parse_function;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(f) = parse_function(s) {
            // Accepted names print back to something that parses to the same function.
            assert_eq!(parse_function(&f.to_string()).unwrap(), f);
            let _ = f.to_spec();
        }
    }
});
