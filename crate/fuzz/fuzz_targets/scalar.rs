#![no_main]

use libfuzzer_sys::fuzz_target;
use logvoa::exactalg::{format_scalar, parse_scalar};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(x) = parse_scalar(text) {
        assert_eq!(parse_scalar(&format_scalar(&x)).unwrap(), x);
    }
});
