#![no_main]

use libfuzzer_sys::fuzz_target;
use logvoa::config::parse_coords_input;
use logvoa::coordact::{expand_exponential, solve_exp_coords};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // The solve is polynomial in the order; keep inputs short.
    if text.len() > 256 {
        return;
    }
    if let Ok(f) = parse_coords_input(text) {
        if f.coefficients().len() <= 8 {
            assert_eq!(expand_exponential(&solve_exp_coords(&f)), f);
        }
    }
});
