#![no_main]

use libfuzzer_sys::fuzz_target;
use logvoa::blocks::parse_report_csv;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(parsed) = parse_report_csv(text) {
        for r in &parsed.rows {
            assert_eq!(r.quotient_dim + r.image_rank, r.ambient_dim);
        }
    }
});
