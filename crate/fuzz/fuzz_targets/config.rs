#![no_main]

use libfuzzer_sys::fuzz_target;
use logvoa::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::parse(text) {
        // Rendering fills in derived bounds, so compare effective settings.
        let again = RunConfig::parse(&cfg.render()).expect("rendered config parses");
        assert_eq!(again.render(), cfg.render());
        assert_eq!(again.bounds(), cfg.bounds());
        assert_eq!(again.insertions().ok(), cfg.insertions().ok());
    }
});
