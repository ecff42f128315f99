#![no_main]

use libfuzzer_sys::fuzz_target;
use sns_core::cli::parse_config_text;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = parse_config_text(text) {
        let again = parse_config_text(&cfg.canonical_text()).expect("canonical text parses");
        assert_eq!(again, cfg);
    }
});
