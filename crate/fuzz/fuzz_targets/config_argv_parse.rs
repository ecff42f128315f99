#![no_main]

use libfuzzer_sys::fuzz_target;
use sns_core::cli::parse_config_text;
use sns_core::cli::config::{merge, parse_argv};

// Arguments are separated by NUL bytes.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let args: Vec<String> = text.split('\0').map(str::to_string).collect();
    if let Ok(argv) = parse_argv(args) {
        if argv.config_path.is_some() {
            return;
        }
        if let Ok(cfg) = merge(argv, None) {
            assert_eq!(parse_config_text(&cfg.canonical_text()).expect("canonical text parses"), cfg);
        }
    }
});
