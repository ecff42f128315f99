#![no_main]

use libfuzzer_sys::fuzz_target;
use sns_core::dump;

fuzz_target!(|data: &[u8]| {
    if let Ok(field) = dump::decode(data) {
        assert_eq!(dump::encode(&field), data);
    }
});
