#![no_main]

use libfuzzer_sys::fuzz_target;
use logpot::lang::parse_value;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(v) = parse_value(src) {
        let text = v.to_string();
        assert_eq!(parse_value(&text).expect("printed value parses"), v, "{text}");
    }
});
