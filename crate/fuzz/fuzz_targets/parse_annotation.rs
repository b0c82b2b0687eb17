#![no_main]

use libfuzzer_sys::fuzz_target;
use logpot::potential::parse_annotation;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(q) = parse_annotation(src) {
        let text = q.to_string();
        assert_eq!(parse_annotation(&text).expect("printed annotation parses"), q, "{text}");
    }
});
