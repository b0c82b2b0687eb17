#![no_main]

use libfuzzer_sys::fuzz_target;
use logpot::potential::{parse_signatures, print_signatures};

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(sigs) = parse_signatures(src) {
        let text = print_signatures(&sigs);
        assert_eq!(parse_signatures(&text).expect("printed signatures parse"), sigs, "{text}");
    }
});
