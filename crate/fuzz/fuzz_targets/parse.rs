#![no_main]

use libfuzzer_sys::fuzz_target;
use logpot::lang::{parse, print_program};

// Printing a parsed program gives text that parses to the same tree
// (positions aside).
fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse(src) {
        let text = print_program(&p);
        assert!(parse(&text).expect("printed program parses").same_ast(&p), "{text}");
    }
});
