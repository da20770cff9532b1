#![no_main]

use libfuzzer_sys::fuzz_target;
use sparqlog::datalog::{check_warded, parse_program, render_program, stratify};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_program(text) {
        let _ = stratify(&p);
        let _ = check_warded(&p);
        assert_eq!(parse_program(&render_program(&p)).expect("rendered program parses"), p);
    }
});
