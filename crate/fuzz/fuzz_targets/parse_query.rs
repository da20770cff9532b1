#![no_main]

use libfuzzer_sys::fuzz_target;
use sparqlog::datalog::{parse_program, render_program};
use sparqlog::sparql::parse_query;
use sparqlog::translator::translate_query;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(q) = parse_query(text) else { return };
    let again = parse_query(&q.to_string()).expect("printed query parses");
    assert_eq!(again, q);
    if let Ok(p) = translate_query(&q) {
        let rendered = render_program(&p);
        assert_eq!(parse_program(&rendered).expect("rendered program parses"), p);
    }
});
