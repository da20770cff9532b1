#![no_main]

use libfuzzer_sys::fuzz_target;
use sparqlog::rdf::{parse_ntriples, serialize_ntriples};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(triples) = parse_ntriples(text) {
        let again = parse_ntriples(&serialize_ntriples(&triples)).expect("serialized triples parse");
        assert_eq!(again, triples);
    }
});
