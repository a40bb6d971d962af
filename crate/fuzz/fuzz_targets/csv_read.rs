#![no_main]

use libfuzzer_sys::fuzz_target;
use shrinkcov::csv_io::{parse_csv, to_csv_string};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(rows) = parse_csv(text) else {
        return;
    };
    assert!(rows.iter().all(|r| r.stderr >= 0.0));
    // Rendering is idempotent after one pass through the reader.
    let once = to_csv_string(&rows).expect("render");
    let back = parse_csv(&once).expect("rendered CSV parses");
    assert_eq!(back.len(), rows.len());
    assert_eq!(to_csv_string(&back).expect("render"), once);
});
