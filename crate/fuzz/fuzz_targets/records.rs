#![no_main]

use fpplab::estimators::{CsvRecord, FppRecord, LppRecord, TorusRecord};
use libfuzzer_sys::fuzz_target;

fn round_trip<R: CsvRecord>(fields: &[&str]) {
    if let Ok(r) = R::from_fields(fields) {
        let out = r.to_fields();
        let refs: Vec<&str> = out.iter().map(String::as_str).collect();
        let again = R::from_fields(&refs).expect("written record parses");
        assert_eq!(again.to_fields(), out);
    }
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    for line in text.lines() {
        let fields: Vec<&str> = line.split(',').collect();
        round_trip::<FppRecord>(&fields);
        round_trip::<TorusRecord>(&fields);
        round_trip::<LppRecord>(&fields);
    }
});
