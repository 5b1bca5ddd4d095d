#![no_main]

use fpplab::estimators::fit_chi;
use fpplab::report::variance_pairs;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(value) = serde_json::from_slice::<serde_json::Value>(data) else {
        return;
    };
    if let Ok(pairs) = variance_pairs(&value) {
        let _ = fit_chi(&pairs);
    }
});
