#![no_main]

use fpplab::ineqlab::Suite;
use fpplab::DistributionSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = text.parse::<Suite>();
    if let Ok(spec) = text.parse::<DistributionSpec>() {
        let shown = spec.to_string();
        let again: DistributionSpec = shown.parse().expect("displayed spec parses");
        assert_eq!(again.to_string(), shown);
        let _ = spec.inverse_cdf_unit(0.5);
    }
});
