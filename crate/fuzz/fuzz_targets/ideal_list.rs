#![no_main]

use graphon_core::filter::IdealResponse;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(d) = IdealResponse::parse_list(s) {
        assert!(!d.is_empty());
        assert!(d.diagonal().iter().all(|v| v.is_finite()));
    }
});
