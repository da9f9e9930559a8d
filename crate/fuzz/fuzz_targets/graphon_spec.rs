#![no_main]

use graphon_core::BuiltinGraphon;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(w) = s.parse::<BuiltinGraphon>() {
        let again: BuiltinGraphon = w.to_string().parse().expect("display output parses");
        assert_eq!(w, again);
        let v = w.value(0.25, 0.75);
        assert!((0.0..=1.0).contains(&v));
    }
});
