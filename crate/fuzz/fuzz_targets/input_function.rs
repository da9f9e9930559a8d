#![no_main]

use graphon_core::input::InputFunction;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(f) = s.parse::<InputFunction>() {
        let again: InputFunction = f.to_string().parse().expect("display output parses");
        assert_eq!(f, again);
    }
});
