#![no_main]

use graphon_core::homomorphism::{hom_count, Motif};
use graphon_core::Graph;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(m) = s.parse::<Motif>() {
        let again: Motif = m.to_string().parse().expect("display output parses");
        assert_eq!(m, again);
        let _ = hom_count(&m, &Graph::complete(3));
    }
});
