#![no_main]

use graphon_core::chebyshev::ChebCoeffVector;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(c) = ChebCoeffVector::read_csv(data, 10) {
        let mut out = Vec::new();
        c.write_csv(&mut out).unwrap();
        let again = ChebCoeffVector::read_csv(out.as_slice(), 10).unwrap();
        assert_eq!(c, again);
    }
});
