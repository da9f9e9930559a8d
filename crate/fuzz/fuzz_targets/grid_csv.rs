#![no_main]

use graphon_core::Graphon;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(w) = Graphon::read_grid_csv("fuzz", data) {
        let mut out = Vec::new();
        w.write_grid_csv(&mut out).unwrap();
        let again = Graphon::read_grid_csv("fuzz", out.as_slice()).unwrap();
        assert_eq!(w.grid(), again.grid());
    }
});
