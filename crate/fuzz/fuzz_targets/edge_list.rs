#![no_main]

use graphon_core::Graph;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(g) = Graph::from_edge_list(s) {
        let text = g.to_edge_list();
        let again = Graph::from_edge_list(&text).unwrap();
        assert_eq!(again.to_edge_list(), text);
        assert_eq!(again.edge_count(), g.edge_count());
    }
});
