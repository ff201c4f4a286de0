#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(t) = bpcov::topology::parse_edge_file(text) {
        let printed = t.to_string();
        let t2 = bpcov::topology::parse_edge_file(&printed).expect("round trip");
        assert_eq!(t, t2);
    }
});
