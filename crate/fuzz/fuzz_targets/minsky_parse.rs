#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = bpcov::minsky::parse_minsky(text) {
        let printed = bpcov::minsky::print_minsky(&m);
        let m2 = bpcov::minsky::parse_minsky(&printed).expect("round trip");
        assert_eq!(m, m2);
    }
});
