#![no_main]

use libfuzzer_sys::fuzz_target;

// Parsing arbitrary text must never panic, and accepted protocols must
// survive a print/parse round trip.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = bpcov::protocol::parse_protocol(text) {
        let printed = bpcov::protocol::print_protocol(&p);
        let reparsed = bpcov::protocol::parse_protocol(&printed)
            .expect("printed protocol parses back");
        assert_eq!(p, reparsed);
        // inference must terminate and, on success, verify
        if let bpcov::protocol::phase::PhaseInference::Bounded(part) =
            bpcov::protocol::phase::infer_phase_partition(&p)
        {
            bpcov::protocol::phase::check_partition(&p, &part).expect("partition verifies");
        }
    }
});
