#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok((v, init)) = bpcov::star_cover::parse_vass(text) {
        let printed = bpcov::star_cover::print_vass(&v, init);
        let (v2, init2) = bpcov::star_cover::parse_vass(&printed).expect("round trip");
        assert_eq!(v, v2);
        assert_eq!(init, init2);
    }
});
