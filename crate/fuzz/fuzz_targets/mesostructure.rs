#![no_main]

use chloride_core::io::{parse_mesostructure, write_mesostructure, ArtifactHeader};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(file) = parse_mesostructure(text) {
        let m = file.mesostructure;
        let header = ArtifactHeader::new("fuzz", m.seed);
        let back = parse_mesostructure(&write_mesostructure(&m, &header)).expect("written text parses");
        assert_eq!(back.mesostructure, m);
    }
});
