#![no_main]

use chloride_core::io::{parse_field, write_field, ArtifactHeader};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(file) = parse_field(text) {
        let back = parse_field(&write_field(&file.field, &ArtifactHeader::new("fuzz", 0))).expect("written field parses");
        assert_eq!(back.field.values, file.field.values);
        assert_eq!(back.field.grid.codes, file.field.grid.codes);
    }
});
