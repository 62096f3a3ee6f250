#![no_main]

use chloride_core::io::{parse_grid, write_grid, ArtifactHeader};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(file) = parse_grid(text) {
        let back = parse_grid(&write_grid(&file.grid, &ArtifactHeader::new("fuzz", 0))).expect("written grid parses");
        assert_eq!(back.grid, file.grid);
    }
});
