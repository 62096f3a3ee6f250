#![no_main]

use chloride_core::analysis::titration_concentration;
use chloride_core::io::parse_titration;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(records) = parse_titration(text) {
        for r in &records {
            let _ = titration_concentration(r);
        }
    }
});
