#![no_main]

use chloride_core::io::parse_measured_profile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_measured_profile(text) {
        assert!(p.points.windows(2).all(|w| w[0].0 <= w[1].0));
    }
});
