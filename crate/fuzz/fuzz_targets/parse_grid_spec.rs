#![no_main]

use libfuzzer_sys::fuzz_target;
use tractlab_core::harness::GridSpec;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(g) = s.parse::<GridSpec>() {
            let back: GridSpec = g.to_string().parse().unwrap();
            assert_eq!(back, g);
            assert_eq!(g.values().len(), g.len());
        }
    }
});
