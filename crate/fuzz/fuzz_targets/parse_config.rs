#![no_main]

use libfuzzer_sys::fuzz_target;
use tractlab_core::harness::RunConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = RunConfig::from_json(text) {
            // accepted configs must survive serialization unchanged
            let again = serde_json::to_string(&cfg).unwrap();
            assert_eq!(RunConfig::from_json(&again).unwrap(), cfg);
        }
    }
});
