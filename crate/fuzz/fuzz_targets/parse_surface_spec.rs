#![no_main]

use libfuzzer_sys::fuzz_target;
use tractlab_core::geometry::SurfaceSpec;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(spec) = s.parse::<SurfaceSpec>() {
            let back: SurfaceSpec = spec.to_string().parse().unwrap();
            assert_eq!(back.to_string(), spec.to_string());
        }
    }
});
