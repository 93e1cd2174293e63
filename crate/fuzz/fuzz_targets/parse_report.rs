#![no_main]

use libfuzzer_sys::fuzz_target;
use tractlab_core::harness::{compare_reports, Report};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(r) = Report::from_json(text) {
        let _ = r.checks_csv();
        let diff = compare_reports(&r, &r).unwrap();
        assert!(diff.max_relative == 0.0 || diff.max_relative.is_nan());
    }
});
