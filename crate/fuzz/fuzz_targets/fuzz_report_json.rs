//! Canonical-JSON emission must round-trip any document serde_json can
//! parse, and the exact-rational wire form must reject bad strings
//! without panicking.

#![no_main]

use gbbm_kam::report::{to_canonical_json, RationalRepr};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(value) = serde_json::from_slice::<serde_json::Value>(data) {
        let canonical = to_canonical_json(&value).expect("canonical form exists");
        let reparsed: serde_json::Value =
            serde_json::from_str(&canonical).expect("canonical form re-parses");
        assert_eq!(reparsed, value, "canonical round trip changed the document");
    }
    if let Ok(repr) = serde_json::from_slice::<RationalRepr>(data) {
        // num/den strings straight from attacker-controlled JSON.
        let _ = repr.to_rational();
    }
});
