//! Every config ingestion path must reject arbitrary bytes with an
//! error, never a panic, and accepted configs must satisfy their own
//! validators.

#![no_main]

use gbbm_kam::config::{
    from_json, AnalyzeConfig, DivisorsConfig, FreqMapConfig, NormalFormConfig, Validate,
    VerifyAllConfig,
};
use gbbm_kam::dynamics::SimConfig;
use libfuzzer_sys::fuzz_target;

fn ingest<T: for<'de> serde::Deserialize<'de> + Validate>(text: &str) {
    if let Ok(cfg) = from_json::<T>(text) {
        // from_json validates; re-validating must agree.
        cfg.validate().expect("accepted config fails its own validator");
    }
}

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        ingest::<DivisorsConfig>(text);
        ingest::<NormalFormConfig>(text);
        ingest::<FreqMapConfig>(text);
        ingest::<SimConfig>(text);
        ingest::<AnalyzeConfig>(text);
        ingest::<VerifyAllConfig>(text);
    }
});
