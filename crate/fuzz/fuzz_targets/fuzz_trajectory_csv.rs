//! The trajectory CSV reader consumes external files and must never
//! panic; accepted inputs must come back with the invariants the
//! analyzer relies on (matching column lengths, positive uniform dt,
//! finite values).

#![no_main]

use gbbm_kam::report::parse_trajectory_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(parsed) = parse_trajectory_csv(text) {
            let n = parsed.times.len();
            assert!(n >= 2);
            assert_eq!(parsed.z1.len(), n);
            assert_eq!(parsed.z2.len(), n);
            assert_eq!(parsed.h.len(), n);
            assert_eq!(parsed.e1.len(), n);
            assert!(parsed.sample_dt > 0.0);
            assert!(parsed.times.iter().all(|t| t.is_finite()));
            assert!(parsed.z1.iter().chain(&parsed.z2).all(|z| z.re.is_finite() && z.im.is_finite()));
        }
    }
});
