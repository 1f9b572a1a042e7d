#![no_main]

use cylscale::io::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = RunConfig::from_json(text) else { return };
    // accepted configurations survive a round trip unchanged
    let again = RunConfig::from_json(&cfg.to_json().unwrap()).unwrap();
    assert_eq!(cfg, again);
});
