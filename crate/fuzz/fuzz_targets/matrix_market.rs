#![no_main]

use cylscale::io::mtx::{parse_matrix_market, to_matrix_market};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(a) = parse_matrix_market(text) else { return };
    let b = parse_matrix_market(&to_matrix_market(&a, None)).unwrap();
    assert_eq!(a, b);
});
