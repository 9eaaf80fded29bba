#![no_main]

use cfj::harness::fixtures::Fixture;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(f) = Fixture::from_source("fuzz", src) {
        let _ = f.program();
    }
});
