#![no_main]

use cfj::{parse_program, render_program};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_program(src) {
        let text = render_program(&p);
        let again = parse_program(&text).expect("rendered program reparses");
        assert_eq!(again.main, p.main);
        assert_eq!(render_program(&again), text);
    }
});
