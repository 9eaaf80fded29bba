#![no_main]

use cfj::semantics::eval;
use cfj::{check_program, parse_program};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    let Ok(p) = parse_program(src) else { return };
    let _ = check_program(&p);
    let _ = eval(&p, &p.main, 64);
});
