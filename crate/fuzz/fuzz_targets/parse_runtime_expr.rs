#![no_main]

use std::sync::LazyLock;

use cfj::{parse_program, parse_runtime_expr, Program};
use libfuzzer_sys::fuzz_target;

static TABLES: LazyLock<Program> =
    LazyLock::new(|| parse_program(include_str!("../../crates/core/fixtures/lookup2.cfj")).unwrap());

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(e) = parse_runtime_expr(&TABLES, src) {
        let text = e.to_string();
        let again = parse_runtime_expr(&TABLES, &text).expect("rendered expression reparses");
        assert_eq!(again, e);
    }
});
