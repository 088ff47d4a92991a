#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(expr) = lorcp::expr::parser::parse(src) {
        // exercise evaluation and differentiation on anything that parses
        let _ = expr.eval(0.5);
        let d = expr.diff();
        let _ = d.eval(-1.25);
    }
});
