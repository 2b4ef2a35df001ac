#![no_main]

use libfuzzer_sys::fuzz_target;
use qkdgame::game::LinearExpr;

fuzz_target!(|data: &str| {
    if let Ok(e) = data.parse::<LinearExpr>() {
        // Display rounds coefficients, so only re-parsing is guaranteed.
        e.to_string().parse::<LinearExpr>().expect("rendered expression parses");
    }
});
