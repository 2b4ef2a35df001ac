#![no_main]

use libfuzzer_sys::fuzz_target;
use qkdgame::game::Inequality;

fuzz_target!(|data: &str| {
    if let Ok(i) = data.parse::<Inequality>() {
        i.to_string().parse::<Inequality>().expect("rendered inequality parses");
        let _ = i.threshold_form();
    }
});
