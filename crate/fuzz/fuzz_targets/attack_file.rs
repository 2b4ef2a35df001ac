#![no_main]

use libfuzzer_sys::fuzz_target;
use qkdgame::attacks::load_attack;

fuzz_target!(|data: &str| {
    if let Ok(spec) = load_attack(data) {
        let again = load_attack(&spec.to_file_json()).expect("written attack file reloads");
        assert_eq!(again.name, spec.name);
    }
});
