#![no_main]

use libfuzzer_sys::fuzz_target;
use qkdgame::game::WeightAssignment;

fuzz_target!(|data: &str| {
    if let Ok(w) = WeightAssignment::from_json(data) {
        assert_eq!(WeightAssignment::from_json(&w.to_json()).unwrap(), w);
    }
});
