#![no_main]

use libfuzzer_sys::fuzz_target;
use skillforge_core::io::{parse_model, serialize_model};
use skillforge_core::model::validate_model;

fuzz_target!(|data: &[u8]| {
    let Ok(model) = parse_model(data) else { return };
    let _ = validate_model(&model);
    let text = serialize_model(&model);
    let again = parse_model(text.as_bytes()).expect("canonical output parses");
    assert_eq!(again, model);
    assert_eq!(serialize_model(&again), text);
});
