#![no_main]

use libfuzzer_sys::fuzz_target;
use skillforge_core::bpmn::serialize_bpmn;
use skillforge_core::engine::load_process;

fuzz_target!(|data: &[u8]| {
    let Ok(xml) = std::str::from_utf8(data) else { return };
    let Ok(definition) = load_process(xml) else { return };
    let text = serialize_bpmn(&definition.doc);
    let again = load_process(&text).expect("serialized definition loads");
    assert_eq!(again.doc, definition.doc);
});
