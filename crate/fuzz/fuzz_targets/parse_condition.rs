#![no_main]

use libfuzzer_sys::fuzz_target;
use skillforge_core::engine::condition::{Condition, Guard};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = Guard::parse(text);
    let Ok(condition) = Condition::parse(text) else { return };
    let printed = condition.to_string();
    assert_eq!(Condition::parse(&printed).as_ref(), Ok(&condition), "{printed}");
});
