#![no_main]

//! Each input byte is one operation: the low nibble picks a command (or a
//! completion), the high nibble what the behavior does when next called.

use std::sync::{Arc, Mutex};

use libfuzzer_sys::fuzz_target;
use skillforge_core::model::CommType;
use skillforge_core::runtime::machine::{command_target, is_table_step};
use skillforge_core::runtime::{
    Command, RuntimeError, SkillContext, SkillDescriptor, SkillRegistry, SkillState, StepOutcome,
};

fuzz_target!(|data: &[u8]| {
    let reactions: Arc<Mutex<Vec<u8>>> = Arc::new(Mutex::new(data.iter().map(|b| b >> 4).rev().collect()));
    let script = Arc::clone(&reactions);
    let behavior = move |_: SkillState, _: &mut SkillContext<'_>| match script.lock().unwrap().pop().unwrap_or(0) {
        0..=9 => Ok(StepOutcome::Done),
        10..=13 => Ok(StepOutcome::Stay),
        _ => Err("fuzzed failure".to_owned()),
    };
    let descriptor = SkillDescriptor {
        module_name: "Fuzz".into(),
        skill_name: "Commands".into(),
        comm_type: CommType::OpcUa,
        parameters: vec![],
        outputs: vec![],
        description: "driven by fuzz input".into(),
    };
    let reg = SkillRegistry::new();
    let id = reg.register(descriptor, Box::new(behavior)).unwrap();

    for &byte in data {
        let before = reg.state(&id).unwrap();
        let pick = usize::from(byte & 0x0f);
        let result = match Command::ALL.get(pick) {
            Some(&c) => reg.command(&id, c).map(|o| (o, Some(c))),
            None => reg.complete(&id).map(|o| (o, None)),
        };
        let after = reg.state(&id).unwrap();
        match result {
            Ok((outcome, command)) => {
                let mut prev = before;
                for &s in &outcome.path {
                    assert!(is_table_step(prev, s), "{prev} -> {s}");
                    prev = s;
                }
                assert_eq!(outcome.state, after);
                if command == Some(Command::Abort) {
                    assert_eq!(after, SkillState::Aborted);
                }
            }
            Err(RuntimeError::CommandRejected { state, command }) => {
                assert_eq!(state, before);
                assert_eq!(command_target(before, command), None);
                assert_eq!(after, before);
            }
            Err(RuntimeError::WrongState(_)) => assert_eq!(after, before),
            Err(e) => panic!("unexpected error {e}"),
        }
    }
});
