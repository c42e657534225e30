//! Scripted skills driven by random command sequences.

#![allow(dead_code)]

use std::sync::{Arc, Mutex};

use proptest::prelude::*;
use skillforge_core::model::CommType;
use skillforge_core::runtime::machine::{command_target, is_table_step};
use skillforge_core::runtime::*;

/// What the behavior does the next time it is called.
#[derive(Debug, Clone, Copy)]
pub enum Reaction {
    Done,
    Stay,
    Fail,
    Panic,
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Cmd(Command),
    Complete,
}

fn reaction() -> impl Strategy<Value = Reaction> {
    prop_oneof![6 => Just(Reaction::Done), 2 => Just(Reaction::Stay), 1 => Just(Reaction::Fail), 1 => Just(Reaction::Panic)]
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![8 => prop::sample::select(Command::ALL.to_vec()).prop_map(Op::Cmd), 1 => Just(Op::Complete)]
}

pub fn scripted(script: Vec<Reaction>) -> (SkillRegistry, SkillRef) {
    let descriptor = SkillDescriptor {
        module_name: "Fuzz".into(),
        skill_name: "Scripted".into(),
        comm_type: CommType::OpcUa,
        parameters: vec![],
        outputs: vec![],
        description: "replays a reaction script".into(),
    };
    let cursor = Arc::new(Mutex::new(0usize));
    let behavior = move |_: SkillState, _: &mut SkillContext<'_>| {
        let mut i = cursor.lock().unwrap();
        let r = script.get(*i).copied().unwrap_or(Reaction::Done);
        *i += 1;
        drop(i);
        match r {
            Reaction::Done => Ok(StepOutcome::Done),
            Reaction::Stay => Ok(StepOutcome::Stay),
            Reaction::Fail => Err("scripted failure".to_owned()),
            Reaction::Panic => panic!("scripted panic"),
        }
    };
    let reg = SkillRegistry::new();
    let id = reg.register(descriptor, Box::new(behavior)).unwrap();
    (reg, id)
}

fn check_path(from: SkillState, path: &[SkillState]) -> Result<(), TestCaseError> {
    let mut prev = from;
    for &s in path {
        prop_assert!(SkillState::ALL.contains(&s));
        prop_assert!(is_table_step(prev, s), "{prev} -> {s} is not in the table");
        prev = s;
    }
    Ok(())
}

fn run_sequence(script: Vec<Reaction>, ops: Vec<Op>) -> Result<(), TestCaseError> {
    let (reg, id) = scripted(script);
    for op in ops {
        let before = reg.state(&id).unwrap();
        let result = match op {
            Op::Cmd(c) => reg.command(&id, c),
            Op::Complete => reg.complete(&id),
        };
        let after = reg.state(&id).unwrap();
        match result {
            Ok(outcome) => {
                check_path(before, &outcome.path)?;
                prop_assert_eq!(outcome.state, after);
                prop_assert!(!after.is_acting() || after == SkillState::Execute);
                if op_is_abort(op) {
                    prop_assert_eq!(after, SkillState::Aborted);
                }
            }
            Err(RuntimeError::CommandRejected { state, command }) => {
                prop_assert_eq!(state, before);
                prop_assert_eq!(command_target(before, command), None);
                prop_assert_eq!(after, before);
            }
            Err(RuntimeError::WrongState(s)) => {
                prop_assert!(matches!(op, Op::Complete));
                prop_assert_ne!(s, SkillState::Execute);
                prop_assert_eq!(after, before);
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
    Ok(())
}

fn op_is_abort(op: Op) -> bool {
    matches!(op, Op::Cmd(Command::Abort))
}

/// Drives a fresh skill into `target` with a well-behaved script.
fn reach(target: SkillState) -> Option<(SkillRegistry, SkillRef)> {
    use Command::*;
    let stay_in_execute = [Reaction::Done, Reaction::Stay];
    let (plan, script): (Vec<Command>, Vec<Reaction>) = match target {
        SkillState::Idle => (vec![], vec![]),
        SkillState::Execute => (vec![Start], stay_in_execute.to_vec()),
        SkillState::Completed => (vec![Start], vec![]),
        SkillState::Held => (vec![Start, Hold], stay_in_execute.to_vec()),
        SkillState::Suspended => (vec![Start, Suspend], stay_in_execute.to_vec()),
        SkillState::Stopped => (vec![Stop], vec![]),
        SkillState::Aborted => (vec![Abort], vec![]),
        _ => return None,
    };
    let (reg, id) = scripted(script);
    for c in plan {
        reg.command(&id, c).unwrap();
    }
    assert_eq!(reg.state(&id).unwrap(), target);
    Some((reg, id))
}

/// Runs `cases` random scripts and command sequences against fresh skills.
pub fn random_command_sequences(cases: u32) -> Result<(), String> {
    let config = ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() };
    let mut runner = proptest::test_runner::TestRunner::new(config);
    let strategy = (prop::collection::vec(reaction(), 0..40), prop::collection::vec(op(), 1..40));
    // scripted panics are expected, keep them off stderr
    let hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let result = runner.run(&strategy, |(script, ops)| run_sequence(script, ops));
    std::panic::set_hook(hook);
    result.map_err(|e| e.to_string())
}

/// Sends Abort from every state a well-behaved skill can be parked in and
/// returns how many states were checked.
pub fn abort_from_every_eligible_state() -> Result<usize, String> {
    let mut covered = 0;
    for state in SkillState::ALL {
        let Some((reg, id)) = reach(state) else { continue };
        if command_target(state, Command::Abort).is_none() {
            if state != SkillState::Aborted {
                return Err(format!("Abort is not accepted in {state}"));
            }
            continue;
        }
        let outcome = reg.command(&id, Command::Abort).map_err(|e| format!("from {state}: {e}"))?;
        if outcome.state != SkillState::Aborted || outcome.path != [SkillState::Aborting, SkillState::Aborted] {
            return Err(format!("from {state}: {:?}", outcome.path));
        }
        covered += 1;
    }
    Ok(covered)
}

/// Byte encoding of the `skill_commands` fuzz target: the low nibble picks a
/// command (past the last one: a completion), the high nibble the behavior's
/// next reaction.
pub fn replay_bytes(data: &[u8]) -> Result<(), TestCaseError> {
    let script = data
        .iter()
        .map(|b| match b >> 4 {
            0..=9 => Reaction::Done,
            10..=13 => Reaction::Stay,
            _ => Reaction::Fail,
        })
        .collect();
    let ops = data
        .iter()
        .map(|b| Command::ALL.get(usize::from(b & 0x0f)).map_or(Op::Complete, |&c| Op::Cmd(c)))
        .collect();
    run_sequence(script, ops)
}
