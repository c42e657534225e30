//! The fixed skill lifecycle.
//!
//! Commands move a settled state into an acting state; acting states advance
//! on their own once their behavior has run. `Execute` is the only acting
//! state a behavior may keep the machine in.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SkillState {
    Stopped,
    Resetting,
    Idle,
    Starting,
    Execute,
    Completing,
    Completed,
    Holding,
    Held,
    Unholding,
    Suspending,
    Suspended,
    Unsuspending,
    Stopping,
    Aborting,
    Aborted,
    Clearing,
}

impl SkillState {
    pub const ALL: [SkillState; 17] = [
        SkillState::Stopped,
        SkillState::Resetting,
        SkillState::Idle,
        SkillState::Starting,
        SkillState::Execute,
        SkillState::Completing,
        SkillState::Completed,
        SkillState::Holding,
        SkillState::Held,
        SkillState::Unholding,
        SkillState::Suspending,
        SkillState::Suspended,
        SkillState::Unsuspending,
        SkillState::Stopping,
        SkillState::Aborting,
        SkillState::Aborted,
        SkillState::Clearing,
    ];

    /// States that run a behavior. `Execute` counts as acting.
    pub fn is_acting(self) -> bool {
        self == SkillState::Execute || self.name().ends_with("ing")
    }

    pub fn name(self) -> &'static str {
        match self {
            SkillState::Stopped => "Stopped",
            SkillState::Resetting => "Resetting",
            SkillState::Idle => "Idle",
            SkillState::Starting => "Starting",
            SkillState::Execute => "Execute",
            SkillState::Completing => "Completing",
            SkillState::Completed => "Completed",
            SkillState::Holding => "Holding",
            SkillState::Held => "Held",
            SkillState::Unholding => "Unholding",
            SkillState::Suspending => "Suspending",
            SkillState::Suspended => "Suspended",
            SkillState::Unsuspending => "Unsuspending",
            SkillState::Stopping => "Stopping",
            SkillState::Aborting => "Aborting",
            SkillState::Aborted => "Aborted",
            SkillState::Clearing => "Clearing",
        }
    }

    pub fn parse(text: &str) -> Option<SkillState> {
        SkillState::ALL.into_iter().find(|s| s.name() == text)
    }
}

impl fmt::Display for SkillState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Command {
    Reset,
    Start,
    Hold,
    Unhold,
    Suspend,
    Unsuspend,
    Stop,
    Abort,
    Clear,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Reset,
        Command::Start,
        Command::Hold,
        Command::Unhold,
        Command::Suspend,
        Command::Unsuspend,
        Command::Stop,
        Command::Abort,
        Command::Clear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Reset => "Reset",
            Command::Start => "Start",
            Command::Hold => "Hold",
            Command::Unhold => "Unhold",
            Command::Suspend => "Suspend",
            Command::Unsuspend => "Unsuspend",
            Command::Stop => "Stop",
            Command::Abort => "Abort",
            Command::Clear => "Clear",
        }
    }

    pub fn parse(text: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == text)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The acting state a command leads to, or `None` if the table has no entry.
pub fn command_target(state: SkillState, command: Command) -> Option<SkillState> {
    use SkillState::*;
    match (command, state) {
        (Command::Start, Idle) => Some(Starting),
        (Command::Reset, Completed | Stopped) => Some(Resetting),
        (Command::Hold, Execute) => Some(Holding),
        (Command::Unhold, Held) => Some(Unholding),
        (Command::Suspend, Execute) => Some(Suspending),
        (Command::Unsuspend, Suspended) => Some(Unsuspending),
        (Command::Stop, Stopped | Stopping | Aborting | Aborted | Clearing) => None,
        (Command::Stop, _) => Some(Stopping),
        (Command::Abort, Aborting | Aborted | Clearing) => None,
        (Command::Abort, _) => Some(Aborting),
        (Command::Clear, Aborted) => Some(Clearing),
        _ => None,
    }
}

/// Successor of an acting state once its behavior has finished.
pub fn completion_target(state: SkillState) -> Option<SkillState> {
    use SkillState::*;
    match state {
        Starting => Some(Execute),
        Execute => Some(Completing),
        Completing => Some(Completed),
        Resetting => Some(Idle),
        Holding => Some(Held),
        Unholding => Some(Execute),
        Suspending => Some(Suspended),
        Unsuspending => Some(Execute),
        Stopping => Some(Stopped),
        Aborting => Some(Aborted),
        Clearing => Some(Stopped),
        _ => None,
    }
}

/// True if `from -> to` is a step the machine may ever take: a command entry,
/// an automatic completion, or the self-abort of a failing acting state.
pub fn is_table_step(from: SkillState, to: SkillState) -> bool {
    Command::ALL.iter().any(|c| command_target(from, *c) == Some(to))
        || completion_target(from) == Some(to)
        || (from.is_acting() && to == SkillState::Aborting)
}
