use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, Condvar, Mutex, MutexGuard, RwLock};
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::Value;

use super::machine::{command_target, completion_target, Command, SkillState};
use super::{type_accepts, InvokeError, Invocation, RuntimeError, SkillAccess, SkillDescriptor, SkillRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Done,
    /// Only honored in `Execute`: the skill stays there until completed
    /// externally or commanded away.
    Stay,
}

/// What a behavior sees while it runs: parameter values and the output map.
pub struct SkillContext<'a> {
    parameters: &'a BTreeMap<String, Value>,
    outputs: &'a mut BTreeMap<String, Value>,
}

impl SkillContext<'_> {
    pub fn parameter(&self, name: &str) -> Option<&Value> {
        self.parameters.get(name).filter(|v| !v.is_null())
    }

    pub fn str_parameter(&self, name: &str) -> Result<&str, String> {
        self.parameter(name)
            .and_then(Value::as_str)
            .ok_or_else(|| format!("parameter '{name}' is not set"))
    }

    pub fn number_parameter(&self, name: &str) -> Result<f64, String> {
        self.parameter(name)
            .and_then(Value::as_f64)
            .ok_or_else(|| format!("parameter '{name}' is not set"))
    }

    pub fn set_output(&mut self, name: &str, value: impl Into<Value>) {
        self.outputs.insert(name.to_owned(), value.into());
    }
}

/// Behavior run in every acting state. An `Err` or a panic makes the skill
/// abort itself.
pub trait SkillBehavior: Send {
    fn on_state(&mut self, state: SkillState, ctx: &mut SkillContext<'_>) -> Result<StepOutcome, String>;
}

impl<F> SkillBehavior for F
where
    F: FnMut(SkillState, &mut SkillContext<'_>) -> Result<StepOutcome, String> + Send,
{
    fn on_state(&mut self, state: SkillState, ctx: &mut SkillContext<'_>) -> Result<StepOutcome, String> {
        self(state, ctx)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommandOutcome {
    pub state: SkillState,
    /// Every state entered by the command, ending in `state`.
    pub path: Vec<SkillState>,
}

struct SkillInstance {
    descriptor: SkillDescriptor,
    state: SkillState,
    parameters: BTreeMap<String, Value>,
    outputs: BTreeMap<String, Value>,
    behavior: Box<dyn SkillBehavior>,
    /// States entered since the last `Starting`.
    journal: Vec<SkillState>,
    last_error: Option<String>,
}

impl SkillInstance {
    fn new(descriptor: SkillDescriptor, behavior: Box<dyn SkillBehavior>) -> Self {
        let parameters = descriptor
            .parameters
            .iter()
            .map(|p| (p.name.clone(), p.default.clone().unwrap_or(Value::Null)))
            .collect();
        SkillInstance {
            descriptor,
            state: SkillState::Idle,
            parameters,
            outputs: BTreeMap::new(),
            behavior,
            journal: Vec::new(),
            last_error: None,
        }
    }

    fn command(&mut self, command: Command) -> Result<CommandOutcome, RuntimeError> {
        let target = command_target(self.state, command)
            .ok_or(RuntimeError::CommandRejected { state: self.state, command })?;
        Ok(self.enter(target))
    }

    fn complete(&mut self) -> Result<CommandOutcome, RuntimeError> {
        if self.state != SkillState::Execute {
            return Err(RuntimeError::WrongState(self.state));
        }
        Ok(self.enter(SkillState::Completing))
    }

    fn enter(&mut self, first: SkillState) -> CommandOutcome {
        let mut path = Vec::new();
        let mut next = Some(first);
        while let Some(state) = next {
            self.state = state;
            if state == SkillState::Starting {
                self.outputs.clear();
                self.journal.clear();
                self.last_error = None;
            }
            self.journal.push(state);
            path.push(state);
            if !state.is_acting() {
                break;
            }
            next = match self.run_behavior(state) {
                Ok(StepOutcome::Stay) if state == SkillState::Execute => None,
                Ok(_) => completion_target(state),
                Err(message) => {
                    log::warn!("skill {} failed in {state}: {message}", self.descriptor.skill_ref());
                    self.last_error = Some(message);
                    if state == SkillState::Aborting {
                        Some(SkillState::Aborted)
                    } else {
                        Some(SkillState::Aborting)
                    }
                }
            };
        }
        CommandOutcome { state: self.state, path }
    }

    fn run_behavior(&mut self, state: SkillState) -> Result<StepOutcome, String> {
        let mut ctx = SkillContext { parameters: &self.parameters, outputs: &mut self.outputs };
        let behavior = &mut self.behavior;
        match catch_unwind(AssertUnwindSafe(|| behavior.on_state(state, &mut ctx))) {
            Ok(result) => result,
            Err(panic) => Err(panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "behavior panicked".to_owned())),
        }
    }

    fn set_parameters(&mut self, values: &BTreeMap<String, Value>) -> Result<(), RuntimeError> {
        if !matches!(self.state, SkillState::Idle | SkillState::Completed) {
            return Err(RuntimeError::WrongState(self.state));
        }
        for (name, value) in values {
            let spec = self.descriptor.parameter(name).ok_or_else(|| RuntimeError::UnknownName(name.clone()))?;
            if !type_accepts(&spec.ty, value) {
                return Err(RuntimeError::TypeMismatch { name: name.clone(), expected: spec.ty.clone() });
            }
        }
        self.parameters.extend(values.iter().map(|(k, v)| (k.clone(), v.clone())));
        Ok(())
    }

    fn outputs(&self) -> Result<BTreeMap<String, Value>, RuntimeError> {
        if !matches!(self.state, SkillState::Completing | SkillState::Completed) {
            return Err(RuntimeError::WrongState(self.state));
        }
        Ok(self.outputs.clone())
    }
}

struct Entry {
    instance: Mutex<SkillInstance>,
    changed: Condvar,
}

impl Entry {
    fn lock(&self) -> MutexGuard<'_, SkillInstance> {
        self.instance.lock().unwrap_or_else(|e| e.into_inner())
    }
}

/// Thread-safe skill registry. Commands to one skill are serialized; distinct
/// skills run concurrently.
pub struct SkillRegistry {
    entries: RwLock<Vec<(SkillRef, Arc<Entry>)>>,
    settle_timeout: Duration,
}

impl Default for SkillRegistry {
    fn default() -> Self {
        SkillRegistry::new()
    }
}

impl SkillRegistry {
    pub fn new() -> Self {
        SkillRegistry { entries: RwLock::new(Vec::new()), settle_timeout: Duration::from_secs(60) }
    }

    /// How long [`SkillAccess::invoke`] waits for a skill resting in
    /// Execute, Held or Suspended before aborting it.
    pub fn with_settle_timeout(mut self, timeout: Duration) -> Self {
        self.settle_timeout = timeout;
        self
    }

    pub fn register(&self, descriptor: SkillDescriptor, behavior: Box<dyn SkillBehavior>) -> Result<SkillRef, RuntimeError> {
        let id = descriptor.skill_ref();
        let mut entries = self.entries.write().unwrap_or_else(|e| e.into_inner());
        if entries.iter().any(|(r, _)| r == &id) {
            return Err(RuntimeError::DuplicateSkill(id));
        }
        let entry = Entry { instance: Mutex::new(SkillInstance::new(descriptor, behavior)), changed: Condvar::new() };
        entries.push((id.clone(), Arc::new(entry)));
        log::info!("registered skill {id}");
        Ok(id)
    }

    fn entry(&self, id: &SkillRef) -> Result<Arc<Entry>, RuntimeError> {
        let entries = self.entries.read().unwrap_or_else(|e| e.into_inner());
        entries
            .iter()
            .find(|(r, _)| r == id)
            .map(|(_, e)| Arc::clone(e))
            .ok_or_else(|| RuntimeError::UnknownSkill(id.clone()))
    }

    /// Descriptors in registration order.
    pub fn list(&self) -> Vec<SkillDescriptor> {
        let entries: Vec<Arc<Entry>> =
            self.entries.read().unwrap_or_else(|e| e.into_inner()).iter().map(|(_, e)| Arc::clone(e)).collect();
        entries.iter().map(|e| e.lock().descriptor.clone()).collect()
    }

    pub fn get_descriptor(&self, id: &SkillRef) -> Result<SkillDescriptor, RuntimeError> {
        Ok(self.entry(id)?.lock().descriptor.clone())
    }

    pub fn state(&self, id: &SkillRef) -> Result<SkillState, RuntimeError> {
        Ok(self.entry(id)?.lock().state)
    }

    /// States entered since the last `Starting`.
    pub fn journal(&self, id: &SkillRef) -> Result<Vec<SkillState>, RuntimeError> {
        Ok(self.entry(id)?.lock().journal.clone())
    }

    pub fn last_error(&self, id: &SkillRef) -> Result<Option<String>, RuntimeError> {
        Ok(self.entry(id)?.lock().last_error.clone())
    }

    pub fn command(&self, id: &SkillRef, command: Command) -> Result<CommandOutcome, RuntimeError> {
        let entry = self.entry(id)?;
        let outcome = entry.lock().command(command);
        entry.changed.notify_all();
        outcome
    }

    /// Finishes an `Execute` phase that a behavior kept open.
    pub fn complete(&self, id: &SkillRef) -> Result<CommandOutcome, RuntimeError> {
        let entry = self.entry(id)?;
        let outcome = entry.lock().complete();
        entry.changed.notify_all();
        outcome
    }

    pub fn set_parameter(&self, id: &SkillRef, name: &str, value: Value) -> Result<(), RuntimeError> {
        self.set_parameters(id, &BTreeMap::from([(name.to_owned(), value)]))
    }

    /// Writes all values or none.
    pub fn set_parameters(&self, id: &SkillRef, values: &BTreeMap<String, Value>) -> Result<(), RuntimeError> {
        self.entry(id)?.lock().set_parameters(values)
    }

    pub fn get_output(&self, id: &SkillRef, name: &str) -> Result<Value, RuntimeError> {
        let entry = self.entry(id)?;
        let instance = entry.lock();
        if instance.descriptor.output(name).is_none() {
            return Err(RuntimeError::UnknownName(name.to_owned()));
        }
        Ok(instance.outputs()?.get(name).cloned().unwrap_or(Value::Null))
    }

    pub fn outputs(&self, id: &SkillRef) -> Result<BTreeMap<String, Value>, RuntimeError> {
        self.entry(id)?.lock().outputs()
    }
}

fn settled_for_engine(state: SkillState) -> bool {
    matches!(state, SkillState::Completed | SkillState::Aborted | SkillState::Stopped | SkillState::Idle)
}

impl SkillAccess for SkillRegistry {
    fn descriptor(&self, skill: &SkillRef) -> Result<Option<SkillDescriptor>, InvokeError> {
        match self.get_descriptor(skill) {
            Ok(d) => Ok(Some(d)),
            Err(RuntimeError::UnknownSkill(_)) => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    fn invoke(&self, skill: &SkillRef, parameters: &BTreeMap<String, Value>) -> Result<Invocation, InvokeError> {
        let entry = self.entry(skill)?;
        let mut instance = entry.lock();
        if instance.state == SkillState::Completed {
            instance.command(Command::Reset)?;
        }
        if instance.state != SkillState::Idle {
            return Err(RuntimeError::WrongState(instance.state).into());
        }
        instance.set_parameters(parameters)?;
        instance.command(Command::Start)?;
        entry.changed.notify_all();

        let deadline = Instant::now() + self.settle_timeout;
        while !settled_for_engine(instance.state) {
            let now = Instant::now();
            if now >= deadline {
                log::warn!("skill {skill} did not settle, aborting it");
                instance.command(Command::Abort)?;
                entry.changed.notify_all();
                break;
            }
            instance = entry.changed.wait_timeout(instance, deadline - now).unwrap_or_else(|e| e.into_inner()).0;
        }

        let outputs = if instance.state == SkillState::Completed { instance.outputs.clone() } else { BTreeMap::new() };
        Ok(Invocation { state: instance.state, path: instance.journal.clone(), outputs })
    }
}
