use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use super::definition::ProcessDefinition;
use super::{BpmnError, DEADLOCK, MISSING_VARIABLE, SKILL_ABORTED, SKILL_STOPPED};
use crate::bpmn::{ElementKind, ParameterBinding, ServiceTask};
use crate::runtime::{InvokeError, RuntimeError, SkillAccess, SkillState};

/// Firings after which a run is cut off as non-terminating.
pub const DEFAULT_STEP_LIMIT: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceStatus {
    Running,
    Completed,
    Failed(String),
}

impl InstanceStatus {
    pub fn label(&self) -> &'static str {
        match self {
            InstanceStatus::Running => "Running",
            InstanceStatus::Completed => "Completed",
            InstanceStatus::Failed(_) => "Failed",
        }
    }

    pub fn error_code(&self) -> Option<&str> {
        match self {
            InstanceStatus::Failed(code) => Some(code),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum TraceKind {
    StartEvent,
    EndEvent,
    ServiceTask,
    Task,
    Gateway,
    SignalThrow,
    SignalCatch,
    ErrorRaised,
    ErrorCaught,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceEvent {
    pub seq: u64,
    pub timestamp_ms: u64,
    pub element_id: String,
    pub kind: TraceKind,
    pub detail: BTreeMap<String, Value>,
}

impl TraceEvent {
    /// The event without its timing fields, for comparing runs.
    pub fn signature(&self) -> (String, TraceKind, BTreeMap<String, Value>) {
        (self.element_id.clone(), self.kind, self.detail.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Token {
    element: String,
    via: Option<String>,
}

/// One execution of a process definition.
#[derive(Debug, Clone)]
pub struct ProcessInstance {
    pub instance_id: String,
    pub definition_id: String,
    definition: Arc<ProcessDefinition>,
    tokens: Vec<Token>,
    variables: BTreeMap<String, Value>,
    status: InstanceStatus,
    trace: Vec<TraceEvent>,
    /// Latched signal marks not yet consumed.
    latched: BTreeMap<String, u64>,
    /// Tokens on catch events released by a throw.
    released: BTreeMap<String, u64>,
    reached_end: bool,
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

impl ProcessInstance {
    /// Places one token on the start event.
    pub fn new(
        instance_id: impl Into<String>,
        definition_id: impl Into<String>,
        definition: Arc<ProcessDefinition>,
        variables: BTreeMap<String, Value>,
    ) -> Self {
        let start = definition.start_event().id.clone();
        ProcessInstance {
            instance_id: instance_id.into(),
            definition_id: definition_id.into(),
            definition,
            tokens: vec![Token { element: start, via: None }],
            variables,
            status: InstanceStatus::Running,
            trace: Vec::new(),
            latched: BTreeMap::new(),
            released: BTreeMap::new(),
            reached_end: false,
        }
    }

    pub fn status(&self) -> &InstanceStatus {
        &self.status
    }

    pub fn variables(&self) -> &BTreeMap<String, Value> {
        &self.variables
    }

    pub fn trace(&self) -> &[TraceEvent] {
        &self.trace
    }

    pub fn definition(&self) -> &ProcessDefinition {
        &self.definition
    }

    /// Element ids currently holding a token, one entry per token.
    pub fn tokens(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.element.as_str()).collect()
    }

    /// Trace as JSON lines, one event per line.
    pub fn trace_json_lines(&self) -> String {
        self.trace
            .iter()
            .map(|e| serde_json::to_string(e).expect("trace events serialize") + "\n")
            .collect()
    }

    /// Service task events as (skill, settled state) pairs.
    pub fn service_task_trace(&self) -> Vec<(String, String)> {
        self.trace
            .iter()
            .filter(|e| e.kind == TraceKind::ServiceTask)
            .map(|e| {
                let s = |k: &str| e.detail.get(k).and_then(Value::as_str).unwrap_or("").to_owned();
                (s("skill"), s("state"))
            })
            .collect()
    }

    fn record(&mut self, element: &str, kind: TraceKind, detail: BTreeMap<String, Value>) {
        let seq = self.trace.len() as u64 + 1;
        self.trace.push(TraceEvent { seq, timestamp_ms: now_ms(), element_id: element.to_owned(), kind, detail });
    }

    fn take_token(&mut self, element: &str, via: Option<&str>) {
        let pos = self
            .tokens
            .iter()
            .position(|t| t.element == element && (via.is_none() || t.via.as_deref() == via))
            .expect("fired element holds a token");
        self.tokens.remove(pos);
    }

    fn emit(&mut self, flow_indices: &[usize]) {
        for &i in flow_indices {
            let flow = &self.definition.doc.flows[i];
            self.tokens.push(Token { element: flow.target.clone(), via: Some(flow.id.clone()) });
        }
    }

    fn is_enabled(&self, id: &str) -> bool {
        let Some(element) = self.definition.element(id) else { return false };
        match &element.kind {
            ElementKind::ParallelGateway(_) => {
                let incoming: Vec<_> = self.definition.incoming(id).collect();
                incoming.len() <= 1
                    || incoming
                        .iter()
                        .all(|f| self.tokens.iter().any(|t| t.element == id && t.via.as_deref() == Some(&f.id)))
            }
            ElementKind::SignalCatchEvent { signal } => {
                self.released.get(id).copied().unwrap_or(0) > 0 || self.latched.get(signal).copied().unwrap_or(0) > 0
            }
            _ => true,
        }
    }

    /// Fires the enabled element with the smallest id. Returns `false` once
    /// the instance is no longer running.
    pub fn step(&mut self, access: &dyn SkillAccess) -> bool {
        if self.status != InstanceStatus::Running {
            return false;
        }
        let holding: BTreeSet<String> = self.tokens.iter().map(|t| t.element.clone()).collect();
        let Some(id) = holding.iter().find(|id| self.is_enabled(id)).cloned() else {
            let at = holding.iter().next().cloned().unwrap_or_default();
            self.fail(&at, DEADLOCK, "no element is enabled");
            return false;
        };
        self.fire(&id, access);
        if self.status == InstanceStatus::Running && self.tokens.is_empty() {
            self.status = if self.reached_end {
                InstanceStatus::Completed
            } else {
                InstanceStatus::Failed(DEADLOCK.into())
            };
        }
        self.status == InstanceStatus::Running
    }

    /// Steps until the instance completes or fails, or `limit` firings pass.
    pub fn run(&mut self, access: &dyn SkillAccess, limit: usize) -> &InstanceStatus {
        let mut steps = 0;
        while self.step(access) {
            steps += 1;
            if steps >= limit {
                let at = self.tokens.first().map(|t| t.element.clone()).unwrap_or_default();
                self.fail(&at, "STEP_LIMIT", &format!("no end reached after {limit} firings"));
            }
        }
        &self.status
    }

    /// Stops a running instance from outside, e.g. on shutdown.
    pub fn abort(&mut self, code: &str, message: &str) {
        if self.status == InstanceStatus::Running {
            let at = self.tokens.first().map(|t| t.element.clone()).unwrap_or_default();
            self.fail(&at, code, message);
        }
    }

    fn fail(&mut self, element: &str, code: &str, message: &str) {
        self.record(element, TraceKind::ErrorRaised, detail([("code", json!(code)), ("message", json!(message))]));
        self.tokens.clear();
        self.status = InstanceStatus::Failed(code.to_owned());
    }

    fn fire(&mut self, id: &str, access: &dyn SkillAccess) {
        let def = Arc::clone(&self.definition);
        let element = def.element(id).expect("token on known element");
        let outgoing: Vec<usize> = def.outgoing(id).map(|(i, _)| i).collect();
        match &element.kind {
            ElementKind::StartEvent => {
                self.take_token(id, None);
                self.record(id, TraceKind::StartEvent, BTreeMap::new());
                self.emit(&outgoing);
            }
            ElementKind::EndEvent => {
                self.take_token(id, None);
                self.reached_end = true;
                self.record(id, TraceKind::EndEvent, BTreeMap::new());
            }
            ElementKind::AbstractTask => {
                self.take_token(id, None);
                self.record(id, TraceKind::Task, detail([("name", json!(element.name))]));
                self.emit(&outgoing);
            }
            ElementKind::ServiceTask(task) => {
                self.take_token(id, None);
                match self.execute_service_task(id, task, access) {
                    Ok(()) => self.emit(&outgoing),
                    Err(TaskFailure::MissingVariable(var)) => {
                        self.fail(id, MISSING_VARIABLE, &format!("MissingVariable: '{var}' is not defined"));
                    }
                    Err(TaskFailure::Bpmn(error)) => self.handle_error(error),
                }
            }
            ElementKind::ExclusiveGateway(_) => {
                self.take_token(id, None);
                let chosen = def
                    .outgoing(id)
                    .find(|(i, f)| !f.is_default && def.condition(*i).map_or(true, |c| c.evaluate(&self.variables)))
                    .or_else(|| def.outgoing(id).find(|(_, f)| f.is_default))
                    .map(|(i, f)| (i, f.id.clone()));
                match chosen {
                    Some((i, flow)) => {
                        self.record(id, TraceKind::Gateway, detail([("taken", json!([flow]))]));
                        self.emit(&[i]);
                    }
                    None => self.fail(id, DEADLOCK, "no outgoing condition holds and no default flow exists"),
                }
            }
            ElementKind::ParallelGateway(_) => {
                let incoming: Vec<String> = def.incoming(id).map(|f| f.id.clone()).collect();
                if incoming.len() <= 1 {
                    self.take_token(id, None);
                } else {
                    for via in &incoming {
                        self.take_token(id, Some(via));
                    }
                }
                let taken: Vec<&str> = outgoing.iter().map(|&i| def.doc.flows[i].id.as_str()).collect();
                self.record(id, TraceKind::Gateway, detail([("taken", json!(taken))]));
                self.emit(&outgoing);
            }
            ElementKind::SignalThrowEvent { signal } => {
                self.take_token(id, None);
                let mut waiting: BTreeMap<String, u64> = BTreeMap::new();
                for t in &self.tokens {
                    if matches!(&def.element(&t.element).map(|e| &e.kind), Some(ElementKind::SignalCatchEvent { signal: s }) if s == signal) {
                        *waiting.entry(t.element.clone()).or_default() += 1;
                    }
                }
                let mut released_any = false;
                for (catch, count) in waiting {
                    let already = self.released.entry(catch).or_default();
                    if count > *already {
                        *already = count;
                        released_any = true;
                    }
                }
                if !released_any {
                    *self.latched.entry(signal.clone()).or_default() += 1;
                }
                self.record(id, TraceKind::SignalThrow, detail([("signal", json!(signal))]));
                self.emit(&outgoing);
            }
            ElementKind::SignalCatchEvent { signal } => {
                self.take_token(id, None);
                match self.released.get_mut(id).filter(|n| **n > 0) {
                    Some(n) => *n -= 1,
                    None => *self.latched.get_mut(signal).expect("enabled catch has a latched mark") -= 1,
                }
                self.record(id, TraceKind::SignalCatch, detail([("signal", json!(signal))]));
                self.emit(&outgoing);
            }
            ElementKind::BoundaryErrorEvent { .. } => {
                // tokens never rest on boundary events; drop a stray one
                self.take_token(id, None);
            }
        }
    }

    /// Parameterizes and runs the skill of `task`, copying outputs back on
    /// completion.
    fn execute_service_task(&mut self, id: &str, task: &ServiceTask, access: &dyn SkillAccess) -> Result<(), TaskFailure> {
        let raise = |code: &str, message: String| {
            TaskFailure::Bpmn(BpmnError { error_code: code.to_owned(), source_element: id.to_owned(), message })
        };
        let descriptor = match access.descriptor(&task.skill) {
            Ok(Some(d)) => d,
            Ok(None) => return Err(raise("SKILL_UNAVAILABLE", format!("skill {} is not registered", task.skill))),
            Err(e) => return Err(raise("SKILL_UNREACHABLE", e.to_string())),
        };
        let mut parameters = BTreeMap::new();
        for (pin, binding) in &task.parameters {
            let value = match binding {
                ParameterBinding::Variable(var) => {
                    self.variables.get(var).cloned().ok_or_else(|| TaskFailure::MissingVariable(var.clone()))?
                }
                ParameterBinding::Literal(v) => v.clone(),
            };
            parameters.insert(pin.clone(), value);
        }
        for p in &descriptor.parameters {
            if !task.parameters.contains_key(&p.name) {
                if let Some(v) = self.variables.get(&p.name) {
                    parameters.insert(p.name.clone(), v.clone());
                }
            }
        }

        let invocation = match access.invoke(&task.skill, &parameters) {
            Ok(inv) => inv,
            Err(e) => {
                let code = match &e {
                    InvokeError::Runtime(RuntimeError::TypeMismatch { .. } | RuntimeError::UnknownName(_)) => "PARAMETER_REJECTED",
                    InvokeError::Transport(_) => "SKILL_UNREACHABLE",
                    InvokeError::Runtime(_) => "SKILL_UNAVAILABLE",
                };
                return Err(raise(code, e.to_string()));
            }
        };
        let path: Vec<&str> = invocation.path.iter().map(|s| s.name()).collect();
        self.record(
            id,
            TraceKind::ServiceTask,
            detail([
                ("skill", json!(task.skill.to_string())),
                ("state", json!(invocation.state.name())),
                ("path", json!(path)),
            ]),
        );
        match invocation.state {
            SkillState::Completed => {
                for (pin, var) in &task.outputs {
                    let value = invocation.outputs.get(pin).cloned().unwrap_or(Value::Null);
                    self.variables.insert(var.clone(), value);
                }
                Ok(())
            }
            SkillState::Aborted => Err(raise(SKILL_ABORTED, format!("skill {} aborted", task.skill))),
            other => Err(raise(SKILL_STOPPED, format!("skill {} settled in {other}", task.skill))),
        }
    }

    /// Routes the error to a matching boundary event or fails the instance.
    pub fn handle_error(&mut self, error: BpmnError) {
        let def = Arc::clone(&self.definition);
        let boundary = def.boundaries(&error.source_element).find(|b| {
            matches!(&b.kind, ElementKind::BoundaryErrorEvent { error_code, .. }
                if error_code.as_deref().map_or(true, |c| c == error.error_code))
        });
        match boundary {
            None => self.fail(&error.source_element, &error.error_code, &error.message),
            Some(b) => {
                let d = detail([("code", json!(error.error_code)), ("message", json!(error.message))]);
                self.record(&error.source_element, TraceKind::ErrorRaised, d);
                self.record(&b.id, TraceKind::ErrorCaught, detail([("code", json!(error.error_code))]));
                let outgoing: Vec<usize> = def.outgoing(&b.id).map(|(i, _)| i).collect();
                self.emit(&outgoing);
            }
        }
    }
}

enum TaskFailure {
    MissingVariable(String),
    Bpmn(BpmnError),
}

fn detail<const N: usize>(pairs: [(&str, Value); N]) -> BTreeMap<String, Value> {
    pairs.into_iter().map(|(k, v)| (k.to_owned(), v)).collect()
}
