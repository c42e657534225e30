//! Skill hosting: the lifecycle state machine, a thread-safe registry and
//! simulated skills of the lab plant.

pub mod machine;
pub mod plant;
pub mod registry;
pub mod skills;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::model::CommType;

pub use machine::{Command, SkillState};
pub use plant::{simulated_plant_skills, PlantState, Workpiece};
pub use registry::{CommandOutcome, SkillBehavior, SkillContext, SkillRegistry, StepOutcome};

/// Identifies a skill by module and skill interface name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SkillRef {
    pub module: String,
    pub name: String,
}

impl SkillRef {
    pub fn new(module: impl Into<String>, name: impl Into<String>) -> Self {
        SkillRef { module: module.into(), name: name.into() }
    }
}

impl fmt::Display for SkillRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.module, self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ParameterSpec {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
    /// Value a fresh instance starts with.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<Value>,
}

impl ParameterSpec {
    pub fn new(name: &str, ty: &str) -> Self {
        ParameterSpec { name: name.into(), ty: ty.into(), default: None }
    }

    pub fn with_default(mut self, value: Value) -> Self {
        self.default = Some(value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SkillDescriptor {
    pub module_name: String,
    pub skill_name: String,
    #[serde(with = "comm_type_serde")]
    pub comm_type: CommType,
    #[serde(default)]
    pub parameters: Vec<ParameterSpec>,
    #[serde(default)]
    pub outputs: Vec<ParameterSpec>,
    #[serde(default)]
    pub description: String,
}

impl SkillDescriptor {
    pub fn skill_ref(&self) -> SkillRef {
        SkillRef::new(&self.module_name, &self.skill_name)
    }

    pub fn parameter(&self, name: &str) -> Option<&ParameterSpec> {
        self.parameters.iter().find(|p| p.name == name)
    }

    pub fn output(&self, name: &str) -> Option<&ParameterSpec> {
        self.outputs.iter().find(|p| p.name == name)
    }
}

mod comm_type_serde {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use crate::model::CommType;

    pub fn serialize<S: Serializer>(value: &CommType, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(value.as_str())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CommType, D::Error> {
        let text = String::deserialize(d)?;
        CommType::parse(&text).ok_or_else(|| D::Error::custom(format!("unknown commType '{text}'")))
    }
}

/// Whether `value` conforms to a declared parameter type. Types outside the
/// four primitive names accept any value.
pub fn type_accepts(ty: &str, value: &Value) -> bool {
    match ty {
        "number" => value.is_number(),
        "integer" => value.is_i64() || value.is_u64(),
        "boolean" => value.is_boolean(),
        "string" => value.is_string(),
        _ => true,
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuntimeError {
    #[error("skill {0} is already registered")]
    DuplicateSkill(SkillRef),
    #[error("skill {0} is not registered")]
    UnknownSkill(SkillRef),
    #[error("command {command} rejected in state {state}")]
    CommandRejected { state: SkillState, command: Command },
    #[error("'{0}' is not declared by the skill")]
    UnknownName(String),
    #[error("operation not allowed in state {0}")]
    WrongState(SkillState),
    #[error("value for '{name}' is not of type {expected}")]
    TypeMismatch { name: String, expected: String },
    #[error("skill did not settle within the timeout")]
    Timeout,
}

impl RuntimeError {
    /// Stable machine-readable code used on the wire.
    pub fn code(&self) -> &'static str {
        match self {
            RuntimeError::DuplicateSkill(_) => "DuplicateSkill",
            RuntimeError::UnknownSkill(_) => "UnknownSkill",
            RuntimeError::CommandRejected { .. } => "CommandRejected",
            RuntimeError::UnknownName(_) => "UnknownName",
            RuntimeError::WrongState(_) => "WrongState",
            RuntimeError::TypeMismatch { .. } => "TypeMismatch",
            RuntimeError::Timeout => "Timeout",
        }
    }
}

/// Result of one atomic skill run issued by the process engine.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub state: SkillState,
    /// States passed by the `Start` command, ending in the settled state.
    pub path: Vec<SkillState>,
    /// Output values; empty unless the skill completed.
    pub outputs: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InvokeError {
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error("skill endpoint unreachable: {0}")]
    Transport(String),
}

/// How the process engine reaches skills: an embedded registry or a remote
/// service speaking the HTTP wire protocol.
pub trait SkillAccess: Send + Sync {
    fn descriptor(&self, skill: &SkillRef) -> Result<Option<SkillDescriptor>, InvokeError>;

    /// Resets a completed skill, writes `parameters`, starts it and waits
    /// until it settles in Completed, Aborted, Stopped or Idle.
    fn invoke(&self, skill: &SkillRef, parameters: &BTreeMap<String, Value>) -> Result<Invocation, InvokeError>;
}
