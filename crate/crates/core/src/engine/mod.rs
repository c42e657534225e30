//! Token-based execution of the supported BPMN subset.
//!
//! A [`ProcessDefinition`] is a loaded document with lookup tables. A
//! [`ProcessInstance`] moves tokens through it one firing at a time; service
//! tasks are delegated to skills through [`crate::runtime::SkillAccess`].
//! [`ProcessEngine`] hosts definitions and runs instances on worker threads.

pub mod condition;
mod definition;
mod instance;
mod service;

use thiserror::Error;

use crate::runtime::SkillRef;

pub use definition::{load_process, ProcessDefinition};
pub use instance::{InstanceStatus, ProcessInstance, TraceEvent, TraceKind, DEFAULT_STEP_LIMIT};
pub use service::{run_process, ProcessEngine};

pub const SKILL_ABORTED: &str = "SKILL_ABORTED";
pub const SKILL_STOPPED: &str = "SKILL_STOPPED";
pub const MISSING_VARIABLE: &str = "MISSING_VARIABLE";
pub const DEADLOCK: &str = "DEADLOCK";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("process definition '{0}' is not deployed")]
    UnknownDefinition(String),
    #[error("UnresolvedSkill: {0} is not registered")]
    UnresolvedSkill(SkillRef),
    #[error("skill registry unavailable: {0}")]
    Access(String),
}

impl EngineError {
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::UnknownDefinition(_) => "UnknownDefinition",
            EngineError::UnresolvedSkill(_) => "UnresolvedSkill",
            EngineError::Access(_) => "RegistryUnavailable",
        }
    }
}

/// An error raised at a process element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpmnError {
    pub error_code: String,
    pub source_element: String,
    pub message: String,
}
