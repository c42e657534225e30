//! BPMN process documents: generation from activities, XML serialization and
//! loading of the supported subset.

mod generate;
mod structure;
mod xml;

use std::collections::BTreeMap;

use serde_json::Value;

use crate::runtime::SkillRef;

pub use generate::{generate_bpmn, GenerateError};
pub use structure::check_structure;
pub use xml::{parse_bpmn, serialize_bpmn, LoadError};

pub const BPMN_MODEL_NS: &str = "http://www.omg.org/spec/BPMN/20100524/MODEL";
pub const SKILL_NS: &str = "urn:skillforge:bpmn:1";
pub const XSI_NS: &str = "http://www.w3.org/2001/XMLSchema-instance";

#[derive(Debug, Clone, PartialEq)]
pub struct BpmnDocument {
    pub process_id: String,
    pub process_name: String,
    pub lanes: Vec<Lane>,
    pub elements: Vec<BpmnElement>,
    pub flows: Vec<SequenceFlow>,
}

impl BpmnDocument {
    pub fn element(&self, id: &str) -> Option<&BpmnElement> {
        self.elements.iter().find(|e| e.id == id)
    }

    pub fn service_tasks(&self) -> impl Iterator<Item = (&BpmnElement, &ServiceTask)> {
        self.elements.iter().filter_map(|e| match &e.kind {
            ElementKind::ServiceTask(t) => Some((e, t)),
            _ => None,
        })
    }

    pub fn outgoing<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a SequenceFlow> + 'a {
        self.flows.iter().filter(move |f| f.source == id)
    }

    pub fn incoming<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a SequenceFlow> + 'a {
        self.flows.iter().filter(move |f| f.target == id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lane {
    pub id: String,
    pub role: String,
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpmnElement {
    pub id: String,
    pub name: String,
    pub kind: ElementKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GatewayDirection {
    Diverging,
    Converging,
}

impl GatewayDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            GatewayDirection::Diverging => "Diverging",
            GatewayDirection::Converging => "Converging",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ElementKind {
    StartEvent,
    EndEvent,
    ServiceTask(ServiceTask),
    /// A task left for manual completion; the engine passes through it.
    AbstractTask,
    ExclusiveGateway(GatewayDirection),
    ParallelGateway(GatewayDirection),
    SignalThrowEvent { signal: String },
    SignalCatchEvent { signal: String },
    BoundaryErrorEvent { attached_to: String, error_code: Option<String> },
}

impl ElementKind {
    /// BPMN element name used in XML and traces.
    pub fn tag(&self) -> &'static str {
        match self {
            ElementKind::StartEvent => "startEvent",
            ElementKind::EndEvent => "endEvent",
            ElementKind::ServiceTask(_) => "serviceTask",
            ElementKind::AbstractTask => "task",
            ElementKind::ExclusiveGateway(_) => "exclusiveGateway",
            ElementKind::ParallelGateway(_) => "parallelGateway",
            ElementKind::SignalThrowEvent { .. } => "intermediateThrowEvent",
            ElementKind::SignalCatchEvent { .. } => "intermediateCatchEvent",
            ElementKind::BoundaryErrorEvent { .. } => "boundaryEvent",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceTask {
    pub skill: SkillRef,
    pub parameters: BTreeMap<String, ParameterBinding>,
    /// Output pin name to process variable.
    pub outputs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParameterBinding {
    Variable(String),
    Literal(Value),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceFlow {
    pub id: String,
    pub source: String,
    pub target: String,
    /// Condition expression text in the engine's guard grammar.
    pub condition: Option<String>,
    pub is_default: bool,
}
