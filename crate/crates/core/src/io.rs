//! Canonical `.sgm.json` model documents.
//!
//! Parsing runs in three stages: JSON syntax, format version, then schema
//! decoding with unknown fields rejected. Every failure is a [`ParseError`];
//! the parser never panics on arbitrary input. Serialization is canonical:
//! sorted object keys, arrays in declaration order, two-space indentation and
//! a trailing newline.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::model::{
    ActivityModel, BlackboxFunction, CollaborationFunction, CommType, ControlFlow, DeploymentBinding, Direction, Edge,
    FunctionRef, Goal, Node, NodeKind, ObjectFlow, Pin, Port, Role, StateModel, StateTransition, SystemGroupModel,
    WhiteboxFunction,
};

pub const FORMAT_VERSION: &str = "1.0";

/// A problem located by a slash-separated path into the document,
/// e.g. `systemGroup/roles[1]/name`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostic {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("schema error: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Schema(Vec<ParseDiagnostic>),
    #[error("unsupported format version '{0}' (expected {FORMAT_VERSION})")]
    Version(String),
}

impl ParseError {
    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        ParseError::Schema(vec![ParseDiagnostic { path: path.into(), message: message.into() }])
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct DocumentDto {
    format_version: String,
    system_group: SystemGroupDto,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct SystemGroupDto {
    name: String,
    goals: Vec<GoalDto>,
    blackbox_functions: Vec<BlackboxDto>,
    roles: Vec<RoleDto>,
    activities: Vec<ActivityDto>,
    deployment: Vec<DeploymentDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct GoalDto {
    id: u64,
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    refines: Option<u64>,
    #[serde(default)]
    satisfied_by: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    aspirational: Option<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct BlackboxDto {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    refines_function: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    activity: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct RoleDto {
    name: String,
    #[serde(default)]
    whitebox_functions: Vec<WhiteboxDto>,
    #[serde(default)]
    ports: Vec<PortDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    state_model: Option<StateModelDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct WhiteboxDto {
    name: String,
    #[serde(default)]
    inputs: Vec<PinDto>,
    #[serde(default)]
    outputs: Vec<PinDto>,
    #[serde(default)]
    bound_states: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct PinDto {
    name: String,
    content_type: String,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(rename_all = "camelCase")]
enum DirectionDto {
    In,
    Out,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct PortDto {
    name: String,
    direction: DirectionDto,
    content_type: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct StateModelDto {
    states: Vec<String>,
    initial: String,
    #[serde(default)]
    transitions: Vec<TransitionDto>,
    #[serde(default)]
    collaboration_functions: Vec<CollaborationDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct TransitionDto {
    from: String,
    to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trigger: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sends: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct CollaborationDto {
    name: String,
    #[serde(default)]
    sent_signals: Vec<String>,
    #[serde(default)]
    received_signals: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct ActivityDto {
    name: String,
    #[serde(default)]
    partitions: Vec<String>,
    nodes: Vec<NodeDto>,
    edges: Vec<EdgeDto>,
}

#[derive(Debug, Serialize, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "camelCase")]
enum NodeKindDto {
    Initial,
    Final,
    Action,
    Decision,
    Merge,
    Fork,
    Join,
    SendSignal,
    AcceptSignal,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct FunctionRefDto {
    role: String,
    function: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct NodeDto {
    id: String,
    kind: NodeKindDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    partition: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    function_ref: Option<FunctionRefDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    signal_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    port_ref: Option<String>,
}

#[derive(Serialize, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "camelCase")]
enum EdgeKindDto {
    ControlFlow,
    ObjectFlow,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct EdgeDto {
    kind: EdgeKindDto,
    source: String,
    target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    guard: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    content_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source_pin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_pin: Option<String>,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(rename_all = "camelCase")]
enum CommTypeDto {
    OpcUa,
    WebService,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct DeploymentDto {
    role: String,
    function: String,
    skill_interface_name: String,
    module_name: String,
    comm_type: CommTypeDto,
    description: String,
}

/// Parses a `.sgm.json` document into a model.
pub fn parse_model(bytes: &[u8]) -> Result<SystemGroupModel, ParseError> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    match value.get("formatVersion") {
        Some(Value::String(v)) if v == FORMAT_VERSION => {}
        Some(Value::String(v)) => return Err(ParseError::Version(v.clone())),
        Some(other) => return Err(ParseError::Version(other.to_string())),
        None if value.is_object() => return Err(ParseError::schema("formatVersion", "missing field `formatVersion`")),
        None => return Err(ParseError::schema("/", "document must be a JSON object")),
    }
    let doc: DocumentDto = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = render_path(e.path());
        ParseError::schema(path, e.into_inner().to_string())
    })?;
    let mut diags = Vec::new();
    let model = from_dto(doc.system_group, &mut diags);
    if diags.is_empty() {
        Ok(model)
    } else {
        Err(ParseError::Schema(diags))
    }
}

fn render_path(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("[{index}]")),
            Segment::Map { key } => {
                if !out.is_empty() {
                    out.push('/');
                }
                out.push_str(key);
            }
            Segment::Enum { variant } => {
                if !out.is_empty() {
                    out.push('/');
                }
                out.push_str(variant);
            }
            Segment::Unknown => {
                if !out.is_empty() {
                    out.push('/');
                }
                out.push('?');
            }
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

struct Diags<'a>(&'a mut Vec<ParseDiagnostic>);

impl Diags<'_> {
    fn push(&mut self, path: String, message: impl Into<String>) {
        self.0.push(ParseDiagnostic { path, message: message.into() });
    }

    fn unique<'n>(&mut self, base: &str, field: &str, names: impl IntoIterator<Item = &'n str>, what: &str) {
        let mut seen = HashSet::new();
        for (i, n) in names.into_iter().enumerate() {
            if !seen.insert(n) {
                self.push(format!("{base}[{i}]/{field}"), format!("duplicate {what} '{n}'"));
            }
        }
    }
}

fn from_dto(sg: SystemGroupDto, diags: &mut Vec<ParseDiagnostic>) -> SystemGroupModel {
    let mut d = Diags(diags);
    let root = "systemGroup";

    for (i, g) in sg.goals.iter().enumerate() {
        if g.id == 0 {
            d.push(format!("{root}/goals[{i}]/id"), "goal ids must be positive");
        }
    }
    let goal_ids: Vec<String> = sg.goals.iter().map(|g| g.id.to_string()).collect();
    d.unique(&format!("{root}/goals"), "id", goal_ids.iter().map(String::as_str), "goal id");
    d.unique(&format!("{root}/blackboxFunctions"), "name", sg.blackbox_functions.iter().map(|f| f.name.as_str()), "blackbox function");
    d.unique(&format!("{root}/roles"), "name", sg.roles.iter().map(|r| r.name.as_str()), "role");
    d.unique(&format!("{root}/activities"), "name", sg.activities.iter().map(|a| a.name.as_str()), "activity");
    for (ri, r) in sg.roles.iter().enumerate() {
        let base = format!("{root}/roles[{ri}]");
        d.unique(&format!("{base}/whiteboxFunctions"), "name", r.whitebox_functions.iter().map(|f| f.name.as_str()), "whitebox function");
        d.unique(&format!("{base}/ports"), "name", r.ports.iter().map(|p| p.name.as_str()), "port");
    }

    let goals = sg
        .goals
        .into_iter()
        .map(|g| Goal {
            id: g.id,
            name: g.name,
            refines: g.refines,
            satisfied_by: g.satisfied_by,
            aspirational: g.aspirational.unwrap_or(false),
        })
        .collect();
    let blackbox_functions = sg
        .blackbox_functions
        .into_iter()
        .map(|f| BlackboxFunction { name: f.name, refines_function: f.refines_function, activity: f.activity })
        .collect();
    let roles = sg.roles.into_iter().map(role_from_dto).collect();
    let activities = sg
        .activities
        .into_iter()
        .enumerate()
        .map(|(i, a)| activity_from_dto(a, &format!("{root}/activities[{i}]"), &mut d))
        .collect();
    let deployment = sg
        .deployment
        .into_iter()
        .map(|b| DeploymentBinding {
            function_ref: FunctionRef::new(b.role, b.function),
            skill_interface_name: b.skill_interface_name,
            module_name: b.module_name,
            comm_type: match b.comm_type {
                CommTypeDto::OpcUa => CommType::OpcUa,
                CommTypeDto::WebService => CommType::WebService,
            },
            description: b.description,
        })
        .collect();
    SystemGroupModel { name: sg.name, goals, blackbox_functions, roles, activities, deployment }
}

fn pins(dtos: Vec<PinDto>) -> Vec<Pin> {
    dtos.into_iter().map(|p| Pin { name: p.name, content_type: p.content_type }).collect()
}

fn role_from_dto(r: RoleDto) -> Role {
    Role {
        name: r.name,
        whitebox_functions: r
            .whitebox_functions
            .into_iter()
            .map(|f| WhiteboxFunction {
                name: f.name,
                inputs: pins(f.inputs),
                outputs: pins(f.outputs),
                bound_states: f.bound_states,
            })
            .collect(),
        ports: r
            .ports
            .into_iter()
            .map(|p| Port {
                name: p.name,
                direction: match p.direction {
                    DirectionDto::In => Direction::In,
                    DirectionDto::Out => Direction::Out,
                },
                content_type: p.content_type,
            })
            .collect(),
        state_model: r.state_model.map(|m| StateModel {
            states: m.states,
            initial: m.initial,
            transitions: m
                .transitions
                .into_iter()
                .map(|t| StateTransition { from: t.from, to: t.to, trigger: t.trigger, sends: t.sends })
                .collect(),
            collaboration_functions: m
                .collaboration_functions
                .into_iter()
                .map(|c| CollaborationFunction {
                    name: c.name,
                    sent_signals: c.sent_signals,
                    received_signals: c.received_signals,
                })
                .collect(),
        }),
    }
}

fn activity_from_dto(a: ActivityDto, base: &str, d: &mut Diags<'_>) -> ActivityModel {
    d.unique(&format!("{base}/nodes"), "id", a.nodes.iter().map(|n| n.id.as_str()), "node id");
    let mut nodes = Vec::with_capacity(a.nodes.len());
    for (i, n) in a.nodes.into_iter().enumerate() {
        let path = format!("{base}/nodes[{i}]");
        let forbid = |present: bool, field: &str, d: &mut Diags<'_>| {
            if present {
                d.push(format!("{path}/{field}"), format!("field not allowed on {:?} nodes", n.kind));
            }
        };
        let kind = match n.kind {
            NodeKindDto::Action => {
                forbid(n.signal_name.is_some(), "signalName", d);
                forbid(n.port_ref.is_some(), "portRef", d);
                match n.function_ref {
                    Some(f) => NodeKind::Action { function_ref: FunctionRef::new(f.role, f.function) },
                    None => {
                        d.push(format!("{path}/functionRef"), "action nodes require a functionRef");
                        continue;
                    }
                }
            }
            NodeKindDto::SendSignal | NodeKindDto::AcceptSignal => {
                forbid(n.function_ref.is_some(), "functionRef", d);
                let (Some(signal), Some(port)) = (n.signal_name, n.port_ref) else {
                    d.push(path.clone(), "signal nodes require signalName and portRef");
                    continue;
                };
                if n.kind == NodeKindDto::SendSignal {
                    NodeKind::SendSignal { signal, port }
                } else {
                    NodeKind::AcceptSignal { signal, port }
                }
            }
            other => {
                forbid(n.function_ref.is_some(), "functionRef", d);
                forbid(n.signal_name.is_some(), "signalName", d);
                forbid(n.port_ref.is_some(), "portRef", d);
                match other {
                    NodeKindDto::Initial => NodeKind::Initial,
                    NodeKindDto::Final => NodeKind::Final,
                    NodeKindDto::Decision => NodeKind::Decision,
                    NodeKindDto::Merge => NodeKind::Merge,
                    NodeKindDto::Fork => NodeKind::Fork,
                    _ => NodeKind::Join,
                }
            }
        };
        nodes.push(Node { id: n.id, partition: n.partition, kind });
    }
    let mut edges = Vec::with_capacity(a.edges.len());
    for (i, e) in a.edges.into_iter().enumerate() {
        let path = format!("{base}/edges[{i}]");
        match e.kind {
            EdgeKindDto::ControlFlow => {
                for (present, field) in
                    [(e.content_type.is_some(), "contentType"), (e.source_pin.is_some(), "sourcePin"), (e.target_pin.is_some(), "targetPin")]
                {
                    if present {
                        d.push(format!("{path}/{field}"), "field not allowed on control flows");
                    }
                }
                edges.push(Edge::Control(ControlFlow { source: e.source, target: e.target, guard: e.guard }));
            }
            EdgeKindDto::ObjectFlow => {
                if e.guard.is_some() {
                    d.push(format!("{path}/guard"), "field not allowed on object flows");
                }
                let Some(content_type) = e.content_type else {
                    d.push(format!("{path}/contentType"), "object flows require a contentType");
                    continue;
                };
                edges.push(Edge::Object(ObjectFlow {
                    source: e.source,
                    source_pin: e.source_pin,
                    target: e.target,
                    target_pin: e.target_pin,
                    content_type,
                }));
            }
        }
    }
    ActivityModel { name: a.name, partitions: a.partitions, nodes, edges }
}

fn to_dto(m: &SystemGroupModel) -> DocumentDto {
    let pin_dtos = |pins: &[Pin]| -> Vec<PinDto> {
        pins.iter().map(|p| PinDto { name: p.name.clone(), content_type: p.content_type.clone() }).collect()
    };
    DocumentDto {
        format_version: FORMAT_VERSION.to_owned(),
        system_group: SystemGroupDto {
            name: m.name.clone(),
            goals: m
                .goals
                .iter()
                .map(|g| GoalDto {
                    id: g.id,
                    name: g.name.clone(),
                    refines: g.refines,
                    satisfied_by: g.satisfied_by.clone(),
                    aspirational: g.aspirational.then_some(true),
                })
                .collect(),
            blackbox_functions: m
                .blackbox_functions
                .iter()
                .map(|f| BlackboxDto {
                    name: f.name.clone(),
                    refines_function: f.refines_function.clone(),
                    activity: f.activity.clone(),
                })
                .collect(),
            roles: m
                .roles
                .iter()
                .map(|r| RoleDto {
                    name: r.name.clone(),
                    whitebox_functions: r
                        .whitebox_functions
                        .iter()
                        .map(|f| WhiteboxDto {
                            name: f.name.clone(),
                            inputs: pin_dtos(&f.inputs),
                            outputs: pin_dtos(&f.outputs),
                            bound_states: f.bound_states.clone(),
                        })
                        .collect(),
                    ports: r
                        .ports
                        .iter()
                        .map(|p| PortDto {
                            name: p.name.clone(),
                            direction: match p.direction {
                                Direction::In => DirectionDto::In,
                                Direction::Out => DirectionDto::Out,
                            },
                            content_type: p.content_type.clone(),
                        })
                        .collect(),
                    state_model: r.state_model.as_ref().map(|s| StateModelDto {
                        states: s.states.clone(),
                        initial: s.initial.clone(),
                        transitions: s
                            .transitions
                            .iter()
                            .map(|t| TransitionDto {
                                from: t.from.clone(),
                                to: t.to.clone(),
                                trigger: t.trigger.clone(),
                                sends: t.sends.clone(),
                            })
                            .collect(),
                        collaboration_functions: s
                            .collaboration_functions
                            .iter()
                            .map(|c| CollaborationDto {
                                name: c.name.clone(),
                                sent_signals: c.sent_signals.clone(),
                                received_signals: c.received_signals.clone(),
                            })
                            .collect(),
                    }),
                })
                .collect(),
            activities: m.activities.iter().map(activity_to_dto).collect(),
            deployment: m
                .deployment
                .iter()
                .map(|b| DeploymentDto {
                    role: b.function_ref.role.clone(),
                    function: b.function_ref.function.clone(),
                    skill_interface_name: b.skill_interface_name.clone(),
                    module_name: b.module_name.clone(),
                    comm_type: match b.comm_type {
                        CommType::OpcUa => CommTypeDto::OpcUa,
                        CommType::WebService => CommTypeDto::WebService,
                    },
                    description: b.description.clone(),
                })
                .collect(),
        },
    }
}

fn activity_to_dto(a: &ActivityModel) -> ActivityDto {
    ActivityDto {
        name: a.name.clone(),
        partitions: a.partitions.clone(),
        nodes: a
            .nodes
            .iter()
            .map(|n| {
                let mut dto = NodeDto {
                    id: n.id.clone(),
                    kind: NodeKindDto::Initial,
                    partition: n.partition.clone(),
                    function_ref: None,
                    signal_name: None,
                    port_ref: None,
                };
                dto.kind = match &n.kind {
                    NodeKind::Initial => NodeKindDto::Initial,
                    NodeKind::Final => NodeKindDto::Final,
                    NodeKind::Action { function_ref } => {
                        dto.function_ref = Some(FunctionRefDto {
                            role: function_ref.role.clone(),
                            function: function_ref.function.clone(),
                        });
                        NodeKindDto::Action
                    }
                    NodeKind::Decision => NodeKindDto::Decision,
                    NodeKind::Merge => NodeKindDto::Merge,
                    NodeKind::Fork => NodeKindDto::Fork,
                    NodeKind::Join => NodeKindDto::Join,
                    NodeKind::SendSignal { signal, port } | NodeKind::AcceptSignal { signal, port } => {
                        dto.signal_name = Some(signal.clone());
                        dto.port_ref = Some(port.clone());
                        if matches!(n.kind, NodeKind::SendSignal { .. }) {
                            NodeKindDto::SendSignal
                        } else {
                            NodeKindDto::AcceptSignal
                        }
                    }
                };
                dto
            })
            .collect(),
        edges: a
            .edges
            .iter()
            .map(|e| match e {
                Edge::Control(c) => EdgeDto {
                    kind: EdgeKindDto::ControlFlow,
                    source: c.source.clone(),
                    target: c.target.clone(),
                    guard: c.guard.clone(),
                    content_type: None,
                    source_pin: None,
                    target_pin: None,
                },
                Edge::Object(o) => EdgeDto {
                    kind: EdgeKindDto::ObjectFlow,
                    source: o.source.clone(),
                    target: o.target.clone(),
                    guard: None,
                    content_type: Some(o.content_type.clone()),
                    source_pin: o.source_pin.clone(),
                    target_pin: o.target_pin.clone(),
                },
            })
            .collect(),
    }
}

fn sort_keys(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, sort_keys(v))).collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

/// Canonical JSON rendering of a model.
pub fn serialize_model(model: &SystemGroupModel) -> String {
    let value = serde_json::to_value(to_dto(model)).expect("model DTOs always serialize");
    let mut text = serde_json::to_string_pretty(&sort_keys(value)).expect("JSON values always serialize");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"formatVersion":"1.0","systemGroup":{"name":"G","goals":[],"blackboxFunctions":[],"roles":[],"activities":[],"deployment":[]}}"#;

    #[test]
    fn minimal_document() {
        let m = parse_model(MINIMAL.as_bytes()).unwrap();
        assert_eq!(m, SystemGroupModel { name: "G".into(), ..Default::default() });
    }

    #[test]
    fn canonical_empty_model() {
        let m = parse_model(MINIMAL.as_bytes()).unwrap();
        let text = serialize_model(&m);
        assert_eq!(
            text,
            "{\n  \"formatVersion\": \"1.0\",\n  \"systemGroup\": {\n    \"activities\": [],\n    \"blackboxFunctions\": [],\n    \"deployment\": [],\n    \"goals\": [],\n    \"name\": \"G\",\n    \"roles\": []\n  }\n}\n"
        );
        assert_eq!(serialize_model(&parse_model(text.as_bytes()).unwrap()), text);
    }

    #[test]
    fn duplicate_role_name() {
        let doc = MINIMAL.replace(r#""roles":[]"#, r#""roles":[{"name":"A"},{"name":"A"}]"#);
        let err = parse_model(doc.as_bytes()).unwrap_err();
        let ParseError::Schema(diags) = err else { panic!("{err:?}") };
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].path, "systemGroup/roles[1]/name");
    }

    #[test]
    fn unknown_field_rejected() {
        let doc = MINIMAL.replace(r#""roles":[]"#, r#""roles":[{"name":"A","colour":"red"}]"#);
        let ParseError::Schema(diags) = parse_model(doc.as_bytes()).unwrap_err() else { panic!() };
        assert_eq!(diags[0].path, "systemGroup/roles[0]/colour");
        assert!(diags[0].message.contains("colour"), "{}", diags[0].message);
    }

    #[test]
    fn wrong_type_has_path() {
        let doc = MINIMAL.replace(r#""goals":[]"#, r#""goals":[{"id":"ten","name":"x"}]"#);
        let ParseError::Schema(diags) = parse_model(doc.as_bytes()).unwrap_err() else { panic!() };
        assert_eq!(diags[0].path, "systemGroup/goals[0]/id");
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_model(b"{\n  \"formatVersion\": ").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { line: 2, .. }), "{err:?}");
        assert!(matches!(parse_model(&[0xff, 0xfe]), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn version_checked() {
        let doc = MINIMAL.replace("1.0", "2.0");
        assert_eq!(parse_model(doc.as_bytes()), Err(ParseError::Version("2.0".into())));
        assert!(matches!(parse_model(b"[]"), Err(ParseError::Schema(_))));
    }

    #[test]
    fn node_field_consistency() {
        let doc = MINIMAL.replace(
            r#""activities":[]"#,
            r#""activities":[{"name":"A","nodes":[{"id":"n","kind":"action"},{"id":"i","kind":"initial","portRef":"p"}],"edges":[{"kind":"objectFlow","source":"n","target":"i"}]}]"#,
        );
        let ParseError::Schema(diags) = parse_model(doc.as_bytes()).unwrap_err() else { panic!() };
        let paths: Vec<_> = diags.iter().map(|d| d.path.as_str()).collect();
        assert_eq!(
            paths,
            [
                "systemGroup/activities[0]/nodes[0]/functionRef",
                "systemGroup/activities[0]/nodes[1]/portRef",
                "systemGroup/activities[0]/edges[0]/contentType"
            ]
        );
    }

    #[test]
    fn zero_goal_id_rejected() {
        let doc = MINIMAL.replace(r#""goals":[]"#, r#""goals":[{"id":0,"name":"x"}]"#);
        let ParseError::Schema(diags) = parse_model(doc.as_bytes()).unwrap_err() else { panic!() };
        assert_eq!(diags[0].path, "systemGroup/goals[0]/id");
    }
}
