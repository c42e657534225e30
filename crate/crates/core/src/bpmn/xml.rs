use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use roxmltree::Node;
use serde_json::Value;
use thiserror::Error;

use super::structure::check_structure;
use super::{
    BpmnDocument, BpmnElement, ElementKind, GatewayDirection, Lane, ParameterBinding, SequenceFlow, ServiceTask, BPMN_MODEL_NS,
    SKILL_NS, XSI_NS,
};
use crate::runtime::SkillRef;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("XmlError: {0}")]
    Xml(String),
    #[error("UnsupportedElement: {}", .0.join(", "))]
    UnsupportedElement(Vec<String>),
    #[error("StructuralError: {0}")]
    Structural(String),
}

impl LoadError {
    pub fn code(&self) -> &'static str {
        match self {
            LoadError::Xml(_) => "XmlError",
            LoadError::UnsupportedElement(_) => "UnsupportedElement",
            LoadError::Structural(_) => "StructuralError",
        }
    }
}

fn escape(text: &str, attribute: bool) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' if attribute => out.push_str("&quot;"),
            '\n' if attribute => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' if attribute => out.push_str("&#9;"),
            // not representable in XML 1.0
            c if (c as u32) < 0x20 && !matches!(c, '\n' | '\t') => out.push('\u{FFFD}'),
            '\u{FFFE}' | '\u{FFFF}' => out.push('\u{FFFD}'),
            c => out.push(c),
        }
    }
    out
}

fn literal_text(value: &Value) -> String {
    match value {
        Value::String(s) if serde_json::from_str::<Value>(s).is_err() => s.clone(),
        other => other.to_string(),
    }
}

fn parse_literal(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|_| Value::String(text.to_owned()))
}

/// Renders the document as BPMN 2.0 XML. Output depends only on `doc`.
pub fn serialize_bpmn(doc: &BpmnDocument) -> String {
    let mut signals: Vec<&str> = Vec::new();
    let mut errors: Vec<&str> = Vec::new();
    for e in &doc.elements {
        match &e.kind {
            ElementKind::SignalThrowEvent { signal } | ElementKind::SignalCatchEvent { signal } => {
                if !signals.contains(&signal.as_str()) {
                    signals.push(signal);
                }
            }
            ElementKind::BoundaryErrorEvent { error_code: Some(code), .. } => {
                if !errors.contains(&code.as_str()) {
                    errors.push(code);
                }
            }
            _ => {}
        }
    }
    let signal_id = |name: &str| format!("signal{}", signals.iter().position(|s| *s == name).unwrap_or(0) + 1);
    let error_id = |code: &str| format!("error{}", errors.iter().position(|s| *s == code).unwrap_or(0) + 1);
    let a = |text: &str| escape(text, true);

    let mut x = String::new();
    x.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        x,
        "<definitions xmlns=\"{BPMN_MODEL_NS}\" xmlns:sf=\"{SKILL_NS}\" xmlns:xsi=\"{XSI_NS}\" id=\"definitions\" targetNamespace=\"urn:skillforge:process\">"
    );
    for s in &signals {
        let _ = writeln!(x, "  <signal id=\"{}\" name=\"{}\"/>", signal_id(s), a(s));
    }
    for code in &errors {
        let _ = writeln!(x, "  <error id=\"{}\" errorCode=\"{}\"/>", error_id(code), a(code));
    }
    let _ = writeln!(x, "  <process id=\"{}\" name=\"{}\" isExecutable=\"true\">", a(&doc.process_id), a(&doc.process_name));

    if doc.lanes.is_empty() {
        x.push_str("    <laneSet id=\"laneSet1\"/>\n");
    } else {
        x.push_str("    <laneSet id=\"laneSet1\">\n");
        for lane in &doc.lanes {
            if lane.members.is_empty() {
                let _ = writeln!(x, "      <lane id=\"{}\" name=\"{}\"/>", a(&lane.id), a(&lane.role));
                continue;
            }
            let _ = writeln!(x, "      <lane id=\"{}\" name=\"{}\">", a(&lane.id), a(&lane.role));
            for m in &lane.members {
                let _ = writeln!(x, "        <flowNodeRef>{}</flowNodeRef>", escape(m, false));
            }
            x.push_str("      </lane>\n");
        }
        x.push_str("    </laneSet>\n");
    }

    for e in &doc.elements {
        let head = format!("    <{} id=\"{}\" name=\"{}\"", e.kind.tag(), a(&e.id), a(&e.name));
        match &e.kind {
            ElementKind::StartEvent | ElementKind::EndEvent | ElementKind::AbstractTask => {
                let _ = writeln!(x, "{head}/>");
            }
            ElementKind::ServiceTask(task) => {
                let _ = writeln!(x, "{head}>");
                x.push_str("      <extensionElements>\n");
                let _ = writeln!(x, "        <sf:skill module=\"{}\" name=\"{}\"/>", a(&task.skill.module), a(&task.skill.name));
                for (name, binding) in &task.parameters {
                    let (attr, value) = match binding {
                        ParameterBinding::Variable(v) => ("variable", v.clone()),
                        ParameterBinding::Literal(v) => ("value", literal_text(v)),
                    };
                    let _ = writeln!(x, "        <sf:parameter name=\"{}\" {attr}=\"{}\"/>", a(name), a(&value));
                }
                for (name, variable) in &task.outputs {
                    let _ = writeln!(x, "        <sf:output name=\"{}\" variable=\"{}\"/>", a(name), a(variable));
                }
                x.push_str("      </extensionElements>\n");
                let _ = writeln!(x, "    </{}>", e.kind.tag());
            }
            ElementKind::ExclusiveGateway(dir) | ElementKind::ParallelGateway(dir) => {
                let default = doc.flows.iter().find(|f| f.source == e.id && f.is_default);
                let default = default.map(|f| format!(" default=\"{}\"", a(&f.id))).unwrap_or_default();
                let _ = writeln!(x, "{head} gatewayDirection=\"{}\"{default}/>", dir.as_str());
            }
            ElementKind::SignalThrowEvent { signal } | ElementKind::SignalCatchEvent { signal } => {
                let _ = writeln!(x, "{head}>");
                let _ = writeln!(x, "      <signalEventDefinition signalRef=\"{}\"/>", signal_id(signal));
                let _ = writeln!(x, "    </{}>", e.kind.tag());
            }
            ElementKind::BoundaryErrorEvent { attached_to, error_code } => {
                let _ = writeln!(x, "{head} attachedToRef=\"{}\" cancelActivity=\"true\">", a(attached_to));
                match error_code {
                    Some(code) => {
                        let _ = writeln!(x, "      <errorEventDefinition errorRef=\"{}\"/>", error_id(code));
                    }
                    None => x.push_str("      <errorEventDefinition/>\n"),
                }
                x.push_str("    </boundaryEvent>\n");
            }
        }
    }

    for f in &doc.flows {
        let head = format!("    <sequenceFlow id=\"{}\" sourceRef=\"{}\" targetRef=\"{}\"", a(&f.id), a(&f.source), a(&f.target));
        match &f.condition {
            None => {
                let _ = writeln!(x, "{head}/>");
            }
            Some(c) => {
                let _ = writeln!(x, "{head}>");
                let _ = writeln!(x, "      <conditionExpression xsi:type=\"tFormalExpression\">{}</conditionExpression>", escape(c, false));
                x.push_str("    </sequenceFlow>\n");
            }
        }
    }
    x.push_str("  </process>\n</definitions>\n");
    x
}

const FLOW_NODES: [&str; 9] = [
    "startEvent",
    "endEvent",
    "serviceTask",
    "task",
    "exclusiveGateway",
    "parallelGateway",
    "intermediateThrowEvent",
    "intermediateCatchEvent",
    "boundaryEvent",
];

fn is_bpmn(node: &Node) -> bool {
    node.is_element() && node.tag_name().namespace() == Some(BPMN_MODEL_NS)
}

fn is_sf(node: &Node, name: &str) -> bool {
    node.is_element() && node.tag_name().namespace() == Some(SKILL_NS) && node.tag_name().name() == name
}

fn bpmn_children<'a, 'i>(node: Node<'a, 'i>, name: &'a str) -> impl Iterator<Item = Node<'a, 'i>> + 'a {
    node.children().filter(move |c| is_bpmn(c) && c.tag_name().name() == name)
}

/// Whether a BPMN-namespace element may appear below `parent`.
fn allowed(name: &str, parent: &str) -> bool {
    match name {
        "documentation" | "extensionElements" => true,
        "process" | "signal" | "error" => parent == "definitions",
        "laneSet" => parent == "process",
        "lane" => parent == "laneSet",
        "flowNodeRef" => parent == "lane",
        "sequenceFlow" => parent == "process",
        n if FLOW_NODES.contains(&n) => parent == "process",
        "incoming" | "outgoing" => FLOW_NODES.contains(&parent),
        "conditionExpression" => parent == "sequenceFlow",
        "signalEventDefinition" => parent == "intermediateThrowEvent" || parent == "intermediateCatchEvent",
        "errorEventDefinition" => parent == "boundaryEvent",
        _ => false,
    }
}

fn unsupported_elements(root: Node) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut stack: Vec<Node> = root.children().filter(Node::is_element).collect();
    stack.reverse();
    while let Some(node) = stack.pop() {
        if !is_bpmn(&node) {
            continue;
        }
        let name = node.tag_name().name();
        if name == "extensionElements" || name == "documentation" {
            continue;
        }
        let parent = node.parent_element().map(|p| p.tag_name().name()).unwrap_or("");
        if !allowed(name, parent) && !out.iter().any(|n| n == name) {
            out.push(name.to_owned());
        }
        let mut children: Vec<Node> = node.children().filter(Node::is_element).collect();
        children.reverse();
        stack.extend(children);
    }
    out
}

fn structural(message: impl Into<String>) -> LoadError {
    LoadError::Structural(message.into())
}

fn required<'a>(node: &Node<'a, '_>, attr: &str) -> Result<&'a str, LoadError> {
    node.attribute(attr)
        .ok_or_else(|| structural(format!("<{}> lacks attribute '{attr}'", node.tag_name().name())))
}

fn direction(attr: Option<&str>, incoming: usize) -> GatewayDirection {
    match attr {
        Some("Diverging") => GatewayDirection::Diverging,
        Some("Converging") => GatewayDirection::Converging,
        _ if incoming > 1 => GatewayDirection::Converging,
        _ => GatewayDirection::Diverging,
    }
}

/// Parses the supported BPMN subset and checks the document invariants.
///
/// Diagram interchange, documentation, `incoming`/`outgoing` references and
/// elements of foreign namespaces are ignored; any other BPMN element outside
/// the subset is reported by name.
pub fn parse_bpmn(xml: &str) -> Result<BpmnDocument, LoadError> {
    let parsed = roxmltree::Document::parse(xml).map_err(|e| LoadError::Xml(e.to_string()))?;
    let root = parsed.root_element();
    if !is_bpmn(&root) || root.tag_name().name() != "definitions" {
        return Err(structural(format!("root element is <{}>, expected BPMN <definitions>", root.tag_name().name())));
    }
    let unsupported = unsupported_elements(root);
    if !unsupported.is_empty() {
        return Err(LoadError::UnsupportedElement(unsupported));
    }

    let processes: Vec<Node> = bpmn_children(root, "process").collect();
    let [process] = processes.as_slice() else {
        return Err(structural(format!("expected exactly one process, found {}", processes.len())));
    };
    let signals: HashMap<&str, &str> = bpmn_children(root, "signal")
        .map(|s| Ok((required(&s, "id")?, s.attribute("name").unwrap_or(""))))
        .collect::<Result<_, LoadError>>()?;
    let errors: HashMap<&str, Option<&str>> = bpmn_children(root, "error")
        .map(|e| Ok((required(&e, "id")?, e.attribute("errorCode"))))
        .collect::<Result<_, LoadError>>()?;

    let mut lanes = Vec::new();
    for lane in bpmn_children(*process, "laneSet").flat_map(|s| bpmn_children(s, "lane")) {
        lanes.push(Lane {
            id: required(&lane, "id")?.to_owned(),
            role: lane.attribute("name").unwrap_or("").to_owned(),
            members: bpmn_children(lane, "flowNodeRef").map(|r| r.text().unwrap_or("").trim().to_owned()).collect(),
        });
    }

    let mut flows = Vec::new();
    for f in bpmn_children(*process, "sequenceFlow") {
        let condition = bpmn_children(f, "conditionExpression").next().map(|c| c.text().unwrap_or("").trim().to_owned());
        flows.push(SequenceFlow {
            id: required(&f, "id")?.to_owned(),
            source: required(&f, "sourceRef")?.to_owned(),
            target: required(&f, "targetRef")?.to_owned(),
            condition,
            is_default: false,
        });
    }

    let mut elements = Vec::new();
    let mut defaults = Vec::new();
    for node in process.children().filter(|c| is_bpmn(c) && FLOW_NODES.contains(&c.tag_name().name())) {
        let id = required(&node, "id")?.to_owned();
        let tag = node.tag_name().name();
        let kind = match tag {
            "startEvent" => ElementKind::StartEvent,
            "endEvent" => ElementKind::EndEvent,
            "task" => ElementKind::AbstractTask,
            "serviceTask" => ElementKind::ServiceTask(service_task(&node)?),
            "exclusiveGateway" | "parallelGateway" => {
                if let Some(flow) = node.attribute("default") {
                    defaults.push((id.clone(), flow.to_owned()));
                }
                let dir = direction(node.attribute("gatewayDirection"), flows.iter().filter(|f| f.target == id).count());
                if tag == "exclusiveGateway" {
                    ElementKind::ExclusiveGateway(dir)
                } else {
                    ElementKind::ParallelGateway(dir)
                }
            }
            "intermediateThrowEvent" | "intermediateCatchEvent" => {
                let def = bpmn_children(node, "signalEventDefinition")
                    .next()
                    .ok_or_else(|| structural(format!("<{tag}> '{id}' has no signalEventDefinition")))?;
                let reference = required(&def, "signalRef")?;
                let signal = signals
                    .get(reference)
                    .ok_or_else(|| structural(format!("signalRef '{reference}' does not name a signal")))?
                    .to_string();
                if tag == "intermediateThrowEvent" {
                    ElementKind::SignalThrowEvent { signal }
                } else {
                    ElementKind::SignalCatchEvent { signal }
                }
            }
            _ => {
                let attached_to = required(&node, "attachedToRef")?.to_owned();
                let def = bpmn_children(node, "errorEventDefinition")
                    .next()
                    .ok_or_else(|| structural(format!("boundary event '{id}' has no errorEventDefinition")))?;
                let error_code = match def.attribute("errorRef") {
                    None => None,
                    Some(r) => errors
                        .get(r)
                        .ok_or_else(|| structural(format!("errorRef '{r}' does not name an error")))?
                        .map(str::to_owned),
                };
                ElementKind::BoundaryErrorEvent { attached_to, error_code }
            }
        };
        let name = node.attribute("name").unwrap_or("").to_owned();
        elements.push(BpmnElement { id, name, kind });
    }

    for (gateway, flow) in defaults {
        let f = flows
            .iter_mut()
            .find(|f| f.id == flow && f.source == gateway)
            .ok_or_else(|| structural(format!("default flow '{flow}' does not leave gateway '{gateway}'")))?;
        f.is_default = true;
    }

    let doc = BpmnDocument {
        process_id: required(process, "id")?.to_owned(),
        process_name: process.attribute("name").unwrap_or("").to_owned(),
        lanes,
        elements,
        flows,
    };
    check_structure(&doc).map_err(LoadError::Structural)?;
    Ok(doc)
}

fn service_task(node: &Node) -> Result<ServiceTask, LoadError> {
    let ext: Vec<Node> = bpmn_children(*node, "extensionElements").flat_map(|e| e.children()).collect();
    let id = node.attribute("id").unwrap_or("");
    let skills: Vec<&Node> = ext.iter().filter(|c| is_sf(c, "skill")).collect();
    let [skill] = skills.as_slice() else {
        return Err(structural(format!("service task '{id}' needs exactly one sf:skill, has {}", skills.len())));
    };
    let skill = SkillRef::new(required(skill, "module")?, required(skill, "name")?);

    let mut parameters = BTreeMap::new();
    for p in ext.iter().filter(|c| is_sf(c, "parameter")) {
        let name = required(p, "name")?.to_owned();
        let binding = match (p.attribute("variable"), p.attribute("value")) {
            (Some(v), None) => ParameterBinding::Variable(v.to_owned()),
            (None, Some(v)) => ParameterBinding::Literal(parse_literal(v)),
            _ => return Err(structural(format!("parameter '{name}' of '{id}' needs exactly one of variable/value"))),
        };
        if parameters.insert(name.clone(), binding).is_some() {
            return Err(structural(format!("parameter '{name}' of '{id}' is bound twice")));
        }
    }
    let mut outputs = BTreeMap::new();
    for o in ext.iter().filter(|c| is_sf(c, "output")) {
        let name = required(o, "name")?.to_owned();
        if outputs.insert(name.clone(), required(o, "variable")?.to_owned()).is_some() {
            return Err(structural(format!("output '{name}' of '{id}' is bound twice")));
        }
    }
    Ok(ServiceTask { skill, parameters, outputs })
}
