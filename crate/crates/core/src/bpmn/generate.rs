use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use super::{BpmnDocument, BpmnElement, ElementKind, GatewayDirection, Lane, ParameterBinding, SequenceFlow, ServiceTask};
use crate::model::{resolve_pin, ActivityModel, Direction, NodeKind, ObjectFlow, SystemGroupModel};
use crate::naming::ncname_with_ordinal;
use crate::runtime::SkillRef;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("activity '{0}' does not exist")]
    UnknownActivity(String),
    #[error("node '{node}' cannot be mapped: {reason}")]
    UnmappableNode { node: String, reason: String },
}

/// Maps one activity node by node onto a BPMN process.
///
/// Element ids are `<sanitized name>_<ordinal>` with the 1-based node position
/// as ordinal, so they are unique even when names collide. Actions use the
/// whitebox function name, all other nodes their node id. Flow, lane and
/// process ids contain no underscore and cannot clash with element ids.
pub fn generate_bpmn(model: &SystemGroupModel, activity_name: &str) -> Result<BpmnDocument, GenerateError> {
    let activity = model
        .activity(activity_name)
        .ok_or_else(|| GenerateError::UnknownActivity(activity_name.to_owned()))?;

    let mut ids = HashMap::new();
    for (i, node) in activity.nodes.iter().enumerate() {
        let name = match &node.kind {
            NodeKind::Action { function_ref } => function_ref.function.as_str(),
            _ => node.id.as_str(),
        };
        ids.insert(node.id.as_str(), ncname_with_ordinal(name, i + 1));
    }

    let mut elements = Vec::with_capacity(activity.nodes.len());
    for node in &activity.nodes {
        let (name, kind) = match &node.kind {
            NodeKind::Initial => (node.id.clone(), ElementKind::StartEvent),
            NodeKind::Final => (node.id.clone(), ElementKind::EndEvent),
            NodeKind::Decision => (node.id.clone(), ElementKind::ExclusiveGateway(GatewayDirection::Diverging)),
            NodeKind::Merge => (node.id.clone(), ElementKind::ExclusiveGateway(GatewayDirection::Converging)),
            NodeKind::Fork => (node.id.clone(), ElementKind::ParallelGateway(GatewayDirection::Diverging)),
            NodeKind::Join => (node.id.clone(), ElementKind::ParallelGateway(GatewayDirection::Converging)),
            NodeKind::SendSignal { signal, .. } => (node.id.clone(), ElementKind::SignalThrowEvent { signal: signal.clone() }),
            NodeKind::AcceptSignal { signal, .. } => (node.id.clone(), ElementKind::SignalCatchEvent { signal: signal.clone() }),
            NodeKind::Action { function_ref } => {
                let function = model.whitebox_function(function_ref).ok_or_else(|| GenerateError::UnmappableNode {
                    node: node.id.clone(),
                    reason: format!("function {function_ref} does not resolve"),
                })?;
                let kind = match model.binding_for(function_ref) {
                    None => ElementKind::AbstractTask,
                    Some(binding) => {
                        let mut parameters = BTreeMap::new();
                        for pin in &function.inputs {
                            if let Some(var) = input_source(model, activity, &node.id, &pin.name) {
                                parameters.insert(pin.name.clone(), ParameterBinding::Variable(var));
                            }
                        }
                        let outputs = function
                            .outputs
                            .iter()
                            .map(|p| (p.name.clone(), output_variable(&node.id, &p.name)))
                            .collect();
                        ElementKind::ServiceTask(ServiceTask {
                            skill: SkillRef::new(&binding.module_name, &binding.skill_interface_name),
                            parameters,
                            outputs,
                        })
                    }
                };
                (function.name.clone(), kind)
            }
        };
        elements.push(BpmnElement { id: ids[node.id.as_str()].clone(), name, kind });
    }

    let mut flows = Vec::new();
    for (k, c) in activity.control_flows().enumerate() {
        let (Some(source), Some(target)) = (ids.get(c.source.as_str()), ids.get(c.target.as_str())) else {
            return Err(GenerateError::UnmappableNode {
                node: format!("{} -> {}", c.source, c.target),
                reason: "control flow endpoint does not exist".into(),
            });
        };
        let is_default = c.guard.as_deref().map(str::trim) == Some("else");
        flows.push(SequenceFlow {
            id: format!("flow{}", k + 1),
            source: source.clone(),
            target: target.clone(),
            condition: if is_default { None } else { c.guard.as_ref().map(|g| g.trim().to_owned()) },
            is_default,
        });
    }

    let lanes = activity
        .partitions
        .iter()
        .enumerate()
        .map(|(k, role)| Lane {
            id: format!("lane{}", k + 1),
            role: role.clone(),
            members: activity
                .nodes
                .iter()
                .filter(|n| n.partition.as_ref() == Some(role))
                .map(|n| ids[n.id.as_str()].clone())
                .collect(),
        })
        .collect();

    Ok(BpmnDocument { process_id: "process".into(), process_name: activity.name.clone(), lanes, elements, flows })
}

/// Process variable receiving output `pin` of the action node `node_id`.
pub fn output_variable(node_id: &str, pin: &str) -> String {
    format!("{node_id}_{pin}")
}

fn flow_pin(model: &SystemGroupModel, activity: &ActivityModel, flow: &ObjectFlow, direction: Direction) -> Option<String> {
    let (node, pin) = match direction {
        Direction::In => (&flow.target, &flow.target_pin),
        Direction::Out => (&flow.source, &flow.source_pin),
    };
    match &activity.node(node)?.kind {
        NodeKind::Action { function_ref } => {
            let f = model.whitebox_function(function_ref)?;
            resolve_pin(f, direction, pin.as_deref(), &flow.content_type).map(|p| p.name.clone())
        }
        _ => pin.clone(),
    }
}

/// Variable feeding input `pin` of `node_id`: the first object flow into the
/// pin, followed back through accept/send signal pairs to an action output.
fn input_source(model: &SystemGroupModel, activity: &ActivityModel, node_id: &str, pin: &str) -> Option<String> {
    let flow = activity
        .object_flows()
        .find(|f| f.target == node_id && flow_pin(model, activity, f, Direction::In).as_deref() == Some(pin))?;
    trace_back(model, activity, flow, &mut HashSet::new())
}

fn trace_back<'a>(
    model: &SystemGroupModel,
    activity: &'a ActivityModel,
    flow: &'a ObjectFlow,
    seen: &mut HashSet<&'a str>,
) -> Option<String> {
    let source = activity.node(&flow.source)?;
    match &source.kind {
        NodeKind::Action { .. } => {
            flow_pin(model, activity, flow, Direction::Out).map(|pin| output_variable(&source.id, &pin))
        }
        NodeKind::AcceptSignal { signal, .. } => {
            if !seen.insert(source.id.as_str()) {
                return None;
            }
            let label = flow.source_pin.as_deref();
            let upstream = activity.object_flows().find(|g| {
                let is_send = matches!(
                    activity.node(&g.target).map(|n| &n.kind),
                    Some(NodeKind::SendSignal { signal: s, .. }) if s == signal
                );
                is_send && (label.is_none() || g.target_pin.as_deref() == label)
            })?;
            trace_back(model, activity, upstream, seen)
        }
        _ => None,
    }
}
