//! Methodology transforms: cross-role flow detection, port derivation and
//! signalization of cross-partition object flows.

use std::collections::HashSet;

use thiserror::Error;

use super::{
    resolve_pin, ActivityModel, ControlFlow, Direction, Edge, Node, NodeKind, ObjectFlow, Port, SystemGroupModel,
};
use crate::naming::camel_case;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("activity '{activity}': edge endpoint '{node}' does not exist")]
    UnresolvedNode { activity: String, node: String },
    #[error("role '{role}' has no {direction:?} port for content type '{content_type}'")]
    MissingPort { role: String, direction: Direction, content_type: String },
}

fn is_cross(activity: &ActivityModel, flow: &ObjectFlow) -> Result<Option<(String, String)>, TransformError> {
    let lookup = |id: &str| {
        activity.node(id).ok_or_else(|| TransformError::UnresolvedNode {
            activity: activity.name.clone(),
            node: id.to_owned(),
        })
    };
    let source = lookup(&flow.source)?;
    let target = lookup(&flow.target)?;
    Ok(match (&source.partition, &target.partition) {
        (Some(p), Some(q)) if p != q => Some((p.clone(), q.clone())),
        _ => None,
    })
}

/// Object flows whose endpoints lie in different partitions, in document order.
pub fn cross_role_flows(activity: &ActivityModel) -> Result<Vec<ObjectFlow>, TransformError> {
    let mut out = Vec::new();
    for flow in activity.object_flows() {
        if is_cross(activity, flow)?.is_some() {
            out.push(flow.clone());
        }
    }
    Ok(out)
}

/// Port name for a content type: `in_<camelCase>` or `out_<camelCase>`.
pub fn port_name(direction: Direction, content_type: &str) -> String {
    let prefix = match direction {
        Direction::In => "in",
        Direction::Out => "out",
    };
    format!("{prefix}_{}", camel_case(content_type))
}

fn ensure_port(model: &mut SystemGroupModel, role: &str, direction: Direction, content_type: &str) {
    let Some(role) = model.roles.iter_mut().find(|r| r.name == role) else { return };
    if role.ports.iter().any(|p| p.direction == direction && p.content_type == content_type) {
        return;
    }
    let base = port_name(direction, content_type);
    let mut name = base.clone();
    let mut n = 2;
    while role.port(&name).is_some() {
        name = format!("{base}_{n}");
        n += 1;
    }
    role.ports.push(Port { name, direction, content_type: content_type.to_owned() });
}

/// Adds an `Out` port on the source role and an `In` port on the target role
/// for every distinct cross-role exchange. Existing ports with the same
/// direction and content type are reused, so the transform is idempotent.
pub fn derive_ports(model: &SystemGroupModel) -> SystemGroupModel {
    let mut exchanges: Vec<(String, String, String)> = Vec::new();
    for activity in &model.activities {
        for flow in activity.object_flows() {
            if let Ok(Some((p, q))) = is_cross(activity, flow) {
                let key = (p, q, flow.content_type.clone());
                if !exchanges.contains(&key) {
                    exchanges.push(key);
                }
            }
        }
    }
    let mut out = model.clone();
    for (source, target, content_type) in exchanges {
        ensure_port(&mut out, &source, Direction::Out, &content_type);
        ensure_port(&mut out, &target, Direction::In, &content_type);
    }
    out
}

fn find_port(model: &SystemGroupModel, role: &str, direction: Direction, content_type: &str) -> Result<String, TransformError> {
    model
        .role(role)
        .and_then(|r| r.ports.iter().find(|p| p.direction == direction && p.content_type == content_type))
        .map(|p| p.name.clone())
        .ok_or_else(|| TransformError::MissingPort {
            role: role.to_owned(),
            direction,
            content_type: content_type.to_owned(),
        })
}

fn fresh_id(taken: &mut HashSet<String>, base: String) -> String {
    let mut id = base.clone();
    let mut n = 2;
    while taken.contains(&id) {
        id = format!("{base}_{n}");
        n += 1;
    }
    taken.insert(id.clone());
    id
}

/// Replaces every cross-partition object flow by a send/accept signal pair.
///
/// The send node is placed after the source node in control flow and bound to
/// the source role's `Out` port; the accept node is placed before the target
/// node and bound to the target role's `In` port. Guards stay on the edge that
/// leaves the original source. The signal name is the content type.
pub fn signalize(model: &SystemGroupModel) -> Result<SystemGroupModel, TransformError> {
    let mut out = model.clone();
    for ai in 0..out.activities.len() {
        let rewritten = signalize_activity(&out, &out.activities[ai])?;
        out.activities[ai] = rewritten;
    }
    Ok(out)
}

fn signalize_activity(model: &SystemGroupModel, activity: &ActivityModel) -> Result<ActivityModel, TransformError> {
    let mut crossings = Vec::new();
    for (i, e) in activity.edges.iter().enumerate() {
        if let Edge::Object(flow) = e {
            if let Some((p, q)) = is_cross(activity, flow)? {
                crossings.push((i, p, q));
            }
        }
    }
    if crossings.is_empty() {
        return Ok(activity.clone());
    }

    let mut result = activity.clone();
    let mut taken: HashSet<String> = activity.nodes.iter().map(|n| n.id.clone()).collect();
    // replacements per original edge index; controls appended afterwards
    let mut replaced: Vec<Option<[ObjectFlow; 2]>> = vec![None; activity.edges.len()];
    let mut controls: Vec<ControlFlow> = activity.control_flows().cloned().collect();

    for (k, (edge_index, source_role, target_role)) in crossings.into_iter().enumerate() {
        let Edge::Object(flow) = &activity.edges[edge_index] else { unreachable!() };
        let out_port = find_port(model, &source_role, Direction::Out, &flow.content_type)?;
        let in_port = find_port(model, &target_role, Direction::In, &flow.content_type)?;
        let label = pin_label(model, activity, flow);
        let slug = camel_case(&flow.content_type);
        let send_id = fresh_id(&mut taken, format!("send_{slug}_{}", k + 1));
        let accept_id = fresh_id(&mut taken, format!("accept_{slug}_{}", k + 1));

        result.nodes.push(Node {
            id: send_id.clone(),
            partition: Some(source_role),
            kind: NodeKind::SendSignal { signal: flow.content_type.clone(), port: out_port },
        });
        result.nodes.push(Node {
            id: accept_id.clone(),
            partition: Some(target_role),
            kind: NodeKind::AcceptSignal { signal: flow.content_type.clone(), port: in_port },
        });
        replaced[edge_index] = Some([
            ObjectFlow {
                source: flow.source.clone(),
                source_pin: flow.source_pin.clone(),
                target: send_id.clone(),
                target_pin: Some(label.clone()),
                content_type: flow.content_type.clone(),
            },
            ObjectFlow {
                source: accept_id.clone(),
                source_pin: Some(label),
                target: flow.target.clone(),
                target_pin: flow.target_pin.clone(),
                content_type: flow.content_type.clone(),
            },
        ]);

        let mut added = Vec::new();
        for c in controls.iter_mut().filter(|c| c.source == flow.source) {
            added.push(ControlFlow::new(send_id.clone(), c.target.clone()));
            c.target = send_id.clone();
        }
        if added.is_empty() {
            added.push(ControlFlow::new(flow.source.clone(), send_id.clone()));
        }
        controls.extend(added);

        let mut redirected = false;
        for c in controls.iter_mut().filter(|c| c.target == flow.target) {
            c.target = accept_id.clone();
            redirected = true;
        }
        if redirected {
            controls.push(ControlFlow::new(accept_id, flow.target.clone()));
        }
    }

    let mut controls = controls.into_iter();
    let mut edges = Vec::with_capacity(activity.edges.len() + 8);
    for (i, e) in activity.edges.iter().enumerate() {
        match e {
            Edge::Control(_) => edges.push(Edge::Control(controls.next().expect("control flows are only appended"))),
            Edge::Object(o) => match replaced[i].take() {
                Some([a, b]) => {
                    edges.push(Edge::Object(a));
                    edges.push(Edge::Object(b));
                }
                None => edges.push(Edge::Object(o.clone())),
            },
        }
    }
    edges.extend(controls.map(Edge::Control));
    result.edges = edges;
    Ok(result)
}

fn pin_label(model: &SystemGroupModel, activity: &ActivityModel, flow: &ObjectFlow) -> String {
    if let Some(pin) = &flow.source_pin {
        return pin.clone();
    }
    activity
        .node(&flow.source)
        .and_then(|n| match &n.kind {
            NodeKind::Action { function_ref } => model.whitebox_function(function_ref),
            _ => None,
        })
        .and_then(|f| resolve_pin(f, Direction::Out, None, &flow.content_type))
        .map(|p| p.name.clone())
        .unwrap_or_else(|| camel_case(&flow.content_type))
}
