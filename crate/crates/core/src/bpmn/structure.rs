use std::collections::{HashMap, HashSet, VecDeque};

use super::{BpmnDocument, ElementKind};
use crate::engine::condition::Condition;
use crate::naming::is_ncname;

/// Checks the document invariants the engine relies on. Returns the first
/// violation found.
pub fn check_structure(doc: &BpmnDocument) -> Result<(), String> {
    let mut ids = HashSet::new();
    let all_ids = std::iter::once(doc.process_id.as_str())
        .chain(doc.lanes.iter().map(|l| l.id.as_str()))
        .chain(doc.elements.iter().map(|e| e.id.as_str()))
        .chain(doc.flows.iter().map(|f| f.id.as_str()));
    for id in all_ids {
        if !is_ncname(id) {
            return Err(format!("id '{id}' is not a valid NCName"));
        }
        if !ids.insert(id) {
            return Err(format!("duplicate id '{id}'"));
        }
    }

    let kinds: HashMap<&str, &ElementKind> = doc.elements.iter().map(|e| (e.id.as_str(), &e.kind)).collect();
    let starts: Vec<&str> = doc
        .elements
        .iter()
        .filter(|e| e.kind == ElementKind::StartEvent)
        .map(|e| e.id.as_str())
        .collect();
    let [start] = starts.as_slice() else {
        return Err(format!("expected exactly one start event, found {}", starts.len()));
    };

    let mut defaults = HashSet::new();
    for f in &doc.flows {
        let source = kinds.get(f.source.as_str()).ok_or_else(|| format!("flow '{}' has dangling source '{}'", f.id, f.source))?;
        let target = kinds.get(f.target.as_str()).ok_or_else(|| format!("flow '{}' has dangling target '{}'", f.id, f.target))?;
        if matches!(source, ElementKind::EndEvent) {
            return Err(format!("flow '{}' leaves end event '{}'", f.id, f.source));
        }
        if matches!(target, ElementKind::StartEvent | ElementKind::BoundaryErrorEvent { .. }) {
            return Err(format!("flow '{}' enters '{}', which accepts no incoming flow", f.id, f.target));
        }
        let from_exclusive = matches!(source, ElementKind::ExclusiveGateway(_));
        if (f.condition.is_some() || f.is_default) && !from_exclusive {
            return Err(format!("flow '{}' carries a condition but does not leave an exclusive gateway", f.id));
        }
        if let Some(text) = &f.condition {
            if f.is_default {
                return Err(format!("default flow '{}' carries a condition", f.id));
            }
            Condition::parse(text).map_err(|e| format!("flow '{}': {e}", f.id))?;
        }
        if f.is_default && !defaults.insert(f.source.as_str()) {
            return Err(format!("gateway '{}' has more than one default flow", f.source));
        }
    }

    for e in &doc.elements {
        let out = doc.outgoing(&e.id).count();
        match &e.kind {
            ElementKind::EndEvent => {}
            ElementKind::ExclusiveGateway(_) | ElementKind::ParallelGateway(_) if out == 0 => {
                return Err(format!("gateway '{}' has no outgoing flow", e.id));
            }
            ElementKind::ExclusiveGateway(_) | ElementKind::ParallelGateway(_) => {}
            _ if out != 1 => return Err(format!("'{}' must have exactly one outgoing flow, has {out}", e.id)),
            _ => {}
        }
        if let ElementKind::BoundaryErrorEvent { attached_to, .. } = &e.kind {
            match kinds.get(attached_to.as_str()) {
                Some(ElementKind::ServiceTask(_) | ElementKind::AbstractTask) => {}
                _ => return Err(format!("boundary event '{}' is not attached to a task", e.id)),
            }
        }
    }

    let mut seen = HashSet::from([*start]);
    let mut queue = VecDeque::from([*start]);
    while let Some(id) = queue.pop_front() {
        let attached = doc.elements.iter().filter_map(|e| match &e.kind {
            ElementKind::BoundaryErrorEvent { attached_to, .. } if attached_to == id => Some(e.id.as_str()),
            _ => None,
        });
        for next in doc.outgoing(id).map(|f| f.target.as_str()).chain(attached) {
            if seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    if let Some(e) = doc.elements.iter().find(|e| !seen.contains(e.id.as_str())) {
        return Err(format!("'{}' is not reachable from the start event", e.id));
    }

    let mut placed = HashSet::new();
    for lane in &doc.lanes {
        for m in &lane.members {
            if !kinds.contains_key(m.as_str()) {
                return Err(format!("lane '{}' references unknown element '{m}'", lane.id));
            }
            if !placed.insert(m.as_str()) {
                return Err(format!("element '{m}' belongs to more than one lane"));
            }
        }
    }
    Ok(())
}
