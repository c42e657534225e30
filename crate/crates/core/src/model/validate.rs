//! Consistency rules R1–R10 over a system group model.
//!
//! | rule | checks |
//! |------|--------|
//! | R1  | every goal is satisfied by at least one blackbox function; goal references resolve |
//! | R2  | every leaf blackbox function owns exactly one activity; function references resolve |
//! | R3  | partitions are roles; action and signal nodes sit in a declared partition |
//! | R4  | an action's function reference resolves inside its partition's role |
//! | R5  | object flow endpoints are pins and their content types match the flow |
//! | R6  | signal nodes reference a port of the right direction and content type |
//! | R7  | bound states, state model transitions and collaboration signals resolve |
//! | R8  | deployment bindings resolve and are complete |
//! | R9  | activity graph sanity: one initial, at least one final, reachability, well-formed guards |
//! | R10 | name uniqueness and non-empty names |

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;

use super::{resolve_pin, ActivityModel, Direction, NodeKind, SystemGroupModel};
use crate::engine::condition::Guard;
use crate::naming::is_identifier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RuleId {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
    R9,
    R10,
}

impl RuleId {
    pub const ALL: [RuleId; 10] = [
        RuleId::R1,
        RuleId::R2,
        RuleId::R3,
        RuleId::R4,
        RuleId::R5,
        RuleId::R6,
        RuleId::R7,
        RuleId::R8,
        RuleId::R9,
        RuleId::R10,
    ];
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Finding {
    pub rule_id: RuleId,
    pub severity: Severity,
    pub location: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}] {}: {}", self.rule_id, self.location, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.findings.iter().any(|f| f.severity == Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    /// Distinct rules with at least one finding.
    pub fn rules(&self) -> BTreeSet<RuleId> {
        self.findings.iter().map(|f| f.rule_id).collect()
    }

    pub fn has_errors_in(&self, rules: &[RuleId]) -> bool {
        self.errors().any(|f| rules.contains(&f.rule_id))
    }
}

struct Collector {
    findings: Vec<Finding>,
}

impl Collector {
    fn error(&mut self, rule_id: RuleId, location: impl Into<String>, message: impl Into<String>) {
        self.push(rule_id, Severity::Error, location, message);
    }

    fn push(&mut self, rule_id: RuleId, severity: Severity, location: impl Into<String>, message: impl Into<String>) {
        self.findings.push(Finding { rule_id, severity, location: location.into(), message: message.into() });
    }
}

/// Checks all rules and reports one finding per violated rule instance.
pub fn validate_model(model: &SystemGroupModel) -> ValidationReport {
    let mut c = Collector { findings: Vec::new() };
    check_goals(model, &mut c);
    check_blackbox_functions(model, &mut c);
    for activity in &model.activities {
        check_partitions(model, activity, &mut c);
        check_function_refs(model, activity, &mut c);
        check_object_flows(model, activity, &mut c);
        check_signals(model, activity, &mut c);
        check_graph(activity, &mut c);
    }
    check_states(model, &mut c);
    check_deployment(model, &mut c);
    check_uniqueness(model, &mut c);
    ValidationReport { findings: c.findings }
}

fn check_goals(model: &SystemGroupModel, c: &mut Collector) {
    for goal in &model.goals {
        let loc = format!("goals[{}]", goal.id);
        let severity = if goal.aspirational { Severity::Warning } else { Severity::Error };
        let mut satisfied = false;
        for name in &goal.satisfied_by {
            if model.blackbox_function(name).is_some() {
                satisfied = true;
            } else {
                c.push(RuleId::R1, severity, &loc, format!("goal {} references unknown blackbox function '{name}'", goal.id));
            }
        }
        if !satisfied {
            c.push(
                RuleId::R1,
                severity,
                &loc,
                format!("goal {} '{}' is not satisfied by any blackbox function", goal.id, goal.name),
            );
        }
        if let Some(parent) = goal.refines {
            if model.goal(parent).is_none() {
                c.push(RuleId::R1, severity, &loc, format!("goal {} refines unknown goal {parent}", goal.id));
            }
        }
    }
}

fn check_blackbox_functions(model: &SystemGroupModel, c: &mut Collector) {
    let refined: HashSet<&str> =
        model.blackbox_functions.iter().filter_map(|f| f.refines_function.as_deref()).collect();
    for f in &model.blackbox_functions {
        let loc = format!("blackboxFunctions[{}]", f.name);
        if let Some(parent) = &f.refines_function {
            if model.blackbox_function(parent).is_none() {
                c.error(RuleId::R2, &loc, format!("refines unknown function '{parent}'"));
            }
        }
        match &f.activity {
            Some(a) if model.activity(a).is_none() => {
                c.error(RuleId::R2, &loc, format!("references unknown activity '{a}'"));
            }
            None if !refined.contains(f.name.as_str()) => {
                c.error(RuleId::R2, &loc, "leaf function has no activity");
            }
            _ => {}
        }
    }
}

fn activity_loc(activity: &ActivityModel) -> String {
    format!("activities[{}]", activity.name)
}

fn check_partitions(model: &SystemGroupModel, activity: &ActivityModel, c: &mut Collector) {
    let loc = activity_loc(activity);
    for p in &activity.partitions {
        if model.role(p).is_none() {
            c.error(RuleId::R3, &loc, format!("partition '{p}' is not a role"));
        }
    }
    for node in &activity.nodes {
        let needs_partition = matches!(
            node.kind,
            NodeKind::Action { .. } | NodeKind::SendSignal { .. } | NodeKind::AcceptSignal { .. }
        );
        if !needs_partition {
            continue;
        }
        match &node.partition {
            Some(p) if activity.partitions.contains(p) => {}
            Some(p) => c.error(
                RuleId::R3,
                format!("{loc}/nodes[{}]", node.id),
                format!("{} node sits in undeclared partition '{p}'", node.kind.label()),
            ),
            None => c.error(
                RuleId::R3,
                format!("{loc}/nodes[{}]", node.id),
                format!("{} node has no partition", node.kind.label()),
            ),
        }
    }
}

fn check_function_refs(model: &SystemGroupModel, activity: &ActivityModel, c: &mut Collector) {
    for node in &activity.nodes {
        let NodeKind::Action { function_ref } = &node.kind else { continue };
        let Some(partition) = &node.partition else { continue };
        let loc = format!("{}/nodes[{}]", activity_loc(activity), node.id);
        if &function_ref.role != partition {
            c.error(
                RuleId::R4,
                &loc,
                format!("function {function_ref} is not owned by partition role '{partition}'"),
            );
        } else if model.whitebox_function(function_ref).is_none() {
            c.error(RuleId::R4, &loc, format!("function {function_ref} does not resolve"));
        }
    }
}

fn check_object_flows(model: &SystemGroupModel, activity: &ActivityModel, c: &mut Collector) {
    for (i, flow) in activity.object_flows().enumerate() {
        let loc = format!("{}/objectFlows[{i}]", activity_loc(activity));
        if flow.content_type.is_empty() {
            c.error(RuleId::R5, &loc, "object flow has no content type");
            continue;
        }
        let ends = [
            (&flow.source, flow.source_pin.as_deref(), Direction::Out),
            (&flow.target, flow.target_pin.as_deref(), Direction::In),
        ];
        for (node_id, pin, direction) in ends {
            // missing endpoints are reported by R9
            let Some(node) = activity.node(node_id) else { continue };
            match (&node.kind, direction) {
                (NodeKind::Action { function_ref }, _) => {
                    let owned = node.partition.as_deref() == Some(function_ref.role.as_str());
                    let Some(function) = model.whitebox_function(function_ref).filter(|_| owned) else {
                        // unresolved functions are reported by R4
                        continue;
                    };
                    match resolve_pin(function, direction, pin, &flow.content_type) {
                        Some(p) if p.content_type == flow.content_type => {}
                        Some(p) => c.error(
                            RuleId::R5,
                            &loc,
                            format!(
                                "pin '{}' of node '{node_id}' carries '{}' but the flow carries '{}'",
                                p.name, p.content_type, flow.content_type
                            ),
                        ),
                        None => c.error(
                            RuleId::R5,
                            &loc,
                            format!("no {direction:?} pin on node '{node_id}' matches the flow"),
                        ),
                    }
                }
                (NodeKind::SendSignal { .. }, Direction::In) | (NodeKind::AcceptSignal { .. }, Direction::Out) => {}
                (kind, _) => c.error(
                    RuleId::R5,
                    &loc,
                    format!("{} node '{node_id}' cannot be an object flow endpoint here", kind.label()),
                ),
            }
        }
    }
}

fn check_signals(model: &SystemGroupModel, activity: &ActivityModel, c: &mut Collector) {
    for node in &activity.nodes {
        let (signal, port_name, expected) = match &node.kind {
            NodeKind::SendSignal { signal, port } => (signal, port, Direction::Out),
            NodeKind::AcceptSignal { signal, port } => (signal, port, Direction::In),
            _ => continue,
        };
        let Some(role) = node.partition.as_deref().and_then(|p| model.role(p)) else { continue };
        let loc = format!("{}/nodes[{}]", activity_loc(activity), node.id);
        match role.port(port_name) {
            None => c.error(RuleId::R6, &loc, format!("port '{port_name}' does not exist on role '{}'", role.name)),
            Some(port) if port.direction != expected => c.error(
                RuleId::R6,
                &loc,
                format!("port '{port_name}' has direction {:?}, expected {expected:?}", port.direction),
            ),
            Some(port) if &port.content_type != signal => c.error(
                RuleId::R6,
                &loc,
                format!("port '{port_name}' carries '{}' but signal is '{signal}'", port.content_type),
            ),
            Some(_) => {}
        }
    }
    for role in &model.roles {
        for port in &role.ports {
            if port.content_type.is_empty() {
                c.error(RuleId::R6, format!("roles[{}]/ports[{}]", role.name, port.name), "port has no content type");
            }
        }
    }
}

fn check_graph(activity: &ActivityModel, c: &mut Collector) {
    let loc = activity_loc(activity);
    let initials: Vec<_> = activity.nodes.iter().filter(|n| n.kind == NodeKind::Initial).collect();
    if initials.len() != 1 {
        c.error(RuleId::R9, &loc, format!("expected exactly one initial node, found {}", initials.len()));
    }
    if !activity.nodes.iter().any(|n| n.kind == NodeKind::Final) {
        c.error(RuleId::R9, &loc, "activity has no final node");
    }
    let ids: HashSet<&str> = activity.nodes.iter().map(|n| n.id.as_str()).collect();
    let mut outgoing: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut incoming: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, e) in activity.edges.iter().enumerate() {
        let (source, target) = match e {
            super::Edge::Control(f) => (&f.source, &f.target),
            super::Edge::Object(f) => (&f.source, &f.target),
        };
        for end in [source, target] {
            if !ids.contains(end.as_str()) {
                c.error(RuleId::R9, format!("{loc}/edges[{i}]"), format!("edge endpoint '{end}' does not exist"));
            }
        }
        if let super::Edge::Control(f) = e {
            outgoing.entry(f.source.as_str()).or_default().push(f.target.as_str());
            *incoming.entry(f.target.as_str()).or_default() += 1;
        }
    }
    let mut defaults: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, f) in activity.control_flows().enumerate() {
        let Some(guard) = &f.guard else { continue };
        let floc = format!("{loc}/controlFlows[{i}]");
        let from_decision = activity.node(&f.source).is_some_and(|n| n.kind == NodeKind::Decision);
        if !from_decision {
            c.error(RuleId::R9, &floc, "guards are only allowed on flows leaving a decision");
        }
        match Guard::parse(guard) {
            Ok(Guard::Else) => *defaults.entry(f.source.as_str()).or_default() += 1,
            Ok(Guard::Condition(_)) => {}
            Err(e) => c.error(RuleId::R9, &floc, format!("malformed guard: {e}")),
        }
    }
    for (source, n) in defaults {
        if n > 1 {
            c.error(RuleId::R9, format!("{loc}/nodes[{source}]"), "decision has more than one else branch");
        }
    }
    for node in &activity.nodes {
        let nloc = format!("{loc}/nodes[{}]", node.id);
        let out = outgoing.get(node.id.as_str()).map_or(0, Vec::len);
        match node.kind {
            NodeKind::Final if out > 0 => c.error(RuleId::R9, &nloc, "final node has outgoing control flows"),
            NodeKind::Final => {}
            NodeKind::Decision | NodeKind::Merge | NodeKind::Fork | NodeKind::Join if out == 0 => {
                c.error(RuleId::R9, &nloc, "node has no outgoing control flow")
            }
            NodeKind::Decision | NodeKind::Merge | NodeKind::Fork | NodeKind::Join => {}
            _ if out != 1 => c.error(
                RuleId::R9,
                &nloc,
                format!("node must have exactly one outgoing control flow, found {out}"),
            ),
            _ => {}
        }
        if node.kind == NodeKind::Initial && incoming.get(node.id.as_str()).copied().unwrap_or(0) > 0 {
            c.error(RuleId::R9, &nloc, "initial node has incoming control flows");
        }
    }
    if let [initial] = initials.as_slice() {
        let mut seen: HashSet<&str> = HashSet::from([initial.id.as_str()]);
        let mut queue = VecDeque::from([initial.id.as_str()]);
        while let Some(id) = queue.pop_front() {
            for next in outgoing.get(id).into_iter().flatten() {
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        for node in &activity.nodes {
            if !seen.contains(node.id.as_str()) {
                c.error(RuleId::R9, format!("{loc}/nodes[{}]", node.id), "node is not reachable from the initial node");
            }
        }
    }
}

fn check_states(model: &SystemGroupModel, c: &mut Collector) {
    for role in &model.roles {
        let loc = format!("roles[{}]", role.name);
        for f in &role.whitebox_functions {
            for s in &f.bound_states {
                if !role.has_state(s) {
                    c.error(
                        RuleId::R7,
                        format!("{loc}/whiteboxFunctions[{}]", f.name),
                        format!("bound state '{s}' is not a state of role '{}'", role.name),
                    );
                }
            }
        }
        let Some(sm) = &role.state_model else { continue };
        let has = |s: &str| sm.states.iter().any(|x| x == s);
        if !has(&sm.initial) {
            c.error(RuleId::R7, format!("{loc}/stateModel"), format!("initial state '{}' is not declared", sm.initial));
        }
        for t in &sm.transitions {
            for end in [&t.from, &t.to] {
                if !has(end) {
                    c.error(RuleId::R7, format!("{loc}/stateModel"), format!("transition endpoint '{end}' is not declared"));
                }
            }
        }
        for cf in &sm.collaboration_functions {
            let cloc = format!("{loc}/stateModel/collaborationFunctions[{}]", cf.name);
            for s in &cf.sent_signals {
                if !sm.transitions.iter().any(|t| t.sends.as_ref() == Some(s)) {
                    c.error(RuleId::R7, &cloc, format!("sent signal '{s}' is not emitted by any transition"));
                }
            }
            for s in &cf.received_signals {
                if !sm.transitions.iter().any(|t| t.trigger.as_ref() == Some(s)) {
                    c.error(RuleId::R7, &cloc, format!("received signal '{s}' does not trigger any transition"));
                }
            }
        }
    }
}

fn check_deployment(model: &SystemGroupModel, c: &mut Collector) {
    for (i, b) in model.deployment.iter().enumerate() {
        let loc = format!("deployment[{i}]");
        if model.whitebox_function(&b.function_ref).is_none() {
            c.error(RuleId::R8, &loc, format!("bound function {} does not resolve", b.function_ref));
        }
        if !is_identifier(&b.skill_interface_name) {
            c.error(RuleId::R8, &loc, format!("skill interface name '{}' is not an identifier", b.skill_interface_name));
        }
        if b.module_name.trim().is_empty() {
            c.error(RuleId::R8, &loc, "module name is empty");
        }
        if b.description.trim().is_empty() {
            c.error(RuleId::R8, &loc, "description is empty");
        }
    }
}

fn duplicates<'a>(names: impl IntoIterator<Item = &'a str>) -> Vec<&'a str> {
    let mut seen = HashSet::new();
    let mut dups = Vec::new();
    for n in names {
        if !seen.insert(n) && !dups.contains(&n) {
            dups.push(n);
        }
    }
    dups
}

fn check_uniqueness(model: &SystemGroupModel, c: &mut Collector) {
    let mut dup = |loc: String, what: &str, names: Vec<&str>| {
        for n in names {
            c.error(RuleId::R10, &loc, format!("duplicate {what} '{n}'"));
        }
    };
    let goal_ids: Vec<String> = model.goals.iter().map(|g| g.id.to_string()).collect();
    dup("goals".into(), "goal id", duplicates(goal_ids.iter().map(String::as_str)));
    dup(
        "blackboxFunctions".into(),
        "blackbox function",
        duplicates(model.blackbox_functions.iter().map(|f| f.name.as_str())),
    );
    dup("roles".into(), "role", duplicates(model.roles.iter().map(|r| r.name.as_str())));
    dup("activities".into(), "activity", duplicates(model.activities.iter().map(|a| a.name.as_str())));
    let bound: Vec<String> = model.deployment.iter().map(|b| b.function_ref.to_string()).collect();
    dup("deployment".into(), "binding for", duplicates(bound.iter().map(String::as_str)));
    for role in &model.roles {
        let loc = format!("roles[{}]", role.name);
        dup(loc.clone(), "whitebox function", duplicates(role.whitebox_functions.iter().map(|f| f.name.as_str())));
        dup(loc.clone(), "port", duplicates(role.ports.iter().map(|p| p.name.as_str())));
        for f in &role.whitebox_functions {
            let floc = format!("{loc}/whiteboxFunctions[{}]", f.name);
            dup(floc.clone(), "input pin", duplicates(f.inputs.iter().map(|p| p.name.as_str())));
            dup(floc, "output pin", duplicates(f.outputs.iter().map(|p| p.name.as_str())));
        }
        if let Some(sm) = &role.state_model {
            dup(format!("{loc}/stateModel"), "state", duplicates(sm.states.iter().map(String::as_str)));
        }
    }
    for a in &model.activities {
        let loc = activity_loc(a);
        dup(loc.clone(), "node id", duplicates(a.nodes.iter().map(|n| n.id.as_str())));
        dup(loc, "partition", duplicates(a.partitions.iter().map(String::as_str)));
    }

    let mut empty = |loc: String, what: &str| c.error(RuleId::R10, loc, format!("{what} name is empty"));
    for g in &model.goals {
        if g.name.trim().is_empty() {
            empty(format!("goals[{}]", g.id), "goal");
        }
    }
    for f in &model.blackbox_functions {
        if f.name.trim().is_empty() {
            empty("blackboxFunctions".into(), "blackbox function");
        }
    }
    for r in &model.roles {
        if r.name.trim().is_empty() {
            empty("roles".into(), "role");
        }
        for f in &r.whitebox_functions {
            if f.name.trim().is_empty() {
                empty(format!("roles[{}]", r.name), "whitebox function");
            }
        }
    }
    for a in &model.activities {
        if a.name.trim().is_empty() {
            empty("activities".into(), "activity");
        }
        for n in &a.nodes {
            if n.id.trim().is_empty() {
                empty(activity_loc(a), "node id");
            }
        }
    }
}
