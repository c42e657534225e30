//! One mutation of the lab plant fixture per validation rule.

#![allow(dead_code)]

use skillforge_core::model::*;

pub type Mutation = fn(&mut SystemGroupModel);

fn activity<'a>(m: &'a mut SystemGroupModel, name: &str) -> &'a mut ActivityModel {
    m.activities.iter_mut().find(|a| a.name == name).unwrap()
}

fn role<'a>(m: &'a mut SystemGroupModel, name: &str) -> &'a mut Role {
    m.roles.iter_mut().find(|r| r.name == name).unwrap()
}

pub fn goal_satisfied_by_unknown_function(m: &mut SystemGroupModel) {
    m.goals[0].satisfied_by.push("Polish Product".into());
}

pub fn refines_unknown_function(m: &mut SystemGroupModel) {
    m.blackbox_functions.iter_mut().find(|f| f.name == "Create Offer").unwrap().refines_function =
        Some("Functions for Nothing".into());
}

pub fn partition_is_not_a_role(m: &mut SystemGroupModel) {
    activity(m, "Create Offer").partitions.push("Sales".into());
}

pub fn action_refers_to_unknown_function(m: &mut SystemGroupModel) {
    let a = activity(m, "Receive Offer Request");
    a.nodes[1].kind = NodeKind::Action { function_ref: FunctionRef::new("OrderManagement", "OM-WBFIgnore") };
}

pub fn object_flow_type_mismatch(m: &mut SystemGroupModel) {
    let a = activity(m, "Manufacture Product");
    if let Some(Edge::Object(o)) = a.edges.iter_mut().find(|e| matches!(e, Edge::Object(_))) {
        o.content_type = "invoice".into();
    }
}

pub fn port_without_content_type(m: &mut SystemGroupModel) {
    role(m, "Assembly").ports.push(Port { name: "lid".into(), direction: Direction::In, content_type: String::new() });
}

pub fn undeclared_initial_state(m: &mut SystemGroupModel) {
    role(m, "Transportation").state_model.as_mut().unwrap().initial = "Parked".into();
}

pub fn binding_without_description(m: &mut SystemGroupModel) {
    m.deployment[2].description.clear();
}

pub fn guard_outside_decision(m: &mut SystemGroupModel) {
    if let Edge::Control(c) = &mut activity(m, "Create Offer").edges[0] {
        c.guard = Some("priority > 1".into());
    }
}

pub fn duplicate_role(m: &mut SystemGroupModel) {
    let copy = m.roles.iter().find(|r| r.name == "Assembly").unwrap().clone();
    m.roles.push(copy);
}

pub const ALL: [(RuleId, Mutation); 10] = [
    (RuleId::R1, goal_satisfied_by_unknown_function),
    (RuleId::R2, refines_unknown_function),
    (RuleId::R3, partition_is_not_a_role),
    (RuleId::R4, action_refers_to_unknown_function),
    (RuleId::R5, object_flow_type_mismatch),
    (RuleId::R6, port_without_content_type),
    (RuleId::R7, undeclared_initial_state),
    (RuleId::R8, binding_without_description),
    (RuleId::R9, guard_outside_decision),
    (RuleId::R10, duplicate_role),
];
