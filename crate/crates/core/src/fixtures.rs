//! Bundled lab plant fixture: a modular plant with seven roles whose
//! "Manufacture Product" function is executed by five skills.

use crate::bpmn::{generate_bpmn, BpmnDocument, BpmnElement, ElementKind, SequenceFlow};
use crate::io::parse_model;
use crate::model::{
    ActivityModel, BlackboxFunction, CommType, ControlFlow, DeploymentBinding, Edge, FunctionRef, Goal, Node, NodeKind,
    Pin, Role, SystemGroupModel, WhiteboxFunction,
};
use crate::naming::ncname_with_ordinal;

pub const LABPLANT_MODEL_JSON: &str = include_str!("../fixtures/labplant.sgm.json");

/// Activity describing the manufacturing sequence of the lab plant.
pub const MANUFACTURE_PRODUCT: &str = "Manufacture Product";

pub fn labplant_model() -> SystemGroupModel {
    parse_model(LABPLANT_MODEL_JSON.as_bytes()).expect("bundled fixture parses")
}

/// Activity of [`calculator_model`].
pub const ADD_NUMBERS: &str = "Add Numbers";

/// Single-role model whose only function is bound to the AddSkill.
pub fn calculator_model() -> SystemGroupModel {
    let add = FunctionRef::new("Calculator", "add");
    let mut role = Role::new("Calculator");
    role.whitebox_functions.push(WhiteboxFunction {
        name: "add".into(),
        inputs: vec![Pin::new("a", "number"), Pin::new("b", "number")],
        outputs: vec![Pin::new("sum", "number")],
        bound_states: vec![],
    });
    let part = Some("Calculator");
    SystemGroupModel {
        name: "Calculator".into(),
        goals: vec![Goal {
            id: 1,
            name: "Add numbers".into(),
            refines: None,
            satisfied_by: vec![ADD_NUMBERS.into()],
            aspirational: false,
        }],
        blackbox_functions: vec![BlackboxFunction {
            name: ADD_NUMBERS.into(),
            refines_function: None,
            activity: Some(ADD_NUMBERS.into()),
        }],
        roles: vec![role],
        activities: vec![ActivityModel {
            name: ADD_NUMBERS.into(),
            partitions: vec!["Calculator".into()],
            nodes: vec![
                Node::new("start", part, NodeKind::Initial),
                Node::new("add", part, NodeKind::Action { function_ref: add.clone() }),
                Node::new("end", part, NodeKind::Final),
            ],
            edges: vec![Edge::Control(ControlFlow::new("start", "add")), Edge::Control(ControlFlow::new("add", "end"))],
        }],
        deployment: vec![DeploymentBinding {
            function_ref: add,
            skill_interface_name: "AddSkill".into(),
            module_name: "Calculator".into(),
            comm_type: CommType::OpcUa,
            description: "Adds two numbers and returns the sum".into(),
        }],
    }
}

/// The generated "Manufacture Product" process.
pub fn labplant_process() -> BpmnDocument {
    generate_bpmn(&labplant_model(), MANUFACTURE_PRODUCT).expect("fixture activity maps")
}

/// Adds a recovery branch to the service task running `skill_name`: a
/// boundary error event for `error_code` (any code when `None`) leading
/// through a manual task to its own end event.
pub fn with_recovery_branch(mut doc: BpmnDocument, skill_name: &str, error_code: Option<&str>) -> BpmnDocument {
    let task = doc
        .service_tasks()
        .find(|(_, t)| t.skill.name == skill_name)
        .map(|(e, _)| e.id.clone())
        .expect("skill is used by the process");
    let n = doc.elements.len();
    let boundary = ncname_with_ordinal("onSkillError", n + 1);
    let report = ncname_with_ordinal("reportFailure", n + 2);
    let end = ncname_with_ordinal("recovered", n + 3);
    doc.elements.push(BpmnElement {
        id: boundary.clone(),
        name: "onSkillError".into(),
        kind: ElementKind::BoundaryErrorEvent { attached_to: task, error_code: error_code.map(str::to_owned) },
    });
    doc.elements.push(BpmnElement { id: report.clone(), name: "reportFailure".into(), kind: ElementKind::AbstractTask });
    doc.elements.push(BpmnElement { id: end.clone(), name: "recovered".into(), kind: ElementKind::EndEvent });
    for (source, target) in [(boundary, report.clone()), (report, end)] {
        let id = format!("flow{}", doc.flows.len() + 1);
        doc.flows.push(SequenceFlow { id, source, target, condition: None, is_default: false });
    }
    doc
}
