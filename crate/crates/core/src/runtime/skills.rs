//! Small example skills.

use super::registry::{SkillBehavior, SkillContext, StepOutcome};
use super::{ParameterSpec, SkillDescriptor, SkillState};
use crate::model::CommType;

/// The calculator skill: `sum = a + b`.
pub fn add_skill(module: &str) -> (SkillDescriptor, Box<dyn SkillBehavior>) {
    let descriptor = SkillDescriptor {
        module_name: module.to_owned(),
        skill_name: "AddSkill".into(),
        comm_type: CommType::OpcUa,
        parameters: vec![ParameterSpec::new("a", "number"), ParameterSpec::new("b", "number")],
        outputs: vec![ParameterSpec::new("sum", "number")],
        description: "Adds two numbers and returns the sum".into(),
    };
    let behavior = |state: SkillState, ctx: &mut SkillContext<'_>| {
        if state == SkillState::Execute {
            let sum = ctx.number_parameter("a")? + ctx.number_parameter("b")?;
            ctx.set_output("sum", sum);
        }
        Ok(StepOutcome::Done)
    };
    (descriptor, Box::new(behavior))
}

/// Behavior for skills declared over the wire without an implementation:
/// completes at once and echoes parameters into same-named outputs.
pub fn passthrough(descriptor: &SkillDescriptor) -> Box<dyn SkillBehavior> {
    let outputs: Vec<String> = descriptor.outputs.iter().map(|o| o.name.clone()).collect();
    Box::new(move |state: SkillState, ctx: &mut SkillContext<'_>| {
        if state == SkillState::Execute {
            for name in &outputs {
                let value = ctx.parameter(name).cloned().unwrap_or(serde_json::Value::Null);
                ctx.set_output(name, value);
            }
        }
        Ok(StepOutcome::Done)
    })
}
