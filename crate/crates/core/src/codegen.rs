//! Skill class templates.
//!
//! Every deployment binding yields one Java class carrying the skill
//! annotations (`@Skill`, `@SkillParameter`, `@SkillOutput`, `@StateMachine`)
//! and one empty, annotated method per acting state. The files are artifacts
//! for an external skill runtime and only lack method implementations.

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{DeploymentBinding, Pin, SystemGroupModel};
use crate::naming::java_identifier;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateMachineProfile {
    pub state_names: Vec<String>,
    /// States that get a generated stub method, in generation order.
    pub acting_states: Vec<String>,
}

impl StateMachineProfile {
    /// A profile whose acting states are all of `names`.
    pub fn all_acting(names: &[&str]) -> Self {
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        StateMachineProfile { state_names: names.clone(), acting_states: names }
    }

    /// Acting states must be declared states.
    pub fn is_consistent(&self) -> bool {
        self.acting_states.iter().all(|a| self.state_names.contains(a))
    }
}

impl Default for StateMachineProfile {
    fn default() -> Self {
        StateMachineProfile::all_acting(&[
            "Starting",
            "Execute",
            "Completing",
            "Holding",
            "Unholding",
            "Suspending",
            "Unsuspending",
            "Stopping",
            "Aborting",
            "Clearing",
            "Resetting",
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkillTemplate {
    pub unit_name: String,
    pub source_text: String,
    /// `<moduleName>/<unitName>.java`
    pub target_path: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodegenError {
    #[error("'{0}' cannot be turned into a legal identifier without collision")]
    InvalidIdentifier(String),
    #[error("bound function {0} does not resolve")]
    UnresolvedFunction(String),
    #[error("acting states of the profile are not all declared states")]
    InconsistentProfile,
    #[error("two bindings generate the same file '{0}'")]
    DuplicateTarget(String),
}

/// Emitted Java type for a pin content type and whether the fallback was used.
pub fn type_map(content_type: &str) -> (&'static str, bool) {
    match content_type {
        "number" => ("double", false),
        "integer" => ("int", false),
        "boolean" => ("boolean", false),
        "string" => ("String", false),
        _ => ("String", true),
    }
}

fn java_string(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn module_dir(module: &str) -> Result<&str, CodegenError> {
    let bad = module.is_empty() || module == "." || module == ".." || module.contains(['/', '\\']);
    if bad {
        Err(CodegenError::InvalidIdentifier(module.to_owned()))
    } else {
        Ok(module)
    }
}

pub fn generate_skill_template(
    model: &SystemGroupModel,
    binding: &DeploymentBinding,
    profile: &StateMachineProfile,
) -> Result<SkillTemplate, CodegenError> {
    if !profile.is_consistent() {
        return Err(CodegenError::InconsistentProfile);
    }
    let function = model
        .whitebox_function(&binding.function_ref)
        .ok_or_else(|| CodegenError::UnresolvedFunction(binding.function_ref.to_string()))?;
    let unit_name = java_identifier(&binding.skill_interface_name)
        .ok_or_else(|| CodegenError::InvalidIdentifier(binding.skill_interface_name.clone()))?;
    let target_path = format!("{}/{unit_name}.java", module_dir(&binding.module_name)?);

    let mut warnings = Vec::new();
    let mut fields = HashSet::from(["stateMachine".to_owned()]);
    let mut field = |pin: &Pin, annotation: &str, out: &mut String| -> Result<(), CodegenError> {
        let ident = java_identifier(&pin.name)
            .filter(|i| fields.insert(i.clone()))
            .ok_or_else(|| CodegenError::InvalidIdentifier(pin.name.clone()))?;
        let (ty, fallback) = type_map(&pin.content_type);
        if fallback {
            warnings.push(format!(
                "pin '{}' has content type '{}' without a type mapping; emitted as String",
                pin.name, pin.content_type
            ));
        }
        let _ = write!(out, "    @{annotation}(name = {})\n    private {ty} {ident};\n\n", java_string(&pin.name));
        Ok(())
    };

    let mut src = String::new();
    let _ = writeln!(src, "// Skill template for role whitebox function {}.", binding.function_ref);
    src.push_str("// Generated by skillforge. Implement the state methods the skill needs;\n");
    src.push_str("// unneeded ones may stay empty or be removed.\n\n");
    let _ = writeln!(
        src,
        "@Skill(commType = {}, moduleName = {}, description = {})",
        java_string(binding.comm_type.as_str()),
        java_string(&binding.module_name),
        java_string(&binding.description)
    );
    let _ = writeln!(src, "public class {unit_name} {{\n");
    for pin in &function.inputs {
        field(pin, "SkillParameter", &mut src)?;
    }
    for pin in &function.outputs {
        field(pin, "SkillOutput", &mut src)?;
    }
    src.push_str("    @StateMachine\n    private SkillStateMachine stateMachine;\n");

    let mut methods = HashSet::new();
    for state in &profile.acting_states {
        let ident = java_identifier(state)
            .filter(|i| methods.insert(i.clone()))
            .ok_or_else(|| CodegenError::InvalidIdentifier(state.clone()))?;
        let mut upper = ident.clone();
        if let Some(first) = upper.get_mut(0..1) {
            first.make_ascii_uppercase();
        }
        let _ = write!(src, "\n    @{ident}\n    public void on{upper}() {{\n        // TODO implement\n    }}\n");
    }
    src.push_str("}\n");

    Ok(SkillTemplate { unit_name, source_text: src, target_path, warnings })
}

/// One template per deployment binding, in binding order.
pub fn generate_all(model: &SystemGroupModel, profile: &StateMachineProfile) -> Result<Vec<SkillTemplate>, CodegenError> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(model.deployment.len());
    for binding in &model.deployment {
        let template = generate_skill_template(model, binding, profile)?;
        if !seen.insert(template.target_path.clone()) {
            return Err(CodegenError::DuplicateTarget(template.target_path));
        }
        out.push(template);
    }
    Ok(out)
}
