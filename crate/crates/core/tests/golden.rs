//! Frozen generator outputs. Set `UPDATE_GOLDEN=1` to rewrite them.

use std::path::{Path, PathBuf};

use skillforge_core::bpmn::{generate_bpmn, serialize_bpmn};
use skillforge_core::codegen::{generate_all, generate_skill_template, StateMachineProfile};
use skillforge_core::engine::{load_process, SKILL_ABORTED};
use skillforge_core::fixtures::{
    calculator_model, labplant_model, labplant_process, with_recovery_branch, ADD_NUMBERS,
};
use skillforge_core::io::serialize_model;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).to_path_buf()
}

fn check(rel: &str, actual: &str) {
    let path = root().join(rel);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "{rel} differs from generated output:\n{actual}");
}

#[test]
fn add_skill_template() {
    let model = calculator_model();
    let runs: Vec<String> = (0..3)
        .map(|_| generate_skill_template(&model, &model.deployment[0], &StateMachineProfile::default()).unwrap().source_text)
        .collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
    check("tests/golden/AddSkill.java", &runs[0]);
}

#[test]
fn add_skill_template_shape() {
    let model = calculator_model();
    let t = generate_skill_template(&model, &model.deployment[0], &StateMachineProfile::default()).unwrap();
    let src = &t.source_text;
    assert_eq!(t.target_path, "Calculator/AddSkill.java");
    assert!(src.contains(
        "@Skill(commType = \"opcUa\", moduleName = \"Calculator\", description = \"Adds two numbers and returns the sum\")"
    ));
    assert_eq!(src.matches("@SkillParameter(").count(), 2);
    assert_eq!(src.matches("@SkillOutput(").count(), 1);
    assert_eq!(src.matches("@StateMachine\n").count(), 1);
    let stubs = src.matches("() {\n        // TODO implement\n    }\n").count();
    assert_eq!(stubs, 11);
    for state in ["Starting", "Execute", "Completing", "Resetting", "Holding", "Unholding", "Suspending", "Unsuspending", "Stopping", "Aborting", "Clearing"] {
        assert!(src.contains(&format!("    @{state}\n    public void on{state}() {{")), "{state}");
    }
}

#[test]
fn labplant_templates() {
    let templates = generate_all(&labplant_model(), &StateMachineProfile::default()).unwrap();
    assert_eq!(templates.len(), 5);
    for t in &templates {
        assert!(t.warnings.iter().all(|w| w.contains("emitted as String")), "{:?}", t.warnings);
        check(&format!("tests/golden/labplant/{}", t.target_path), &t.source_text);
    }
}

#[test]
fn generated_processes() {
    let plain = serialize_bpmn(&labplant_process());
    let recovery = serialize_bpmn(&with_recovery_branch(labplant_process(), "HandOutMaterial", Some(SKILL_ABORTED)));
    let calc = serialize_bpmn(&generate_bpmn(&calculator_model(), ADD_NUMBERS).unwrap());
    for xml in [&plain, &recovery, &calc] {
        load_process(xml).unwrap();
    }
    check("fixtures/manufacture_product.bpmn", &plain);
    check("fixtures/manufacture_product_recovery.bpmn", &recovery);
    check("fixtures/add_numbers.bpmn", &calc);
    check("fixtures/calculator.sgm.json", &serialize_model(&calculator_model()));
}

#[test]
fn checked_in_process_has_four_lanes() {
    let xml = std::fs::read_to_string(root().join("fixtures/manufacture_product.bpmn")).unwrap();
    assert_eq!(load_process(&xml).unwrap().doc.lanes.len(), 4);
}
