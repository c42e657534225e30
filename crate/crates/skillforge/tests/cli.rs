use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use skillforge_core::fixtures::LABPLANT_MODEL_JSON;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn skillforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skillforge")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_fixture() {
    let o = skillforge(&["validate", arg(&fixture("labplant.sgm.json"))]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("0 error(s)"));

    let o = skillforge(&["validate", arg(&fixture("labplant.sgm.json")), "--format", "json"]);
    assert_eq!(code(&o), 0);
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["findings"], Value::Array(vec![]));
}

#[test]
fn validate_mutated_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let mut model: Value = serde_json::from_str(LABPLANT_MODEL_JSON).unwrap();
    model["systemGroup"]["goals"][0]["satisfiedBy"].as_array_mut().unwrap().push("Polish Product".into());
    let path = dir.path().join("mutated.json");
    std::fs::write(&path, serde_json::to_string(&model).unwrap()).unwrap();

    let o = skillforge(&["validate", arg(&path)]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("error R1"), "{}", stdout(&o));

    let o = skillforge(&["validate", arg(&path), "--format", "json"]);
    assert_eq!(code(&o), 1);
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["findings"][0]["ruleId"], "R1");
}

#[test]
fn validate_garbage() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("garbage.json");
    std::fs::write(&path, [0xff, 0x00, 0x13, 0x37]).unwrap();
    assert_eq!(code(&skillforge(&["validate", arg(&path)])), 2);
    assert_eq!(code(&skillforge(&["validate", arg(&dir.path().join("missing.json"))])), 2);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&skillforge(&[])), 2);
    assert_eq!(code(&skillforge(&["frobnicate"])), 2);
    assert_eq!(code(&skillforge(&["serve", "--port", "0"])), 2);
    assert_eq!(code(&skillforge(&["run", "x.bpmn", "--var", "novalue"])), 2);
    let help = skillforge(&["--help"]);
    assert_eq!(code(&help), 0);
    for sub in ["validate", "generate", "run", "serve"] {
        assert!(stdout(&help).contains(sub));
    }
}

#[test]
fn generate_skills() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("skills");
    let o = skillforge(&["generate", arg(&fixture("labplant.sgm.json")), "--kind", "skills", "--out", arg(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let manifest: Vec<String> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(manifest.len(), 5);
    for line in &manifest {
        assert!(line.ends_with(".java") && Path::new(line).is_file(), "{line}");
    }
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/labplant/Transportation/Transport.java");
    assert_eq!(
        std::fs::read_to_string(out.join("Transportation/Transport.java")).unwrap(),
        std::fs::read_to_string(golden).unwrap()
    );
}

#[test]
fn generate_selected_skill_with_narrow_profile() {
    let dir = tempfile::tempdir().unwrap();
    let o = skillforge(&[
        "generate",
        arg(&fixture("calculator.sgm.json")),
        "--kind",
        "skills",
        "--binding",
        "AddSkill",
        "--acting-states",
        "Execute,Resetting",
        "--out",
        arg(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("Calculator/AddSkill.java")).unwrap();
    assert!(text.contains("public void onExecute()"));
    assert!(text.contains("public void onResetting()"));
    assert!(!text.contains("onStarting"));

    let o = skillforge(&["generate", arg(&fixture("calculator.sgm.json")), "--kind", "skills", "--binding", "Nope", "--out", arg(dir.path())]);
    assert_eq!(code(&o), 2);
    let o = skillforge(&[
        "generate",
        arg(&fixture("calculator.sgm.json")),
        "--kind",
        "skills",
        "--acting-states",
        "Dancing",
        "--out",
        arg(&dir.path().join("other")),
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn generate_bpmn_and_refuse_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    let model = fixture("labplant.sgm.json");
    let args = ["generate", arg(&model), "--kind", "bpmn", "--activity", "Manufacture Product", "--out", arg(dir.path())];
    let o = skillforge(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let target = dir.path().join("manufacture_product.bpmn");
    assert_eq!(stdout(&o).trim(), target.display().to_string());
    let files: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 1);
    assert_eq!(
        std::fs::read_to_string(&target).unwrap(),
        std::fs::read_to_string(fixture("manufacture_product.bpmn")).unwrap()
    );

    std::fs::write(&target, "edited").unwrap();
    let o = skillforge(&args);
    assert_eq!(code(&o), 3);
    assert_eq!(std::fs::read_to_string(&target).unwrap(), "edited");

    let mut forced = args.to_vec();
    forced.push("--force");
    assert_eq!(code(&skillforge(&forced)), 0);
    assert_ne!(std::fs::read_to_string(&target).unwrap(), "edited");

    let o = skillforge(&["generate", arg(&model), "--kind", "bpmn", "--out", arg(&dir.path().join("all"))]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 3);

    let o = skillforge(&["generate", arg(&model), "--kind", "bpmn", "--activity", "Dance", "--out", arg(dir.path())]);
    assert_eq!(code(&o), 2);
}

#[test]
fn generate_refuses_invalid_model() {
    let dir = tempfile::tempdir().unwrap();
    let mut model: Value = serde_json::from_str(LABPLANT_MODEL_JSON).unwrap();
    model["systemGroup"]["deployment"][0]["description"] = "".into();
    let path = dir.path().join("invalid.json");
    std::fs::write(&path, model.to_string()).unwrap();
    let o = skillforge(&["generate", arg(&path), "--kind", "skills", "--out", arg(&dir.path().join("out"))]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("R8"));
    assert!(!dir.path().join("out").exists());
}

fn task_skills(text: &str) -> Vec<String> {
    text.lines()
        .filter(|l| l.contains(" serviceTask "))
        .map(|l| {
            let detail: Value = serde_json::from_str(&l[l.find('{').unwrap()..]).unwrap();
            detail["skill"].as_str().unwrap().to_owned()
        })
        .collect()
}

#[test]
fn run_labplant() {
    let o = skillforge(&["run", arg(&fixture("manufacture_product.bpmn")), "--var", "material=thermometerBase"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(
        task_skills(&text),
        [
            "OrderManagement/ReleaseOrder",
            "RawMaterialStorage/HandOutMaterial",
            "Transportation/RequestCarrier",
            "Transportation/Transport",
            "Manufacturing/Manufacture"
        ]
    );
    assert!(text.contains("status: Completed"));
    assert!(text.contains("\"processed\": true"));
}

#[test]
fn run_with_empty_inventory_fails() {
    let o = skillforge(&["run", arg(&fixture("manufacture_product.bpmn")), "--empty-inventory"]);
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains("SKILL_ABORTED"));

    let o = skillforge(&["run", arg(&fixture("manufacture_product_recovery.bpmn")), "--empty-inventory"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("errorCaught"));
}

#[test]
fn run_json_lines() {
    let o = skillforge(&["run", arg(&fixture("add_numbers.bpmn")), "--plant", "none", "--var", "a=2", "--var", "b=3", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let lines: Vec<Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 4);
    let kinds: Vec<&str> = lines[..3].iter().map(|e| e["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["startEvent", "serviceTask", "endEvent"]);
    assert_eq!(lines[3]["status"], "Completed");
    assert_eq!(lines[3]["variables"]["add_sum"], 5.0);
    assert_eq!(lines[3]["plant"], Value::Null);
}

#[test]
fn run_with_undefined_variable_fails() {
    let dir = tempfile::tempdir().unwrap();
    let xml = std::fs::read_to_string(fixture("add_numbers.bpmn")).unwrap().replace(
        "<sf:output name=\"sum\"",
        "<sf:parameter name=\"a\" variable=\"undefinedInput\"/>\n        <sf:output name=\"sum\"",
    );
    let path = dir.path().join("broken_binding.bpmn");
    std::fs::write(&path, xml).unwrap();
    let o = skillforge(&["run", arg(&path), "--var", "b=1"]);
    assert_eq!(code(&o), 4);
    assert!(stdout(&o).contains("MISSING_VARIABLE"));
    assert!(stdout(&o).contains("MissingVariable"));
}

#[test]
fn run_rejects_bad_processes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.bpmn");
    std::fs::write(&path, "<definitions").unwrap();
    let o = skillforge(&["run", arg(&path)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("XmlError"));

    let o = skillforge(&["run", arg(&fixture("manufacture_product.bpmn")), "--plant", "none"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("UnresolvedSkill"));

    let o = skillforge(&["run", arg(&fixture("add_numbers.bpmn")), "--registry-url", "not a url"]);
    assert_eq!(code(&o), 2);
}
