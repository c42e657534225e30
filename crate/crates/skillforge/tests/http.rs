use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use reqwest::blocking::{Client, Response};
use reqwest::StatusCode;
use serde_json::{json, Value};
use skillforge::host::{Host, PlantMode};
use skillforge::remote::RemoteSkills;
use skillforge::server::{spawn, ServerHandle};
use skillforge_core::engine::{load_process, run_process, InstanceStatus};
use skillforge_core::runtime::{SkillRef, SkillState};

const ADD_NUMBERS: &str = include_str!("../../core/fixtures/add_numbers.bpmn");
const MANUFACTURE: &str = include_str!("../../core/fixtures/manufacture_product.bpmn");

fn server(mode: PlantMode) -> ServerHandle {
    spawn(Host::embedded(mode, false), "127.0.0.1:0".parse().unwrap()).unwrap()
}

struct Api {
    base: String,
    client: Client,
}

impl Api {
    fn new(server: &ServerHandle) -> Api {
        Api { base: server.url(), client: Client::new() }
    }

    fn get(&self, path: &str) -> Response {
        self.client.get(format!("{}{path}", self.base)).send().unwrap()
    }

    fn post(&self, path: &str, body: impl Into<reqwest::blocking::Body>) -> Response {
        self.client.post(format!("{}{path}", self.base)).body(body).send().unwrap()
    }

    fn put(&self, path: &str, body: Value) -> Response {
        self.client.put(format!("{}{path}", self.base)).json(&body).send().unwrap()
    }

    fn deploy(&self, xml: &str) -> String {
        let r = self.post("/processes", xml.to_owned());
        assert_eq!(r.status(), StatusCode::CREATED);
        r.json::<Value>().unwrap()["definitionId"].as_str().unwrap().to_owned()
    }

    fn start(&self, definition: &str, variables: Value) -> String {
        let r = self.post(&format!("/processes/{definition}/instances"), variables.to_string());
        assert_eq!(r.status(), StatusCode::CREATED);
        r.json::<Value>().unwrap()["instanceId"].as_str().unwrap().to_owned()
    }

    fn settle(&self, instance: &str) -> Value {
        let deadline = Instant::now() + Duration::from_secs(10);
        loop {
            let body: Value = self.get(&format!("/instances/{instance}")).json().unwrap();
            if body["status"] != "Running" {
                return body;
            }
            assert!(Instant::now() < deadline, "instance {instance} still running");
            std::thread::sleep(Duration::from_millis(10));
        }
    }
}

#[track_caller]
fn error(r: Response, status: StatusCode, code: &str) {
    assert_eq!(r.status(), status);
    let body: Value = r.json().unwrap();
    assert_eq!(body["error"], code, "{body}");
    assert!(body["message"].is_string());
}

/// Trace events without their sequence number and timestamp.
fn untimed(trace: &Value) -> Vec<Value> {
    trace
        .as_array()
        .unwrap()
        .iter()
        .map(|e| json!([e["elementId"], e["kind"], e["detail"]]))
        .collect()
}

#[test]
fn minimal_chain_over_http() {
    let srv = server(PlantMode::None);
    let api = Api::new(&srv);
    let def = api.deploy(ADD_NUMBERS);
    let iid = api.start(&def, json!({"a": 2, "b": 3}));
    let done = api.settle(&iid);
    assert_eq!(done["status"], "Completed");
    assert_eq!(done["errorCode"], Value::Null);
    assert_eq!(done["variables"]["add_sum"], 5.0);
    assert_eq!(done["definitionId"], def.as_str());

    let trace: Value = api.get(&format!("/instances/{iid}/trace")).json().unwrap();
    let kinds: Vec<&str> = trace.as_array().unwrap().iter().map(|e| e["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["startEvent", "serviceTask", "endEvent"]);
    let seqs: Vec<u64> = trace.as_array().unwrap().iter().map(|e| e["seq"].as_u64().unwrap()).collect();
    assert_eq!(seqs, [1, 2, 3]);
}

#[test]
fn labplant_trace_matches_embedded_run() {
    let srv = server(PlantMode::Labplant);
    let api = Api::new(&srv);
    let def = api.deploy(MANUFACTURE);
    let iid = api.start(&def, json!({"material": "thermometerBase"}));
    assert_eq!(api.settle(&iid)["status"], "Completed");
    let remote: Value = api.get(&format!("/instances/{iid}/trace")).json().unwrap();

    let host = Host::embedded(PlantMode::Labplant, false);
    let local = run_process(
        Arc::new(load_process(MANUFACTURE).unwrap()),
        BTreeMap::from([("material".to_owned(), json!("thermometerBase"))]),
        host.registry.as_ref(),
    )
    .unwrap();
    assert_eq!(untimed(&remote), untimed(&serde_json::to_value(local.trace()).unwrap()));

    let plant: Value = api.get("/plant").json().unwrap();
    assert_eq!(plant["storageInventory"]["thermometerBase"], 0);
}

#[test]
fn process_errors() {
    let srv = server(PlantMode::None);
    let api = Api::new(&srv);
    error(api.post("/processes", "<definitions"), StatusCode::BAD_REQUEST, "XmlError");
    error(api.post("/processes", vec![0xffu8, 0xfe]), StatusCode::BAD_REQUEST, "XmlError");
    let timer = ADD_NUMBERS.replace(
        "<startEvent id=\"start_1\" name=\"start\"/>",
        "<startEvent id=\"start_1\"><timerEventDefinition/></startEvent>",
    );
    error(api.post("/processes", timer), StatusCode::BAD_REQUEST, "UnsupportedElement");

    error(api.post("/processes/nope/instances", "{}"), StatusCode::NOT_FOUND, "UnknownDefinition");
    error(api.get("/instances/nope"), StatusCode::NOT_FOUND, "UnknownInstance");
    error(api.get("/instances/nope/trace"), StatusCode::NOT_FOUND, "UnknownInstance");
    error(api.get("/no/such/route"), StatusCode::NOT_FOUND, "NotFound");

    let manufacture = api.deploy(MANUFACTURE);
    error(api.post(&format!("/processes/{manufacture}/instances"), ""), StatusCode::CONFLICT, "UnresolvedSkill");
    let add = api.deploy(ADD_NUMBERS);
    error(api.post(&format!("/processes/{add}/instances"), "[1,2"), StatusCode::BAD_REQUEST, "BadRequest");

    // an empty body starts with no variables; the skill aborts on its unset inputs
    let r = api.post(&format!("/processes/{add}/instances"), "");
    assert_eq!(r.status(), StatusCode::CREATED);
    let iid = r.json::<Value>().unwrap()["instanceId"].as_str().unwrap().to_owned();
    let done = api.settle(&iid);
    assert_eq!(done["status"], "Failed");
    assert_eq!(done["errorCode"], "SKILL_ABORTED");
}

#[test]
fn skill_routes() {
    let srv = server(PlantMode::None);
    let api = Api::new(&srv);
    let listed: Value = api.get("/skills").json().unwrap();
    assert_eq!(listed.as_array().unwrap().len(), 1);
    assert_eq!(listed[0]["skillName"], "AddSkill");

    let descriptor = json!({
        "moduleName": "Press",
        "skillName": "Stamp",
        "commType": "opcUa",
        "parameters": [{"name": "force", "type": "number"}],
        "outputs": [{"name": "force", "type": "number"}],
        "description": "Stamps a part"
    });
    let r = api.post("/skills", descriptor.to_string());
    assert_eq!(r.status(), StatusCode::CREATED);
    error(api.post("/skills", descriptor.to_string()), StatusCode::CONFLICT, "DuplicateSkill");
    error(api.post("/skills", "{\"moduleName\":1}"), StatusCode::BAD_REQUEST, "BadRequest");
    assert_eq!(api.get("/skills").json::<Value>().unwrap().as_array().unwrap().len(), 2);

    let state: Value = api.get("/skills/Press/Stamp/state").json().unwrap();
    assert_eq!(state["state"], "Idle");
    assert_eq!(state["lastError"], Value::Null);

    error(api.put("/skills/Press/Stamp/parameters", json!({"force": "hard"})), StatusCode::BAD_REQUEST, "TypeMismatch");
    error(api.put("/skills/Press/Stamp/parameters", json!({"speed": 1})), StatusCode::BAD_REQUEST, "UnknownName");
    assert_eq!(api.put("/skills/Press/Stamp/parameters", json!({"force": 7})).status(), StatusCode::OK);

    let cmd = |c: &str| api.post("/skills/Press/Stamp/commands", json!({"command": c}).to_string());
    error(cmd("Unhold"), StatusCode::CONFLICT, "CommandRejected");
    error(cmd("Jump"), StatusCode::BAD_REQUEST, "UnknownCommand");
    let outcome: Value = cmd("Start").json().unwrap();
    assert_eq!(outcome["state"], "Completed");
    assert_eq!(outcome["path"], json!(["Starting", "Execute", "Completing", "Completed"]));
    let outputs: Value = api.get("/skills/Press/Stamp/outputs").json().unwrap();
    assert_eq!(outputs, json!({"force": 7}));

    error(api.get("/skills/Press/Nothing/state"), StatusCode::NOT_FOUND, "UnknownSkill");
    error(api.get("/skills/Press/Nothing/outputs"), StatusCode::NOT_FOUND, "UnknownSkill");
    error(api.get("/plant"), StatusCode::NOT_FOUND, "NoPlant");
}

#[test]
fn remote_registry_drives_processes() {
    let srv = server(PlantMode::Labplant);
    let remote = RemoteSkills::new(&srv.url()).unwrap();
    let add = SkillRef::new("Calculator", "AddSkill");
    assert_eq!(remote.state(&add).unwrap().state, SkillState::Idle);

    let def = Arc::new(load_process(MANUFACTURE).unwrap());
    for round in 1..=2 {
        let inst = run_process(Arc::clone(&def), BTreeMap::new(), &remote).unwrap();
        let expected = if round == 1 { InstanceStatus::Completed } else { InstanceStatus::Failed("SKILL_ABORTED".into()) };
        assert_eq!(inst.status(), &expected, "round {round}: {:#?}", inst.trace());
        assert_eq!(inst.service_task_trace().len(), if round == 1 { 5 } else { 2 });
    }
    assert_eq!(srv.state.host.plant_snapshot().unwrap().processed_count(), 1);

    let inst = run_process(Arc::new(load_process(ADD_NUMBERS).unwrap()), BTreeMap::from([("a".into(), json!(1)), ("b".into(), json!(2))]), &remote).unwrap();
    assert_eq!(inst.variables()["add_sum"], 3.0);
}

#[test]
fn cli_runs_against_a_service() {
    let srv = server(PlantMode::Labplant);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.bpmn");
    std::fs::write(&path, MANUFACTURE).unwrap();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = skillforge::cli::run(
        ["skillforge", "run", path.to_str().unwrap(), "--registry-url", &srv.url()],
        &mut out,
        &mut err,
    );
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("status: Completed"));
    assert_eq!(text.matches(" serviceTask ").count(), 5);
    assert_eq!(srv.state.host.plant_snapshot().unwrap().processed_count(), 1);
}
