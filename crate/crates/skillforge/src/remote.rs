//! Skill access over the HTTP wire protocol of a `skillforge serve` instance.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use reqwest::blocking::{Client, RequestBuilder};
use reqwest::Url;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use skillforge_core::runtime::{
    Invocation, InvokeError, RuntimeError, SkillAccess, SkillDescriptor, SkillRef, SkillState,
};

const POLL_INTERVAL: Duration = Duration::from_millis(20);

pub struct RemoteSkills {
    base: Url,
    client: Client,
    settle_timeout: Duration,
}

#[derive(Deserialize)]
struct WireError {
    error: String,
    #[serde(default)]
    message: String,
}

#[derive(Deserialize)]
pub struct StateReport {
    pub state: SkillState,
    #[serde(default)]
    pub path: Vec<SkillState>,
}

#[derive(Deserialize)]
struct WireOutcome {
    state: SkillState,
}

impl RemoteSkills {
    pub fn new(base_url: &str) -> Result<Self, String> {
        let base = Url::parse(base_url).map_err(|e| format!("invalid registry url '{base_url}': {e}"))?;
        if base.cannot_be_a_base() {
            return Err(format!("invalid registry url '{base_url}'"));
        }
        let client = Client::builder().timeout(Duration::from_secs(30)).build().map_err(|e| e.to_string())?;
        Ok(RemoteSkills { base, client, settle_timeout: Duration::from_secs(60) })
    }

    pub fn with_settle_timeout(mut self, timeout: Duration) -> Self {
        self.settle_timeout = timeout;
        self
    }

    fn url(&self, segments: &[&str]) -> Url {
        let mut url = self.base.clone();
        url.path_segments_mut().expect("checked in new").pop_if_empty().extend(segments);
        url
    }

    fn skill_url(&self, skill: &SkillRef, tail: &str) -> Url {
        self.url(&["skills", &skill.module, &skill.name, tail])
    }

    fn send<T: DeserializeOwned>(&self, skill: &SkillRef, request: RequestBuilder) -> Result<T, InvokeError> {
        let response = request.send().map_err(|e| InvokeError::Transport(e.to_string()))?;
        let status = response.status();
        let body = response.bytes().map_err(|e| InvokeError::Transport(e.to_string()))?;
        if status.is_success() {
            return serde_json::from_slice(&body).map_err(|e| InvokeError::Transport(format!("bad response: {e}")));
        }
        let wire: WireError = serde_json::from_slice(&body)
            .map_err(|_| InvokeError::Transport(format!("HTTP {status} without error body")))?;
        Err(self.runtime_error(skill, wire))
    }

    fn runtime_error(&self, skill: &SkillRef, wire: WireError) -> InvokeError {
        let err = match wire.error.as_str() {
            "UnknownSkill" => RuntimeError::UnknownSkill(skill.clone()),
            "DuplicateSkill" => RuntimeError::DuplicateSkill(skill.clone()),
            "UnknownName" => RuntimeError::UnknownName(wire.message),
            "TypeMismatch" => RuntimeError::TypeMismatch { name: wire.message, expected: String::new() },
            "Timeout" => RuntimeError::Timeout,
            "WrongState" | "CommandRejected" => match self.state(skill) {
                Ok(report) => RuntimeError::WrongState(report.state),
                Err(e) => return e,
            },
            other => return InvokeError::Transport(format!("{other}: {}", wire.message)),
        };
        InvokeError::Runtime(err)
    }

    pub fn state(&self, skill: &SkillRef) -> Result<StateReport, InvokeError> {
        self.send(skill, self.client.get(self.skill_url(skill, "state")))
    }

    pub fn command(&self, skill: &SkillRef, command: &str) -> Result<SkillState, InvokeError> {
        let request = self.client.post(self.skill_url(skill, "commands")).json(&json!({ "command": command }));
        Ok(self.send::<WireOutcome>(skill, request)?.state)
    }

    pub fn list(&self) -> Result<Vec<SkillDescriptor>, InvokeError> {
        let response = self.client.get(self.url(&["skills"])).send().map_err(|e| InvokeError::Transport(e.to_string()))?;
        response.json().map_err(|e| InvokeError::Transport(e.to_string()))
    }
}

fn settled(state: SkillState) -> bool {
    matches!(state, SkillState::Completed | SkillState::Aborted | SkillState::Stopped | SkillState::Idle)
}

impl SkillAccess for RemoteSkills {
    fn descriptor(&self, skill: &SkillRef) -> Result<Option<SkillDescriptor>, InvokeError> {
        Ok(self.list()?.into_iter().find(|d| d.skill_ref() == *skill))
    }

    fn invoke(&self, skill: &SkillRef, parameters: &BTreeMap<String, Value>) -> Result<Invocation, InvokeError> {
        if self.state(skill)?.state == SkillState::Completed {
            self.command(skill, "Reset")?;
        }
        let _: Value = self.send(skill, self.client.put(self.skill_url(skill, "parameters")).json(parameters))?;
        self.command(skill, "Start")?;

        let deadline = Instant::now() + self.settle_timeout;
        let mut report = self.state(skill)?;
        while !settled(report.state) {
            if Instant::now() >= deadline {
                log::warn!("remote skill {skill} did not settle, aborting it");
                self.command(skill, "Abort")?;
                report = self.state(skill)?;
                break;
            }
            std::thread::sleep(POLL_INTERVAL);
            report = self.state(skill)?;
        }

        let outputs = if report.state == SkillState::Completed {
            self.send(skill, self.client.get(self.skill_url(skill, "outputs")))?
        } else {
            BTreeMap::new()
        };
        Ok(Invocation { state: report.state, path: report.path, outputs })
    }
}

