//! HTTP/JSON service: skill registry endpoints plus process deployment and
//! instance inspection. Handlers only translate; all behavior lives in the
//! core library.

use std::collections::BTreeMap;
use std::future::Future;
use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use skillforge_core::bpmn::LoadError;
use skillforge_core::engine::{EngineError, ProcessEngine, ProcessInstance};
use skillforge_core::runtime::skills::passthrough;
use skillforge_core::runtime::{Command, RuntimeError, SkillAccess, SkillDescriptor, SkillRef};
use tokio::net::TcpListener;
use tokio::sync::oneshot;

use crate::host::Host;

pub struct AppState {
    pub host: Host,
    pub engine: ProcessEngine,
}

impl AppState {
    pub fn new(host: Host) -> Arc<Self> {
        let access: Arc<dyn SkillAccess> = host.registry.clone();
        Arc::new(AppState { engine: ProcessEngine::new(access), host })
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: String,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError { status, code: code.to_owned(), message: message.into() }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.code, "message": self.message }))).into_response()
    }
}

impl From<RuntimeError> for ApiError {
    fn from(e: RuntimeError) -> Self {
        let status = match e {
            RuntimeError::UnknownSkill(_) => StatusCode::NOT_FOUND,
            RuntimeError::UnknownName(_) | RuntimeError::TypeMismatch { .. } => StatusCode::BAD_REQUEST,
            RuntimeError::DuplicateSkill(_)
            | RuntimeError::CommandRejected { .. }
            | RuntimeError::WrongState(_)
            | RuntimeError::Timeout => StatusCode::CONFLICT,
        };
        // the remote client recovers names from the message
        let message = match &e {
            RuntimeError::UnknownName(name) | RuntimeError::TypeMismatch { name, .. } => name.clone(),
            other => other.to_string(),
        };
        ApiError::new(status, e.code(), message)
    }
}

impl From<LoadError> for ApiError {
    fn from(e: LoadError) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, e.code(), e.to_string())
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let status = match e {
            EngineError::UnknownDefinition(_) => StatusCode::NOT_FOUND,
            EngineError::UnresolvedSkill(_) => StatusCode::CONFLICT,
            EngineError::Access(_) => StatusCode::SERVICE_UNAVAILABLE,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

type ApiResult = Result<Response, ApiError>;

fn parse_json<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid JSON body: {e}")))
}

/// Runs registry and engine calls off the async workers; a skill command may
/// wait on a skill that a process instance is driving.
async fn blocking<F>(f: F) -> ApiResult
where
    F: FnOnce() -> ApiResult + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .unwrap_or_else(|e| Err(ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", e.to_string())))
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/skills", get(list_skills).post(register_skill))
        .route("/skills/{module}/{name}/state", get(skill_state))
        .route("/skills/{module}/{name}/parameters", put(set_parameters))
        .route("/skills/{module}/{name}/commands", post(skill_command))
        .route("/skills/{module}/{name}/outputs", get(skill_outputs))
        .route("/processes", post(deploy))
        .route("/processes/{id}/instances", post(start_instance))
        .route("/instances/{iid}", get(instance))
        .route("/instances/{iid}/trace", get(trace))
        .route("/plant", get(plant))
        .fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "NotFound", "no such route") })
        .with_state(state)
}

async fn list_skills(State(s): State<Arc<AppState>>) -> Json<Vec<SkillDescriptor>> {
    Json(s.host.registry.list())
}

async fn register_skill(State(s): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let descriptor: SkillDescriptor = parse_json(&body)?;
    let behavior = passthrough(&descriptor);
    s.host.registry.register(descriptor.clone(), behavior)?;
    Ok((StatusCode::CREATED, Json(descriptor)).into_response())
}

async fn skill_state(State(s): State<Arc<AppState>>, Path((module, name)): Path<(String, String)>) -> ApiResult {
    blocking(move || {
        let id = SkillRef::new(module, name);
        let state = s.host.registry.state(&id)?;
        let path = s.host.registry.journal(&id)?;
        let last_error = s.host.registry.last_error(&id)?;
        Ok(Json(json!({ "state": state, "path": path, "lastError": last_error })).into_response())
    })
    .await
}

async fn set_parameters(
    State(s): State<Arc<AppState>>,
    Path((module, name)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult {
    let values: BTreeMap<String, Value> = parse_json(&body)?;
    blocking(move || {
        s.host.registry.set_parameters(&SkillRef::new(module, name), &values)?;
        Ok(Json(json!({ "updated": values.keys().collect::<Vec<_>>() })).into_response())
    })
    .await
}

#[derive(Deserialize)]
struct CommandBody {
    command: String,
}

async fn skill_command(
    State(s): State<Arc<AppState>>,
    Path((module, name)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult {
    let body: CommandBody = parse_json(&body)?;
    let command = Command::parse(&body.command)
        .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "UnknownCommand", format!("unknown command '{}'", body.command)))?;
    blocking(move || {
        let outcome = s.host.registry.command(&SkillRef::new(module, name), command)?;
        Ok(Json(outcome).into_response())
    })
    .await
}

async fn skill_outputs(State(s): State<Arc<AppState>>, Path((module, name)): Path<(String, String)>) -> ApiResult {
    blocking(move || Ok(Json(s.host.registry.outputs(&SkillRef::new(module, name))?).into_response())).await
}

async fn deploy(State(s): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let xml = std::str::from_utf8(&body).map_err(|_| ApiError::new(StatusCode::BAD_REQUEST, "XmlError", "body is not UTF-8"))?;
    let id = s.engine.deploy(xml)?;
    Ok((StatusCode::CREATED, Json(json!({ "definitionId": id }))).into_response())
}

async fn start_instance(State(s): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let variables: BTreeMap<String, Value> = if body.iter().all(u8::is_ascii_whitespace) {
        BTreeMap::new()
    } else {
        parse_json(&body)?
    };
    blocking(move || {
        let instance = s.engine.start_instance(&id, variables)?;
        Ok((StatusCode::CREATED, Json(json!({ "instanceId": instance }))).into_response())
    })
    .await
}

fn find_instance(s: &AppState, iid: &str) -> Result<ProcessInstance, ApiError> {
    s.engine
        .instance(iid)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "UnknownInstance", format!("instance '{iid}' does not exist")))
}

pub fn instance_json(instance: &ProcessInstance) -> Value {
    json!({
        "instanceId": instance.instance_id,
        "definitionId": instance.definition_id,
        "status": instance.status().label(),
        "errorCode": instance.status().error_code(),
        "tokens": instance.tokens(),
        "variables": instance.variables(),
    })
}

async fn instance(State(s): State<Arc<AppState>>, Path(iid): Path<String>) -> ApiResult {
    Ok(Json(instance_json(&find_instance(&s, &iid)?)).into_response())
}

async fn trace(State(s): State<Arc<AppState>>, Path(iid): Path<String>) -> ApiResult {
    Ok(Json(find_instance(&s, &iid)?.trace()).into_response())
}

async fn plant(State(s): State<Arc<AppState>>) -> ApiResult {
    let plant = s
        .host
        .plant_snapshot()
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "NoPlant", "service runs without a simulated plant"))?;
    Ok(Json(plant).into_response())
}

/// Serves until `shutdown` resolves, then lets running instances finish
/// their current service task and stops them.
pub async fn serve(listener: TcpListener, state: Arc<AppState>, shutdown: impl Future<Output = ()> + Send + 'static) -> std::io::Result<()> {
    axum::serve(listener, router(Arc::clone(&state))).with_graceful_shutdown(shutdown).await?;
    tokio::task::spawn_blocking(move || state.engine.shutdown()).await.map_err(std::io::Error::other)?;
    Ok(())
}

/// A service running on its own thread and runtime.
pub struct ServerHandle {
    pub addr: SocketAddr,
    pub state: Arc<AppState>,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<std::io::Result<()>>>,
}

impl ServerHandle {
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn stop(mut self) -> std::io::Result<()> {
        self.shutdown()
    }

    fn shutdown(&mut self) -> std::io::Result<()> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        match self.thread.take() {
            Some(t) => t.join().unwrap_or_else(|_| Err(std::io::Error::other("server thread panicked"))),
            None => Ok(()),
        }
    }
}

impl Drop for ServerHandle {
    fn drop(&mut self) {
        let _ = self.shutdown();
    }
}

/// Binds `addr` and serves `host` in the background.
pub fn spawn(host: Host, addr: SocketAddr) -> std::io::Result<ServerHandle> {
    let runtime = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build()?;
    let listener = runtime.block_on(TcpListener::bind(addr))?;
    let addr = listener.local_addr()?;
    let state = AppState::new(host);
    let (stop, stopped) = oneshot::channel::<()>();
    let served = Arc::clone(&state);
    let thread = std::thread::spawn(move || {
        runtime.block_on(serve(listener, served, async {
            let _ = stopped.await;
        }))
    });
    Ok(ServerHandle { addr, state, stop: Some(stop), thread: Some(thread) })
}
