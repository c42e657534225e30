use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex, RwLock};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use serde_json::Value;

use super::definition::{load_process, ProcessDefinition};
use super::instance::{InstanceStatus, ProcessInstance, DEFAULT_STEP_LIMIT};
use super::EngineError;
use crate::bpmn::LoadError;
use crate::runtime::SkillAccess;

struct InstanceSlot {
    snapshot: Mutex<ProcessInstance>,
    settled: Condvar,
}

/// Hosts deployed definitions and runs each instance on its own thread, so a
/// slow skill in one instance never holds up another.
pub struct ProcessEngine {
    access: Arc<dyn SkillAccess>,
    definitions: RwLock<BTreeMap<String, Arc<ProcessDefinition>>>,
    instances: RwLock<BTreeMap<String, Arc<InstanceSlot>>>,
    next_id: AtomicU64,
    stopping: Arc<AtomicBool>,
    workers: Mutex<Vec<JoinHandle<()>>>,
}

impl ProcessEngine {
    pub fn new(access: Arc<dyn SkillAccess>) -> Self {
        ProcessEngine {
            access,
            definitions: RwLock::new(BTreeMap::new()),
            instances: RwLock::new(BTreeMap::new()),
            next_id: AtomicU64::new(1),
            stopping: Arc::new(AtomicBool::new(false)),
            workers: Mutex::new(Vec::new()),
        }
    }

    fn fresh_id(&self, prefix: &str) -> String {
        format!("{prefix}-{}", self.next_id.fetch_add(1, Ordering::Relaxed))
    }

    pub fn deploy(&self, xml: &str) -> Result<String, LoadError> {
        let definition = load_process(xml)?;
        let id = self.fresh_id("def");
        self.definitions.write().unwrap_or_else(|e| e.into_inner()).insert(id.clone(), Arc::new(definition));
        Ok(id)
    }

    pub fn definition(&self, id: &str) -> Option<Arc<ProcessDefinition>> {
        self.definitions.read().unwrap_or_else(|e| e.into_inner()).get(id).cloned()
    }

    /// Creates an instance and runs it in the background until it completes
    /// or fails. Skills are resolved before any token moves.
    pub fn start_instance(&self, definition_id: &str, variables: BTreeMap<String, Value>) -> Result<String, EngineError> {
        let definition = self
            .definition(definition_id)
            .ok_or_else(|| EngineError::UnknownDefinition(definition_id.to_owned()))?;
        check_skills(self.access.as_ref(), &definition)?;
        let id = self.fresh_id("inst");
        let instance = ProcessInstance::new(&id, definition_id, definition, variables);
        let slot = Arc::new(InstanceSlot { snapshot: Mutex::new(instance.clone()), settled: Condvar::new() });
        self.instances.write().unwrap_or_else(|e| e.into_inner()).insert(id.clone(), Arc::clone(&slot));

        let access = Arc::clone(&self.access);
        let stopping = Arc::clone(&self.stopping);
        let worker = std::thread::spawn(move || {
            let mut instance = instance;
            let mut steps = 0;
            loop {
                if stopping.load(Ordering::SeqCst) {
                    instance.abort("SHUTDOWN", "engine shut down");
                }
                let running = instance.step(access.as_ref());
                steps += 1;
                if running && steps >= DEFAULT_STEP_LIMIT {
                    instance.abort("STEP_LIMIT", "no end reached");
                }
                *slot.snapshot.lock().unwrap_or_else(|e| e.into_inner()) = instance.clone();
                if *instance.status() != InstanceStatus::Running {
                    break;
                }
            }
            log::info!("instance {} finished: {:?}", instance.instance_id, instance.status());
            slot.settled.notify_all();
        });
        let mut workers = self.workers.lock().unwrap_or_else(|e| e.into_inner());
        workers.retain(|w| !w.is_finished());
        workers.push(worker);
        Ok(id)
    }

    /// Latest published state of an instance.
    pub fn instance(&self, id: &str) -> Option<ProcessInstance> {
        let slot = self.instances.read().unwrap_or_else(|e| e.into_inner()).get(id).cloned()?;
        let snapshot = slot.snapshot.lock().unwrap_or_else(|e| e.into_inner()).clone();
        Some(snapshot)
    }

    /// Blocks until the instance leaves `Running` or the timeout passes.
    pub fn wait(&self, id: &str, timeout: Duration) -> Option<ProcessInstance> {
        let slot = self.instances.read().unwrap_or_else(|e| e.into_inner()).get(id).cloned()?;
        let deadline = Instant::now() + timeout;
        let mut guard = slot.snapshot.lock().unwrap_or_else(|e| e.into_inner());
        while *guard.status() == InstanceStatus::Running {
            let now = Instant::now();
            if now >= deadline {
                break;
            }
            guard = slot.settled.wait_timeout(guard, deadline - now).unwrap_or_else(|e| e.into_inner()).0;
        }
        Some(guard.clone())
    }

    /// Lets in-flight service tasks finish, then stops every running instance.
    pub fn shutdown(&self) {
        self.stopping.store(true, Ordering::SeqCst);
        let workers = std::mem::take(&mut *self.workers.lock().unwrap_or_else(|e| e.into_inner()));
        for w in workers {
            let _ = w.join();
        }
    }
}

impl Drop for ProcessEngine {
    fn drop(&mut self) {
        self.shutdown();
    }
}

fn check_skills(access: &dyn SkillAccess, definition: &ProcessDefinition) -> Result<(), EngineError> {
    for skill in definition.skill_refs() {
        match access.descriptor(&skill) {
            Ok(Some(_)) => {}
            Ok(None) => return Err(EngineError::UnresolvedSkill(skill)),
            Err(e) => return Err(EngineError::Access(e.to_string())),
        }
    }
    Ok(())
}

/// Runs one instance to the end on the calling thread.
pub fn run_process(
    definition: Arc<ProcessDefinition>,
    variables: BTreeMap<String, Value>,
    access: &dyn SkillAccess,
) -> Result<ProcessInstance, EngineError> {
    check_skills(access, &definition)?;
    let mut instance = ProcessInstance::new("inst-1", "def-1", definition, variables);
    instance.run(access, DEFAULT_STEP_LIMIT);
    Ok(instance)
}
