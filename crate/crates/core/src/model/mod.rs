//! System group domain model.
//!
//! The model follows the function-centric engineering workflow: goals are
//! satisfied by blackbox functions of the whole group, blackbox functions are
//! refined into activities whose partitions are roles, and roles own whitebox
//! functions, ports and state models. Deployment bindings attach skill metadata
//! to whitebox functions.
//!
//! All values are plain data. The operations in [`validate`], [`transform`]
//! and [`states`] are pure functions that return new values.

pub mod states;
pub mod transform;
pub mod validate;

pub use states::{aggregate_states, aggregate_states_with_cap, CompositeState, StateSpaceExceeded};
pub use transform::{cross_role_flows, derive_ports, signalize, TransformError};
pub use validate::{validate_model, Finding, RuleId, Severity, ValidationReport};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SystemGroupModel {
    pub name: String,
    pub goals: Vec<Goal>,
    pub blackbox_functions: Vec<BlackboxFunction>,
    pub roles: Vec<Role>,
    pub activities: Vec<ActivityModel>,
    pub deployment: Vec<DeploymentBinding>,
}

impl SystemGroupModel {
    pub fn role(&self, name: &str) -> Option<&Role> {
        self.roles.iter().find(|r| r.name == name)
    }

    pub fn activity(&self, name: &str) -> Option<&ActivityModel> {
        self.activities.iter().find(|a| a.name == name)
    }

    pub fn goal(&self, id: u64) -> Option<&Goal> {
        self.goals.iter().find(|g| g.id == id)
    }

    pub fn blackbox_function(&self, name: &str) -> Option<&BlackboxFunction> {
        self.blackbox_functions.iter().find(|f| f.name == name)
    }

    /// Resolves a role/function pair to the owning role's whitebox function.
    pub fn whitebox_function(&self, r: &FunctionRef) -> Option<&WhiteboxFunction> {
        self.role(&r.role)?.function(&r.function)
    }

    /// The deployment binding attached to a whitebox function, if any.
    pub fn binding_for(&self, r: &FunctionRef) -> Option<&DeploymentBinding> {
        self.deployment.iter().find(|b| &b.function_ref == r)
    }
}

/// A goal of the system group. Ids are positive integers.
#[derive(Debug, Clone, PartialEq)]
pub struct Goal {
    pub id: u64,
    pub name: String,
    pub refines: Option<u64>,
    pub satisfied_by: Vec<String>,
    /// Unsatisfied aspirational goals are reported as warnings only.
    pub aspirational: bool,
}

/// Externally observable behavior of the whole group.
#[derive(Debug, Clone, PartialEq)]
pub struct BlackboxFunction {
    pub name: String,
    pub refines_function: Option<String>,
    pub activity: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Role {
    pub name: String,
    pub whitebox_functions: Vec<WhiteboxFunction>,
    pub ports: Vec<Port>,
    pub state_model: Option<StateModel>,
}

impl Role {
    pub fn new(name: impl Into<String>) -> Self {
        Role { name: name.into(), whitebox_functions: Vec::new(), ports: Vec::new(), state_model: None }
    }

    pub fn function(&self, name: &str) -> Option<&WhiteboxFunction> {
        self.whitebox_functions.iter().find(|f| f.name == name)
    }

    pub fn port(&self, name: &str) -> Option<&Port> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn has_state(&self, state: &str) -> bool {
        self.state_model.as_ref().is_some_and(|m| m.states.iter().any(|s| s == state))
    }
}

/// A role's contribution to an activity.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteboxFunction {
    pub name: String,
    pub inputs: Vec<Pin>,
    pub outputs: Vec<Pin>,
    pub bound_states: Vec<String>,
}

impl WhiteboxFunction {
    pub fn new(name: impl Into<String>) -> Self {
        WhiteboxFunction { name: name.into(), inputs: Vec::new(), outputs: Vec::new(), bound_states: Vec::new() }
    }

    pub fn pins(&self, direction: Direction) -> &[Pin] {
        match direction {
            Direction::In => &self.inputs,
            Direction::Out => &self.outputs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pin {
    pub name: String,
    pub content_type: String,
}

impl Pin {
    pub fn new(name: impl Into<String>, content_type: impl Into<String>) -> Self {
        Pin { name: name.into(), content_type: content_type.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    In,
    Out,
}

/// A typed interface of a role. The owner is the role that lists the port.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Port {
    pub name: String,
    pub direction: Direction,
    pub content_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FunctionRef {
    pub role: String,
    pub function: String,
}

impl FunctionRef {
    pub fn new(role: impl Into<String>, function: impl Into<String>) -> Self {
        FunctionRef { role: role.into(), function: function.into() }
    }
}

impl std::fmt::Display for FunctionRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.role, self.function)
    }
}

/// Whitebox behavior of one blackbox function: a partitioned node/edge graph.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ActivityModel {
    pub name: String,
    pub partitions: Vec<String>,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl ActivityModel {
    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn control_flows(&self) -> impl Iterator<Item = &ControlFlow> {
        self.edges.iter().filter_map(|e| match e {
            Edge::Control(c) => Some(c),
            Edge::Object(_) => None,
        })
    }

    pub fn object_flows(&self) -> impl Iterator<Item = &ObjectFlow> {
        self.edges.iter().filter_map(|e| match e {
            Edge::Object(o) => Some(o),
            Edge::Control(_) => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub partition: Option<String>,
    pub kind: NodeKind,
}

impl Node {
    pub fn new(id: impl Into<String>, partition: Option<&str>, kind: NodeKind) -> Self {
        Node { id: id.into(), partition: partition.map(str::to_owned), kind }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Initial,
    Final,
    Action { function_ref: FunctionRef },
    Decision,
    Merge,
    Fork,
    Join,
    SendSignal { signal: String, port: String },
    AcceptSignal { signal: String, port: String },
}

impl NodeKind {
    pub fn label(&self) -> &'static str {
        match self {
            NodeKind::Initial => "initial",
            NodeKind::Final => "final",
            NodeKind::Action { .. } => "action",
            NodeKind::Decision => "decision",
            NodeKind::Merge => "merge",
            NodeKind::Fork => "fork",
            NodeKind::Join => "join",
            NodeKind::SendSignal { .. } => "sendSignal",
            NodeKind::AcceptSignal { .. } => "acceptSignal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Edge {
    Control(ControlFlow),
    Object(ObjectFlow),
}

/// Guard expressions use the `<identifier> <op> <literal>` grammar of the
/// process engine; the literal guard `else` marks the default branch.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlFlow {
    pub source: String,
    pub target: String,
    pub guard: Option<String>,
}

impl ControlFlow {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        ControlFlow { source: source.into(), target: target.into(), guard: None }
    }
}

/// Object exchange between two nodes.
///
/// Pins may be omitted; an omitted pin on an action resolves to the unique pin
/// of the right direction with the flow's content type. Signal nodes carry no
/// declared pins, the pin name there is a free label.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectFlow {
    pub source: String,
    pub source_pin: Option<String>,
    pub target: String,
    pub target_pin: Option<String>,
    pub content_type: String,
}

impl ObjectFlow {
    pub fn new(
        source: impl Into<String>,
        source_pin: &str,
        target: impl Into<String>,
        target_pin: &str,
        content_type: impl Into<String>,
    ) -> Self {
        ObjectFlow {
            source: source.into(),
            source_pin: Some(source_pin.to_owned()),
            target: target.into(),
            target_pin: Some(target_pin.to_owned()),
            content_type: content_type.into(),
        }
    }
}

/// Resolves the pin of `function` an object flow endpoint refers to.
pub fn resolve_pin<'a>(
    function: &'a WhiteboxFunction,
    direction: Direction,
    pin: Option<&str>,
    content_type: &str,
) -> Option<&'a Pin> {
    let pins = function.pins(direction);
    match pin {
        Some(name) => pins.iter().find(|p| p.name == name),
        None => {
            let mut matching = pins.iter().filter(|p| p.content_type == content_type);
            let first = matching.next()?;
            matching.next().is_none().then_some(first)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateModel {
    pub states: Vec<String>,
    pub initial: String,
    pub transitions: Vec<StateTransition>,
    pub collaboration_functions: Vec<CollaborationFunction>,
}

/// `trigger` names the signal that must be received (absent: internal);
/// `sends` names a signal emitted when the transition fires.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTransition {
    pub from: String,
    pub to: String,
    pub trigger: Option<String>,
    pub sends: Option<String>,
}

impl StateTransition {
    pub fn internal(from: &str, to: &str) -> Self {
        StateTransition { from: from.into(), to: to.into(), trigger: None, sends: None }
    }
}

/// Declarative signal interface of a collaboration function. Only checked
/// for referential integrity, never executed.
#[derive(Debug, Clone, PartialEq)]
pub struct CollaborationFunction {
    pub name: String,
    pub sent_signals: Vec<String>,
    pub received_signals: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CommType {
    OpcUa,
    WebService,
}

impl CommType {
    pub fn as_str(self) -> &'static str {
        match self {
            CommType::OpcUa => "opcUa",
            CommType::WebService => "webService",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "opcUa" => Some(CommType::OpcUa),
            "webService" => Some(CommType::WebService),
            _ => None,
        }
    }
}

/// Skill metadata attached to a whitebox function.
#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentBinding {
    pub function_ref: FunctionRef,
    pub skill_interface_name: String,
    pub module_name: String,
    pub comm_type: CommType,
    pub description: String,
}
