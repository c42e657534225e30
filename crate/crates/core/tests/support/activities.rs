//! Random activities over a small block language: actions, exclusive
//! choices, parallel branches and signal pairs, with object exchanges between
//! actions. Names mix unicode, spaces and punctuation.

#![allow(dead_code)]

use proptest::prelude::*;
use skillforge_core::model::*;

#[derive(Debug, Clone)]
pub enum Block {
    Action(usize),
    Choice(Vec<(Option<String>, Vec<Block>)>),
    Parallel(Vec<Vec<Block>>),
    Signal(String, usize, usize),
}

#[derive(Debug, Clone)]
pub struct Spec {
    pub roles: Vec<String>,
    /// Function name and whether it is bound to a skill, per role.
    pub functions: Vec<(String, bool)>,
    pub labels: Vec<String>,
    pub body: Vec<Block>,
    /// (producer, consumer) pairs over action positions.
    pub exchanges: Vec<(usize, usize)>,
}

pub fn name() -> impl Strategy<Value = String> {
    "[a-zA-Z][a-zA-Z0-9 äöüßé漢字_.-]{0,10}"
}

pub fn guard() -> impl Strategy<Value = Option<String>> {
    let op = prop::sample::select(vec!["==", "!=", "<", "<=", ">", ">="]);
    let literal = prop_oneof![
        (-50i32..50).prop_map(|n| n.to_string()),
        "[a-z ü]{0,6}".prop_map(|s| format!("\"{s}\"")),
        any::<bool>().prop_map(|b| b.to_string()),
    ];
    prop_oneof![Just(None), ("[a-z][a-zA-Z0-9_]{0,6}", op, literal).prop_map(|(v, o, l)| Some(format!("{v} {o} {l}")))]
}

pub fn block(roles: usize) -> impl Strategy<Value = Block> {
    let leaf = prop_oneof![
        3 => (0..roles).prop_map(Block::Action),
        1 => (name(), 0..roles, 0..roles).prop_map(|(s, a, b)| Block::Signal(s, a, b)),
    ];
    leaf.prop_recursive(3, 24, 3, move |inner| {
        prop_oneof![
            prop::collection::vec((guard(), prop::collection::vec(inner.clone(), 0..3)), 2..4).prop_map(|mut branches| {
                // the last branch is the default
                branches.last_mut().unwrap().0 = Some("else".into());
                Block::Choice(branches)
            }),
            prop::collection::vec(prop::collection::vec(inner, 1..3), 2..4).prop_map(Block::Parallel),
        ]
    })
}

pub fn spec() -> impl Strategy<Value = Spec> {
    (1usize..4).prop_flat_map(|n| {
        (
            prop::collection::vec(name(), n),
            prop::collection::vec((name(), any::<bool>()), n),
            prop::collection::vec(name(), 3),
            prop::collection::vec(block(n), 1..5),
            prop::collection::vec((0usize..16, 0usize..16), 0..4),
        )
            .prop_map(|(roles, functions, labels, body, exchanges)| Spec { roles, functions, labels, body, exchanges })
    })
}

struct Builder<'a> {
    spec: &'a Spec,
    roles: Vec<String>,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    actions: Vec<String>,
}

impl Builder<'_> {
    fn add(&mut self, label: &str, role: Option<usize>, kind: NodeKind) -> String {
        let id = format!("{label} {}", self.nodes.len() + 1);
        let partition = role.map(|r| self.roles[r].clone());
        self.nodes.push(Node::new(id.clone(), partition.as_deref(), kind));
        id
    }

    fn flow(&mut self, from: &str, to: &str, guard: Option<String>) {
        let mut c = ControlFlow::new(from, to);
        c.guard = guard;
        self.edges.push(Edge::Control(c));
    }

    /// Emits a block sequence after `prev`, returning the last node.
    fn seq(&mut self, blocks: &[Block], mut prev: String, mut guard: Option<String>) -> String {
        for b in blocks {
            let (entry, exit) = self.block(b);
            self.flow(&prev, &entry, guard.take());
            prev = exit;
        }
        prev
    }

    fn block(&mut self, b: &Block) -> (String, String) {
        let l = &self.spec.labels;
        match b {
            Block::Action(r) => {
                let function_ref = FunctionRef::new(&self.roles[*r], &self.spec.functions[*r].0);
                let id = self.add(&l[0], Some(*r), NodeKind::Action { function_ref });
                self.actions.push(id.clone());
                (id.clone(), id)
            }
            Block::Signal(signal, a, b) => {
                let port = format!("{signal} port");
                let s = self.add(&l[1], Some(*a), NodeKind::SendSignal { signal: signal.clone(), port: port.clone() });
                let r = self.add(&l[2], Some(*b), NodeKind::AcceptSignal { signal: signal.clone(), port });
                self.flow(&s, &r, None);
                (s, r)
            }
            Block::Choice(branches) => {
                let d = self.add("decide", None, NodeKind::Decision);
                let m = self.add("merge", None, NodeKind::Merge);
                for (g, body) in branches {
                    let end = self.seq(body, d.clone(), g.clone());
                    let g = if end == d { g.clone() } else { None };
                    self.flow(&end, &m, g);
                }
                (d, m)
            }
            Block::Parallel(branches) => {
                let f = self.add("fork", None, NodeKind::Fork);
                let j = self.add("join", None, NodeKind::Join);
                for body in branches {
                    let end = self.seq(body, f.clone(), None);
                    self.flow(&end, &j, None);
                }
                (f, j)
            }
        }
    }
}

pub fn build(spec: &Spec) -> SystemGroupModel {
    // role names are made distinct, everything else may collide
    let roles: Vec<String> = spec.roles.iter().enumerate().map(|(i, r)| format!("{r}{i}")).collect();
    let mut b = Builder { spec, roles: roles.clone(), nodes: vec![], edges: vec![], actions: vec![] };
    let start = b.add("start", None, NodeKind::Initial);
    let last = b.seq(&spec.body, start, None);
    let end = b.add("end", None, NodeKind::Final);
    b.flow(&last, &end, None);

    for &(p, c) in &spec.exchanges {
        if b.actions.is_empty() {
            break;
        }
        let (p, c) = (p % b.actions.len(), c % b.actions.len());
        if p != c {
            let flow = ObjectFlow::new(b.actions[p].clone(), "result", b.actions[c].clone(), "input", "number");
            b.edges.push(Edge::Object(flow));
        }
    }

    let mut model = SystemGroupModel { name: "random".into(), ..Default::default() };
    for (i, role) in roles.iter().enumerate() {
        let (function, bound) = &spec.functions[i];
        let mut r = Role::new(role);
        r.whitebox_functions.push(WhiteboxFunction {
            name: function.clone(),
            inputs: vec![Pin::new("input", "number")],
            outputs: vec![Pin::new("result", "number")],
            bound_states: vec![],
        });
        model.roles.push(r);
        if *bound {
            model.deployment.push(DeploymentBinding {
                function_ref: FunctionRef::new(role, function),
                skill_interface_name: format!("{function} skill"),
                module_name: role.clone(),
                comm_type: CommType::OpcUa,
                description: "random".into(),
            });
        }
    }
    model.activities.push(ActivityModel { name: ACTIVITY.into(), partitions: roles, nodes: b.nodes, edges: b.edges });
    model
}

pub const ACTIVITY: &str = "random activity";

/// One node of every kind: a fork whose branches hold a decision around a
/// bound action and a send/accept pair.
pub fn every_kind_spec() -> Spec {
    Spec {
        roles: vec!["Left".into(), "Right".into()],
        functions: vec![("work".into(), true), ("idle".into(), false)],
        labels: vec!["act".into(), "send".into(), "accept".into()],
        body: vec![Block::Parallel(vec![
            vec![Block::Choice(vec![(Some("n > 1".into()), vec![Block::Action(0)]), (Some("else".into()), vec![])])],
            vec![Block::Signal("ping".into(), 0, 1)],
        ])],
        exchanges: vec![],
    }
}
