use std::collections::{BTreeSet, HashSet, VecDeque};

use proptest::prelude::*;
use skillforge_core::fixtures::labplant_model;
use skillforge_core::io::serialize_model;
use skillforge_core::model::*;

#[test]
fn signalize_removes_every_cross_partition_flow() {
    let ported = derive_ports(&labplant_model());
    let signalized = signalize(&ported).unwrap();
    for a in &signalized.activities {
        assert!(cross_role_flows(a).unwrap().is_empty(), "{}", a.name);
    }
    let report = validate_model(&signalized);
    assert!(!report.rules().contains(&RuleId::R6), "{:#?}", report.findings);
    assert!(!report.has_errors());

    let act = signalized.activity("Manufacture Product").unwrap();
    let sends: Vec<_> = act.nodes.iter().filter(|n| matches!(n.kind, NodeKind::SendSignal { .. })).collect();
    let accepts: Vec<_> = act.nodes.iter().filter(|n| matches!(n.kind, NodeKind::AcceptSignal { .. })).collect();
    let original = labplant_model();
    let crossing = cross_role_flows(original.activity("Manufacture Product").unwrap()).unwrap();
    assert_eq!(sends.len(), crossing.len());
    assert_eq!(accepts.len(), crossing.len());
    let signals: BTreeSet<_> = sends
        .iter()
        .map(|n| match &n.kind {
            NodeKind::SendSignal { signal, .. } => signal.as_str(),
            _ => unreachable!(),
        })
        .collect();
    assert_eq!(signals, BTreeSet::from(["order", "raw material", "transport request"]));
}

#[test]
fn transforms_are_idempotent() {
    let once = derive_ports(&labplant_model());
    assert_eq!(serialize_model(&derive_ports(&once)), serialize_model(&once));
    let s1 = signalize(&once).unwrap();
    let s2 = signalize(&s1).unwrap();
    assert_eq!(serialize_model(&s2), serialize_model(&s1));
    assert_eq!(serialize_model(&derive_ports(&s1)), serialize_model(&s1));
}

#[test]
fn ports_follow_exchanges() {
    let ported = derive_ports(&labplant_model());
    let ports = |role: &str| -> Vec<(Direction, String)> {
        ported.role(role).unwrap().ports.iter().map(|p| (p.direction, p.content_type.clone())).collect()
    };
    assert!(ports("OrderManagement").contains(&(Direction::Out, "order".into())));
    assert!(ports("Manufacturing").contains(&(Direction::In, "order".into())));
    assert!(ports("Manufacturing").contains(&(Direction::In, "raw material".into())));
    assert!(ports("Assembly").is_empty());
}

/// Brute force product: enumerate all state tuples, keep those reachable by
/// single internal moves or sender/receiver pairs.
fn brute_force(model: &SystemGroupModel) -> HashSet<Vec<String>> {
    let machines: Vec<&StateModel> = model.roles.iter().filter_map(|r| r.state_model.as_ref()).collect();
    let mut all: Vec<Vec<String>> = vec![vec![]];
    for m in &machines {
        all = all.into_iter().flat_map(|t| m.states.iter().map(move |s| [t.clone(), vec![s.clone()]].concat())).collect();
    }
    let with = |a: &Vec<String>, changes: &[(usize, &String)]| {
        let mut t = a.clone();
        for (i, s) in changes {
            t[*i] = (*s).clone();
        }
        t
    };
    let step = |a: &Vec<String>, b: &Vec<String>| -> bool {
        (0..a.len()).any(|i| {
            machines[i].transitions.iter().filter(|t| t.from == a[i] && t.trigger.is_none()).any(|t| match &t.sends {
                None => with(a, &[(i, &t.to)]) == *b,
                Some(g) => (0..a.len()).filter(|&j| j != i).any(|j| {
                    machines[j]
                        .transitions
                        .iter()
                        .filter(|r| r.from == a[j] && r.trigger.as_ref() == Some(g))
                        .any(|r| with(a, &[(i, &t.to), (j, &r.to)]) == *b)
                }),
            })
        })
    };
    let init: Vec<String> = machines.iter().map(|m| m.initial.clone()).collect();
    let mut seen = HashSet::from([init.clone()]);
    let mut queue = VecDeque::from([init]);
    while let Some(t) = queue.pop_front() {
        for u in &all {
            if !seen.contains(u) && step(&t, u) {
                seen.insert(u.clone());
                queue.push_back(u.clone());
            }
        }
    }
    seen
}

fn machine(states: usize) -> impl Strategy<Value = StateModel> {
    let transition = (0..states, 0..states, prop::option::of(0..2usize), prop::option::of(0..2usize));
    prop::collection::vec(transition, 0..5).prop_map(move |ts| StateModel {
        states: (0..states).map(|i| format!("s{i}")).collect(),
        initial: "s0".into(),
        transitions: ts
            .into_iter()
            .map(|(f, t, trig, send)| StateTransition {
                from: format!("s{f}"),
                to: format!("s{t}"),
                trigger: trig.map(|g| format!("g{g}")),
                sends: send.map(|g| format!("g{g}")),
            })
            .collect(),
        collaboration_functions: vec![],
    })
}

proptest! {
    #[test]
    fn aggregation_matches_brute_force(machines in prop::collection::vec((1usize..4).prop_flat_map(machine), 1..4)) {
        let model = SystemGroupModel {
            roles: machines
                .into_iter()
                .enumerate()
                .map(|(i, m)| {
                    let mut r = Role::new(format!("R{i}"));
                    r.state_model = Some(m);
                    r
                })
                .collect(),
            ..Default::default()
        };
        let got: HashSet<Vec<String>> = aggregate_states(&model)
            .unwrap()
            .into_iter()
            .map(|c| c.locals.into_iter().map(|(_, s)| s).collect())
            .collect();
        prop_assert_eq!(got, brute_force(&model));
    }
}

#[test]
fn labplant_state_space() {
    let states = aggregate_states(&labplant_model()).unwrap();
    assert!(states.len() >= 2);
    assert_eq!(states[0].state_of("Manufacturing"), Some("Ready"));
    assert!(states.iter().any(|c| c.state_of("Manufacturing") == Some("Contribute to Manufacturing")));
    assert_eq!(aggregate_states_with_cap(&labplant_model(), 1), Err(StateSpaceExceeded { cap: 1 }));
}
