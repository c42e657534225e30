//! Aggregation of role states into system group states.
//!
//! Composite states are tuples with one local state per role that owns a state
//! model. Successors follow synchronized-product semantics:
//!
//! * a transition without trigger and without sent signal fires on its own;
//! * a transition that sends signal `g` (and has no trigger) fires together
//!   with exactly one transition of another role triggered by `g`;
//! * triggered transitions never fire alone.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use super::{StateModel, SystemGroupModel};

pub const DEFAULT_STATE_CAP: usize = 10_000;

/// One local state per participating role, in role declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompositeState {
    pub locals: Vec<(String, String)>,
}

impl CompositeState {
    pub fn state_of(&self, role: &str) -> Option<&str> {
        self.locals.iter().find(|(r, _)| r == role).map(|(_, s)| s.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("reachable state space exceeds the cap of {cap} composite states")]
pub struct StateSpaceExceeded {
    pub cap: usize,
}

pub fn aggregate_states(model: &SystemGroupModel) -> Result<Vec<CompositeState>, StateSpaceExceeded> {
    aggregate_states_with_cap(model, DEFAULT_STATE_CAP)
}

/// Reachable composite states in breadth-first discovery order from the tuple
/// of initial states.
pub fn aggregate_states_with_cap(model: &SystemGroupModel, cap: usize) -> Result<Vec<CompositeState>, StateSpaceExceeded> {
    let roles: Vec<(&str, &StateModel)> = model
        .roles
        .iter()
        .filter_map(|r| r.state_model.as_ref().map(|m| (r.name.as_str(), m)))
        .collect();
    let initial: Vec<&str> = roles.iter().map(|(_, m)| m.initial.as_str()).collect();

    let mut index: HashMap<Vec<&str>, usize> = HashMap::from([(initial.clone(), 0)]);
    let mut order = vec![initial.clone()];
    let mut queue = VecDeque::from([initial]);
    if cap == 0 {
        return Err(StateSpaceExceeded { cap });
    }

    while let Some(current) = queue.pop_front() {
        for next in successors(&roles, &current) {
            if index.contains_key(&next) {
                continue;
            }
            if order.len() == cap {
                return Err(StateSpaceExceeded { cap });
            }
            index.insert(next.clone(), order.len());
            order.push(next.clone());
            queue.push_back(next);
        }
    }

    Ok(order
        .into_iter()
        .map(|tuple| CompositeState {
            locals: roles.iter().zip(tuple).map(|((r, _), s)| (r.to_string(), s.to_owned())).collect(),
        })
        .collect())
}

fn successors<'a>(roles: &[(&'a str, &'a StateModel)], current: &[&'a str]) -> Vec<Vec<&'a str>> {
    let mut out = Vec::new();
    for (i, (_, model)) in roles.iter().enumerate() {
        for t in model.transitions.iter().filter(|t| t.from == current[i] && t.trigger.is_none()) {
            match &t.sends {
                None => {
                    let mut next = current.to_vec();
                    next[i] = t.to.as_str();
                    out.push(next);
                }
                Some(signal) => {
                    for (j, (_, other)) in roles.iter().enumerate() {
                        if j == i {
                            continue;
                        }
                        for r in other.transitions.iter().filter(|r| r.from == current[j] && r.trigger.as_ref() == Some(signal)) {
                            let mut next = current.to_vec();
                            next[i] = t.to.as_str();
                            next[j] = r.to.as_str();
                            out.push(next);
                        }
                    }
                }
            }
        }
    }
    out
}
