use std::collections::HashMap;

use crate::bpmn::{parse_bpmn, BpmnDocument, BpmnElement, ElementKind, LoadError, SequenceFlow};
use crate::engine::condition::Condition;
use crate::runtime::SkillRef;

/// A loaded process with adjacency tables. Flow lists keep document order.
#[derive(Debug, Clone)]
pub struct ProcessDefinition {
    pub doc: BpmnDocument,
    index: HashMap<String, usize>,
    outgoing: HashMap<String, Vec<usize>>,
    incoming: HashMap<String, Vec<usize>>,
    boundaries: HashMap<String, Vec<usize>>,
    conditions: HashMap<usize, Condition>,
}

pub fn load_process(xml: &str) -> Result<ProcessDefinition, LoadError> {
    ProcessDefinition::compile(parse_bpmn(xml)?)
}

impl ProcessDefinition {
    /// Builds lookup tables for a document that already passed the
    /// structure check.
    pub fn compile(doc: BpmnDocument) -> Result<Self, LoadError> {
        crate::bpmn::check_structure(&doc).map_err(LoadError::Structural)?;
        let index = doc.elements.iter().enumerate().map(|(i, e)| (e.id.clone(), i)).collect();
        let mut outgoing: HashMap<String, Vec<usize>> = HashMap::new();
        let mut incoming: HashMap<String, Vec<usize>> = HashMap::new();
        let mut conditions = HashMap::new();
        for (i, f) in doc.flows.iter().enumerate() {
            outgoing.entry(f.source.clone()).or_default().push(i);
            incoming.entry(f.target.clone()).or_default().push(i);
            if let Some(text) = &f.condition {
                let parsed = Condition::parse(text).map_err(|e| LoadError::Structural(format!("flow '{}': {e}", f.id)))?;
                conditions.insert(i, parsed);
            }
        }
        let mut boundaries: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, e) in doc.elements.iter().enumerate() {
            if let ElementKind::BoundaryErrorEvent { attached_to, .. } = &e.kind {
                boundaries.entry(attached_to.clone()).or_default().push(i);
            }
        }
        Ok(ProcessDefinition { doc, index, outgoing, incoming, boundaries, conditions })
    }

    pub fn element(&self, id: &str) -> Option<&BpmnElement> {
        self.index.get(id).map(|&i| &self.doc.elements[i])
    }

    pub fn outgoing(&self, id: &str) -> impl Iterator<Item = (usize, &SequenceFlow)> {
        self.outgoing.get(id).into_iter().flatten().map(|&i| (i, &self.doc.flows[i]))
    }

    pub fn incoming(&self, id: &str) -> impl Iterator<Item = &SequenceFlow> {
        self.incoming.get(id).into_iter().flatten().map(|&i| &self.doc.flows[i])
    }

    pub fn boundaries(&self, id: &str) -> impl Iterator<Item = &BpmnElement> {
        self.boundaries.get(id).into_iter().flatten().map(|&i| &self.doc.elements[i])
    }

    pub fn condition(&self, flow_index: usize) -> Option<&Condition> {
        self.conditions.get(&flow_index)
    }

    pub fn start_event(&self) -> &BpmnElement {
        self.doc
            .elements
            .iter()
            .find(|e| e.kind == ElementKind::StartEvent)
            .expect("structure check guarantees one start event")
    }

    /// Distinct skills referenced by service tasks, in document order.
    pub fn skill_refs(&self) -> Vec<SkillRef> {
        let mut out: Vec<SkillRef> = Vec::new();
        for (_, task) in self.doc.service_tasks() {
            if !out.contains(&task.skill) {
                out.push(task.skill.clone());
            }
        }
        out
    }
}
