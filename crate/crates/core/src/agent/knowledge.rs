use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::fuzzy::{Degree, FuzzyInputs, LinguisticVariable, RuleBase, TNorm};
use crate::ids::AgentId;

use super::Event;

pub const DEFAULT_HISTORY_CAP: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainValue {
    Crisp(f64),
    Fuzzy(Degree),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateValue {
    Flag(bool),
    Number(f64),
    Degree(Degree),
    Text(String),
}

/// A (variable, term) pair whose degree changes the agent reports as
/// percepts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Watch {
    pub variable: String,
    pub term: String,
}

/// A Mamdani rule base the agent can run over degrees it has learned.
#[derive(Debug, Clone, PartialEq)]
pub struct InferenceSpec {
    pub variables: Vec<LinguisticVariable>,
    pub rule_base: RuleBase,
    pub t_norm: TNorm,
}

#[derive(Debug, Clone, PartialEq)]
pub enum KnowledgeMutation {
    SetDomainValue { key: String, value: DomainValue },
    SetAffinity { agent: AgentId, degree: Degree },
    SetState { key: String, value: StateValue },
    RecordEvent(Event),
}

/// Everything an agent knows: its vocabulary, domain values, affinities,
/// bounded event history and internal state.
#[derive(Debug, Clone)]
pub struct KnowledgeBase {
    variables: Vec<LinguisticVariable>,
    watched: Vec<Watch>,
    observed: Vec<String>,
    inference: Option<Arc<InferenceSpec>>,
    domain_values: BTreeMap<String, DomainValue>,
    acquaintances: BTreeMap<AgentId, Degree>,
    observed_events: VecDeque<Event>,
    history_cap: usize,
    internal_state: BTreeMap<String, StateValue>,
}

impl Default for KnowledgeBase {
    fn default() -> Self {
        Self::new(DEFAULT_HISTORY_CAP)
    }
}

/// Key under which the degree of `variable is term` is stored.
pub fn degree_key(variable: &str, term: &str) -> String {
    format!("{variable}.{term}")
}

impl KnowledgeBase {
    pub fn new(history_cap: usize) -> Self {
        Self {
            variables: Vec::new(),
            watched: Vec::new(),
            observed: Vec::new(),
            inference: None,
            domain_values: BTreeMap::new(),
            acquaintances: BTreeMap::new(),
            observed_events: VecDeque::new(),
            history_cap: history_cap.max(1),
            internal_state: BTreeMap::new(),
        }
    }

    pub fn learn_variable(&mut self, lv: LinguisticVariable) {
        self.variables.retain(|v| v.name() != lv.name());
        self.variables.push(lv);
    }

    pub fn variables(&self) -> &[LinguisticVariable] {
        &self.variables
    }

    pub fn variable(&self, name: &str) -> Option<&LinguisticVariable> {
        self.variables.iter().find(|v| v.name() == name)
    }

    pub fn watch(&mut self, variable: impl Into<String>, term: impl Into<String>) {
        let w = Watch {
            variable: variable.into(),
            term: term.into(),
        };
        if !self.watched.contains(&w) {
            self.watched.push(w);
        }
    }

    pub fn watched(&self) -> &[Watch] {
        &self.watched
    }

    /// Crisp environment variables whose changes are perceived with degree 1.
    pub fn observe(&mut self, variable: impl Into<String>) {
        let v = variable.into();
        if !self.observed.contains(&v) {
            self.observed.push(v);
        }
    }

    pub fn observed(&self) -> &[String] {
        &self.observed
    }

    pub fn set_inference(&mut self, spec: Arc<InferenceSpec>) {
        self.inference = Some(spec);
    }

    pub fn inference(&self) -> Option<&Arc<InferenceSpec>> {
        self.inference.as_ref()
    }

    pub fn apply(&mut self, mutation: KnowledgeMutation) {
        match mutation {
            KnowledgeMutation::SetDomainValue { key, value } => {
                self.domain_values.insert(key, value);
            }
            KnowledgeMutation::SetAffinity { agent, degree } => {
                self.acquaintances.insert(agent, degree);
            }
            KnowledgeMutation::SetState { key, value } => {
                self.internal_state.insert(key, value);
            }
            KnowledgeMutation::RecordEvent(event) => {
                if self.observed_events.len() == self.history_cap {
                    self.observed_events.pop_front();
                }
                self.observed_events.push_back(event);
            }
        }
    }

    pub fn domain_value(&self, key: &str) -> Option<DomainValue> {
        self.domain_values.get(key).copied()
    }

    pub fn domain_values(&self) -> &BTreeMap<String, DomainValue> {
        &self.domain_values
    }

    /// Degree stored under `key`; crisp values read as absent.
    pub fn degree(&self, key: &str) -> Option<Degree> {
        match self.domain_values.get(key) {
            Some(DomainValue::Fuzzy(d)) => Some(*d),
            _ => None,
        }
    }

    pub fn affinity(&self, agent: &AgentId) -> Option<Degree> {
        self.acquaintances.get(agent).copied()
    }

    pub fn acquaintances(&self) -> &BTreeMap<AgentId, Degree> {
        &self.acquaintances
    }

    pub fn history(&self) -> impl ExactSizeIterator<Item = &Event> {
        self.observed_events.iter()
    }

    pub fn history_cap(&self) -> usize {
        self.history_cap
    }

    pub fn state(&self, key: &str) -> Option<&StateValue> {
        self.internal_state.get(key)
    }

    /// Stored degrees for the terms of `variables`, grouped for inference.
    pub fn fuzzy_inputs(&self, variables: &[&str]) -> FuzzyInputs {
        let mut inputs = FuzzyInputs::new();
        for (key, value) in &self.domain_values {
            let (DomainValue::Fuzzy(d), Some((var, term))) = (value, key.split_once('.')) else {
                continue;
            };
            if variables.contains(&var) {
                inputs.entry(var.to_string()).or_default().insert(term.to_string(), *d);
            }
        }
        inputs
    }
}
