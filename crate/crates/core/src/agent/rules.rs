//! Decision rules `IF event AND condition THEN actions`, their serialized
//! templates, and the events and percepts they match against.

use serde::{Deserialize, Serialize};

use crate::fuzzy::{t_norm, Degree};
use crate::ids::{AgentId, CommunityId};
use crate::protocol::{CommunicationAct, MessageBody, Performative, ValueRecord};

use super::KnowledgeBase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    MessageReceived,
    EnvironmentChanged,
    Timer,
}

/// A perceived change of an environment variable. When `term` is set the
/// change is reported for that watched term and carries its degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableChange {
    pub variable: String,
    pub term: Option<String>,
    pub old: Option<f64>,
    pub new: f64,
    pub old_degree: Option<Degree>,
    pub new_degree: Option<Degree>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventPayload {
    Message(Box<CommunicationAct>),
    Change(VariableChange),
    Timer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    pub payload: EventPayload,
    pub degree: Degree,
    pub tick: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Percept {
    pub event: Event,
    pub degree: Degree,
}

impl Percept {
    pub fn message(&self) -> Option<&CommunicationAct> {
        match &self.event.payload {
            EventPayload::Message(act) => Some(act),
            _ => None,
        }
    }

    pub fn change(&self) -> Option<&VariableChange> {
        match &self.event.payload {
            EventPayload::Change(c) => Some(c),
            _ => None,
        }
    }

    /// The fuzzy value this percept carries, as a record that can be
    /// forwarded or stored.
    pub fn value_record(&self) -> Option<ValueRecord> {
        match &self.event.payload {
            EventPayload::Message(act) => match &act.content.body {
                MessageBody::Value(v) => Some(v.clone()),
                _ => None,
            },
            EventPayload::Change(c) => {
                let term = c.term.clone()?;
                Some(ValueRecord {
                    variable: c.variable.clone(),
                    term,
                    value: c.new_degree?.value(),
                })
            }
            EventPayload::Timer => None,
        }
    }
}

/// Structural template over events. Unset fields match anything; a match
/// yields the percept's degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventPattern {
    pub kind: EventKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub performative: Option<Performative>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mtype: Option<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variable: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term: Option<String>,
}

impl EventPattern {
    pub fn on(kind: EventKind) -> Self {
        Self {
            kind,
            performative: None,
            mtype: None,
            variable: None,
            term: None,
        }
    }

    pub fn matches(&self, percept: &Percept) -> Option<Degree> {
        if percept.event.kind != self.kind {
            return None;
        }
        let ok = match &percept.event.payload {
            EventPayload::Message(act) => {
                let record = percept.value_record();
                self.performative.is_none_or(|p| p == act.performative())
                    && self.mtype.is_none_or(|m| m == act.mtype.code)
                    && self
                        .variable
                        .as_ref()
                        .is_none_or(|v| record.as_ref().is_some_and(|r| &r.variable == v))
                    && self.term.as_ref().is_none_or(|t| record.as_ref().is_some_and(|r| &r.term == t))
            }
            EventPayload::Change(c) => {
                self.performative.is_none()
                    && self.mtype.is_none()
                    && self.variable.as_ref().is_none_or(|v| v == &c.variable)
                    && self.term.as_ref().is_none_or(|t| c.term.as_ref() == Some(t))
            }
            EventPayload::Timer => true,
        };
        ok.then_some(percept.degree)
    }
}

/// Condition over the agent's knowledge and the triggering percept.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    #[default]
    Always,
    /// Degree stored in the knowledge base under this key (0 if absent).
    Knowledge(String),
    /// 1 if the percept's carried value is strictly above the bound, else 0.
    ValueAbove(f64),
    All(Vec<Condition>),
    Not(Box<Condition>),
}

impl Condition {
    pub fn is_always(&self) -> bool {
        matches!(self, Condition::Always)
    }

    pub fn evaluate(&self, knowledge: &KnowledgeBase, percept: &Percept) -> Degree {
        match self {
            Condition::Always => Degree::ONE,
            Condition::Knowledge(key) => knowledge.degree(key).unwrap_or(Degree::ZERO),
            Condition::ValueAbove(bound) => {
                let value = percept.value_record().map_or(percept.degree.value(), |r| r.value);
                if value > *bound {
                    Degree::ONE
                } else {
                    Degree::ZERO
                }
            }
            Condition::All(cs) => cs
                .iter()
                .fold(Degree::ONE, |acc, c| t_norm(acc, c.evaluate(knowledge, percept))),
            Condition::Not(c) => crate::fuzzy::negate(c.evaluate(knowledge, percept)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    Agent(AgentId),
    Community(CommunityId),
    /// The agent's reference community.
    OwnCommunity,
    /// The source of the triggering message.
    Sender,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContentTemplate {
    /// Forward the value carried by the triggering percept.
    Perceived,
    Assertion(String),
    Question(String),
    Response(String),
    Value(ValueRecord),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SendTemplate {
    pub performative: Performative,
    pub to: Target,
    pub mtype: u16,
    pub content: ContentTemplate,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub ack: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EffectValue {
    Constant(f64),
    /// Run the agent's Mamdani rule base over the degrees it has learned.
    Infer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KnowledgeUpdate {
    /// Store the percept's value record under `variable.term`.
    StorePerceived,
    /// Raise the affinity for the message source to the percept degree.
    BefriendSender,
    SetDegree { key: String, degree: Degree },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionKind {
    Send(SendTemplate),
    EnvEffect { variable: String, value: EffectValue },
    InternalUpdate(KnowledgeUpdate),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpec {
    #[serde(flatten)]
    pub kind: ActionKind,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub degree: Degree,
}

impl ActionSpec {
    pub fn new(kind: ActionKind) -> Self {
        Self { kind, degree: Degree::ONE }
    }
}

fn one() -> Degree {
    Degree::ONE
}

fn is_one(d: &Degree) -> bool {
    *d == Degree::ONE
}

/// Behaviour cycle a rule belongs to. Reactive rules skip the condition
/// stage; cognitive rules behave as routine ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleCategory {
    Reactive,
    #[default]
    Routine,
    Cognitive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRule", into = "RawRule")]
pub struct DecisionRule {
    pub id: String,
    pub on: EventPattern,
    pub when: Condition,
    pub then: Vec<ActionSpec>,
    pub threshold: Degree,
    pub category: RuleCategory,
}

impl DecisionRule {
    pub fn new(id: impl Into<String>, on: EventPattern, then: Vec<ActionSpec>) -> Result<Self, String> {
        let rule = Self {
            id: id.into(),
            on,
            when: Condition::Always,
            then,
            threshold: Degree::ZERO,
            category: RuleCategory::Routine,
        };
        rule.check()?;
        Ok(rule)
    }

    pub fn with_condition(mut self, when: Condition) -> Self {
        self.when = when;
        self
    }

    pub fn with_threshold(mut self, threshold: Degree) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn with_category(mut self, category: RuleCategory) -> Self {
        self.category = category;
        self
    }

    fn check(&self) -> Result<(), String> {
        if self.then.is_empty() {
            return Err(format!("rule `{}` has no actions", self.id));
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct RawRule {
    id: String,
    on: EventPattern,
    #[serde(default, skip_serializing_if = "Condition::is_always")]
    when: Condition,
    then: Vec<ActionSpec>,
    #[serde(default)]
    threshold: Degree,
    #[serde(default)]
    category: RuleCategory,
}

impl TryFrom<RawRule> for DecisionRule {
    type Error = String;

    fn try_from(r: RawRule) -> Result<Self, Self::Error> {
        let rule = DecisionRule {
            id: r.id,
            on: r.on,
            when: r.when,
            then: r.then,
            threshold: r.threshold,
            category: r.category,
        };
        rule.check()?;
        Ok(rule)
    }
}

impl From<DecisionRule> for RawRule {
    fn from(r: DecisionRule) -> Self {
        RawRule {
            id: r.id,
            on: r.on,
            when: r.when,
            then: r.then,
            threshold: r.threshold,
            category: r.category,
        }
    }
}

/// A rule that fired on one percept this tick.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub rule_id: String,
    pub rule_index: usize,
    pub strength: Degree,
    pub percept: Percept,
    pub actions: Vec<ActionSpec>,
}
