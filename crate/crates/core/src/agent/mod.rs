//! The fuzzy agent: a knowledge base, decision rules and the
//! perceive, decide and act functions that make up one behaviour cycle.
//!
//! An agent only ever touches its own state. Messages it sends and
//! environment effects it produces are returned in its [`TickReport`] and
//! committed by the runtime at the tick barrier.

mod knowledge;
mod rules;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::fuzzy::{fuzzify, infer_from_degrees, t_norm, Degree, FuzzyError, RuleFiring};
use crate::ids::{AgentId, CommunityId, RoleId};
use crate::protocol::{
    value_of, CommunicationAct, Directory, Message, MessageBody, Party, ProtocolError, Receiver,
    SpeechAct, TypeTag,
};

pub use knowledge::{
    degree_key, DomainValue, InferenceSpec, KnowledgeBase, KnowledgeMutation, StateValue, Watch, DEFAULT_HISTORY_CAP,
};
pub use rules::{
    ActionKind, ActionSpec, Condition, ContentTemplate, Decision, DecisionRule, EffectValue, Event, EventKind,
    EventPattern, EventPayload, KnowledgeUpdate, Percept, RuleCategory, SendTemplate, Target, VariableChange,
};

/// A committed change of an environment variable, as seen by agents on
/// the following tick.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvChange {
    pub variable: String,
    pub old: Option<f64>,
    pub new: f64,
}

/// What an agent may read during its step.
pub struct SystemView<'a> {
    pub tick: u64,
    pub environment: &'a BTreeMap<String, f64>,
    pub changes: &'a [EnvChange],
    pub directory: &'a (dyn Directory + Sync),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvEffect {
    pub variable: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceRecord {
    pub variable: String,
    pub value: f64,
    pub firings: Vec<RuleFiring>,
}

/// Entry in the agent's action log.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutedAction {
    pub tick: u64,
    pub rule_id: String,
    pub description: String,
    pub degree: Degree,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ActionError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("rule `{rule}`: target `sender` needs a message percept")]
    NoSender { rule: String },
    #[error("rule `{rule}`: percept carries no value")]
    NoValue { rule: String },
    #[error("rule `{rule}`: agent has no inference rule base")]
    NoInference { rule: String },
    #[error("rule `{rule}`: agent has no reference community")]
    NoCommunity { rule: String },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ActOutcome {
    pub executed: Vec<ExecutedAction>,
    pub outbox: Vec<CommunicationAct>,
    pub effects: Vec<EnvEffect>,
    pub inferences: Vec<InferenceRecord>,
    pub notes: Vec<String>,
    pub errors: Vec<ActionError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickReport {
    pub agent: AgentId,
    pub tick: u64,
    pub percepts: Vec<Percept>,
    pub decisions: Vec<Decision>,
    pub outcome: ActOutcome,
}

#[derive(Debug, Clone)]
pub struct FuzzyAgent {
    id: AgentId,
    membership: Degree,
    knowledge: KnowledgeBase,
    rules: Vec<DecisionRule>,
    roles: BTreeMap<RoleId, Degree>,
    community: Option<CommunityId>,
    mailbox: VecDeque<CommunicationAct>,
    action_log: Vec<ExecutedAction>,
}

impl fmt::Display for FuzzyAgent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id)
    }
}

impl FuzzyAgent {
    pub fn new(id: impl Into<AgentId>) -> Self {
        Self {
            id: id.into(),
            membership: Degree::ONE,
            knowledge: KnowledgeBase::default(),
            rules: Vec::new(),
            roles: BTreeMap::new(),
            community: None,
            mailbox: VecDeque::new(),
            action_log: Vec::new(),
        }
    }

    pub fn with_membership(mut self, membership: Degree) -> Self {
        self.membership = membership;
        self
    }

    pub fn with_knowledge(mut self, knowledge: KnowledgeBase) -> Self {
        self.knowledge = knowledge;
        self
    }

    pub fn id(&self) -> &AgentId {
        &self.id
    }

    pub fn membership(&self) -> Degree {
        self.membership
    }

    pub fn knowledge(&self) -> &KnowledgeBase {
        &self.knowledge
    }

    pub fn knowledge_mut(&mut self) -> &mut KnowledgeBase {
        &mut self.knowledge
    }

    pub fn rules(&self) -> &[DecisionRule] {
        &self.rules
    }

    pub fn add_rule(&mut self, rule: DecisionRule) {
        self.rules.push(rule);
    }

    pub fn roles(&self) -> &BTreeMap<RoleId, Degree> {
        &self.roles
    }

    pub fn set_roles(&mut self, roles: BTreeMap<RoleId, Degree>) {
        self.roles = roles;
    }

    pub fn community(&self) -> Option<&CommunityId> {
        self.community.as_ref()
    }

    pub fn set_community(&mut self, community: CommunityId) {
        self.community = Some(community);
    }

    pub fn enqueue(&mut self, act: CommunicationAct) {
        self.mailbox.push_back(act);
    }

    pub fn mailbox_len(&self) -> usize {
        self.mailbox.len()
    }

    pub fn action_log(&self) -> &[ExecutedAction] {
        &self.action_log
    }

    /// Knowledge-base manager entry point.
    pub fn update_knowledge(&mut self, mutation: KnowledgeMutation) {
        self.knowledge.apply(mutation);
    }

    /// Drains the mailbox into message percepts (degree = act value), then
    /// turns environment changes into percepts: one per watched term whose
    /// degree changed, or one of degree 1 for an observed crisp variable.
    /// All term degrees of known variables are recorded, watched or not.
    pub fn perceive(&mut self, view: &SystemView<'_>) -> Vec<Percept> {
        let mut percepts = Vec::new();
        while let Some(act) = self.mailbox.pop_front() {
            let degree = value_of(&act);
            percepts.push(self.record(Event {
                kind: EventKind::MessageReceived,
                payload: EventPayload::Message(Box::new(act)),
                degree,
                tick: view.tick,
            }));
        }
        for change in view.changes {
            if let Some(lv) = self.knowledge.variable(&change.variable).cloned() {
                self.update_knowledge(KnowledgeMutation::SetDomainValue {
                    key: change.variable.clone(),
                    value: DomainValue::Crisp(change.new),
                });
                let degrees = fuzzify(&lv, change.new);
                let mut previous = BTreeMap::new();
                for (term, d) in &degrees {
                    let key = degree_key(&change.variable, term);
                    previous.insert(term.clone(), self.knowledge.degree(&key));
                    self.update_knowledge(KnowledgeMutation::SetDomainValue {
                        key,
                        value: DomainValue::Fuzzy(*d),
                    });
                }
                let watched: Vec<String> = self
                    .knowledge
                    .watched()
                    .iter()
                    .filter(|w| w.variable == change.variable)
                    .filter_map(|w| lv.canonical(&w.term).map(str::to_string))
                    .collect();
                for term in watched {
                    let new_degree = degrees[&term];
                    let old_degree = previous[&term];
                    if old_degree == Some(new_degree) {
                        continue;
                    }
                    percepts.push(self.record(Event {
                        kind: EventKind::EnvironmentChanged,
                        payload: EventPayload::Change(VariableChange {
                            variable: change.variable.clone(),
                            term: Some(term),
                            old: change.old,
                            new: change.new,
                            old_degree,
                            new_degree: Some(new_degree),
                        }),
                        degree: new_degree,
                        tick: view.tick,
                    }));
                }
            } else if self.knowledge.observed().contains(&change.variable) {
                self.update_knowledge(KnowledgeMutation::SetDomainValue {
                    key: change.variable.clone(),
                    value: DomainValue::Crisp(change.new),
                });
                percepts.push(self.record(Event {
                    kind: EventKind::EnvironmentChanged,
                    payload: EventPayload::Change(VariableChange {
                        variable: change.variable.clone(),
                        term: None,
                        old: change.old,
                        new: change.new,
                        old_degree: None,
                        new_degree: None,
                    }),
                    degree: Degree::ONE,
                    tick: view.tick,
                }));
            }
        }
        percepts
    }

    fn record(&mut self, event: Event) -> Percept {
        let degree = event.degree;
        self.update_knowledge(KnowledgeMutation::RecordEvent(event.clone()));
        Percept { event, degree }
    }

    /// Fires every rule on every matching percept whose
    /// `min(event degree, condition degree)` reaches the rule threshold.
    /// Ordered by descending strength, then rule declaration order, then
    /// percept order.
    pub fn decide(&self, percepts: &[Percept]) -> Vec<Decision> {
        let mut decisions = Vec::new();
        for (rule_index, rule) in self.rules.iter().enumerate() {
            for percept in percepts {
                let Some(event_degree) = rule.on.matches(percept) else {
                    continue;
                };
                let condition_degree = match rule.category {
                    RuleCategory::Reactive => Degree::ONE,
                    RuleCategory::Routine | RuleCategory::Cognitive => rule.when.evaluate(&self.knowledge, percept),
                };
                let strength = t_norm(event_degree, condition_degree);
                if strength >= rule.threshold {
                    decisions.push(Decision {
                        rule_id: rule.id.clone(),
                        rule_index,
                        strength,
                        percept: percept.clone(),
                        actions: rule.then.clone(),
                    });
                }
            }
        }
        decisions.sort_by_key(|d| std::cmp::Reverse(d.strength));
        decisions
    }

    /// Executes decisions in order. Sends and knowledge updates take effect
    /// immediately; environment effects are collected (last write per
    /// variable wins) and inference-valued ones are evaluated once, after
    /// all knowledge updates of this tick.
    pub fn act(&mut self, decisions: &[Decision], view: &SystemView<'_>) -> ActOutcome {
        let mut outcome = ActOutcome::default();
        let mut effects: Vec<(String, EffectValue)> = Vec::new();
        for decision in decisions {
            for action in &decision.actions {
                let result = match &action.kind {
                    ActionKind::Send(template) => self.build_act(template, action.degree, decision, view).map(|act| {
                        let description = format!("{} to {}", act.performative(), act.receiver);
                        outcome.outbox.push(act);
                        description
                    }),
                    ActionKind::InternalUpdate(update) => self.apply_update(update, decision),
                    ActionKind::EnvEffect { variable, value } => {
                        if matches!(value, EffectValue::Infer) && self.knowledge.inference().is_none() {
                            Err(ActionError::NoInference {
                                rule: decision.rule_id.clone(),
                            })
                        } else {
                            effects.retain(|(v, _)| v != variable);
                            effects.push((variable.clone(), value.clone()));
                            Ok(format!("env-effect {variable}"))
                        }
                    }
                };
                match result {
                    Ok(description) => {
                        let entry = ExecutedAction {
                            tick: view.tick,
                            rule_id: decision.rule_id.clone(),
                            description,
                            degree: action.degree,
                        };
                        self.action_log.push(entry.clone());
                        outcome.executed.push(entry);
                    }
                    Err(e) => outcome.errors.push(e),
                }
            }
        }
        for (variable, value) in effects {
            match value {
                EffectValue::Constant(v) => outcome.effects.push(EnvEffect { variable, value: v }),
                EffectValue::Infer => self.resolve_inference(variable, &mut outcome),
            }
        }
        outcome
    }

    /// One routine cycle: perceive, decide, act.
    pub fn step(&mut self, view: &SystemView<'_>) -> TickReport {
        let percepts = self.perceive(view);
        let decisions = self.decide(&percepts);
        let outcome = self.act(&decisions, view);
        TickReport {
            agent: self.id.clone(),
            tick: view.tick,
            percepts,
            decisions,
            outcome,
        }
    }

    fn build_act(
        &self,
        template: &SendTemplate,
        degree: Degree,
        decision: &Decision,
        view: &SystemView<'_>,
    ) -> Result<CommunicationAct, ActionError> {
        let rule = || decision.rule_id.clone();
        let trigger = decision.percept.message();
        let receiver = match &template.to {
            Target::Agent(id) => agent_receiver(id, view.directory)?,
            Target::Sender => {
                let source = trigger.ok_or_else(|| ActionError::NoSender { rule: rule() })?;
                agent_receiver(&source.source.agent, view.directory)?
            }
            Target::Community(c) => community_receiver(c, view.directory)?,
            Target::OwnCommunity => {
                let c = self.community.as_ref().ok_or_else(|| ActionError::NoCommunity { rule: rule() })?;
                community_receiver(c, view.directory)?
            }
        };
        let act = CommunicationAct {
            act: SpeechAct {
                performative: template.performative,
                degree,
            },
            source: Party {
                agent: self.id.clone(),
                degree: self.membership,
            },
            receiver,
            mtype: TypeTag {
                code: template.mtype,
                degree: view
                    .directory
                    .message_type(template.mtype)
                    .ok_or(ProtocolError::UnregisteredMessageType(template.mtype))?
                    .degree,
            },
            content: self.build_content(&template.content, degree, decision)?,
            correlation: if template.performative.is_response() {
                trigger.and_then(|m| m.correlation)
            } else {
                None
            },
            ack_required: template.ack,
            tick: view.tick,
        };
        act.check_shape()?;
        Ok(act)
    }

    fn build_content(&self, template: &ContentTemplate, degree: Degree, decision: &Decision) -> Result<Message, ActionError> {
        let body = match template {
            ContentTemplate::Perceived => {
                if let Some(m) = decision.percept.message() {
                    return Ok(m.content.clone());
                }
                let record = decision.percept.value_record().ok_or_else(|| ActionError::NoValue {
                    rule: decision.rule_id.clone(),
                })?;
                return Ok(Message {
                    body: MessageBody::Value(record),
                    degree: decision.percept.degree,
                });
            }
            ContentTemplate::Assertion(s) => MessageBody::Assertion(s.clone()),
            ContentTemplate::Question(s) => MessageBody::Question(s.clone()),
            ContentTemplate::Response(s) => MessageBody::Response(s.clone()),
            ContentTemplate::Value(v) => MessageBody::Value(v.clone()),
        };
        Ok(Message { body, degree })
    }

    fn apply_update(&mut self, update: &KnowledgeUpdate, decision: &Decision) -> Result<String, ActionError> {
        match update {
            KnowledgeUpdate::StorePerceived => {
                let record = decision.percept.value_record().ok_or_else(|| ActionError::NoValue {
                    rule: decision.rule_id.clone(),
                })?;
                let term = self
                    .knowledge
                    .inference()
                    .and_then(|spec| spec.variables.iter().find(|v| v.name() == record.variable))
                    .or_else(|| self.knowledge.variable(&record.variable))
                    .and_then(|lv| lv.canonical(&record.term).map(str::to_string))
                    .unwrap_or(record.term);
                let key = degree_key(&record.variable, &term);
                self.update_knowledge(KnowledgeMutation::SetDomainValue {
                    key: key.clone(),
                    value: DomainValue::Fuzzy(Degree::saturating(record.value)),
                });
                Ok(format!("store {key}"))
            }
            KnowledgeUpdate::BefriendSender => {
                let act = decision.percept.message().ok_or_else(|| ActionError::NoSender {
                    rule: decision.rule_id.clone(),
                })?;
                let agent = act.source.agent.clone();
                let degree = self
                    .knowledge
                    .affinity(&agent)
                    .map_or(decision.percept.degree, |d| d.max(decision.percept.degree));
                self.update_knowledge(KnowledgeMutation::SetAffinity {
                    agent: agent.clone(),
                    degree,
                });
                Ok(format!("affinity {agent}"))
            }
            KnowledgeUpdate::SetDegree { key, degree } => {
                self.update_knowledge(KnowledgeMutation::SetDomainValue {
                    key: key.clone(),
                    value: DomainValue::Fuzzy(*degree),
                });
                Ok(format!("set {key}"))
            }
        }
    }

    /// Runs the agent's rule base once it holds at least one degree for
    /// every input variable.
    fn resolve_inference(&self, variable: String, outcome: &mut ActOutcome) {
        let Some(spec) = self.knowledge.inference() else {
            return;
        };
        let inputs = spec.rule_base.input_variables();
        let degrees = self.knowledge.fuzzy_inputs(&inputs);
        if let Some(missing) = inputs.iter().find(|v| !degrees.contains_key(**v)) {
            outcome.notes.push(format!("waiting for {missing}"));
            return;
        }
        match infer_from_degrees(&spec.variables, &spec.rule_base, &degrees, spec.t_norm) {
            Ok(inference) => {
                outcome.effects.push(EnvEffect {
                    variable: variable.clone(),
                    value: inference.value,
                });
                outcome.inferences.push(InferenceRecord {
                    variable,
                    value: inference.value,
                    firings: inference.firings,
                });
            }
            Err(FuzzyError::EmptyAggregate) => outcome.notes.push("no rule fired".to_string()),
            Err(e) => outcome.notes.push(e.to_string()),
        }
    }
}

fn agent_receiver(id: &AgentId, directory: &dyn Directory) -> Result<Receiver, ActionError> {
    let degree = directory
        .agent_degree(id)
        .ok_or_else(|| ProtocolError::UnknownAgent(id.clone()))?;
    Ok(Receiver::Agent(Party {
        agent: id.clone(),
        degree,
    }))
}

fn community_receiver(id: &CommunityId, directory: &dyn Directory) -> Result<Receiver, ActionError> {
    directory
        .community_members(id)
        .ok_or_else(|| ProtocolError::UnknownCommunity(id.clone()))?;
    Ok(Receiver::Community {
        community: id.clone(),
        degree: Degree::ONE,
    })
}
