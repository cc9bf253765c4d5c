//! Deterministic tick-based host for a set of fuzzy agents.
//!
//! Each tick: apply injections, deliver messages sent on the previous
//! tick, step every agent against the state committed at the previous
//! barrier, then commit in registration order (role decay, trace of
//! percepts and firings, message dispatch with role propagation,
//! environment effects) and expire overdue obligations.

mod scenario;
mod trace;

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::agent::{EnvChange, EventPayload, FuzzyAgent, Percept, SystemView, TickReport};
use crate::fuzzy::Degree;
use crate::ids::{AgentId, CommunityId};
use crate::organization::{Organization, OrganizationError, RoleChange};
use crate::protocol::{value_of, CommunicationAct, Directory, MessageType, Transport, DEFAULT_TIMEOUT_TICKS};

pub use scenario::{Injection, Scenario};
pub use trace::{Trace, TraceError, TraceFormat, TraceKind, TraceRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stepping {
    #[default]
    Serial,
    Parallel,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuntimeError {
    #[error("unknown environment variable `{0}`")]
    UnknownVariable(String),
    #[error("cannot inject at tick {tick}: system is already at tick {now}")]
    PastTick { tick: u64, now: u64 },
    #[error("non-finite value for `{0}`")]
    NonFinite(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Organization(#[from] OrganizationError),
}

struct Registry<'a> {
    degrees: &'a BTreeMap<AgentId, Degree>,
    organization: &'a Organization,
    message_types: &'a [MessageType],
}

impl Directory for Registry<'_> {
    fn agent_degree(&self, id: &AgentId) -> Option<Degree> {
        self.degrees.get(id).copied()
    }

    fn community_members(&self, id: &CommunityId) -> Option<Vec<AgentId>> {
        self.organization.members(id)
    }

    fn message_type(&self, code: u16) -> Option<&MessageType> {
        self.message_types.iter().find(|t| t.code == code)
    }
}

#[derive(Debug, Clone)]
pub struct System {
    tick: u64,
    environment: BTreeMap<String, Option<f64>>,
    agents: Vec<FuzzyAgent>,
    degrees: BTreeMap<AgentId, Degree>,
    organization: Organization,
    message_types: Vec<MessageType>,
    transport: Transport,
    injections: BTreeMap<u64, Vec<(String, f64)>>,
    committed: Vec<EnvChange>,
    last_effects: BTreeMap<String, f64>,
    trace: Trace,
    stepping: Stepping,
    seed: u64,
}

impl System {
    pub fn new(organization: Organization, message_types: Vec<MessageType>) -> Self {
        Self {
            tick: 0,
            environment: BTreeMap::new(),
            agents: Vec::new(),
            degrees: BTreeMap::new(),
            organization,
            message_types,
            transport: Transport::new(DEFAULT_TIMEOUT_TICKS),
            injections: BTreeMap::new(),
            committed: Vec::new(),
            last_effects: BTreeMap::new(),
            trace: Trace::new(),
            stepping: Stepping::Serial,
            seed: 0,
        }
    }

    pub fn with_timeout(mut self, ticks: u64) -> Self {
        self.transport = Transport::new(ticks);
        self
    }

    pub fn set_stepping(&mut self, stepping: Stepping) {
        self.stepping = stepping;
    }

    /// Stored for reproducibility; the runtime itself draws no random numbers.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Declares an environment variable. Without an initial value it is
    /// unset until first injected.
    pub fn declare_variable(&mut self, name: impl Into<String>, initial: Option<f64>) {
        self.environment.insert(name.into(), initial);
    }

    /// Registers `agent` with its reference community and any further
    /// memberships.
    pub fn add_agent(
        &mut self,
        mut agent: FuzzyAgent,
        community: &CommunityId,
        also_in: &[CommunityId],
    ) -> Result<(), RuntimeError> {
        self.organization.register_agent(agent.id().clone(), community)?;
        for c in also_in {
            self.organization.join(agent.id(), c)?;
        }
        agent.set_community(community.clone());
        self.degrees.insert(agent.id().clone(), agent.membership());
        self.agents.push(agent);
        Ok(())
    }

    pub fn inject(&mut self, variable: &str, value: f64, tick: u64) -> Result<(), RuntimeError> {
        if !self.environment.contains_key(variable) {
            return Err(RuntimeError::UnknownVariable(variable.to_string()));
        }
        if !value.is_finite() {
            return Err(RuntimeError::NonFinite(variable.to_string()));
        }
        if tick < self.tick {
            return Err(RuntimeError::PastTick { tick, now: self.tick });
        }
        self.injections.entry(tick).or_default().push((variable.to_string(), value));
        Ok(())
    }

    /// The next tick to run.
    pub fn tick(&self) -> u64 {
        self.tick
    }

    /// Current value of a set environment variable.
    pub fn value(&self, variable: &str) -> Option<f64> {
        self.environment.get(variable).copied().flatten()
    }

    pub fn environment(&self) -> BTreeMap<String, f64> {
        self.environment
            .iter()
            .filter_map(|(k, v)| v.map(|v| (k.clone(), v)))
            .collect()
    }

    /// Last value written to `variable` by an agent's environment effect.
    pub fn last_effect(&self, variable: &str) -> Option<f64> {
        self.last_effects.get(variable).copied()
    }

    pub fn agents(&self) -> &[FuzzyAgent] {
        &self.agents
    }

    pub fn agent(&self, id: &str) -> Option<&FuzzyAgent> {
        self.agents.iter().find(|a| a.id().as_str() == id)
    }

    pub fn organization(&self) -> &Organization {
        &self.organization
    }

    pub fn transport(&self) -> &Transport {
        &self.transport
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }

    /// Schedules the scenario, runs ticks up to and including `max_ticks`
    /// and closes the run.
    pub fn run_scenario(&mut self, scenario: &Scenario) -> Result<(), RuntimeError> {
        scenario.validate().map_err(RuntimeError::InvalidScenario)?;
        for i in &scenario.schedule {
            self.inject(&i.variable, i.value, i.tick)?;
        }
        while self.tick <= scenario.max_ticks {
            self.step_tick();
        }
        self.finish();
        Ok(())
    }

    /// Records every message still in flight as undelivered.
    pub fn finish(&mut self) {
        let tick = self.tick.saturating_sub(1);
        for d in self.transport.drain_pending() {
            self.trace.push(
                tick,
                TraceKind::Error,
                d.receiver.as_str(),
                format!("undelivered {}", describe_message(d.id, &d.act)),
                Some(value_of(&d.act).value()),
            );
        }
    }

    pub fn step_tick(&mut self) {
        let tick = self.tick;
        self.trace.push(tick, TraceKind::Tick, "", "", None);

        let changes = self.apply_injections(tick);

        for d in self.transport.take_due(tick) {
            self.trace.push(
                tick,
                TraceKind::MessageDelivered,
                d.receiver.as_str(),
                describe_message(d.id, &d.act),
                Some(value_of(&d.act).value()),
            );
            if let Some(a) = self.agents.iter_mut().find(|a| *a.id() == d.receiver) {
                a.enqueue(d.act);
            }
        }

        for a in &mut self.agents {
            a.set_roles(self.organization.roles_of(a.id()));
        }
        let environment = self.environment();
        let registry = Registry {
            degrees: &self.degrees,
            organization: &self.organization,
            message_types: &self.message_types,
        };
        let view = SystemView {
            tick,
            environment: &environment,
            changes: &changes,
            directory: &registry,
        };
        let reports: Vec<TickReport> = match self.stepping {
            Stepping::Serial => self.agents.iter_mut().map(|a| a.step(&view)).collect(),
            Stepping::Parallel => self.agents.par_iter_mut().map(|a| a.step(&view)).collect(),
        };

        self.commit(tick, reports);

        for o in self.transport.expire(tick) {
            self.trace.push(
                tick,
                TraceKind::ObligationViolated,
                o.obligated.as_str(),
                format!("{} {} owed to {} since tick {}", o.correlation, o.required, o.requester, o.opened),
                None,
            );
        }
        if !self.agents.is_empty() {
            if let Err(e) = self.organization.check_invariants() {
                self.trace.push(tick, TraceKind::Error, "", e.to_string(), None);
            }
        }
        self.tick += 1;
    }

    /// Applies this tick's injections and merges them with the effects
    /// committed on the previous tick into one change per variable.
    fn apply_injections(&mut self, tick: u64) -> Vec<EnvChange> {
        let mut changes = std::mem::take(&mut self.committed);
        for (variable, value) in self.injections.remove(&tick).unwrap_or_default() {
            let old = self.value(&variable);
            self.trace
                .push(tick, TraceKind::Injection, "", format!("{variable}={value}"), None);
            if old == Some(value) {
                continue;
            }
            self.environment.insert(variable.clone(), Some(value));
            match changes.iter_mut().find(|c| c.variable == variable) {
                Some(c) => c.new = value,
                None => changes.push(EnvChange {
                    variable,
                    old,
                    new: value,
                }),
            }
        }
        changes.retain(|c| c.old != Some(c.new));
        changes
    }

    fn commit(&mut self, tick: u64, reports: Vec<TickReport>) {
        for c in self.organization.decay_roles(1) {
            self.trace_role(tick, &c);
        }
        let mut written: BTreeMap<String, AgentId> = BTreeMap::new();
        for report in reports {
            let agent = report.agent.as_str();
            for p in &report.percepts {
                self.trace
                    .push(tick, TraceKind::Percept, agent, describe_percept(p), Some(p.degree.value()));
            }
            for d in &report.decisions {
                self.trace.push(
                    tick,
                    TraceKind::RuleFired,
                    agent,
                    d.rule_id.clone(),
                    Some(d.strength.value()),
                );
            }
            for inf in &report.outcome.inferences {
                for f in inf.firings.iter().filter(|f| !f.strength.is_zero()) {
                    self.trace.push(
                        tick,
                        TraceKind::RuleFired,
                        agent,
                        format!("{} -> {}", f.rule_id, f.conclusion),
                        Some(f.strength.value()),
                    );
                }
            }
            for e in &report.outcome.errors {
                self.trace.push(tick, TraceKind::Error, agent, e.to_string(), None);
            }
            for act in report.outcome.outbox {
                self.dispatch(tick, act);
            }
            for effect in report.outcome.effects {
                if let Some(previous) = written.get(&effect.variable) {
                    self.trace.push(
                        tick,
                        TraceKind::EnvOverwrite,
                        agent,
                        format!("{} written by {previous} overwritten", effect.variable),
                        None,
                    );
                }
                self.trace.push(
                    tick,
                    TraceKind::EnvEffect,
                    agent,
                    format!("{}={}", effect.variable, effect.value),
                    None,
                );
                written.insert(effect.variable.clone(), report.agent.clone());
                self.last_effects.insert(effect.variable.clone(), effect.value);
                let old = self.value(&effect.variable);
                self.environment.insert(effect.variable.clone(), Some(effect.value));
                if old != Some(effect.value) {
                    match self.committed.iter_mut().find(|c| c.variable == effect.variable) {
                        Some(c) => c.new = effect.value,
                        None => self.committed.push(EnvChange {
                            variable: effect.variable,
                            old,
                            new: effect.value,
                        }),
                    }
                }
            }
        }
    }

    fn dispatch(&mut self, tick: u64, act: CommunicationAct) {
        let source = act.source.agent.clone();
        let registry = Registry {
            degrees: &self.degrees,
            organization: &self.organization,
            message_types: &self.message_types,
        };
        let report = self.transport.dispatch(act, &registry, tick);
        let value = value_of(&report.act);
        for e in &report.errors {
            self.trace.push(tick, TraceKind::Error, source.as_str(), e.to_string(), Some(value.value()));
        }
        if let Some(o) = &report.settled {
            self.trace.push(
                tick,
                TraceKind::ObligationSettled,
                source.as_str(),
                format!("{} {} to {}", o.correlation, o.required, o.requester),
                None,
            );
        }
        for id in &report.ids {
            self.trace.push(
                tick,
                TraceKind::MessageSent,
                source.as_str(),
                describe_message(*id, &report.act),
                Some(value.value()),
            );
        }
        if let Some(o) = &report.opened {
            self.trace.push(
                tick,
                TraceKind::ObligationOpened,
                o.obligated.as_str(),
                format!("{} {} owed to {} by tick {}", o.correlation, o.required, o.requester, o.deadline),
                None,
            );
        }
        if value.is_zero() || report.deliveries.is_empty() {
            return;
        }
        let mut reinforced = false;
        for receiver in &report.deliveries {
            if self.organization.is_cross_community(&source, receiver) {
                if let Ok(Some(c)) = self.organization.propagate_role(&source, receiver, value) {
                    self.trace_role(tick, &c);
                }
            } else if !reinforced {
                reinforced = true;
                if let Some(c) = self.organization.reinforce(&source) {
                    self.trace_role(tick, &c);
                }
            }
        }
    }

    fn trace_role(&mut self, tick: u64, c: &RoleChange) {
        self.trace.push(
            tick,
            TraceKind::RoleUpdate,
            c.agent.as_str(),
            format!("{} {}->{}", c.role, c.old, c.new),
            Some(c.new.value()),
        );
    }
}

fn describe_message(id: u64, act: &CommunicationAct) -> String {
    let mut s = format!(
        "m{id} {} {}->{} type={} {}",
        act.performative(),
        act.source.agent,
        act.receiver,
        act.mtype.code,
        act.content.body
    );
    if let Some(c) = act.correlation {
        s.push_str(&format!(" {c}"));
    }
    s
}

fn describe_percept(p: &Percept) -> String {
    let show = |v: Option<f64>| v.map_or_else(|| "?".to_string(), |v| v.to_string());
    match &p.event.payload {
        EventPayload::Message(act) => {
            format!("{} from {}: {}", act.performative(), act.source.agent, act.content.body)
        }
        EventPayload::Change(c) => {
            let mut s = format!("{} {}->{}", c.variable, show(c.old), c.new);
            if let (Some(term), Some(d)) = (&c.term, c.new_degree) {
                s.push_str(&format!(" {term}={d}"));
            }
            s
        }
        EventPayload::Timer => "timer".to_string(),
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

/// Builds the configured system and runs `scenario` on it.
pub fn run(
    scenario: &Scenario,
    config: &crate::config::SystemConfig,
    seed: u64,
    stepping: Stepping,
) -> Result<System, RunError> {
    let mut system = config.build_system()?;
    system.set_seed(seed);
    system.set_stepping(stepping);
    system.run_scenario(scenario)?;
    Ok(system)
}

#[cfg(test)]
mod tests;
