//! JSON system configuration: vocabulary, Mamdani rule base, message
//! types, organization, agents with their decision rules, and the
//! calibration points the membership shapes must reproduce.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{
    ActionKind, DecisionRule, EffectValue, FuzzyAgent, InferenceSpec, KnowledgeBase, KnowledgeMutation, Target, Watch,
    DEFAULT_HISTORY_CAP,
};
use crate::fuzzy::{Degree, FuzzyError, LinguisticVariable, RuleBase, TNorm};
use crate::ids::{AgentId, CommunityId};
use crate::organization::{Organization, OrganizationError, OrganizationParams, Role};
use crate::protocol::{MessageType, DEFAULT_TIMEOUT_TICKS};
use crate::runtime::{RuntimeError, System};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityConfig {
    pub id: CommunityId,
    pub main_role: crate::ids::RoleId,
    #[serde(default)]
    pub objective: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub timeout_ticks: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            timeout_ticks: DEFAULT_TIMEOUT_TICKS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub id: AgentId,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub membership: Degree,
    /// Linguistic variable this agent represents and fuzzifies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variable: Option<String>,
    pub community: CommunityId,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub also_in: Vec<CommunityId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub watch: Vec<Watch>,
    /// Crisp environment variables perceived without fuzzification.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub observes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rules: Vec<DecisionRule>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub affinities: BTreeMap<AgentId, Degree>,
    /// Gives the agent the system rule base.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub inference: bool,
}

fn one() -> Degree {
    Degree::ONE
}

fn is_one(d: &Degree) -> bool {
    *d == Degree::ONE
}

/// A published membership value the configured shapes must reproduce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub variable: String,
    pub term: String,
    pub x: f64,
    pub expected: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationResult {
    pub point: CalibrationPoint,
    pub actual: f64,
}

impl CalibrationResult {
    pub fn holds(&self) -> bool {
        (self.actual - self.point.expected).abs() <= self.point.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    #[serde(default)]
    pub t_norm: TNorm,
    pub variables: Vec<LinguisticVariable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule_base: Option<RuleBase>,
    #[serde(default)]
    pub message_types: Vec<MessageType>,
    #[serde(default)]
    pub roles: Vec<Role>,
    #[serde(default)]
    pub communities: Vec<CommunityConfig>,
    #[serde(default)]
    pub organization: OrganizationParams,
    #[serde(default)]
    pub protocol: ProtocolConfig,
    #[serde(default)]
    pub agents: Vec<AgentConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub calibration: Vec<CalibrationPoint>,
    #[serde(default = "default_history_cap")]
    pub history_cap: usize,
}

fn default_history_cap() -> usize {
    DEFAULT_HISTORY_CAP
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config")]
    Io(#[from] std::io::Error),
    #[error("cannot parse config")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error(transparent)]
    Organization(#[from] OrganizationError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error("{0}")]
    Invalid(String),
    #[error("calibration: {variable}.{term}({x}) = {actual}, expected {expected} ± {tolerance}")]
    Calibration {
        variable: String,
        term: String,
        x: f64,
        actual: f64,
        expected: f64,
        tolerance: f64,
    },
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

impl SystemConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ConfigError> {
        let mut text = self.to_json();
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn variable(&self, name: &str) -> Option<&LinguisticVariable> {
        self.variables.iter().find(|v| v.name() == name)
    }

    /// Structural checks followed by the calibration points.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_structure()?;
        for r in self.calibration()? {
            if !r.holds() {
                let p = r.point;
                return Err(ConfigError::Calibration {
                    variable: p.variable,
                    term: p.term,
                    x: p.x,
                    actual: r.actual,
                    expected: p.expected,
                    tolerance: p.tolerance,
                });
            }
        }
        Ok(())
    }

    /// Evaluates every calibration point against the configured shapes.
    pub fn calibration(&self) -> Result<Vec<CalibrationResult>, ConfigError> {
        self.calibration
            .iter()
            .map(|p| {
                let lv = self
                    .variable(&p.variable)
                    .ok_or_else(|| FuzzyError::UnknownVariable(p.variable.clone()))?;
                Ok(CalibrationResult {
                    point: p.clone(),
                    actual: lv.degree(&p.term, p.x)?.value(),
                })
            })
            .collect()
    }

    pub fn validate_structure(&self) -> Result<(), ConfigError> {
        let mut names = BTreeSet::new();
        for v in &self.variables {
            if v.name().contains('.') {
                return invalid(format!("variable name `{}` must not contain '.'", v.name()));
            }
            if !names.insert(v.name()) {
                return invalid(format!("duplicate variable `{}`", v.name()));
            }
        }
        if let Some(rb) = &self.rule_base {
            rb.validate(&self.variables)?;
        }
        let mut codes = BTreeSet::new();
        for t in &self.message_types {
            if !codes.insert(t.code) {
                return invalid(format!("duplicate message type {}", t.code));
            }
        }
        if self.history_cap == 0 {
            return invalid("history_cap must be at least 1");
        }
        self.organization.check()?;
        let mut org = Organization::new(self.organization)?;
        for r in &self.roles {
            org.add_role(r.clone())?;
        }
        for c in &self.communities {
            org.add_community(c.id.clone(), c.main_role.clone(), c.objective.clone())?;
        }
        let agents: BTreeSet<&AgentId> = self.agents.iter().map(|a| &a.id).collect();
        if agents.len() != self.agents.len() {
            return invalid("duplicate agent id");
        }
        for a in &self.agents {
            self.validate_agent(a, &agents, &codes)?;
            org.register_agent(a.id.clone(), &a.community)?;
            for c in &a.also_in {
                org.join(&a.id, c)?;
            }
        }
        if !self.agents.is_empty() {
            org.check_invariants()?;
        }
        Ok(())
    }

    fn validate_agent(&self, a: &AgentConfig, agents: &BTreeSet<&AgentId>, codes: &BTreeSet<u16>) -> Result<(), ConfigError> {
        let ctx = |m: String| ConfigError::Invalid(format!("agent `{}`: {m}", a.id));
        let known_var = |name: &str| self.variable(name).is_some();
        let communities: BTreeSet<&CommunityId> = self.communities.iter().map(|c| &c.id).collect();
        if let Some(v) = &a.variable {
            if !known_var(v) {
                return Err(ctx(format!("unknown variable `{v}`")));
            }
        }
        for c in &a.also_in {
            if *c == a.community {
                return Err(ctx(format!("`{c}` is already the reference community")));
            }
        }
        for w in &a.watch {
            if a.variable.as_deref() != Some(w.variable.as_str()) {
                return Err(ctx(format!("watches `{}` but represents another variable", w.variable)));
            }
            let lv = self.variable(&w.variable).expect("checked above");
            lv.term(&w.term)?;
        }
        for o in &a.observes {
            if !known_var(o) {
                return Err(ctx(format!("observes unknown variable `{o}`")));
            }
        }
        if a.inference && self.rule_base.is_none() {
            return Err(ctx("inference requested but no rule_base".into()));
        }
        for peer in a.affinities.keys() {
            if !agents.contains(peer) {
                return Err(ctx(format!("affinity for unknown agent `{peer}`")));
            }
        }
        for rule in &a.rules {
            let rctx = |m: String| ctx(format!("rule `{}`: {m}", rule.id));
            if let Some(v) = &rule.on.variable {
                if !known_var(v) {
                    return Err(rctx(format!("pattern names unknown variable `{v}`")));
                }
            }
            if let Some(m) = rule.on.mtype {
                if !codes.contains(&m) {
                    return Err(rctx(format!("pattern names unregistered message type {m}")));
                }
            }
            for action in &rule.then {
                match &action.kind {
                    ActionKind::Send(t) => {
                        if !codes.contains(&t.mtype) {
                            return Err(rctx(format!("unregistered message type {}", t.mtype)));
                        }
                        match &t.to {
                            Target::Agent(id) if !agents.contains(id) => {
                                return Err(rctx(format!("sends to unknown agent `{id}`")));
                            }
                            Target::Community(c) if !communities.contains(c) => {
                                return Err(rctx(format!("sends to unknown community `{c}`")));
                            }
                            _ => {}
                        }
                    }
                    ActionKind::EnvEffect { variable, value } => {
                        if !known_var(variable) {
                            return Err(rctx(format!("effect on unknown variable `{variable}`")));
                        }
                        if matches!(value, EffectValue::Infer) {
                            let output = self.rule_base.as_ref().map(|rb| rb.output.as_str());
                            if !a.inference || output != Some(variable.as_str()) {
                                return Err(rctx(format!("cannot infer `{variable}` without the rule base for it")));
                            }
                        }
                    }
                    ActionKind::InternalUpdate(_) => {}
                }
            }
        }
        Ok(())
    }

    /// Builds a ready-to-run system. Validates first.
    pub fn build_system(&self) -> Result<System, ConfigError> {
        self.validate()?;
        let mut org = Organization::new(self.organization)?;
        for r in &self.roles {
            org.add_role(r.clone())?;
        }
        for c in &self.communities {
            org.add_community(c.id.clone(), c.main_role.clone(), c.objective.clone())?;
        }
        let mut system = System::new(org, self.message_types.clone()).with_timeout(self.protocol.timeout_ticks);
        for v in &self.variables {
            system.declare_variable(v.name(), None);
        }
        let spec = self.rule_base.as_ref().map(|rb| {
            Arc::new(InferenceSpec {
                variables: self.variables.clone(),
                rule_base: rb.clone(),
                t_norm: self.t_norm,
            })
        });
        for a in &self.agents {
            system.add_agent(self.build_agent(a, spec.as_ref()), &a.community, &a.also_in)?;
        }
        Ok(system)
    }

    fn build_agent(&self, a: &AgentConfig, spec: Option<&Arc<InferenceSpec>>) -> FuzzyAgent {
        let mut kb = KnowledgeBase::new(self.history_cap);
        if let Some(lv) = a.variable.as_deref().and_then(|v| self.variable(v)) {
            kb.learn_variable(lv.clone());
        }
        for w in &a.watch {
            kb.watch(w.variable.clone(), w.term.clone());
        }
        for o in &a.observes {
            kb.observe(o.clone());
        }
        if a.inference {
            if let Some(spec) = spec {
                kb.set_inference(Arc::clone(spec));
            }
        }
        for (peer, degree) in &a.affinities {
            kb.apply(KnowledgeMutation::SetAffinity {
                agent: peer.clone(),
                degree: *degree,
            });
        }
        let mut agent = FuzzyAgent::new(a.id.clone())
            .with_membership(a.membership)
            .with_knowledge(kb);
        for r in &a.rules {
            agent.add_rule(r.clone());
        }
        agent
    }
}
