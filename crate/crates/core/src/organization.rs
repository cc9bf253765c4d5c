//! Fuzzy roles and communities.
//!
//! Every agent has exactly one reference community, where it plays that
//! community's main role with a positive degree. Talking to an agent of
//! another community makes the speaker take part in that community's main
//! role: its degree becomes `max(old, min(act value, partner degree))`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fuzzy::{t_norm, Degree};
use crate::ids::{AgentId, CommunityId, RoleId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Role {
    pub id: RoleId,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Community {
    pub id: CommunityId,
    #[serde(default)]
    pub members: BTreeSet<AgentId>,
    pub main_role: RoleId,
    #[serde(default)]
    pub objective: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleAssignment {
    pub agent: AgentId,
    pub role: RoleId,
    pub degree: Degree,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrganizationParams {
    pub activation_threshold: Degree,
    /// Added to the sender's main-role degree for each positive-valued
    /// message inside its reference community.
    pub reinforcement: Degree,
    /// Per-tick multiplicative factor in (0, 1]; 1 disables decay.
    pub decay: f64,
    pub initial_main_degree: Degree,
}

impl Default for OrganizationParams {
    fn default() -> Self {
        Self {
            activation_threshold: Degree::saturating(0.5),
            reinforcement: Degree::saturating(0.05),
            decay: 0.95,
            initial_main_degree: Degree::ONE,
        }
    }
}

impl OrganizationParams {
    pub fn check(&self) -> Result<(), OrganizationError> {
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(OrganizationError::InvalidParams(format!("decay {} outside (0, 1]", self.decay)));
        }
        if self.initial_main_degree.is_zero() {
            return Err(OrganizationError::InvalidParams("initial main-role degree must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrganizationError {
    #[error("role `{0}` already registered")]
    DuplicateRole(RoleId),
    #[error("unknown role `{0}`")]
    UnknownRole(RoleId),
    #[error("community `{0}` already registered")]
    DuplicateCommunity(CommunityId),
    #[error("unknown community `{0}`")]
    UnknownCommunity(CommunityId),
    #[error("agent `{0}` already registered")]
    DuplicateAgent(AgentId),
    #[error("unknown agent `{0}`")]
    UnknownAgent(AgentId),
    #[error("invalid organization parameters: {0}")]
    InvalidParams(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// A change of one role degree.
#[derive(Debug, Clone, PartialEq)]
pub struct RoleChange {
    pub agent: AgentId,
    pub role: RoleId,
    pub old: Degree,
    pub new: Degree,
}

/// One row of the organization view: an agent's degree in a role, with its
/// reference community.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub agent: AgentId,
    pub role: RoleId,
    pub degree: Degree,
    pub community: CommunityId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrganizationSnapshot {
    pub params: OrganizationParams,
    pub roles: Vec<Role>,
    pub communities: Vec<Community>,
    pub reference: BTreeMap<AgentId, CommunityId>,
    pub assignments: Vec<RoleAssignment>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Organization {
    params: OrganizationParams,
    roles: BTreeMap<RoleId, Role>,
    communities: BTreeMap<CommunityId, Community>,
    reference: BTreeMap<AgentId, CommunityId>,
    assignments: BTreeMap<AgentId, BTreeMap<RoleId, Degree>>,
}

impl Organization {
    pub fn new(params: OrganizationParams) -> Result<Self, OrganizationError> {
        params.check()?;
        Ok(Self {
            params,
            ..Self::default()
        })
    }

    pub fn params(&self) -> &OrganizationParams {
        &self.params
    }

    pub fn add_role(&mut self, role: Role) -> Result<(), OrganizationError> {
        if self.roles.contains_key(&role.id) {
            return Err(OrganizationError::DuplicateRole(role.id));
        }
        self.roles.insert(role.id.clone(), role);
        Ok(())
    }

    pub fn add_community(
        &mut self,
        id: impl Into<CommunityId>,
        main_role: impl Into<RoleId>,
        objective: impl Into<String>,
    ) -> Result<(), OrganizationError> {
        let id = id.into();
        let main_role = main_role.into();
        if self.communities.contains_key(&id) {
            return Err(OrganizationError::DuplicateCommunity(id));
        }
        if !self.roles.contains_key(&main_role) {
            return Err(OrganizationError::UnknownRole(main_role));
        }
        self.communities.insert(
            id.clone(),
            Community {
                id,
                members: BTreeSet::new(),
                main_role,
                objective: objective.into(),
            },
        );
        Ok(())
    }

    pub fn roles(&self) -> impl Iterator<Item = &Role> {
        self.roles.values()
    }

    pub fn communities(&self) -> impl Iterator<Item = &Community> {
        self.communities.values()
    }

    pub fn community(&self, id: &CommunityId) -> Option<&Community> {
        self.communities.get(id)
    }

    pub fn agents(&self) -> impl Iterator<Item = &AgentId> {
        self.reference.keys()
    }

    pub fn is_registered(&self, agent: &AgentId) -> bool {
        self.reference.contains_key(agent)
    }

    /// Places `agent` in its reference community, playing the main role at
    /// the initial degree.
    pub fn register_agent(&mut self, agent: AgentId, community: &CommunityId) -> Result<(), OrganizationError> {
        if self.reference.contains_key(&agent) {
            return Err(OrganizationError::DuplicateAgent(agent));
        }
        let c = self
            .communities
            .get_mut(community)
            .ok_or_else(|| OrganizationError::UnknownCommunity(community.clone()))?;
        c.members.insert(agent.clone());
        let role = c.main_role.clone();
        self.assignments
            .entry(agent.clone())
            .or_default()
            .insert(role, self.params.initial_main_degree);
        self.reference.insert(agent, community.clone());
        Ok(())
    }

    /// Adds a further, non-reference membership.
    pub fn join(&mut self, agent: &AgentId, community: &CommunityId) -> Result<(), OrganizationError> {
        if !self.reference.contains_key(agent) {
            return Err(OrganizationError::UnknownAgent(agent.clone()));
        }
        let c = self
            .communities
            .get_mut(community)
            .ok_or_else(|| OrganizationError::UnknownCommunity(community.clone()))?;
        c.members.insert(agent.clone());
        Ok(())
    }

    pub fn reference_community(&self, agent: &AgentId) -> Option<&CommunityId> {
        self.reference.get(agent)
    }

    /// Main role of the agent's reference community.
    pub fn main_role(&self, agent: &AgentId) -> Option<&RoleId> {
        let c = self.reference.get(agent)?;
        self.communities.get(c).map(|c| &c.main_role)
    }

    pub fn members(&self, community: &CommunityId) -> Option<Vec<AgentId>> {
        self.communities.get(community).map(|c| c.members.iter().cloned().collect())
    }

    pub fn degree(&self, agent: &AgentId, role: &RoleId) -> Degree {
        self.assignments
            .get(agent)
            .and_then(|r| r.get(role))
            .copied()
            .unwrap_or(Degree::ZERO)
    }

    pub fn roles_of(&self, agent: &AgentId) -> BTreeMap<RoleId, Degree> {
        self.assignments.get(agent).cloned().unwrap_or_default()
    }

    /// Sets an agent's degree in a role directly.
    pub fn assign(&mut self, agent: &AgentId, role: &RoleId, degree: Degree) -> Result<(), OrganizationError> {
        if !self.reference.contains_key(agent) {
            return Err(OrganizationError::UnknownAgent(agent.clone()));
        }
        if !self.roles.contains_key(role) {
            return Err(OrganizationError::UnknownRole(role.clone()));
        }
        self.assignments.entry(agent.clone()).or_default().insert(role.clone(), degree);
        Ok(())
    }

    /// Roles with degree ≥ `threshold`; a zero threshold means "> 0".
    pub fn active_roles(&self, agent: &AgentId, threshold: Degree) -> BTreeSet<RoleId> {
        let Some(roles) = self.assignments.get(agent) else {
            return BTreeSet::new();
        };
        roles
            .iter()
            .filter(|(_, d)| if threshold.is_zero() { !d.is_zero() } else { **d >= threshold })
            .map(|(r, _)| r.clone())
            .collect()
    }

    /// True when `source` is not a member of `target`'s reference community.
    pub fn is_cross_community(&self, source: &AgentId, target: &AgentId) -> bool {
        self.reference
            .get(target)
            .and_then(|c| self.communities.get(c))
            .is_some_and(|c| !c.members.contains(source))
    }

    /// Role propagation for an interaction of value `v` from `source` to
    /// `target` across communities. Returns the change, if any.
    pub fn propagate_role(
        &mut self,
        source: &AgentId,
        target: &AgentId,
        v: Degree,
    ) -> Result<Option<RoleChange>, OrganizationError> {
        if !self.reference.contains_key(source) {
            return Err(OrganizationError::UnknownAgent(source.clone()));
        }
        let role = self
            .main_role(target)
            .ok_or_else(|| OrganizationError::UnknownAgent(target.clone()))?
            .clone();
        if !self.is_cross_community(source, target) {
            return Ok(None);
        }
        let old = self.degree(source, &role);
        let new = old.max(t_norm(v, self.degree(target, &role)));
        if new == old {
            return Ok(None);
        }
        self.assignments.entry(source.clone()).or_default().insert(role.clone(), new);
        Ok(Some(RoleChange {
            agent: source.clone(),
            role,
            old,
            new,
        }))
    }

    /// Raises the agent's main-role degree by the reinforcement step,
    /// capped at 1.
    pub fn reinforce(&mut self, agent: &AgentId) -> Option<RoleChange> {
        let role = self.main_role(agent)?.clone();
        let old = self.degree(agent, &role);
        let new = Degree::saturating(old.value() + self.params.reinforcement.value());
        if new == old {
            return None;
        }
        self.assignments.entry(agent.clone()).or_default().insert(role.clone(), new);
        Some(RoleChange {
            agent: agent.clone(),
            role,
            old,
            new,
        })
    }

    /// Multiplies every degree by `decay^dt`. Reference main roles never
    /// fall below the initial main-role degree.
    pub fn decay_roles(&mut self, dt: u64) -> Vec<RoleChange> {
        if self.params.decay == 1.0 || dt == 0 {
            return Vec::new();
        }
        let factor = self.params.decay.powf(dt as f64);
        let floor = self.params.initial_main_degree;
        let mut changes = Vec::new();
        for (agent, roles) in &mut self.assignments {
            let main = self
                .reference
                .get(agent)
                .and_then(|c| self.communities.get(c))
                .map(|c| &c.main_role);
            for (role, degree) in roles.iter_mut() {
                let mut new = Degree::saturating(degree.value() * factor);
                if Some(role) == main {
                    new = new.max(floor.min(*degree));
                }
                if new != *degree {
                    changes.push(RoleChange {
                        agent: agent.clone(),
                        role: role.clone(),
                        old: *degree,
                        new,
                    });
                    *degree = new;
                }
            }
        }
        changes
    }

    /// Every registered agent has one reference community, is a member of
    /// it and plays its main role with a positive degree; communities are
    /// non-empty and their main roles registered.
    pub fn check_invariants(&self) -> Result<(), OrganizationError> {
        let fail = |m: String| Err(OrganizationError::Invariant(m));
        for c in self.communities.values() {
            if c.members.is_empty() {
                return fail(format!("community `{}` has no members", c.id));
            }
            if !self.roles.contains_key(&c.main_role) {
                return fail(format!("community `{}` main role `{}` not registered", c.id, c.main_role));
            }
        }
        for (agent, community) in &self.reference {
            let Some(c) = self.communities.get(community) else {
                return fail(format!("agent `{agent}` has unknown reference community `{community}`"));
            };
            if !c.members.contains(agent) {
                return fail(format!("agent `{agent}` missing from reference community `{community}`"));
            }
            if self.degree(agent, &c.main_role).is_zero() {
                return fail(format!("agent `{agent}` does not play main role `{}`", c.main_role));
            }
        }
        Ok(())
    }

    pub fn snapshot(&self) -> OrganizationSnapshot {
        OrganizationSnapshot {
            params: self.params,
            roles: self.roles.values().cloned().collect(),
            communities: self.communities.values().cloned().collect(),
            reference: self.reference.clone(),
            assignments: self
                .assignments
                .iter()
                .flat_map(|(agent, roles)| {
                    roles.iter().map(move |(role, degree)| RoleAssignment {
                        agent: agent.clone(),
                        role: role.clone(),
                        degree: *degree,
                    })
                })
                .collect(),
        }
    }

    pub fn from_snapshot(s: OrganizationSnapshot) -> Result<Self, OrganizationError> {
        let mut org = Organization::new(s.params)?;
        for r in s.roles {
            org.add_role(r)?;
        }
        for c in s.communities {
            if org.communities.contains_key(&c.id) {
                return Err(OrganizationError::DuplicateCommunity(c.id));
            }
            if !org.roles.contains_key(&c.main_role) {
                return Err(OrganizationError::UnknownRole(c.main_role));
            }
            org.communities.insert(c.id.clone(), c);
        }
        for (agent, community) in s.reference {
            if !org.communities.get(&community).is_some_and(|c| c.members.contains(&agent)) {
                return Err(OrganizationError::UnknownCommunity(community));
            }
            org.reference.insert(agent, community);
        }
        for a in s.assignments {
            if org.assignments.get(&a.agent).is_some_and(|r| r.contains_key(&a.role)) {
                return Err(OrganizationError::Invariant(format!(
                    "duplicate assignment ({}, {})",
                    a.agent, a.role
                )));
            }
            org.assign(&a.agent, &a.role, a.degree)?;
        }
        Ok(org)
    }

    /// Flat (agent, role, degree, community) view, ordered by agent then role.
    pub fn rows(&self) -> Vec<SnapshotRow> {
        let mut rows = Vec::new();
        for (agent, roles) in &self.assignments {
            let community = self.reference[agent].clone();
            for (role, degree) in roles {
                rows.push(SnapshotRow {
                    agent: agent.clone(),
                    role: role.clone(),
                    degree: *degree,
                    community: community.clone(),
                });
            }
        }
        rows
    }
}
