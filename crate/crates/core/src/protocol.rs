//! Speech-act communication between fuzzy agents.
//!
//! A [`CommunicationAct`] is the tuple (performative, source, receiver,
//! message type, content), each part carrying a degree. Its value is the
//! min of the four participant degrees. Addressed acts go to one agent;
//! `diffuse` goes to every other member of a community. An `ask` obliges
//! its receiver to `reply`; an `inform` flagged `ack_required` obliges a
//! `confirm`.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::FuzzyAgent;
use crate::fuzzy::{t_norm, Degree, TNorm};
use crate::ids::{AgentId, CommunityId, CorrelationId};

pub const DEFAULT_TIMEOUT_TICKS: u64 = 10;

/// Message type code announcing "transmission of a value".
pub const VALUE_TRANSMISSION: u16 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Performative {
    Inform,
    Diffuse,
    Ask,
    Reply,
    Confirm,
}

impl Performative {
    pub const ALL: [Performative; 5] = [
        Performative::Inform,
        Performative::Diffuse,
        Performative::Ask,
        Performative::Reply,
        Performative::Confirm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Performative::Inform => "inform",
            Performative::Diffuse => "diffuse",
            Performative::Ask => "ask",
            Performative::Reply => "reply",
            Performative::Confirm => "confirm",
        }
    }

    pub fn is_response(self) -> bool {
        matches!(self, Performative::Reply | Performative::Confirm)
    }
}

impl fmt::Display for Performative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeechAct {
    pub performative: Performative,
    pub degree: Degree,
}

/// Entry of the system's message type table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageType {
    pub code: u16,
    pub meaning: String,
    #[serde(default = "one")]
    pub degree: Degree,
}

fn one() -> Degree {
    Degree::ONE
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeTag {
    pub code: u16,
    pub degree: Degree,
}

/// A fuzzy value transmitted between agents: "variable is term" to `value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueRecord {
    pub variable: String,
    pub term: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MessageBody {
    Assertion(String),
    Question(String),
    Response(String),
    Value(ValueRecord),
}

impl fmt::Display for MessageBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MessageBody::Assertion(s) => write!(f, "assertion({s})"),
            MessageBody::Question(s) => write!(f, "question({s})"),
            MessageBody::Response(s) => write!(f, "response({s})"),
            MessageBody::Value(v) => write!(f, "value({}.{}={})", v.variable, v.term, v.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub body: MessageBody,
    pub degree: Degree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Party {
    pub agent: AgentId,
    pub degree: Degree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Receiver {
    Agent(Party),
    Community { community: CommunityId, degree: Degree },
}

impl Receiver {
    pub fn degree(&self) -> Degree {
        match self {
            Receiver::Agent(p) => p.degree,
            Receiver::Community { degree, .. } => *degree,
        }
    }
}

impl fmt::Display for Receiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Receiver::Agent(p) => write!(f, "{}", p.agent),
            Receiver::Community { community, .. } => write!(f, "community:{community}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunicationAct {
    pub act: SpeechAct,
    pub source: Party,
    pub receiver: Receiver,
    pub mtype: TypeTag,
    pub content: Message,
    #[serde(default)]
    pub correlation: Option<CorrelationId>,
    #[serde(default)]
    pub ack_required: bool,
    pub tick: u64,
}

impl CommunicationAct {
    pub fn performative(&self) -> Performative {
        self.act.performative
    }

    /// Diffuse must target a community; the other four a single agent.
    pub fn check_shape(&self) -> Result<(), ProtocolError> {
        match (self.performative(), &self.receiver) {
            (Performative::Diffuse, Receiver::Community { .. }) => Ok(()),
            (Performative::Diffuse, Receiver::Agent(_)) => {
                Err(ProtocolError::MalformedAct("diffuse needs a community target".into()))
            }
            (p, Receiver::Community { .. }) => Err(ProtocolError::MalformedAct(format!("{p} needs a single receiver"))),
            _ => Ok(()),
        }
    }
}

/// Fuzzy value of a communication act: min over source, receiver,
/// message-type and content degrees.
pub fn value_of(act: &CommunicationAct) -> Degree {
    TNorm::Min.fold([act.source.degree, act.receiver.degree(), act.mtype.degree, act.content.degree])
}

/// Interest a receiver takes in an act: the act's value, limited by the
/// receiver's affinity for the source (1 when unrecorded).
pub fn evaluate_interest(receiver: &FuzzyAgent, act: &CommunicationAct) -> Degree {
    let affinity = receiver.knowledge().affinity(&act.source.agent).unwrap_or(Degree::ONE);
    t_norm(value_of(act), affinity)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CooperationCategory {
    Communication,
    Coordination,
    CoProduction,
    CoMemory,
    ControlProcess,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooperativeAct {
    pub category: CooperationCategory,
    /// Carried as metadata; it does not affect valuation.
    pub goal: String,
    pub payload: CommunicationAct,
}

/// A directed fuzzy interaction between two distinct agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interaction {
    source: AgentId,
    destination: AgentId,
    cooperative_act: CooperativeAct,
}

impl Interaction {
    pub fn new(destination: AgentId, cooperative_act: CooperativeAct) -> Result<Self, ProtocolError> {
        let source = cooperative_act.payload.source.agent.clone();
        if source == destination {
            return Err(ProtocolError::MalformedAct(format!("{source} cannot interact with itself")));
        }
        Ok(Self {
            source,
            destination,
            cooperative_act,
        })
    }

    pub fn source(&self) -> &AgentId {
        &self.source
    }

    pub fn destination(&self) -> &AgentId {
        &self.destination
    }

    pub fn cooperative_act(&self) -> &CooperativeAct {
        &self.cooperative_act
    }

    pub fn value(&self) -> Degree {
        value_of(&self.cooperative_act.payload)
    }
}

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
pub enum ProtocolError {
    #[error("unknown agent `{0}`")]
    UnknownAgent(AgentId),
    #[error("unknown community `{0}`")]
    UnknownCommunity(CommunityId),
    #[error("unregistered message type {0}")]
    UnregisteredMessageType(u16),
    #[error("malformed act: {0}")]
    MalformedAct(String),
    #[error("unsolicited {performative} (correlation {correlation:?})")]
    UnsolicitedResponse {
        performative: Performative,
        correlation: Option<CorrelationId>,
    },
    #[error("correlation {0} already has an open obligation")]
    DuplicateCorrelation(CorrelationId),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obligation {
    pub correlation: CorrelationId,
    pub obligated: AgentId,
    pub requester: AgentId,
    pub required: Performative,
    pub opened: u64,
    pub deadline: u64,
}

/// Open obligations keyed by correlation id.
#[derive(Debug, Clone, Default)]
pub struct ObligationTable {
    open: BTreeMap<CorrelationId, Obligation>,
    timeout: u64,
}

impl ObligationTable {
    pub fn new(timeout: u64) -> Self {
        Self {
            open: BTreeMap::new(),
            timeout,
        }
    }

    pub fn timeout(&self) -> u64 {
        self.timeout
    }

    pub fn open_count(&self) -> usize {
        self.open.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Obligation> {
        self.open.values()
    }

    /// Opens the obligation a dispatched act creates, if any. `ask` always
    /// requires a reply; `inform` requires a confirm only when
    /// `ack_required`.
    pub fn open_obligation(&mut self, act: &CommunicationAct, tick: u64) -> Result<Option<Obligation>, ProtocolError> {
        let required = match act.performative() {
            Performative::Ask => Performative::Reply,
            Performative::Inform if act.ack_required => Performative::Confirm,
            _ => return Ok(None),
        };
        let Receiver::Agent(receiver) = &act.receiver else {
            return Err(ProtocolError::MalformedAct("obligations need a single receiver".into()));
        };
        let correlation = act
            .correlation
            .ok_or_else(|| ProtocolError::MalformedAct(format!("{} without correlation id", act.performative())))?;
        if self.open.contains_key(&correlation) {
            return Err(ProtocolError::DuplicateCorrelation(correlation));
        }
        let obligation = Obligation {
            correlation,
            obligated: receiver.agent.clone(),
            requester: act.source.agent.clone(),
            required,
            opened: tick,
            deadline: tick + self.timeout,
        };
        self.open.insert(correlation, obligation.clone());
        Ok(Some(obligation))
    }

    /// Closes the obligation answered by a reply or confirm.
    pub fn settle_obligation(&mut self, act: &CommunicationAct) -> Result<Obligation, ProtocolError> {
        let unsolicited = || ProtocolError::UnsolicitedResponse {
            performative: act.performative(),
            correlation: act.correlation,
        };
        let correlation = act.correlation.ok_or_else(unsolicited)?;
        let matches = self.open.get(&correlation).is_some_and(|o| {
            o.required == act.performative()
                && o.obligated == act.source.agent
                && matches!(&act.receiver, Receiver::Agent(p) if p.agent == o.requester)
        });
        if !matches {
            return Err(unsolicited());
        }
        Ok(self.open.remove(&correlation).expect("checked above"))
    }

    /// Closes as violated every obligation whose deadline has been reached.
    pub fn expire(&mut self, tick: u64) -> Vec<Obligation> {
        let due: Vec<CorrelationId> = self.open.values().filter(|o| tick >= o.deadline).map(|o| o.correlation).collect();
        due.iter().filter_map(|c| self.open.remove(c)).collect()
    }
}

/// Read-only registry used to resolve receivers.
pub trait Directory {
    fn agent_degree(&self, id: &AgentId) -> Option<Degree>;
    /// Members in ascending id order, or `None` for an unknown community.
    fn community_members(&self, id: &CommunityId) -> Option<Vec<AgentId>>;
    fn message_type(&self, code: u16) -> Option<&MessageType>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct Delivery {
    /// Unique per queued copy; links the send to its delivery.
    pub id: u64,
    pub deliver_at: u64,
    pub receiver: AgentId,
    pub act: CommunicationAct,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeliveryReport {
    /// The act as dispatched, with its correlation id assigned.
    pub act: CommunicationAct,
    pub deliveries: Vec<AgentId>,
    /// Delivery id of each receiver's copy, parallel to `deliveries`.
    pub ids: Vec<u64>,
    pub errors: Vec<ProtocolError>,
    pub opened: Option<Obligation>,
    pub settled: Option<Obligation>,
}

impl DeliveryReport {
    fn failed(act: CommunicationAct, error: ProtocolError) -> Self {
        Self {
            act,
            deliveries: Vec::new(),
            ids: Vec::new(),
            errors: vec![error],
            opened: None,
            settled: None,
        }
    }
}

/// Message transport with one-tick latency, plus the obligation table.
#[derive(Debug, Clone)]
pub struct Transport {
    pending: VecDeque<Delivery>,
    obligations: ObligationTable,
    next_correlation: u64,
    next_delivery: u64,
}

impl Default for Transport {
    fn default() -> Self {
        Self::new(DEFAULT_TIMEOUT_TICKS)
    }
}

impl Transport {
    pub fn new(timeout: u64) -> Self {
        Self {
            pending: VecDeque::new(),
            obligations: ObligationTable::new(timeout),
            next_correlation: 1,
            next_delivery: 0,
        }
    }

    pub fn obligations(&self) -> &ObligationTable {
        &self.obligations
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    pub fn fresh_correlation(&mut self) -> CorrelationId {
        let id = CorrelationId(self.next_correlation);
        self.next_correlation += 1;
        id
    }

    /// Validates `act`, settles or opens obligations, and queues one
    /// delivery per receiver for `tick + 1`.
    pub fn dispatch(&mut self, mut act: CommunicationAct, directory: &dyn Directory, tick: u64) -> DeliveryReport {
        if directory.agent_degree(&act.source.agent).is_none() {
            let source = act.source.agent.clone();
            return DeliveryReport::failed(act, ProtocolError::UnknownAgent(source));
        }
        if let Err(e) = act.check_shape() {
            return DeliveryReport::failed(act, e);
        }
        if directory.message_type(act.mtype.code).is_none() {
            let code = act.mtype.code;
            return DeliveryReport::failed(act, ProtocolError::UnregisteredMessageType(code));
        }
        let receivers = match &act.receiver {
            Receiver::Agent(p) => {
                if directory.agent_degree(&p.agent).is_none() {
                    let agent = p.agent.clone();
                    return DeliveryReport::failed(act, ProtocolError::UnknownAgent(agent));
                }
                vec![p.agent.clone()]
            }
            Receiver::Community { community, .. } => match directory.community_members(community) {
                Some(members) => members.into_iter().filter(|m| *m != act.source.agent).collect(),
                None => {
                    let community = community.clone();
                    return DeliveryReport::failed(act, ProtocolError::UnknownCommunity(community));
                }
            },
        };
        let mut settled = None;
        if act.performative().is_response() {
            match self.obligations.settle_obligation(&act) {
                Ok(o) => settled = Some(o),
                Err(e) => return DeliveryReport::failed(act, e),
            }
        }
        let needs_correlation =
            act.performative() == Performative::Ask || (act.performative() == Performative::Inform && act.ack_required);
        if needs_correlation && act.correlation.is_none() {
            act.correlation = Some(self.fresh_correlation());
        }
        let opened = match self.obligations.open_obligation(&act, tick) {
            Ok(o) => o,
            Err(e) => return DeliveryReport::failed(act, e),
        };
        act.tick = tick;
        let mut ids = Vec::with_capacity(receivers.len());
        for r in &receivers {
            let id = self.next_delivery;
            self.next_delivery += 1;
            ids.push(id);
            self.pending.push_back(Delivery {
                id,
                deliver_at: tick + 1,
                receiver: r.clone(),
                act: act.clone(),
            });
        }
        DeliveryReport {
            act,
            deliveries: receivers,
            ids,
            errors: Vec::new(),
            opened,
            settled,
        }
    }

    /// Removes and returns deliveries due at or before `tick`, in dispatch
    /// order.
    pub fn take_due(&mut self, tick: u64) -> Vec<Delivery> {
        let mut due = Vec::new();
        let mut keep = VecDeque::with_capacity(self.pending.len());
        for d in self.pending.drain(..) {
            if d.deliver_at <= tick {
                due.push(d);
            } else {
                keep.push_back(d);
            }
        }
        self.pending = keep;
        due
    }

    pub fn expire(&mut self, tick: u64) -> Vec<Obligation> {
        self.obligations.expire(tick)
    }

    /// Removes every queued delivery regardless of its due tick.
    pub fn drain_pending(&mut self) -> Vec<Delivery> {
        self.pending.drain(..).collect()
    }
}
