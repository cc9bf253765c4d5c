pub mod agent;
pub mod config;
pub mod fuzzy;
mod ids;
pub mod organization;
pub mod protocol;
pub mod runtime;
pub mod watering;

pub use ids::{AgentId, CommunityId, CorrelationId, RoleId};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/fuzzy_sets.md")]
mod book_fuzzy_sets {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/inference.md")]
mod book_inference {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/agents.md")]
mod book_agents {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/protocol.md")]
mod book_protocol {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/organization.md")]
mod book_organization {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/runtime.md")]
mod book_runtime {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/watering.md")]
mod book_watering {}
