//! Discrete fuzzy-set algebra and the Mamdani inference pipeline.
//!
//! Everything here is an immutable value or a pure function.

mod connectives;
mod degree;
mod inference;
mod membership;
mod relation;
mod set;
mod variable;

use thiserror::Error;

pub use connectives::{apply_modifier, implication, negate, t_conorm, t_norm, ImplicationMethod, Modifier, TNorm};
pub use degree::Degree;
pub use inference::{
    find_variable, infer_from_degrees, infer_mamdani, rule_strengths, Conclusion, FuzzyInputs, FuzzyRule, Inference,
    Premise, RuleBase, RuleFiring,
};
pub use membership::{eval_membership, MembershipFunction};
pub use relation::{build_relation, generalized_modus_ponens, FuzzyRelation};
pub use set::{aggregate, clip, defuzzify_centroid, DiscreteFuzzySet, Universe, DEFAULT_RESOLUTION};
pub use variable::{fuzzify, FuzzySubset, LinguisticVariable, TermDegrees};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuzzyError {
    #[error("degree {0} is outside [0, 1]")]
    InvalidDegree(f64),
    #[error("invalid universe `{name}`: {reason}")]
    InvalidUniverse { name: String, reason: String },
    #[error("invalid {shape} membership function: {reason}")]
    InvalidShape { shape: String, reason: String },
    #[error("linguistic variable `{0}` has no terms")]
    EmptyVariable(String),
    #[error("duplicate term `{label}` in variable `{variable}`")]
    DuplicateTerm { variable: String, label: String },
    #[error("unknown term `{label}` in variable `{variable}`")]
    UnknownTerm { variable: String, label: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("invalid rule `{rule}`: {reason}")]
    InvalidRule { rule: String, reason: String },
    #[error("universe mismatch: expected `{expected}`, found `{found}`")]
    UniverseMismatch { expected: String, found: String },
    #[error("expected {expected} samples, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("missing input `{0}`")]
    MissingInput(String),
    #[error("nothing to aggregate")]
    NothingToAggregate,
    #[error("empty aggregate: no rule fired")]
    EmptyAggregate,
}
