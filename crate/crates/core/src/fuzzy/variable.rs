use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Degree, DiscreteFuzzySet, FuzzyError, MembershipFunction, Universe};

/// A labelled fuzzy subset of a linguistic variable's universe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzySubset {
    pub label: String,
    #[serde(flatten)]
    pub mf: MembershipFunction,
}

impl FuzzySubset {
    pub fn new(label: impl Into<String>, mf: MembershipFunction) -> Self {
        Self { label: label.into(), mf }
    }
}

/// Term degrees keyed by label.
pub type TermDegrees = BTreeMap<String, Degree>;

/// The triple (name, universe, terms). Terms keep their declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVariable", into = "RawVariable")]
pub struct LinguisticVariable {
    name: String,
    universe: Universe,
    terms: Vec<FuzzySubset>,
    aliases: BTreeMap<String, String>,
}

impl LinguisticVariable {
    pub fn new(name: impl Into<String>, universe: Universe, terms: Vec<FuzzySubset>) -> Result<Self, FuzzyError> {
        Self::with_aliases(name, universe, terms, BTreeMap::new())
    }

    /// `aliases` maps alternative labels onto canonical term labels.
    pub fn with_aliases(
        name: impl Into<String>,
        universe: Universe,
        terms: Vec<FuzzySubset>,
        aliases: BTreeMap<String, String>,
    ) -> Result<Self, FuzzyError> {
        let name = name.into();
        if terms.is_empty() {
            return Err(FuzzyError::EmptyVariable(name));
        }
        for (i, t) in terms.iter().enumerate() {
            if terms[..i].iter().any(|o| o.label == t.label) {
                return Err(FuzzyError::DuplicateTerm {
                    variable: name,
                    label: t.label.clone(),
                });
            }
        }
        for (alias, target) in &aliases {
            if terms.iter().any(|t| &t.label == alias) {
                return Err(FuzzyError::DuplicateTerm {
                    variable: name,
                    label: alias.clone(),
                });
            }
            if !terms.iter().any(|t| &t.label == target) {
                return Err(FuzzyError::UnknownTerm {
                    variable: name,
                    label: target.clone(),
                });
            }
        }
        Ok(Self {
            name,
            universe,
            terms,
            aliases,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn terms(&self) -> &[FuzzySubset] {
        &self.terms
    }

    pub fn aliases(&self) -> &BTreeMap<String, String> {
        &self.aliases
    }

    /// Resolves a label or alias to the canonical label.
    pub fn canonical<'a>(&'a self, label: &'a str) -> Option<&'a str> {
        if self.terms.iter().any(|t| t.label == label) {
            Some(label)
        } else {
            self.aliases.get(label).map(String::as_str)
        }
    }

    pub fn term(&self, label: &str) -> Result<&FuzzySubset, FuzzyError> {
        let canonical = self.canonical(label).ok_or_else(|| FuzzyError::UnknownTerm {
            variable: self.name.clone(),
            label: label.to_string(),
        })?;
        Ok(self.terms.iter().find(|t| t.label == canonical).expect("canonical label exists"))
    }

    /// Membership of `x` in term `label`; `x` is clamped to the universe.
    pub fn degree(&self, label: &str, x: f64) -> Result<Degree, FuzzyError> {
        Ok(self.term(label)?.mf.eval(self.universe.clamp(x)))
    }

    pub fn discretize(&self, label: &str) -> Result<DiscreteFuzzySet, FuzzyError> {
        Ok(DiscreteFuzzySet::discretize(&self.universe, &self.term(label)?.mf))
    }
}

/// One degree per term of `lv` for the crisp value `x` (clamped to the
/// universe).
pub fn fuzzify(lv: &LinguisticVariable, x: f64) -> TermDegrees {
    let x = lv.universe.clamp(x);
    lv.terms.iter().map(|t| (t.label.clone(), t.mf.eval(x))).collect()
}

#[derive(Serialize, Deserialize)]
struct RawVariable {
    name: String,
    universe: Universe,
    terms: Vec<FuzzySubset>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    aliases: BTreeMap<String, String>,
}

impl TryFrom<RawVariable> for LinguisticVariable {
    type Error = FuzzyError;

    fn try_from(r: RawVariable) -> Result<Self, Self::Error> {
        LinguisticVariable::with_aliases(r.name, r.universe, r.terms, r.aliases)
    }
}

impl From<LinguisticVariable> for RawVariable {
    fn from(v: LinguisticVariable) -> Self {
        RawVariable {
            name: v.name,
            universe: v.universe,
            terms: v.terms,
            aliases: v.aliases,
        }
    }
}
