//! Mamdani inference: fuzzify, fire, clip, aggregate, defuzzify.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    aggregate, apply_modifier, clip, defuzzify_centroid, fuzzify, DiscreteFuzzySet, FuzzyError, LinguisticVariable,
    Degree, Modifier, TNorm, TermDegrees,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Premise {
    pub variable: String,
    pub term: String,
    #[serde(default, skip_serializing_if = "Modifier::is_none")]
    pub modifier: Modifier,
}

impl Premise {
    pub fn new(variable: impl Into<String>, term: impl Into<String>) -> Self {
        Self {
            variable: variable.into(),
            term: term.into(),
            modifier: Modifier::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conclusion {
    pub variable: String,
    pub term: String,
}

/// `IF premise AND premise ... THEN conclusion`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyRule {
    pub id: String,
    #[serde(rename = "if")]
    pub premises: Vec<Premise>,
    #[serde(rename = "then")]
    pub conclusion: Conclusion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleBase {
    pub output: String,
    pub rules: Vec<FuzzyRule>,
}

impl RuleBase {
    /// Checks that every premise and conclusion names a known variable/term
    /// and that all conclusions target the output variable.
    pub fn validate(&self, variables: &[LinguisticVariable]) -> Result<(), FuzzyError> {
        let output = find_variable(variables, &self.output)?;
        for rule in &self.rules {
            if rule.premises.is_empty() {
                return Err(FuzzyError::InvalidRule {
                    rule: rule.id.clone(),
                    reason: "no premises".into(),
                });
            }
            for p in &rule.premises {
                find_variable(variables, &p.variable)?.term(&p.term)?;
            }
            if rule.conclusion.variable != self.output {
                return Err(FuzzyError::InvalidRule {
                    rule: rule.id.clone(),
                    reason: format!("concludes on `{}`, expected `{}`", rule.conclusion.variable, self.output),
                });
            }
            output.term(&rule.conclusion.term)?;
        }
        Ok(())
    }

    /// Input variables referenced by premises, in first-use order.
    pub fn input_variables(&self) -> Vec<&str> {
        let mut seen: Vec<&str> = Vec::new();
        for p in self.rules.iter().flat_map(|r| &r.premises) {
            if !seen.contains(&p.variable.as_str()) {
                seen.push(&p.variable);
            }
        }
        seen
    }
}

pub fn find_variable<'a>(variables: &'a [LinguisticVariable], name: &str) -> Result<&'a LinguisticVariable, FuzzyError> {
    variables
        .iter()
        .find(|v| v.name() == name)
        .ok_or_else(|| FuzzyError::UnknownVariable(name.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleFiring {
    pub rule_id: String,
    pub conclusion: String,
    pub strength: Degree,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub value: f64,
    /// One entry per rule, in rule-base order, including zero strengths.
    pub firings: Vec<RuleFiring>,
    pub aggregate: DiscreteFuzzySet,
}

/// Degrees per variable, then per canonical term label.
pub type FuzzyInputs = BTreeMap<String, TermDegrees>;

/// Rule strengths from already-fuzzified inputs.
pub fn rule_strengths(
    variables: &[LinguisticVariable],
    rule_base: &RuleBase,
    degrees: &FuzzyInputs,
    t_norm: TNorm,
) -> Result<Vec<RuleFiring>, FuzzyError> {
    rule_base
        .rules
        .iter()
        .map(|rule| {
            let mut premise_degrees = Vec::with_capacity(rule.premises.len());
            for p in &rule.premises {
                let lv = find_variable(variables, &p.variable)?;
                let label = lv.term(&p.term)?.label.as_str();
                let d = degrees
                    .get(&p.variable)
                    .and_then(|terms| terms.get(label))
                    .copied()
                    .ok_or_else(|| FuzzyError::MissingInput(format!("{}.{}", p.variable, label)))?;
                premise_degrees.push(apply_modifier(p.modifier, d));
            }
            Ok(RuleFiring {
                rule_id: rule.id.clone(),
                conclusion: rule.conclusion.term.clone(),
                strength: t_norm.fold(premise_degrees),
            })
        })
        .collect()
}

/// Mamdani pipeline starting from fuzzified degrees.
pub fn infer_from_degrees(
    variables: &[LinguisticVariable],
    rule_base: &RuleBase,
    degrees: &FuzzyInputs,
    t_norm: TNorm,
) -> Result<Inference, FuzzyError> {
    let output = find_variable(variables, &rule_base.output)?;
    let firings = rule_strengths(variables, rule_base, degrees, t_norm)?;
    let clipped = rule_base
        .rules
        .iter()
        .zip(&firings)
        .map(|(rule, firing)| Ok(clip(output.universe(), &output.term(&rule.conclusion.term)?.mf, firing.strength)))
        .collect::<Result<Vec<_>, FuzzyError>>()?;
    let aggregate = if clipped.is_empty() {
        DiscreteFuzzySet::constant(output.universe().clone(), Degree::ZERO)
    } else {
        aggregate(&clipped)?
    };
    let value = defuzzify_centroid(&aggregate)?;
    Ok(Inference {
        value,
        firings,
        aggregate,
    })
}

/// Fuzzifies crisp `inputs` and runs the Mamdani pipeline.
pub fn infer_mamdani(
    variables: &[LinguisticVariable],
    rule_base: &RuleBase,
    inputs: &BTreeMap<String, f64>,
    t_norm: TNorm,
) -> Result<Inference, FuzzyError> {
    let mut degrees = FuzzyInputs::new();
    for name in rule_base.input_variables() {
        let x = *inputs.get(name).ok_or_else(|| FuzzyError::MissingInput(name.to_string()))?;
        degrees.insert(name.to_string(), fuzzify(find_variable(variables, name)?, x));
    }
    infer_from_degrees(variables, rule_base, &degrees, t_norm)
}
