//! The smart-watering reference system: temperature and humidity agents
//! report their fuzzy degrees to a duration agent, which runs the Mamdani
//! rule base and sets the watering duration.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::agent::{FuzzyAgent, KnowledgeBase};
use crate::config::{ConfigError, SystemConfig};
use crate::fuzzy::{infer_mamdani, FuzzyError, Inference, LinguisticVariable};
use crate::runtime::{RuntimeError, Scenario, Stepping, System, Trace};

pub const REFERENCE_CONFIG: &str = include_str!("../data/watering.json");
pub const REFERENCE_SCENARIO: &str = include_str!("../data/watering_scenario.json");

pub const TEMPERATURE: &str = "temperature";
pub const HUMIDITY: &str = "humidity";
pub const DURATION: &str = "duration";

#[derive(Debug, Error)]
pub enum WateringError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error(transparent)]
    Fuzzy(#[from] FuzzyError),
    #[error("no universes to agentify")]
    NoUniverses,
    #[error("duplicate universe `{0}`")]
    DuplicateUniverse(String),
    #[error("not a watering system: {0}")]
    Shape(String),
    #[error("invalid scenario: {0}")]
    Scenario(String),
}

pub fn reference_config() -> SystemConfig {
    SystemConfig::from_json(REFERENCE_CONFIG).expect("reference config parses")
}

pub fn reference_scenario() -> Scenario {
    Scenario::from_json(REFERENCE_SCENARIO).expect("reference scenario parses")
}

/// One agent per universe, named after it and knowing its fuzzy subsets.
pub fn agentify(universes: &[LinguisticVariable]) -> Result<Vec<FuzzyAgent>, WateringError> {
    if universes.is_empty() {
        return Err(WateringError::NoUniverses);
    }
    let mut seen = BTreeSet::new();
    universes
        .iter()
        .map(|lv| {
            if !seen.insert(lv.name()) {
                return Err(WateringError::DuplicateUniverse(lv.name().to_string()));
            }
            let mut kb = KnowledgeBase::default();
            kb.learn_variable(lv.clone());
            Ok(FuzzyAgent::new(lv.name()).with_knowledge(kb))
        })
        .collect()
}

pub struct WateringSystem {
    system: System,
}

#[derive(Debug, Clone)]
pub struct WateringRun {
    /// Last duration written by the duration agent, if any.
    pub duration: Option<f64>,
    pub trace: Trace,
}

/// Validates that `config` describes the three-agent watering system and
/// builds it.
pub fn build_watering_system(config: &SystemConfig) -> Result<WateringSystem, WateringError> {
    let ids: Vec<&str> = config.agents.iter().map(|a| a.id.as_str()).collect();
    if ids != [TEMPERATURE, HUMIDITY, DURATION] {
        return Err(WateringError::Shape(format!(
            "expected agents [temperature, humidity, duration], found {ids:?}"
        )));
    }
    for a in &config.agents {
        if a.variable.as_deref() != Some(a.id.as_str()) {
            return Err(WateringError::Shape(format!("agent `{}` must represent its own universe", a.id)));
        }
    }
    match &config.rule_base {
        Some(rb) if rb.output == DURATION => {}
        _ => return Err(WateringError::Shape("rule base must conclude on duration".into())),
    }
    if !config.agents[2].inference {
        return Err(WateringError::Shape("duration agent must run the rule base".into()));
    }
    Ok(WateringSystem {
        system: config.build_system()?,
    })
}

impl WateringSystem {
    pub fn system(&self) -> &System {
        &self.system
    }

    pub fn set_stepping(&mut self, stepping: Stepping) {
        self.system.set_stepping(stepping);
    }

    pub fn run_scenario(mut self, scenario: &Scenario) -> Result<WateringRun, WateringError> {
        self.system.run_scenario(scenario)?;
        Ok(WateringRun {
            duration: self.system.last_effect(DURATION),
            trace: self.system.into_trace(),
        })
    }
}

/// Direct Mamdani inference from crisp inputs, bypassing the agents.
pub fn infer_duration(config: &SystemConfig, temperature: f64, humidity: f64) -> Result<Inference, WateringError> {
    let rb = config
        .rule_base
        .as_ref()
        .ok_or_else(|| WateringError::Shape("config has no rule base".into()))?;
    let inputs = BTreeMap::from([(TEMPERATURE.to_string(), temperature), (HUMIDITY.to_string(), humidity)]);
    Ok(infer_mamdani(&config.variables, rb, &inputs, config.t_norm)?)
}

/// Grid step of the duration universe.
pub fn duration_step(config: &SystemConfig) -> Option<f64> {
    config.variable(DURATION).map(|v| v.universe().step())
}

/// Runs the agents on "humidity, then temperature two ticks later".
pub fn agent_duration(config: &SystemConfig, temperature: f64, humidity: f64) -> Result<Option<f64>, WateringError> {
    let scenario = Scenario::empty("pair", 6)
        .then(0, HUMIDITY, humidity)
        .then(2, TEMPERATURE, temperature);
    Ok(build_watering_system(config)?.run_scenario(&scenario)?.duration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::TraceKind;

    #[test]
    fn reference_config_validates() {
        reference_config().validate().unwrap();
    }

    #[test]
    fn calibration_points_hold() {
        for r in reference_config().calibration().unwrap() {
            assert!(r.holds(), "{:?}", r);
        }
    }

    #[test]
    fn agentify_examples() {
        let cfg = reference_config();
        let agents = agentify(&cfg.variables).unwrap();
        assert_eq!(agents.len(), 3);
        let one = agentify(&cfg.variables[..1]).unwrap();
        assert!(one[0].knowledge().variable(TEMPERATURE).is_some());
        assert!(matches!(agentify(&[]), Err(WateringError::NoUniverses)));
        let dup = vec![cfg.variables[0].clone(), cfg.variables[0].clone()];
        assert!(matches!(agentify(&dup), Err(WateringError::DuplicateUniverse(_))));
    }

    #[test]
    fn built_system_rule_counts() {
        let cfg = reference_config();
        let ws = build_watering_system(&cfg).unwrap();
        let s = ws.system();
        assert_eq!(s.agents().len(), 3);
        assert_eq!(s.agent(TEMPERATURE).unwrap().rules().len(), 1);
        assert_eq!(s.agent(HUMIDITY).unwrap().rules().len(), 1);
        let d = s.agent(DURATION).unwrap();
        assert_eq!(d.knowledge().inference().unwrap().rule_base.rules.len(), 2);
    }

    #[test]
    fn no_inputs_no_output() {
        let run = build_watering_system(&reference_config())
            .unwrap()
            .run_scenario(&Scenario::empty("idle", 5))
            .unwrap();
        assert_eq!(run.duration, None);
        assert_eq!(run.trace.of_kind(TraceKind::MessageSent).count(), 0);
    }

    #[test]
    fn temperature_alone_waits() {
        let run = build_watering_system(&reference_config())
            .unwrap()
            .run_scenario(&Scenario::empty("t", 5).then(0, TEMPERATURE, 35.0))
            .unwrap();
        assert_eq!(run.trace.of_kind(TraceKind::MessageSent).count(), 1);
        assert_eq!(run.duration, None);
    }

    #[test]
    fn reference_scenario_reaches_forty_minutes() {
        let run = build_watering_system(&reference_config())
            .unwrap()
            .run_scenario(&reference_scenario())
            .unwrap();
        let d = run.duration.unwrap();
        assert!((d - 40.0).abs() <= 5.0, "{d}");
        let fired: Vec<f64> = run
            .trace
            .of_kind(TraceKind::RuleFired)
            .filter(|r| r.detail.contains("->"))
            .map(|r| r.degree.unwrap())
            .collect();
        assert_eq!(fired, vec![0.45, 0.35]);
    }

    #[test]
    fn cold_and_wet_produces_no_duration() {
        let cfg = reference_config();
        assert!(cfg.variable(TEMPERATURE).unwrap().degree("burning", 0.0).unwrap().is_zero());
        assert_eq!(agent_duration(&cfg, 0.0, 30.0).unwrap(), None);
        assert!(matches!(
            infer_duration(&cfg, 0.0, 30.0),
            Err(WateringError::Fuzzy(FuzzyError::EmptyAggregate))
        ));
    }

    #[test]
    fn wrong_shape_rejected() {
        let mut cfg = reference_config();
        cfg.agents.swap(0, 1);
        assert!(matches!(build_watering_system(&cfg), Err(WateringError::Shape(_))));
    }
}
