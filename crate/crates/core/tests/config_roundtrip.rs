use fuzzy_agents::config::{ConfigError, SystemConfig};
use fuzzy_agents::fuzzy::{Degree, FuzzySubset, LinguisticVariable, MembershipFunction, TNorm, Universe};
use fuzzy_agents::watering::{reference_config, REFERENCE_CONFIG};
use proptest::prelude::*;

#[test]
fn reference_load_save_load_is_identity() {
    let first = SystemConfig::from_json(REFERENCE_CONFIG).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    first.save(&path).unwrap();
    let second = SystemConfig::load(&path).unwrap();
    assert_eq!(first, second);
    assert_eq!(first.to_json(), second.to_json());
}

fn shape() -> impl Strategy<Value = MembershipFunction> {
    prop::collection::vec(0.0f64..100.0, 4).prop_flat_map(|mut p| {
        p.sort_by(f64::total_cmp);
        p.dedup();
        let tri = if p.len() >= 3 {
            MembershipFunction::triangular(p[0], p[1], p[2]).ok()
        } else {
            None
        };
        let trap = if p.len() == 4 {
            MembershipFunction::trapezoidal(p[0], p[1], p[2], p[3]).ok()
        } else {
            None
        };
        let up = MembershipFunction::ramp_up(p[0], p[0] + 1.0 + p[p.len() - 1]).unwrap();
        let down = MembershipFunction::ramp_down(p[0], p[0] + 0.5 + p[p.len() - 1]).unwrap();
        let mut options = vec![up, down];
        options.extend(tri);
        options.extend(trap);
        prop::sample::select(options)
    })
}

fn variable(name: &'static str) -> impl Strategy<Value = LinguisticVariable> {
    (
        -50.0f64..50.0,
        1.0f64..200.0,
        2usize..2000,
        prop::collection::vec(shape(), 1..5),
    )
        .prop_map(move |(low, width, res, shapes)| {
            let u = Universe::new(format!("U-{name}"), low, low + width, res).unwrap();
            let terms = shapes
                .into_iter()
                .enumerate()
                .map(|(i, mf)| FuzzySubset::new(format!("t{i}"), mf))
                .collect();
            LinguisticVariable::new(name, u, terms).unwrap()
        })
}

fn degree() -> impl Strategy<Value = Degree> {
    (0.0f64..=1.0).prop_map(|v| Degree::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_configs_round_trip(
        vars in prop::collection::vec(variable("v"), 1..4),
        product in any::<bool>(),
        threshold in degree(),
        reinforcement in degree(),
        decay in 0.01f64..=1.0,
        timeout in 1u64..1000,
        cap in 1usize..5000,
        rule_thresholds in prop::collection::vec(degree(), 3),
    ) {
        let mut cfg = reference_config();
        let renamed: Vec<LinguisticVariable> = vars
            .into_iter()
            .enumerate()
            .map(|(i, lv)| {
                LinguisticVariable::new(format!("extra{i}"), lv.universe().clone(), lv.terms().to_vec()).unwrap()
            })
            .collect();
        cfg.variables.extend(renamed);
        cfg.t_norm = if product { TNorm::Product } else { TNorm::Min };
        cfg.organization.activation_threshold = threshold;
        cfg.organization.reinforcement = reinforcement;
        cfg.organization.decay = decay;
        cfg.protocol.timeout_ticks = timeout;
        cfg.history_cap = cap;
        for (agent, t) in cfg.agents.iter_mut().zip(rule_thresholds) {
            agent.rules[0].threshold = t;
            agent.membership = t;
        }
        cfg.validate().unwrap();
        let back = SystemConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_json(), cfg.to_json());
    }
}

fn mutated(f: impl FnOnce(&mut serde_json::Value)) -> Result<(), ConfigError> {
    let mut v: serde_json::Value = serde_json::from_str(REFERENCE_CONFIG).unwrap();
    f(&mut v);
    SystemConfig::from_json(&v.to_string())?.validate()
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(matches!(SystemConfig::from_json("{"), Err(ConfigError::Parse(_))));
    assert!(SystemConfig::load("/nonexistent/cfg.json").is_err());
    // Unknown term in the rule base.
    assert!(mutated(|v| v["rule_base"]["rules"][0]["if"][0]["term"] = "scorching".into()).is_err());
    // Triangle out of order.
    assert!(mutated(|v| v["variables"][0]["terms"][1]["params"] = serde_json::json!([19.0, 12.0, 5.0])).is_err());
    // Duplicate variable.
    assert!(mutated(|v| {
        let first = v["variables"][0].clone();
        v["variables"].as_array_mut().unwrap().push(first);
    })
    .is_err());
    // Send to an unknown agent.
    assert!(mutated(|v| v["agents"][0]["rules"][0]["then"][0]["send"]["to"] = serde_json::json!({"agent": "nobody"}))
        .is_err());
    // Unregistered message type.
    assert!(mutated(|v| v["agents"][0]["rules"][0]["then"][0]["send"]["mtype"] = 9.into()).is_err());
    // Community with an unknown main role.
    assert!(mutated(|v| v["communities"][0]["main_role"] = "gardener".into()).is_err());
    // Decay outside (0, 1].
    assert!(mutated(|v| v["organization"]["decay"] = 0.0.into()).is_err());
    // Degrees outside [0, 1].
    assert!(mutated(|v| v["organization"]["reinforcement"] = 1.5.into()).is_err());
    // Miscalibrated burning.
    assert!(matches!(
        mutated(|v| v["variables"][0]["terms"][4]["params"] = serde_json::json!([30.0, 40.0])),
        Err(ConfigError::Calibration { .. })
    ));
    // Inference without a rule base.
    assert!(mutated(|v| {
        v.as_object_mut().unwrap().remove("rule_base");
    })
    .is_err());
}
