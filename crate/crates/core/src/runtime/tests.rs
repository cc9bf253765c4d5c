use super::*;
use crate::agent::{
    ActionKind, ActionSpec, ContentTemplate, DecisionRule, EffectValue, EventKind, EventPattern, SendTemplate, Target,
};
use crate::organization::{OrganizationParams, Role};
use crate::protocol::Performative;

fn org(decay: f64) -> Organization {
    let mut o = Organization::new(OrganizationParams {
        decay,
        ..OrganizationParams::default()
    })
    .unwrap();
    for r in ["ask", "answer"] {
        o.add_role(Role {
            id: r.into(),
            description: String::new(),
        })
        .unwrap();
    }
    o.add_community("askers", "ask", "").unwrap();
    o.add_community("answerers", "answer", "").unwrap();
    o
}

fn types() -> Vec<MessageType> {
    vec![MessageType {
        code: 1,
        meaning: "question".into(),
        degree: Degree::ONE,
    }]
}

fn send(performative: Performative, to: Target, content: ContentTemplate) -> ActionSpec {
    ActionSpec::new(ActionKind::Send(SendTemplate {
        performative,
        to,
        mtype: 1,
        content,
        ack: false,
    }))
}

fn asker(id: &str, to: &str) -> FuzzyAgent {
    let mut a = FuzzyAgent::new(id);
    a.knowledge_mut().observe("go");
    a.add_rule(
        DecisionRule::new(
            "ask",
            EventPattern::on(EventKind::EnvironmentChanged),
            vec![send(Performative::Ask, Target::Agent(to.into()), ContentTemplate::Question("x?".into()))],
        )
        .unwrap(),
    );
    a
}

fn answerer(id: &str) -> FuzzyAgent {
    let mut a = FuzzyAgent::new(id);
    let mut on = EventPattern::on(EventKind::MessageReceived);
    on.performative = Some(Performative::Ask);
    a.add_rule(
        DecisionRule::new(
            "reply",
            on,
            vec![send(Performative::Reply, Target::Sender, ContentTemplate::Response("42".into()))],
        )
        .unwrap(),
    );
    a
}

fn qa_system(stepping: Stepping) -> System {
    let mut s = System::new(org(0.95), types());
    s.set_stepping(stepping);
    s.declare_variable("go", None);
    s.add_agent(asker("q", "r"), &"askers".into(), &[]).unwrap();
    s.add_agent(answerer("r"), &"answerers".into(), &[]).unwrap();
    s
}

fn kinds(t: &Trace, kind: TraceKind) -> Vec<&TraceRecord> {
    t.of_kind(kind).collect()
}

#[test]
fn empty_system_traces_only_ticks() {
    let mut s = System::new(Organization::default(), Vec::new());
    s.run_scenario(&Scenario::empty("empty", 3)).unwrap();
    assert_eq!(s.trace().len(), 4);
    assert!(s.trace().records().iter().all(|r| r.kind == TraceKind::Tick));
}

#[test]
fn inject_errors() {
    let mut s = qa_system(Stepping::Serial);
    assert_eq!(s.inject("nope", 1.0, 0), Err(RuntimeError::UnknownVariable("nope".into())));
    s.step_tick();
    assert_eq!(s.inject("go", 1.0, 0), Err(RuntimeError::PastTick { tick: 0, now: 1 }));
}

#[test]
fn ask_reply_settles_obligation() {
    let mut s = qa_system(Stepping::Serial);
    s.run_scenario(&Scenario::empty("qa", 4).then(0, "go", 1.0)).unwrap();
    let t = s.trace();
    assert_eq!(kinds(t, TraceKind::ObligationOpened).len(), 1);
    assert_eq!(kinds(t, TraceKind::ObligationSettled).len(), 1);
    assert!(kinds(t, TraceKind::ObligationViolated).is_empty());
    assert_eq!(s.transport().obligations().open_count(), 0);
    let sent = kinds(t, TraceKind::MessageSent);
    assert_eq!(sent.len(), 2);
    assert_eq!((sent[0].tick, sent[1].tick), (0, 1));
    assert!(sent[1].detail.contains("reply r->q"));
    assert!(sent[1].detail.ends_with("c1"));
}

#[test]
fn same_value_injection_is_not_a_change() {
    let mut s = qa_system(Stepping::Serial);
    s.run_scenario(&Scenario::empty("qa", 10).then(0, "go", 1.0).then(5, "go", 1.0))
        .unwrap();
    assert_eq!(kinds(s.trace(), TraceKind::Injection).len(), 2);
    assert_eq!(kinds(s.trace(), TraceKind::Percept).iter().filter(|r| r.agent == "q").count(), 2);
}

#[test]
fn unanswered_ask_is_violated_at_deadline() {
    let mut s = System::new(org(0.95), types()).with_timeout(3);
    s.declare_variable("go", None);
    s.add_agent(asker("q", "r"), &"askers".into(), &[]).unwrap();
    s.add_agent(FuzzyAgent::new("r"), &"answerers".into(), &[]).unwrap();
    s.run_scenario(&Scenario::empty("qa", 6).then(0, "go", 1.0)).unwrap();
    let v = kinds(s.trace(), TraceKind::ObligationViolated);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].tick, 3);
    assert_eq!(v[0].agent, "r");
}

#[test]
fn delivery_is_one_tick_after_send() {
    let mut s = qa_system(Stepping::Serial);
    s.run_scenario(&Scenario::empty("qa", 4).then(0, "go", 1.0)).unwrap();
    let t = s.trace();
    for sent in t.of_kind(TraceKind::MessageSent) {
        let id = sent.detail.split_whitespace().next().unwrap();
        let delivered: Vec<_> = t
            .of_kind(TraceKind::MessageDelivered)
            .filter(|d| d.detail.split_whitespace().next() == Some(id))
            .collect();
        assert_eq!(delivered.len(), 1);
        assert_eq!(delivered[0].tick, sent.tick + 1);
    }
}

#[test]
fn message_in_flight_at_end_is_an_error_record() {
    let mut s = qa_system(Stepping::Serial);
    s.run_scenario(&Scenario::empty("qa", 0).then(0, "go", 1.0)).unwrap();
    let errors = kinds(s.trace(), TraceKind::Error);
    assert_eq!(errors.len(), 1);
    assert!(errors[0].detail.starts_with("undelivered m0"));
}

#[test]
fn cross_community_ask_propagates_role() {
    let mut s = qa_system(Stepping::Serial);
    s.run_scenario(&Scenario::empty("qa", 2).then(0, "go", 1.0)).unwrap();
    let o = s.organization();
    assert!(!o.degree(&"q".into(), &"answer".into()).is_zero());
    assert!(!o.degree(&"r".into(), &"ask".into()).is_zero());
    assert!(!kinds(s.trace(), TraceKind::RoleUpdate).is_empty());
}

#[test]
fn conflicting_effects_last_writer_wins() {
    let writer = |id: &str, v: f64| {
        let mut a = FuzzyAgent::new(id);
        a.knowledge_mut().observe("go");
        a.add_rule(
            DecisionRule::new(
                "write",
                EventPattern::on(EventKind::EnvironmentChanged),
                vec![ActionSpec::new(ActionKind::EnvEffect {
                    variable: "out".into(),
                    value: EffectValue::Constant(v),
                })],
            )
            .unwrap(),
        );
        a
    };
    let mut s = System::new(org(1.0), types());
    s.declare_variable("go", None);
    s.declare_variable("out", Some(0.0));
    s.add_agent(writer("w1", 1.0), &"askers".into(), &[]).unwrap();
    s.add_agent(writer("w2", 2.0), &"askers".into(), &[]).unwrap();
    s.run_scenario(&Scenario::empty("w", 1).then(0, "go", 1.0)).unwrap();
    assert_eq!(s.value("out"), Some(2.0));
    assert_eq!(s.last_effect("out"), Some(2.0));
    let o = kinds(s.trace(), TraceKind::EnvOverwrite);
    assert_eq!(o.len(), 1);
    assert_eq!(o[0].agent, "w2");
}

#[test]
fn serial_and_parallel_agree() {
    let run = |stepping| {
        let mut s = qa_system(stepping);
        s.run_scenario(&Scenario::empty("qa", 12).then(0, "go", 1.0).then(4, "go", 2.0))
            .unwrap();
        s.into_trace().to_bytes(TraceFormat::Csv).unwrap()
    };
    assert_eq!(run(Stepping::Serial), run(Stepping::Parallel));
}
