use std::sync::Arc;

use super::*;
use crate::env::Milestone;
use crate::lm::{MockBackend, ScriptedBackend, Subroutine};

fn session(confirmations: bool) -> Session {
    let config = SessionConfig {
        confirmations,
        ..SessionConfig::default()
    };
    Session::new(config, Subroutines::with_backend(Arc::new(MockBackend::default()))).unwrap()
}

/// Approves every pending confirmation.
fn approve_all(s: &mut Session) {
    while s.pending().is_some() {
        s.resolve(Verdict::Approve).unwrap();
    }
}

fn questions(events: &[LoggedEvent]) -> Vec<String> {
    events
        .iter()
        .filter_map(|e| match &e.event {
            DialogEvent::AgentMessage { text } if text.starts_with("How do I") => Some(text.clone()),
            _ => None,
        })
        .collect()
}

fn teach(s: &mut Session, lines: &[&str]) {
    for line in lines {
        s.say(line).unwrap();
        approve_all(s);
    }
}

const ONION_SOUP: [&str; 9] = [
    "Cook an onion.",
    "First, get an onion. Then, put it in the pot and turn it on.",
    "Go to the onion and hit space.",
    "Go to the pot and press space.",
    "Go to the pot and press space.",
    "Plate the soup.",
    "Get a plate, then go to the pot and press space.",
    "Deliver the soup.",
    "Go to the delivery station and press space.",
];

#[test]
fn fresh_knowledge_display() {
    let s = session(true);
    let names: Vec<_> = s.knowledge_display().into_iter().map(|k| k.name).collect();
    assert_eq!(names, ["moveTo", "pressSpace"]);
    assert_eq!(s.snapshot_depth(), 1);
}

#[test]
fn first_question_matches_the_dialog() {
    let mut s = session(true);
    s.say("Cook an onion.").unwrap();
    approve_all(&mut s);
    assert_eq!(questions(s.events()), ["How do I cook an onion?"]);
    s.say(ONION_SOUP[1]).unwrap();
    approve_all(&mut s);
    assert_eq!(questions(s.events()).last().unwrap(), "How do I get an onion?");
    s.say(ONION_SOUP[2]).unwrap();
    approve_all(&mut s);
    let names: Vec<_> = s.knowledge_display().into_iter().map(|k| k.name).collect();
    assert_eq!(names, ["moveTo", "pressSpace", "get"]);
    assert_eq!(s.world().agent.holding, crate::env::Holding::Onion);
}

#[test]
fn onion_soup_and_tomato() {
    let mut s = session(true);
    teach(&mut s, &ONION_SOUP);
    assert_eq!(s.world().milestones.len(), 5);
    assert_eq!(s.metrics().milestones, Milestone::ALL.into_iter().collect());
    let names: Vec<_> = s.knowledge_display().into_iter().map(|k| k.name).collect();
    assert_eq!(
        names,
        ["moveTo", "pressSpace", "get", "put", "turnOn", "cook", "plate", "deliver"]
    );
    let cook = s.kb().get("cook").unwrap();
    assert_eq!(cook.params, ["x"]);
    let actions: Vec<&str> = cook.body.iter().map(|st| st.action.as_str()).collect();
    assert_eq!(actions, ["get", "put", "turnOn"]);
    assert_eq!(cook.body[1].args, [Term::Const("pot".into())]);

    let before = s.events().len();
    let learned_before = s.kb().len();
    s.say("cook a tomato").unwrap();
    approve_all(&mut s);
    let tail = &s.events()[before..];
    assert!(questions(tail).is_empty());
    assert_eq!(s.kb().len(), learned_before);
    let calls: Vec<String> = dispatched_calls(tail).iter().map(|c| c.to_string()).collect();
    assert_eq!(
        calls,
        [
            "moveTo(tomato)",
            "pressSpace()",
            "moveTo(pot)",
            "pressSpace()",
            "moveTo(pot)",
            "pressSpace()"
        ]
    );
    assert_eq!(s.mode(), &Mode::AwaitingCommand);
    assert_eq!(s.metrics().map.corrected, 0);
}

#[test]
fn wrong_mode_is_rejected_without_change() {
    let mut s = session(true);
    s.say("press space").unwrap();
    let before = s.checkpoint();
    let n = s.events().len();
    assert!(matches!(s.say("hello"), Err(SessionError::WrongMode { .. })));
    assert_eq!(s.checkpoint(), before);
    assert_eq!(s.events().len(), n);
    s.resolve(Verdict::Approve).unwrap();
    s.resolve(Verdict::Approve).unwrap(); // mapping
    s.resolve(Verdict::Approve).unwrap(); // task
    assert!(matches!(s.resolve(Verdict::Approve), Err(SessionError::WrongMode { .. })));
}

#[test]
fn undo_restores_previous_prompt() {
    let mut s = session(true);
    let start = s.checkpoint();
    let u = s.undo();
    assert!(matches!(u[0].event, DialogEvent::UndoApplied { restored: false }));
    assert_eq!(s.metrics().undos, 0);

    let mut history = vec![s.checkpoint()];
    for line in &ONION_SOUP[..3] {
        s.say(line).unwrap();
        history.push(s.checkpoint());
        while s.pending().is_some() {
            s.resolve(Verdict::Approve).unwrap();
            history.push(s.checkpoint());
        }
    }
    assert!(s.kb().contains("get"));
    history.pop();
    while let Some(expected) = history.pop() {
        s.undo();
        assert_eq!(s.checkpoint(), expected);
    }
    assert_eq!(s.checkpoint(), start);
    assert!(!s.kb().contains("get"));
}

#[test]
fn correcting_mapping_to_none_starts_new_action() {
    let mut s = session(true);
    s.say("go to the onion").unwrap();
    s.resolve(Verdict::Approve).unwrap(); // segmentation
    s.resolve(Verdict::Correct("none".into())).unwrap();
    assert!(matches!(s.mode(), Mode::AwaitingDefinition { .. }));
    assert_eq!(s.metrics().map.corrected, 1);
}

#[test]
fn invalid_correction_reissues() {
    let mut s = session(true);
    s.say("go to the onion").unwrap();
    s.resolve(Verdict::Approve).unwrap();
    let events = s.resolve(Verdict::Correct("flyTo".into())).unwrap();
    assert!(matches!(
        events[0].event,
        DialogEvent::ConfirmationResolved { accepted: false, .. }
    ));
    assert!(matches!(events.last().unwrap().event, DialogEvent::ConfirmationIssued { .. }));
    assert_eq!(s.metrics().map, Counts::default());
    s.resolve(Verdict::Approve).unwrap(); // mapping
    let events = s.resolve(Verdict::Correct("tomato".into())).unwrap(); // grounding
    assert_eq!(dispatched_calls(&events)[0].to_string(), "moveTo(tomato)");
}

#[test]
fn gate_rejects_inexact_match() {
    let backend = ScriptedBackend::new(Arc::new(MockBackend::default())).respond(
        Subroutine::Map,
        Some("get an onion"),
        [r#"{"action":"moveTo"}"#],
    );
    let config = SessionConfig {
        confirmations: false,
        ..SessionConfig::default()
    };
    let mut s = Session::new(config, Subroutines::with_backend(Arc::new(backend))).unwrap();
    s.say("get an onion").unwrap();
    assert!(dispatched_calls(s.events()).is_empty());
    assert_eq!(questions(s.events()), ["How do I get an onion?"]);
    s.say("go to the onion").unwrap();
    assert_eq!(dispatched_calls(s.events())[0].to_string(), "moveTo(onion)");
    assert!(s.kb().contains("get"));
}

#[test]
fn name_collision() {
    let mut s = session(true);
    teach(&mut s, &["get an onion", "go to the onion and press space"]);
    s.say("grab a plate").unwrap();
    s.resolve(Verdict::Approve).unwrap(); // segmentation
    s.resolve(Verdict::Correct("none".into())).unwrap(); // not `get`
    approve_all(&mut s);
    s.say("go to the plate and press space").unwrap();
    approve_all(&mut s);
    assert!(s.kb().contains("get"));
    assert!(s.kb().contains("get2"));
}

#[test]
fn recursion_limit() {
    let config = SessionConfig {
        confirmations: false,
        max_depth: 2,
        ..SessionConfig::default()
    };
    let mut s =
        Session::new(config, Subroutines::with_backend(Arc::new(MockBackend::default()))).unwrap();
    s.say("cook an onion").unwrap();
    s.say("plate the soup").unwrap();
    let events = s.say("deliver the soup").unwrap();
    assert!(events.iter().any(|e| matches!(e.event, DialogEvent::Error { .. })));
    assert_eq!(s.mode(), &Mode::AwaitingCommand);
    assert!(s.definition_stack().is_empty());
}

#[test]
fn observer_sees_every_event() {
    let seen = Arc::new(std::sync::Mutex::new(Vec::new()));
    let sink = seen.clone();
    let mut s = session(false);
    s.set_observer(Box::new(move |e| sink.lock().unwrap().push(e.seq)));
    s.say("press space").unwrap();
    let seqs: Vec<u64> = s.events()[1..].iter().map(|e| e.seq).collect();
    assert_eq!(*seen.lock().unwrap(), seqs);
}

#[test]
fn replay_round_trip() {
    let mut s = session(true);
    teach(&mut s, &ONION_SOUP[..3]);
    s.undo();
    let t = crate::transcript::Transcript::of(&s);
    let text = t.to_jsonl();
    let parsed = crate::transcript::Transcript::from_jsonl(&text).unwrap();
    assert_eq!(parsed, t);
    assert_eq!(
        crate::transcript::replay(&parsed).unwrap(),
        crate::transcript::ReplayReport::Equal
    );
}
