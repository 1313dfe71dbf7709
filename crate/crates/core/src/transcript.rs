//! JSON-lines session transcripts and deterministic replay.
//!
//! A transcript is the session's event log, one event per line, optionally
//! followed by a `final_state` line holding the knowledge base and world.
//! Replay feeds the logged inputs to a fresh session whose language backend
//! answers from the logged raw responses, then compares the two logs.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dialog::{DialogEvent, Input, LoggedEvent, Session, SessionError};
use crate::env::WorldState;
use crate::htn::KnowledgeBase;
use crate::lm::{LmConfig, PromptLibrary, RecordedBackend, Subroutines};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalState {
    pub kb: KnowledgeBase,
    pub world: WorldState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub events: Vec<LoggedEvent>,
    pub final_state: Option<FinalState>,
}

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("line {line}: {message}")]
    Corrupt { line: usize, message: String },
    #[error("transcript does not start with session_started")]
    MissingStart,
    #[error(transparent)]
    Session(#[from] SessionError),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename = "final_state")]
struct FinalLine {
    kb: KnowledgeBase,
    world: WorldState,
}

impl Transcript {
    pub fn of(session: &Session) -> Self {
        Self {
            events: session.events().to_vec(),
            final_state: Some(FinalState {
                kb: session.kb().clone(),
                world: session.world().clone(),
            }),
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events serialize"));
            out.push('\n');
        }
        if let Some(f) = &self.final_state {
            let line = FinalLine {
                kb: f.kb.clone(),
                world: f.world.clone(),
            };
            out.push_str(&serde_json::to_string(&line).expect("state serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, TranscriptError> {
        let mut events = Vec::new();
        let mut final_state = None;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let corrupt = |e: serde_json::Error| TranscriptError::Corrupt {
                line: i + 1,
                message: e.to_string(),
            };
            let value: serde_json::Value = serde_json::from_str(line).map_err(corrupt)?;
            if value.get("type").and_then(|t| t.as_str()) == Some("final_state") {
                let f: FinalLine = serde_json::from_value(value).map_err(corrupt)?;
                final_state = Some(FinalState { kb: f.kb, world: f.world });
            } else {
                events.push(serde_json::from_value(value).map_err(corrupt)?);
            }
        }
        Ok(Self { events, final_state })
    }
}

/// The user inputs recorded in an event log, in order.
pub fn inputs_of(events: &[LoggedEvent]) -> Vec<Input> {
    events
        .iter()
        .filter_map(|e| match &e.event {
            DialogEvent::UserMessage { text } => Some(Input::Say { text: text.clone() }),
            DialogEvent::ConfirmationResolved { verdict, .. } => Some(Input::Confirm {
                verdict: verdict.clone(),
            }),
            DialogEvent::UndoApplied { .. } => Some(Input::Undo),
            _ => None,
        })
        .collect()
}

/// Re-runs a logged session offline. Language calls are answered from the
/// logged exchanges; the returned session can then be given a live backend.
pub fn rebuild(events: &[LoggedEvent]) -> Result<Session, TranscriptError> {
    let Some(DialogEvent::SessionStarted { config }) = events.first().map(|e| &e.event) else {
        return Err(TranscriptError::MissingStart);
    };
    let calls = events.iter().filter_map(|e| match &e.event {
        DialogEvent::SubroutineExchange { exchange } => Some(exchange.to_recorded()),
        _ => None,
    });
    let backend = RecordedBackend::new(config.backend.clone(), calls);
    let lm = Subroutines::new(
        Arc::new(backend),
        PromptLibrary::default(),
        LmConfig::default().with_scold_budget(config.scold_budget),
    );
    let mut session = Session::new(config.clone(), lm)?;
    for input in inputs_of(events) {
        // A logged input was accepted when it was first given, so a refusal
        // here is itself a divergence that the event comparison reports.
        let _ = session.apply(input);
    }
    Ok(session)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReplayReport {
    Equal,
    /// First event (0-based line index) where the replay differs.
    EventMismatch {
        index: usize,
        expected: Option<Box<LoggedEvent>>,
        actual: Option<Box<LoggedEvent>>,
    },
    FinalStateMismatch,
}

impl std::fmt::Display for ReplayReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReplayReport::Equal => f.write_str("equal"),
            ReplayReport::EventMismatch { index, .. } => write!(f, "mismatch at event {index}"),
            ReplayReport::FinalStateMismatch => f.write_str("mismatch in final state"),
        }
    }
}

pub fn replay(transcript: &Transcript) -> Result<ReplayReport, TranscriptError> {
    let session = rebuild(&transcript.events)?;
    let actual = session.events();
    let expected = &transcript.events;
    let n = expected.len().max(actual.len());
    for i in 0..n {
        let (e, a) = (expected.get(i), actual.get(i));
        if e != a {
            return Ok(ReplayReport::EventMismatch {
                index: i,
                expected: e.cloned().map(Box::new),
                actual: a.cloned().map(Box::new),
            });
        }
    }
    if let Some(f) = &transcript.final_state {
        if f.kb != *session.kb() || f.world != *session.world() {
            return Ok(ReplayReport::FinalStateMismatch);
        }
    }
    Ok(ReplayReport::Equal)
}
