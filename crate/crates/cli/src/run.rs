//! Drives an in-process session through a script.

use std::sync::Arc;

use tasklearn::dialog::{DialogEvent, Input, Session, SessionConfig, SessionError, Verdict};
use tasklearn::lm::{LmBackend, LmConfig, PromptLibrary, Subroutines};
use thiserror::Error;

use crate::script::{Directive, Script};

#[derive(Clone)]
pub struct RunConfig {
    pub confirmations: bool,
    pub backend: Arc<dyn LmBackend>,
    /// Layout text; the bundled kitchen when absent.
    pub layout: Option<String>,
}

impl RunConfig {
    pub fn new(backend: Arc<dyn LmBackend>) -> Self {
        Self {
            confirmations: true,
            backend,
            layout: None,
        }
    }

    pub fn session(&self) -> Result<Session, SessionError> {
        let defaults = SessionConfig::default();
        let config = SessionConfig {
            confirmations: self.confirmations,
            backend: self.backend.kind().to_string(),
            layout: self.layout.clone().unwrap_or(defaults.layout.clone()),
            ..defaults
        };
        let lm = Subroutines::new(
            self.backend.clone(),
            PromptLibrary::default(),
            LmConfig::default().with_scold_budget(config.scold_budget),
        );
        Session::new(config, lm)
    }
}

/// A directive that could not be carried out or whose expectation was unmet.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("directive {directive} (line {line}) failed at event {event_index}: {message}")]
pub struct Failure {
    /// 1-based position among the script's directives.
    pub directive: usize,
    pub line: usize,
    /// Sequence number of the last logged event when the check ran.
    pub event_index: u64,
    pub message: String,
}

/// Runs `script` on a new session. `Err` only when the session cannot be
/// created; a failed directive stops the run and is reported in the outcome.
pub fn run_script(script: &Script, config: &RunConfig) -> Result<RunOutcome, SessionError> {
    let mut session = config.session()?;
    let failure = run_on(&mut session, script).err();
    Ok(RunOutcome { session, failure })
}

pub struct RunOutcome {
    pub session: Session,
    pub failure: Option<Failure>,
}

/// Runs `script` on an existing session, stopping at the first failure.
pub fn run_on(session: &mut Session, script: &Script) -> Result<(), Failure> {
    let mut since_say = session.events().len();
    for (i, line) in script.lines.iter().enumerate() {
        let fail = |session: &Session, message: String| Failure {
            directive: i + 1,
            line: line.number,
            event_index: session.events().last().map_or(0, |e| e.seq),
            message,
        };
        let apply = |session: &mut Session, input: Input| {
            session.apply(input).map(|_| ()).map_err(|e| e.to_string())
        };
        let result = match &line.directive {
            Directive::Say(text) => {
                since_say = session.events().len();
                apply(session, Input::Say { text: text.clone() })
            }
            Directive::Approve => apply(session, Input::Confirm { verdict: Verdict::Approve }),
            Directive::ApproveAll => {
                let mut r = Ok(());
                while r.is_ok() && session.pending().is_some() {
                    r = apply(session, Input::Confirm { verdict: Verdict::Approve });
                }
                r
            }
            Directive::Correct(value) => apply(
                session,
                Input::Confirm {
                    verdict: Verdict::Correct(value.clone()),
                },
            ),
            Directive::Undo => apply(session, Input::Undo),
            Directive::ExpectMilestone(m) => {
                if session.world().milestones.contains(m) {
                    Ok(())
                } else {
                    Err(format!("milestone {} not reached", m.name()))
                }
            }
            Directive::ExpectKnowledge(names) => {
                let known: Vec<String> = session.knowledge_display().into_iter().map(|k| k.name).collect();
                let missing: Vec<&String> = names.iter().filter(|n| !known.contains(n)).collect();
                if missing.is_empty() {
                    Ok(())
                } else {
                    Err(format!("not in knowledge: {missing:?} (known: {known:?})"))
                }
            }
            Directive::ExpectQuestion(needle) => {
                let asked = session.events()[since_say.min(session.events().len())..]
                    .iter()
                    .any(|e| match &e.event {
                        DialogEvent::AgentMessage { text } => text.contains(needle.as_str()),
                        DialogEvent::ConfirmationIssued { request } => request.question.contains(needle.as_str()),
                        _ => false,
                    });
                if asked {
                    Ok(())
                } else {
                    Err(format!("no question containing `{needle}` since the last message"))
                }
            }
        };
        result.map_err(|m| fail(session, m))?;
    }
    Ok(())
}
