use std::collections::VecDeque;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The narrowly scoped language tasks the learning loop delegates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subroutine {
    Segment,
    Map,
    Ground,
    Verbalize,
    Paraphrase,
    Name,
    Generalize,
}

impl Subroutine {
    pub const ALL: [Subroutine; 7] = [
        Subroutine::Segment,
        Subroutine::Map,
        Subroutine::Ground,
        Subroutine::Verbalize,
        Subroutine::Paraphrase,
        Subroutine::Name,
        Subroutine::Generalize,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Subroutine::Segment => "segment",
            Subroutine::Map => "map",
            Subroutine::Ground => "ground",
            Subroutine::Verbalize => "verbalize",
            Subroutine::Paraphrase => "paraphrase",
            Subroutine::Name => "name",
            Subroutine::Generalize => "generalize",
        }
    }
}

impl fmt::Display for Subroutine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        Self {
            role,
            content: content.into(),
        }
    }
}

/// A rendered request. `inputs` carries the same data as the messages in
/// structured form so rule-based backends need not parse prose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prompt {
    pub subroutine: Subroutine,
    pub version: String,
    pub messages: Vec<Message>,
    pub inputs: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("request timed out")]
    Timeout,
    #[error("no recorded response left for {0}")]
    Exhausted(Subroutine),
    #[error("recorded prompt differs from the one issued for {0}")]
    Diverged(Subroutine),
}

/// Anything that can answer a prompt with raw text.
pub trait LmBackend: Send + Sync {
    /// Short label recorded in session configs, e.g. `mock` or `remote`.
    fn kind(&self) -> &str;

    fn complete(&self, prompt: &Prompt) -> Result<String, BackendError>;
}

impl<B: LmBackend + ?Sized> LmBackend for Arc<B> {
    fn kind(&self) -> &str {
        (**self).kind()
    }

    fn complete(&self, prompt: &Prompt) -> Result<String, BackendError> {
        (**self).complete(prompt)
    }
}

/// Wraps another backend and answers selected prompts from a script first.
///
/// Each rule matches a subroutine and optionally a substring of the
/// structured inputs; matching rules hand out their queued responses in
/// order and fall through to the inner backend once empty.
pub struct ScriptedBackend {
    inner: Arc<dyn LmBackend>,
    rules: Mutex<Vec<ScriptRule>>,
}

struct ScriptRule {
    subroutine: Subroutine,
    needle: Option<String>,
    responses: VecDeque<String>,
    sticky: bool,
}

impl ScriptedBackend {
    pub fn new(inner: Arc<dyn LmBackend>) -> Self {
        Self {
            inner,
            rules: Mutex::new(Vec::new()),
        }
    }

    /// Queue one-shot responses for `subroutine` prompts whose inputs contain
    /// `needle`.
    pub fn respond(
        self,
        subroutine: Subroutine,
        needle: Option<&str>,
        responses: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        self.push(subroutine, needle, responses, false)
    }

    /// Like [`ScriptedBackend::respond`], but the last response repeats forever.
    pub fn always(self, subroutine: Subroutine, needle: Option<&str>, response: &str) -> Self {
        self.push(subroutine, needle, [response], true)
    }

    fn push(
        self,
        subroutine: Subroutine,
        needle: Option<&str>,
        responses: impl IntoIterator<Item = impl Into<String>>,
        sticky: bool,
    ) -> Self {
        self.rules.lock().unwrap().push(ScriptRule {
            subroutine,
            needle: needle.map(str::to_string),
            responses: responses.into_iter().map(Into::into).collect(),
            sticky,
        });
        self
    }
}

impl LmBackend for ScriptedBackend {
    fn kind(&self) -> &str {
        self.inner.kind()
    }

    fn complete(&self, prompt: &Prompt) -> Result<String, BackendError> {
        let haystack = prompt.inputs.to_string();
        {
            let mut rules = self.rules.lock().unwrap();
            for rule in rules.iter_mut() {
                if rule.subroutine != prompt.subroutine {
                    continue;
                }
                if let Some(needle) = &rule.needle {
                    if !haystack.contains(needle.as_str()) {
                        continue;
                    }
                }
                if rule.sticky && rule.responses.len() == 1 {
                    return Ok(rule.responses[0].clone());
                }
                if let Some(r) = rule.responses.pop_front() {
                    return Ok(r);
                }
            }
        }
        self.inner.complete(prompt)
    }
}

/// Serves responses captured in a transcript, in order, without contacting
/// any model. Used for replay.
pub struct RecordedBackend {
    kind: String,
    queue: Mutex<VecDeque<RecordedCall>>,
}

#[derive(Debug, Clone)]
pub struct RecordedCall {
    pub subroutine: Subroutine,
    /// Rendered user message of the first attempt, when known.
    pub prompt: Option<String>,
    pub responses: Vec<String>,
    pub error: Option<BackendError>,
}

impl RecordedBackend {
    pub fn new(kind: impl Into<String>, calls: impl IntoIterator<Item = RecordedCall>) -> Self {
        Self {
            kind: kind.into(),
            queue: Mutex::new(calls.into_iter().collect()),
        }
    }

    pub fn remaining(&self) -> usize {
        self.queue.lock().unwrap().len()
    }
}

impl LmBackend for RecordedBackend {
    fn kind(&self) -> &str {
        &self.kind
    }

    fn complete(&self, prompt: &Prompt) -> Result<String, BackendError> {
        let mut queue = self.queue.lock().unwrap();
        let attempt = prompt
            .messages
            .iter()
            .filter(|m| m.role == Role::Assistant)
            .count();
        let front = queue
            .front_mut()
            .ok_or(BackendError::Exhausted(prompt.subroutine))?;
        if front.subroutine != prompt.subroutine {
            return Err(BackendError::Diverged(prompt.subroutine));
        }
        if attempt == 0 {
            if let (Some(recorded), Some(first_user)) = (
                &front.prompt,
                prompt.messages.iter().find(|m| m.role == Role::User),
            ) {
                if recorded != &first_user.content {
                    return Err(BackendError::Diverged(prompt.subroutine));
                }
            }
        }
        let result = match front.responses.get(attempt) {
            Some(r) => Ok(r.clone()),
            None => Err(front
                .error
                .clone()
                .unwrap_or(BackendError::Exhausted(prompt.subroutine))),
        };
        // The call is consumed once its last recorded attempt has been served.
        let total = front.responses.len() + usize::from(front.error.is_some());
        let served_all = attempt + 1 >= total;
        if served_all {
            queue.pop_front();
        }
        result
    }
}
