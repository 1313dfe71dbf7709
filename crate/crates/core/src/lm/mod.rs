//! Language-model subroutines.
//!
//! Each subroutine renders a versioned prompt, queries the backend through
//! the scold-and-retry loop, parses the structured answer and validates it
//! against the current knowledge base or world. Every call yields an
//! [`Exchange`] record, successful or not, so sessions can be replayed.

pub mod backend;
pub mod mock;
pub mod parse;
pub mod prompts;
pub mod refusal;
#[cfg(feature = "remote")]
pub mod remote;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub use backend::{
    BackendError, LmBackend, Message, Prompt, RecordedBackend, RecordedCall, Role, ScriptedBackend,
    Subroutine,
};
pub use mock::{base_name, MockBackend};
pub use prompts::PromptLibrary;
pub use refusal::{with_scolding, LmConfig, ScoldError, ScoldTrace};

use crate::env::ObjectRef;
use crate::htn::{ActionSchema, KnowledgeBase};

/// One atomic step of an instruction, in natural language.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Segment(pub String);

impl Segment {
    pub fn new(text: impl Into<String>) -> Self {
        Self(text.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for Segment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "action", rename_all = "snake_case")]
pub enum ActionMatch {
    Known(String),
    NoMatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubroutineError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("model kept refusing")]
    RefusedAfterRetries,
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("response names an unknown object: {0}")]
    InvalidObject(String),
    #[error("expected {expected} arguments, got {got}")]
    WrongArity { expected: usize, got: usize },
}

/// Record of one subroutine call: what was asked, every raw response
/// (including refusals), and how it ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exchange {
    pub subroutine: Subroutine,
    pub prompt_version: String,
    /// Rendered user message of the first attempt.
    pub prompt: String,
    pub inputs: Value,
    pub responses: Vec<String>,
    pub scolds: u32,
    /// Validated result, when the call succeeded.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub result: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    /// Set when the backend itself failed (as opposed to a bad answer).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub backend_error: Option<String>,
}

impl Exchange {
    /// The replayable part of this exchange.
    pub fn to_recorded(&self) -> RecordedCall {
        RecordedCall {
            subroutine: self.subroutine,
            prompt: Some(self.prompt.clone()),
            responses: self.responses.clone(),
            error: self.backend_error.clone().map(BackendError::Transport),
        }
    }
}

#[derive(Debug, Deserialize)]
struct StepsOut {
    steps: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct MapOut {
    action: Option<String>,
}

#[derive(Debug, Deserialize)]
struct ArgsOut {
    args: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct SentenceOut {
    sentence: String,
}

#[derive(Debug, Deserialize)]
struct ParaphraseOut {
    paraphrase: bool,
}

#[derive(Debug, Deserialize)]
struct NameOut {
    name: String,
}

#[derive(Debug, Deserialize)]
struct GeneralizeOut {
    generalize: Vec<String>,
}

pub type Outcome<T> = (Result<T, SubroutineError>, Exchange);

/// The seven subroutines bound to a backend, prompt set and refusal policy.
#[derive(Clone)]
pub struct Subroutines {
    backend: Arc<dyn LmBackend>,
    prompts: PromptLibrary,
    config: LmConfig,
}

impl Subroutines {
    pub fn new(backend: Arc<dyn LmBackend>, prompts: PromptLibrary, config: LmConfig) -> Self {
        Self {
            backend,
            prompts,
            config,
        }
    }

    pub fn with_backend(backend: Arc<dyn LmBackend>) -> Self {
        Self::new(backend, PromptLibrary::default(), LmConfig::default())
    }

    pub fn backend(&self) -> &Arc<dyn LmBackend> {
        &self.backend
    }

    pub fn set_backend(&mut self, backend: Arc<dyn LmBackend>) {
        self.backend = backend;
    }

    pub fn config(&self) -> &LmConfig {
        &self.config
    }

    pub fn prompts(&self) -> &PromptLibrary {
        &self.prompts
    }

    /// Runs one subroutine: query with scolding, parse as `R`, then
    /// `validate` into the final result.
    fn call<R, T>(
        &self,
        sub: Subroutine,
        inputs: Value,
        validate: impl FnOnce(R) -> Result<T, SubroutineError>,
        on_parse_error: impl FnOnce(String) -> Result<T, SubroutineError>,
    ) -> Outcome<T>
    where
        R: serde::de::DeserializeOwned,
        T: Serialize,
    {
        let prompt = self.prompts.render(sub, inputs.clone());
        let first_user = prompt
            .messages
            .iter()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.clone())
            .unwrap_or_default();
        let (raw, trace) = with_scolding(self.backend.as_ref(), &prompt, &self.config);
        let mut exchange = Exchange {
            subroutine: sub,
            prompt_version: self.prompts.version().to_string(),
            prompt: first_user,
            inputs,
            responses: trace.responses,
            scolds: trace.scolds,
            result: None,
            error: None,
            backend_error: None,
        };
        let result = match raw {
            Err(ScoldError::Refused) => Err(SubroutineError::RefusedAfterRetries),
            Err(ScoldError::Backend(e)) => {
                exchange.backend_error = Some(e.to_string());
                Err(SubroutineError::Backend(e))
            }
            Ok(raw) => match parse::parse_structured::<R>(&raw) {
                Ok(parsed) => validate(parsed),
                Err(e) => on_parse_error(e),
            },
        };
        match &result {
            Ok(v) => exchange.result = serde_json::to_value(v).ok(),
            Err(e) => exchange.error = Some(e.to_string()),
        }
        (result, exchange)
    }

    pub fn segment(&self, utterance: &str, known_objects: &[ObjectRef]) -> Outcome<Vec<Segment>> {
        self.call(
            Subroutine::Segment,
            json!({"utterance": utterance, "known_objects": known_objects}),
            |out: StepsOut| {
                let steps: Vec<Segment> = out
                    .steps
                    .into_iter()
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .map(Segment)
                    .collect();
                if steps.is_empty() {
                    Err(SubroutineError::Malformed("no steps".into()))
                } else {
                    Ok(steps)
                }
            },
            |e| Err(SubroutineError::Malformed(e)),
        )
    }

    /// A name outside the knowledge base is treated as "no match".
    pub fn map(&self, segment: &Segment, kb: &KnowledgeBase) -> Outcome<ActionMatch> {
        let actions: Vec<Value> = kb.schemas().map(describe).collect();
        self.call(
            Subroutine::Map,
            json!({"segment": segment, "actions": actions}),
            |out: MapOut| {
                Ok(match out.action {
                    Some(name) if kb.contains(name.trim()) => ActionMatch::Known(name.trim().to_string()),
                    Some(name) if name.trim().is_empty() || is_none_word(&name) => ActionMatch::NoMatch,
                    Some(name) => {
                        log::info!("map answered unknown action {name:?}; treating as no match");
                        ActionMatch::NoMatch
                    }
                    None => ActionMatch::NoMatch,
                })
            },
            |e| Err(SubroutineError::Malformed(e)),
        )
    }

    pub fn ground(
        &self,
        segment: &Segment,
        action: &ActionSchema,
        objects: &[ObjectRef],
    ) -> Outcome<Vec<ObjectRef>> {
        let expected = action.arity();
        self.call(
            Subroutine::Ground,
            json!({"segment": segment, "action": describe(action), "objects": objects}),
            |out: ArgsOut| {
                if out.args.len() != expected {
                    return Err(SubroutineError::WrongArity {
                        expected,
                        got: out.args.len(),
                    });
                }
                out.args
                    .into_iter()
                    .map(|a| {
                        let a = a.trim().to_string();
                        objects
                            .iter()
                            .find(|o| o.as_str() == a)
                            .cloned()
                            .ok_or(SubroutineError::InvalidObject(a))
                    })
                    .collect()
            },
            |e| Err(SubroutineError::Malformed(e)),
        )
    }

    pub fn verbalize(&self, action: &ActionSchema, args: &[ObjectRef]) -> Outcome<String> {
        self.call(
            Subroutine::Verbalize,
            json!({"action": describe(action), "args": args}),
            |out: SentenceOut| {
                let s = out.sentence.trim().to_string();
                if s.is_empty() {
                    Err(SubroutineError::Malformed("empty sentence".into()))
                } else {
                    Ok(s)
                }
            },
            |e| Err(SubroutineError::Malformed(e)),
        )
    }

    /// An unparseable verdict counts as "not a paraphrase".
    pub fn paraphrase(&self, a: &str, b: &str) -> Outcome<bool> {
        self.call(
            Subroutine::Paraphrase,
            json!({"a": a, "b": b}),
            |out: ParaphraseOut| Ok(out.paraphrase),
            |e| {
                log::info!("unparseable paraphrase verdict ({e}); treating as false");
                Ok(false)
            },
        )
    }

    /// Returns an identifier not yet used in `kb`.
    pub fn name(&self, source_text: &str, kb: &KnowledgeBase) -> Outcome<String> {
        self.call(
            Subroutine::Name,
            json!({"source_text": source_text, "existing_names": kb.names()}),
            |out: NameOut| match sanitize_identifier(&out.name) {
                Some(base) => Ok(kb.unique_name(&base)),
                None => Err(SubroutineError::Malformed(format!(
                    "not usable as a name: {:?}",
                    out.name
                ))),
            },
            |e| Err(SubroutineError::Malformed(e)),
        )
    }

    /// Objects to lift into parameters; always a subset of `used_args`, in
    /// `used_args` order.
    pub fn generalize(&self, source_text: &str, used_args: &[ObjectRef]) -> Outcome<Vec<ObjectRef>> {
        self.call(
            Subroutine::Generalize,
            json!({"source_text": source_text, "used_args": used_args}),
            |out: GeneralizeOut| {
                let chosen: Vec<String> = out.generalize.iter().map(|s| s.trim().to_string()).collect();
                for c in &chosen {
                    if !used_args.iter().any(|u| u.as_str() == c) {
                        log::info!("generalize chose {c:?}, which the action never used; dropped");
                    }
                }
                Ok(used_args
                    .iter()
                    .filter(|u| chosen.iter().any(|c| c == u.as_str()))
                    .cloned()
                    .collect())
            },
            |e| Err(SubroutineError::Malformed(e)),
        )
    }
}

fn describe(schema: &ActionSchema) -> Value {
    json!({"name": schema.name, "params": schema.params, "source_text": schema.source_text})
}

fn is_none_word(s: &str) -> bool {
    matches!(s.trim().to_lowercase().as_str(), "none" | "null" | "no match" | "nomatch")
}

/// Turns free text like "turn on" or "Turn_On!" into `turnOn`.
pub fn sanitize_identifier(raw: &str) -> Option<String> {
    let mut out = String::new();
    for (i, word) in raw
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .enumerate()
    {
        let mut chars = word.chars();
        let first = chars.next()?;
        if i == 0 {
            out.push(first.to_ascii_lowercase());
        } else {
            out.push(first.to_ascii_uppercase());
        }
        out.push_str(chars.as_str());
    }
    let starts_ok = out.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
    (starts_ok && crate::htn::is_identifier(&out)).then_some(out)
}
