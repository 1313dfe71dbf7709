//! Refusal detection and scold-and-retry.

use serde::{Deserialize, Serialize};

use super::backend::{BackendError, LmBackend, Message, Prompt, Role};

const AI_PHRASE: &str = "as an ai language model";
const DEFAULT_CONFIG: &str = include_str!("../../data/lm.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LmConfig {
    pub scold_budget: u32,
    pub apology_lexicon: Vec<String>,
    pub scold_message: String,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self::from_toml(DEFAULT_CONFIG).expect("bundled lm config parses")
    }
}

impl LmConfig {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn with_scold_budget(mut self, budget: u32) -> Self {
        self.scold_budget = budget;
        self
    }

    /// True when `text` reads as a refusal: it contains one of the apology
    /// lexemes or the "as an AI language model" phrase, ignoring case.
    pub fn detect_refusal(&self, text: &str) -> bool {
        let lower = text.to_lowercase();
        lower.contains(AI_PHRASE)
            || self
                .apology_lexicon
                .iter()
                .any(|w| lower.contains(&w.to_lowercase()))
    }
}

/// Every raw response seen while answering one prompt.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoldTrace {
    pub responses: Vec<String>,
    pub scolds: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScoldError {
    Refused,
    Backend(BackendError),
}

/// Queries `backend`; each refusal is answered with the scold message and the
/// question re-asked, at most `scold_budget` times.
pub fn with_scolding(
    backend: &dyn LmBackend,
    prompt: &Prompt,
    config: &LmConfig,
) -> (Result<String, ScoldError>, ScoldTrace) {
    let mut trace = ScoldTrace::default();
    let mut conversation = prompt.clone();
    loop {
        let raw = match backend.complete(&conversation) {
            Ok(raw) => raw,
            Err(e) => return (Err(ScoldError::Backend(e)), trace),
        };
        trace.responses.push(raw.clone());
        if !config.detect_refusal(&raw) {
            return (Ok(raw), trace);
        }
        if trace.scolds >= config.scold_budget {
            log::warn!("{} refused after {} scolds", prompt.subroutine, trace.scolds);
            return (Err(ScoldError::Refused), trace);
        }
        trace.scolds += 1;
        conversation.messages.push(Message::new(Role::Assistant, raw));
        conversation
            .messages
            .push(Message::new(Role::User, config.scold_message.trim()));
    }
}
