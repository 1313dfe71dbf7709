//! Golden transcripts and the backends that produce them.

use std::path::PathBuf;
use std::sync::Arc;

use tasklearn::lm::{BackendError, LmBackend, MockBackend, Prompt, Subroutine};
use tasklearn::transcript::Transcript;
use tasklearn_cli::{run_script, scripts, RunConfig, Script};

/// Stands in for a hosted model: labelled `remote`, chatty around its JSON,
/// and refusing the first segmentation request.
pub struct ChattyRemote {
    inner: MockBackend,
    refused: std::sync::atomic::AtomicBool,
}

impl ChattyRemote {
    pub fn new() -> Self {
        Self {
            inner: MockBackend::default(),
            refused: Default::default(),
        }
    }
}

impl LmBackend for ChattyRemote {
    fn kind(&self) -> &str {
        "remote"
    }

    fn complete(&self, prompt: &Prompt) -> Result<String, BackendError> {
        use std::sync::atomic::Ordering;
        if prompt.subroutine == Subroutine::Segment && !self.refused.swap(true, Ordering::SeqCst) {
            return Ok("As an AI language model, I cannot cook.".into());
        }
        let answer = self.inner.complete(prompt)?;
        Ok(format!("Sure! Here you go:\n```json\n{answer}\n```"))
    }
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Every golden: (file stem, freshly generated transcript).
pub fn generate_goldens() -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (name, text) in scripts::ALL {
        let script = Script::parse(text).unwrap();
        let outcome = run_script(&script, &RunConfig::new(Arc::new(MockBackend::default()))).unwrap();
        assert!(outcome.failure.is_none(), "{name}: {:?}", outcome.failure);
        out.push((name.to_string(), Transcript::of(&outcome.session).to_jsonl()));
    }
    let script = Script::parse(scripts::ONION_SOUP).unwrap();
    let outcome = run_script(&script, &RunConfig::new(Arc::new(ChattyRemote::new()))).unwrap();
    assert!(outcome.failure.is_none(), "remote: {:?}", outcome.failure);
    out.push(("remote_onion_soup".into(), Transcript::of(&outcome.session).to_jsonl()));
    out
}
