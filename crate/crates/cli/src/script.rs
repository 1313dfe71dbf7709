//! Line-oriented teaching scripts.
//!
//! ```text
//! # comments and blank lines are ignored
//! say Cook an onion.
//! approve            # the pending confirmation
//! approve all        # every pending confirmation
//! correct none
//! undo
//! expect_milestone PickedUpOnion
//! expect_knowledge get, put, turnOn
//! expect_question How do I cook
//! ```

use tasklearn::env::Milestone;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Directive {
    Say(String),
    Approve,
    ApproveAll,
    Correct(String),
    Undo,
    ExpectMilestone(Milestone),
    ExpectKnowledge(Vec<String>),
    ExpectQuestion(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    /// 1-based line in the source file.
    pub number: usize,
    pub directive: Directive,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Script {
    pub lines: Vec<Line>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl Script {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut lines = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let number = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (word, rest) = match trimmed.split_once(char::is_whitespace) {
                Some((w, r)) => (w, r.trim()),
                None => (trimmed, ""),
            };
            let err = |message: String| ParseError { line: number, message };
            let needs_arg = |what: &str| {
                if rest.is_empty() {
                    Err(err(format!("`{word}` needs {what}")))
                } else {
                    Ok(rest.to_string())
                }
            };
            let no_arg = |d: Directive| {
                if rest.is_empty() || rest.starts_with('#') {
                    Ok(d)
                } else {
                    Err(err(format!("`{word}` takes no argument, got `{rest}`")))
                }
            };
            let directive = match word {
                "say" => Directive::Say(needs_arg("a message")?),
                "approve" if rest == "all" => Directive::ApproveAll,
                "approve" => no_arg(Directive::Approve)?,
                // an empty correction is meaningful for list answers
                "correct" => Directive::Correct(rest.to_string()),
                "undo" => no_arg(Directive::Undo)?,
                "expect_milestone" => {
                    let name = needs_arg("a milestone name")?;
                    Directive::ExpectMilestone(
                        Milestone::from_name(&name)
                            .ok_or_else(|| err(format!("unknown milestone `{name}`")))?,
                    )
                }
                "expect_knowledge" => Directive::ExpectKnowledge(
                    needs_arg("action names")?
                        .split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect(),
                ),
                "expect_question" => Directive::ExpectQuestion(needs_arg("a substring")?),
                other => return Err(err(format!("unknown directive `{other}`"))),
            };
            lines.push(Line { number, directive });
        }
        Ok(Self { lines })
    }
}
