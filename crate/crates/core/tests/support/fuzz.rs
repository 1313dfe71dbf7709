//! A backend that answers with adversarial junk, and a driver that pushes a
//! session through it.

use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tasklearn::dialog::{ConfirmationKind, DialogEvent, Session, Verdict};
use tasklearn::lm::{BackendError, LmBackend, Prompt, Subroutine};

const WORDS: [&str; 12] = [
    "washTheKnife", "moveTo", "pressSpace", "garlic", "onion", "pot", "knife", "get",
    "fly away", "", "null", "DROP TABLE",
];

pub struct FuzzBackend {
    rng: Mutex<ChaCha8Rng>,
}

impl FuzzBackend {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: Mutex::new(ChaCha8Rng::seed_from_u64(seed)),
        }
    }
}

fn word(rng: &mut ChaCha8Rng) -> String {
    WORDS[rng.gen_range(0..WORDS.len())].to_string()
}

fn words(rng: &mut ChaCha8Rng) -> Vec<String> {
    (0..rng.gen_range(0..4)).map(|_| word(rng)).collect()
}

/// One adversarial response for `sub`.
pub fn adversarial(rng: &mut ChaCha8Rng, sub: Subroutine) -> String {
    match rng.gen_range(0..8) {
        0 => "As an AI language model, I cannot help with cooking.".into(),
        1 => "I'm sorry, I don't know.".into(),
        2 => "{\"steps\": [".into(),
        3 => "definitely moveTo".into(),
        4 => format!("Sure! {{\"action\": \"{}\"}} hope that helps", word(rng)),
        5 => serde_json::json!({"action": 7, "args": "onion", "steps": null}).to_string(),
        _ => {
            let v = match sub {
                Subroutine::Segment => serde_json::json!({"steps": words(rng)}),
                Subroutine::Map => serde_json::json!({"action": word(rng)}),
                Subroutine::Ground => serde_json::json!({"args": words(rng)}),
                Subroutine::Verbalize => serde_json::json!({"sentence": word(rng)}),
                Subroutine::Paraphrase => serde_json::json!({"paraphrase": rng.gen_bool(0.5)}),
                Subroutine::Name => serde_json::json!({"name": word(rng)}),
                Subroutine::Generalize => serde_json::json!({"generalize": words(rng)}),
            };
            v.to_string()
        }
    }
}

impl LmBackend for FuzzBackend {
    fn kind(&self) -> &str {
        "fuzz"
    }

    fn complete(&self, prompt: &Prompt) -> Result<String, BackendError> {
        let mut rng = self.rng.lock().unwrap();
        if rng.gen_ratio(1, 40) {
            return Err(BackendError::Timeout);
        }
        Ok(adversarial(&mut rng, prompt.subroutine))
    }
}

const COMMANDS: [&str; 6] = [
    "Cook an onion.",
    "go to the pot and press space",
    "wash the knife then juggle",
    "put it in there",
    "",
    "get any red vegetable",
];

/// Gives `steps` inputs: messages when one is expected, otherwise approvals,
/// falling back to corrections and undo when an answer is refused.
pub fn drive(session: &mut Session, seed: u64, steps: usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..steps {
        let Some(request) = session.pending().cloned() else {
            let text = COMMANDS[rng.gen_range(0..COMMANDS.len())];
            session.say(text).expect("messages are accepted outside confirmations");
            continue;
        };
        if rng.gen_ratio(1, 10) {
            session.undo();
            continue;
        }
        let mut tries = vec![Verdict::Approve];
        match request.kind {
            ConfirmationKind::Segmentation => tries.push(Verdict::Correct("press space".into())),
            ConfirmationKind::Mapping | ConfirmationKind::NewAction => {
                tries.push(Verdict::Correct("none".into()))
            }
            ConfirmationKind::Grounding | ConfirmationKind::Generalization => {
                let first = request.options.first().cloned().unwrap_or_default();
                for n in 0..4 {
                    tries.push(Verdict::Correct(vec![first.clone(); n].join(",")));
                }
            }
            ConfirmationKind::TaskCorrectness => {}
        }
        let mut settled = false;
        for verdict in tries {
            let events = session.resolve(verdict).expect("a confirmation is pending");
            let accepted = events.iter().any(|e| {
                matches!(e.event, DialogEvent::ConfirmationResolved { accepted: true, .. })
            });
            if accepted {
                settled = true;
                break;
            }
        }
        if !settled {
            session.undo();
        }
    }
}
