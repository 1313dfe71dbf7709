//! Browser bindings: one in-page teaching session on the mock backend.
//!
//! Every call returns JSON text so the page needs no generated types.

use std::sync::Arc;

use serde_json::json;
use tasklearn::dialog::{Input, LoggedEvent, Session, SessionConfig, Verdict};
use tasklearn::lm::{MockBackend, Subroutines};
use wasm_bindgen::prelude::*;

/// The session logic, kept free of JS types so it runs in native tests.
pub struct Demo {
    session: Session,
}

impl Demo {
    pub fn new(confirmations: bool) -> Self {
        let config = SessionConfig {
            confirmations,
            ..SessionConfig::default()
        };
        let lm = Subroutines::with_backend(Arc::new(MockBackend::default()));
        Self {
            session: Session::new(config, lm).expect("bundled kitchen is valid"),
        }
    }

    fn apply(&mut self, input: Input) -> Result<String, String> {
        let events = self.session.apply(input).map_err(|e| e.to_string())?;
        Ok(self.reply(&events))
    }

    /// New events plus the resulting view.
    fn reply(&self, events: &[LoggedEvent]) -> String {
        json!({ "events": events, "state": self.session.view() }).to_string()
    }

    pub fn say(&mut self, text: &str) -> Result<String, String> {
        self.apply(Input::Say { text: text.to_string() })
    }

    pub fn approve(&mut self) -> Result<String, String> {
        self.apply(Input::Confirm { verdict: Verdict::Approve })
    }

    pub fn correct(&mut self, value: &str) -> Result<String, String> {
        self.apply(Input::Confirm {
            verdict: Verdict::Correct(value.to_string()),
        })
    }

    pub fn undo(&mut self) -> String {
        let events = self.session.undo();
        self.reply(&events)
    }

    pub fn state(&self) -> String {
        self.reply(self.session.events())
    }
}

#[wasm_bindgen]
pub struct KitchenDemo {
    inner: Demo,
}

#[wasm_bindgen]
impl KitchenDemo {
    #[wasm_bindgen(constructor)]
    pub fn new(confirmations: bool) -> KitchenDemo {
        KitchenDemo {
            inner: Demo::new(confirmations),
        }
    }

    pub fn say(&mut self, text: &str) -> Result<String, JsValue> {
        self.inner.say(text).map_err(|e| JsValue::from_str(&e))
    }

    pub fn approve(&mut self) -> Result<String, JsValue> {
        self.inner.approve().map_err(|e| JsValue::from_str(&e))
    }

    pub fn correct(&mut self, value: &str) -> Result<String, JsValue> {
        self.inner.correct(value).map_err(|e| JsValue::from_str(&e))
    }

    pub fn undo(&mut self) -> String {
        self.inner.undo()
    }

    /// Full event log and view, for the first render.
    pub fn state(&self) -> String {
        self.inner.state()
    }
}
