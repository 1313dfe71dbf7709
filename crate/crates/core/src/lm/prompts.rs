use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::Value;

use super::backend::{Message, Prompt, Role, Subroutine};

const BUNDLED: &str = include_str!("../../data/prompts.toml");

#[derive(Debug, Clone, Deserialize)]
struct Template {
    system: String,
    user: String,
}

/// Versioned prompt templates, one per subroutine.
#[derive(Debug, Clone)]
pub struct PromptLibrary {
    version: String,
    templates: BTreeMap<Subroutine, Template>,
}

impl Default for PromptLibrary {
    fn default() -> Self {
        Self::from_toml(BUNDLED).expect("bundled prompts parse")
    }
}

impl PromptLibrary {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        #[derive(Deserialize)]
        struct File {
            version: String,
            #[serde(flatten)]
            templates: BTreeMap<String, Template>,
        }
        let file: File = toml::from_str(text).map_err(|e| e.to_string())?;
        let mut templates = BTreeMap::new();
        for sub in Subroutine::ALL {
            let t = file
                .templates
                .get(sub.as_str())
                .ok_or_else(|| format!("missing template for {sub}"))?;
            templates.insert(sub, t.clone());
        }
        Ok(Self {
            version: file.version,
            templates,
        })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn render(&self, subroutine: Subroutine, inputs: Value) -> Prompt {
        let t = &self.templates[&subroutine];
        Prompt {
            subroutine,
            version: self.version.clone(),
            messages: vec![
                Message::new(Role::System, t.system.trim()),
                Message::new(Role::User, fill(t.user.trim(), &inputs)),
            ],
            inputs,
        }
    }
}

fn fill(template: &str, inputs: &Value) -> String {
    let mut out = template.to_string();
    if let Value::Object(map) = inputs {
        for (key, value) in map {
            let text = match value {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out = out.replace(&format!("{{{key}}}"), &text);
        }
    }
    out
}
