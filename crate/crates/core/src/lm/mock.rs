//! Deterministic rule-based backend.
//!
//! Answers every subroutine prompt from its structured inputs with a small
//! keyword engine: a concept table for verbs, an alias table for objects, a
//! clause splitter that understands "then", "and", "before" and "after",
//! pronoun and "there" resolution, and repetition adverbs. It covers the
//! onion-soup teaching curriculum so sessions can run without a network.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use serde::Deserialize;
use serde_json::{json, Value};

use super::backend::{BackendError, LmBackend, Prompt, Subroutine};

const BUNDLED_RULES: &str = include_str!("../../data/mock_rules.toml");

#[derive(Debug, Deserialize)]
struct RulesFile {
    concepts: IndexMap<String, Vec<String>>,
    lemmas: BTreeMap<String, String>,
    objects: IndexMap<String, Vec<String>>,
    anaphora: Anaphora,
    discourse: Discourse,
    verbs: Verbs,
}

#[derive(Debug, Deserialize)]
struct Anaphora {
    places: Vec<String>,
    pronouns: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct Discourse {
    markers: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct Verbs {
    extra: Vec<String>,
}

type Phrase = Vec<String>;

#[derive(Debug, Clone)]
pub struct MockRules {
    /// (concept, phrase), longest phrases first.
    concepts: Vec<(String, Phrase)>,
    lemmas: BTreeMap<String, String>,
    /// (object, alias), longest aliases first.
    objects: Vec<(String, Phrase)>,
    places: Vec<String>,
    pronouns: Vec<String>,
    markers: Vec<Phrase>,
    verbs: Vec<String>,
}

fn words(s: &str) -> Phrase {
    s.split_whitespace().map(str::to_lowercase).collect()
}

impl MockRules {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        let file: RulesFile = toml::from_str(text)?;
        let mut concepts: Vec<(String, Phrase)> = file
            .concepts
            .iter()
            .flat_map(|(c, phrases)| phrases.iter().map(move |p| (c.clone(), words(p))))
            .collect();
        concepts.sort_by_key(|(_, p)| std::cmp::Reverse(p.len()));
        let mut objects: Vec<(String, Phrase)> = file
            .objects
            .iter()
            .flat_map(|(o, aliases)| aliases.iter().map(move |a| (o.clone(), words(a))))
            .collect();
        objects.sort_by_key(|(_, p)| std::cmp::Reverse(p.len()));
        let mut markers: Vec<Phrase> = file.discourse.markers.iter().map(|m| words(m)).collect();
        markers.sort_by_key(|m| std::cmp::Reverse(m.len()));
        let mut verbs: Vec<String> = concepts.iter().map(|(_, p)| p[0].clone()).collect();
        verbs.extend(file.verbs.extra);
        verbs.sort();
        verbs.dedup();
        Ok(Self {
            concepts,
            lemmas: file.lemmas,
            objects,
            places: file.anaphora.places,
            pronouns: file.anaphora.pronouns,
            markers,
            verbs,
        })
    }

    fn lemma<'a>(&'a self, word: &'a str) -> &'a str {
        self.lemmas.get(word).map(String::as_str).unwrap_or(word)
    }

    fn is_verb(&self, word: &str) -> bool {
        let lemma = self.lemma(word);
        self.verbs.iter().any(|v| v == lemma)
    }

    /// The action concept a step expresses, from its leading verb phrase.
    pub fn concept(&self, text: &str) -> Option<String> {
        let toks: Vec<String> = tokenize(text).into_iter().filter(|t| t != ",").collect();
        let first = self.lemma(toks.first()?).to_string();
        let rest: Vec<&str> = toks[1..].iter().map(|t| self.lemma(t)).collect();
        self.concepts
            .iter()
            .find(|(_, phrase)| phrase[0] == first && is_subsequence(&phrase[1..], &rest))
            .map(|(c, _)| c.clone())
    }

    /// Concept if known, otherwise the leading verb itself.
    fn concept_or_verb(&self, text: &str) -> String {
        self.concept(text).unwrap_or_else(|| {
            tokenize(text)
                .first()
                .map(|t| self.lemma(t).to_string())
                .unwrap_or_default()
        })
    }

    /// Objects mentioned in `text`, in order of first mention. With
    /// `allowed`, only those names are reported (matched through the alias
    /// table or literally).
    pub fn mentions(&self, text: &str, allowed: Option<&[String]>) -> Vec<String> {
        let toks = tokenize(text);
        let mut out: Vec<String> = Vec::new();
        // a leading verb ("plate the soup") is not an object mention
        let mut i = usize::from(toks.first().is_some_and(|t| self.is_verb(t)));
        while i < toks.len() {
            match self.object_at(&toks, i, allowed) {
                Some((obj, len)) => {
                    if !out.contains(&obj) {
                        out.push(obj);
                    }
                    i += len;
                }
                None => i += 1,
            }
        }
        out
    }

    fn object_at(&self, toks: &[String], i: usize, allowed: Option<&[String]>) -> Option<(String, usize)> {
        let permitted = |o: &str| allowed.is_none_or(|a| a.iter().any(|x| x == o));
        if let Some(allowed) = allowed {
            if let Some(lit) = allowed.iter().find(|a| **a == toks[i]) {
                return Some((lit.clone(), 1));
            }
        }
        self.objects
            .iter()
            .filter(|(o, _)| permitted(o))
            .find(|(_, alias)| toks[i..].starts_with(alias))
            .map(|(o, alias)| (o.clone(), alias.len()))
    }

    fn strip_markers(&self, mut toks: &[String]) -> Vec<String> {
        loop {
            while toks.first().is_some_and(|t| t == ",") {
                toks = &toks[1..];
            }
            match self.markers.iter().find(|m| toks.starts_with(m)) {
                Some(m) => toks = &toks[m.len()..],
                None => break,
            }
        }
        toks.to_vec()
    }

    /// Splits a command into ordered atomic steps.
    pub fn segment(&self, utterance: &str, known_objects: &[String]) -> Vec<String> {
        let mut clauses: Vec<Clause> = Vec::new();
        for sentence in utterance.split(['.', '!', '?', ';', '\n']) {
            let toks = tokenize(sentence);
            if toks.is_empty() {
                continue;
            }
            let base = clauses.len();
            let (parts, order) = self.temporal_split(&toks);
            let mut sentence_clauses: Vec<Vec<Vec<String>>> = Vec::new();
            for part in parts {
                sentence_clauses.push(self.split_clauses(&part));
            }
            // chronological position of each textual part
            let mut rank = 0;
            let mut ranked: Vec<(usize, usize, Vec<String>)> = Vec::new();
            for (part_idx, part_clauses) in sentence_clauses.into_iter().enumerate() {
                for c in part_clauses {
                    ranked.push((order[part_idx], rank, c));
                    rank += 1;
                }
            }
            for (chrono, textual, toks) in ranked {
                clauses.push(Clause {
                    sentence: base,
                    chrono,
                    textual,
                    toks,
                });
            }
        }

        // Resolve references in textual order, before any reordering.
        let mut last_obj: Option<String> = None;
        let mut last_place: Option<String> = None;
        for clause in &mut clauses {
            let mut out: Vec<String> = Vec::new();
            let toks = std::mem::take(&mut clause.toks);
            let mut i = 0;
            while i < toks.len() {
                let t = &toks[i];
                if i == 0 && self.is_verb(t) {
                    out.push(t.clone());
                    i += 1;
                    continue;
                }
                if self.pronouns.contains(t) {
                    if let Some(obj) = &last_obj {
                        out.extend(["the".to_string(), obj.clone()]);
                        i += 1;
                        continue;
                    }
                }
                if t == "there" {
                    if let Some(place) = &last_place {
                        out.extend(["the".to_string(), place.clone()]);
                        i += 1;
                        continue;
                    }
                }
                if let Some((obj, len)) = self.object_at(&toks, i, None) {
                    if self.places.contains(&obj) {
                        last_place = Some(obj.clone());
                    }
                    last_obj = Some(obj);
                    out.extend(toks[i..i + len].iter().cloned());
                    i += len;
                    continue;
                }
                if let Some(lit) = known_objects.iter().find(|o| **o == *t) {
                    last_obj = Some(lit.clone());
                }
                out.push(t.clone());
                i += 1;
            }
            clause.toks = out;
        }

        clauses.sort_by_key(|c| (c.sentence, c.chrono, c.textual));
        let mut steps = Vec::new();
        for clause in clauses {
            let (mut toks, times) = strip_repetition(clause.toks);
            if let Some(first) = toks.first_mut() {
                *first = self.lemma(first).to_string();
            }
            let text = join_tokens(&toks);
            if text.is_empty() {
                continue;
            }
            for _ in 0..times {
                steps.push(text.clone());
            }
        }
        steps
    }

    /// Splits one sentence at "before"/"after" and reports the chronological
    /// rank of each textual part.
    fn temporal_split(&self, toks: &[String]) -> (Vec<Vec<String>>, Vec<usize>) {
        let toks = self.strip_markers(toks);
        let starts_clause = |i: usize| {
            toks.get(i + 1)
                .is_some_and(|n| self.is_verb(n) || n.ends_with("ing"))
        };
        // "after X, Y" / "before X, Y" / "once X, Y"
        if let Some(first) = toks.first() {
            if matches!(first.as_str(), "after" | "before" | "once" | "when") && starts_clause(0) {
                if let Some(comma) = toks.iter().position(|t| t == ",") {
                    let x = toks[1..comma].to_vec();
                    let y = toks[comma + 1..].to_vec();
                    let order = if first == "before" { vec![1, 0] } else { vec![0, 1] };
                    return (vec![x, y], order);
                }
            }
        }
        // "X after Y" / "X before Y"
        for (i, t) in toks.iter().enumerate().skip(1) {
            if (t == "after" || t == "before") && starts_clause(i) {
                let mut x = toks[..i].to_vec();
                while x.last().is_some_and(|t| t == ",") {
                    x.pop();
                }
                let y = toks[i + 1..].to_vec();
                let order = if t == "after" { vec![1, 0] } else { vec![0, 1] };
                return (vec![x, y], order);
            }
        }
        (vec![toks], vec![0])
    }

    /// Splits at "then", and at "and" or commas that introduce a new verb.
    fn split_clauses(&self, toks: &[String]) -> Vec<Vec<String>> {
        let mut clauses = Vec::new();
        let mut current: Vec<String> = Vec::new();
        let mut i = 0;
        while i < toks.len() {
            let t = toks[i].as_str();
            let boundary = match t {
                "then" => true,
                "," | "and" => {
                    let rest = self.strip_markers(&toks[i + 1..]);
                    rest.first().is_some_and(|n| self.is_verb(n))
                        || toks.get(i + 1).is_some_and(|n| n == "then")
                }
                _ => false,
            };
            if boundary && !current.is_empty() {
                clauses.push(std::mem::take(&mut current));
                let rest = self.strip_markers(&toks[i + 1..]);
                i = toks.len() - rest.len();
                continue;
            }
            current.push(t.to_string());
            i += 1;
        }
        if !current.is_empty() {
            clauses.push(current);
        }
        clauses
            .into_iter()
            .map(|c| self.strip_markers(&c))
            .filter(|c| !c.is_empty())
            .collect()
    }

    pub fn map(&self, segment: &str, actions: &[ActionInfo]) -> Option<String> {
        let concept = self.concept(segment)?;
        const STOP: [&str; 9] = ["a", "an", "the", "to", "in", "on", "of", "into", "some"];
        let content = |t: &str| -> Vec<String> {
            tokenize(t).into_iter().filter(|w| !STOP.contains(&w.as_str())).collect()
        };
        let seg_words = content(segment);
        actions
            .iter()
            .filter(|a| base_name(&a.name) == concept)
            .max_by_key(|a| {
                let overlap = content(&a.source_text)
                    .iter()
                    .filter(|w| seg_words.contains(w))
                    .count();
                // earlier entries win ties
                (overlap, std::cmp::Reverse(actions.iter().position(|b| b.name == a.name)))
            })
            .map(|a| a.name.clone())
    }

    pub fn ground(&self, segment: &str, action: &ActionInfo, objects: &[String]) -> Vec<String> {
        let mut found = self.mentions(segment, Some(objects));
        found.truncate(action.params.len());
        found
    }

    pub fn verbalize(&self, action: &ActionInfo, args: &[String]) -> String {
        let obj = |i: usize| args.get(i).map(String::as_str).unwrap_or("something");
        match action.name.as_str() {
            "moveTo" => format!("move to the {}", obj(0)),
            "pressSpace" => "press the space bar".to_string(),
            name => {
                let mut s = camel_words(base_name(name));
                let objs: Vec<String> = args.iter().map(|a| format!("the {a}")).collect();
                if !objs.is_empty() {
                    s.push(' ');
                    s.push_str(&objs.join(" and "));
                }
                s
            }
        }
    }

    pub fn paraphrase(&self, a: &str, b: &str) -> bool {
        if self.concept_or_verb(a) != self.concept_or_verb(b) {
            return false;
        }
        let oa = self.mentions(a, None);
        let ob = self.mentions(b, None);
        oa.iter().all(|o| ob.contains(o)) || ob.iter().all(|o| oa.contains(o))
    }

    pub fn name(&self, source_text: &str) -> String {
        self.concept_or_verb(source_text)
    }

    pub fn generalize(&self, source_text: &str, used: &[String]) -> Vec<String> {
        let mentioned = self.mentions(source_text, Some(used));
        used.iter().filter(|u| mentioned.contains(u)).cloned().collect()
    }
}

impl Default for MockRules {
    fn default() -> Self {
        Self::from_toml(BUNDLED_RULES).expect("bundled mock rules parse")
    }
}

struct Clause {
    sentence: usize,
    chrono: usize,
    textual: usize,
    toks: Vec<String>,
}

/// Action description as it appears in prompt inputs.
#[derive(Debug, Clone, Deserialize)]
pub struct ActionInfo {
    pub name: String,
    #[serde(default)]
    pub params: Vec<String>,
    #[serde(default)]
    pub source_text: String,
}

/// Lowercased words, with commas kept as separate tokens and other edge
/// punctuation removed.
fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for raw in text.split_whitespace() {
        let lower = raw.to_lowercase();
        let trailing_comma = lower.ends_with(',');
        let word = lower.trim_matches(|c: char| !c.is_alphanumeric() && c != '-' && c != '\'');
        let word = word.trim_matches('\'');
        if !word.is_empty() {
            out.push(word.to_string());
        }
        if trailing_comma {
            out.push(",".to_string());
        }
    }
    out
}

fn join_tokens(toks: &[String]) -> String {
    let mut s = String::new();
    for t in toks {
        if t == "," {
            continue;
        }
        if !s.is_empty() {
            s.push(' ');
        }
        s.push_str(t);
    }
    s
}

fn is_subsequence(needle: &[String], hay: &[&str]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

fn strip_repetition(mut toks: Vec<String>) -> (Vec<String>, usize) {
    const NUMBERS: [&str; 10] = [
        "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    ];
    match toks.last().map(String::as_str) {
        Some("twice") => {
            toks.pop();
            return (toks, 2);
        }
        Some("thrice") => {
            toks.pop();
            return (toks, 3);
        }
        Some("times") if toks.len() >= 2 => {
            let n = &toks[toks.len() - 2];
            let count = n
                .parse::<usize>()
                .ok()
                .or_else(|| NUMBERS.iter().position(|w| w == n).map(|i| i + 1));
            if let Some(count) = count.filter(|c| (1..=10).contains(c)) {
                toks.truncate(toks.len() - 2);
                return (toks, count);
            }
        }
        _ => {}
    }
    (toks, 1)
}

/// `get2` -> `get`.
pub fn base_name(name: &str) -> &str {
    name.trim_end_matches(|c: char| c.is_ascii_digit())
}

/// `turnOn` -> `turn on`.
fn camel_words(name: &str) -> String {
    let mut s = String::new();
    for c in name.chars() {
        if c.is_ascii_uppercase() {
            s.push(' ');
            s.push(c.to_ascii_lowercase());
        } else {
            s.push(c);
        }
    }
    s
}

/// Offline backend driven by [`MockRules`].
#[derive(Debug, Clone, Default)]
pub struct MockBackend {
    rules: MockRules,
}

impl MockBackend {
    pub fn new(rules: MockRules) -> Self {
        Self { rules }
    }

    pub fn rules(&self) -> &MockRules {
        &self.rules
    }

    fn answer(&self, sub: Subroutine, inputs: &Value) -> Option<Value> {
        let text = |k: &str| inputs.get(k).and_then(Value::as_str);
        let list = |k: &str| -> Option<Vec<String>> {
            serde_json::from_value(inputs.get(k)?.clone()).ok()
        };
        let action = |k: &str| -> Option<ActionInfo> { serde_json::from_value(inputs.get(k)?.clone()).ok() };
        Some(match sub {
            Subroutine::Segment => {
                let objects = list("known_objects").unwrap_or_default();
                json!({ "steps": self.rules.segment(text("utterance")?, &objects) })
            }
            Subroutine::Map => {
                let actions: Vec<ActionInfo> =
                    serde_json::from_value(inputs.get("actions")?.clone()).ok()?;
                json!({ "action": self.rules.map(text("segment")?, &actions) })
            }
            Subroutine::Ground => json!({
                "args": self.rules.ground(text("segment")?, &action("action")?, &list("objects")?)
            }),
            Subroutine::Verbalize => json!({
                "sentence": self.rules.verbalize(&action("action")?, &list("args")?)
            }),
            Subroutine::Paraphrase => json!({
                "paraphrase": self.rules.paraphrase(text("a")?, text("b")?)
            }),
            Subroutine::Name => json!({ "name": self.rules.name(text("source_text")?) }),
            Subroutine::Generalize => json!({
                "generalize": self.rules.generalize(text("source_text")?, &list("used_args")?)
            }),
        })
    }
}

impl LmBackend for MockBackend {
    fn kind(&self) -> &str {
        "mock"
    }

    fn complete(&self, prompt: &Prompt) -> Result<String, BackendError> {
        Ok(self
            .answer(prompt.subroutine, &prompt.inputs)
            .map(|v| v.to_string())
            .unwrap_or_else(|| "{}".to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rules() -> MockRules {
        MockRules::default()
    }

    fn objects() -> Vec<String> {
        ["onion", "tomato", "plate", "pot", "delivery"]
            .map(String::from)
            .to_vec()
    }

    fn seg(text: &str) -> Vec<String> {
        rules().segment(text, &objects())
    }

    #[test]
    fn segments_with_anaphora_and_temporal_order() {
        assert_eq!(
            seg("Turn the pot on after putting an onion in there"),
            ["put an onion in the pot", "turn the pot on"]
        );
        assert_eq!(
            seg("First, get an onion. Then, put it in the pot and turn it on."),
            ["get an onion", "put the onion in the pot", "turn the pot on"]
        );
        assert_eq!(seg("press space"), ["press space"]);
        assert_eq!(seg("Go to the onion and hit space."), ["go to the onion", "hit space"]);
    }

    #[test]
    fn segments_other_forms() {
        assert_eq!(
            seg("Before going to the pot, grab a plate."),
            ["grab a plate", "go to the pot"]
        );
        assert_eq!(seg("Press space twice."), ["press space", "press space"]);
        assert_eq!(seg("hit space 3 times"), ["hit space"; 3]);
        assert_eq!(
            seg("Get a plate, then go to the pot and press space."),
            ["get a plate", "go to the pot", "press space"]
        );
        assert_eq!(seg("Cook an onion."), ["cook an onion"]);
        assert_eq!(seg("get an onion and a tomato"), ["get an onion and a tomato"]);
    }

    #[test]
    fn concepts() {
        let r = rules();
        assert_eq!(r.concept("go to the onion").as_deref(), Some("moveTo"));
        assert_eq!(r.concept("hit space").as_deref(), Some("pressSpace"));
        assert_eq!(r.concept("press the space bar").as_deref(), Some("pressSpace"));
        assert_eq!(r.concept("turn the pot on").as_deref(), Some("turnOn"));
        assert_eq!(r.concept("take the soup to the window").as_deref(), Some("deliver"));
        assert_eq!(r.concept("take an onion").as_deref(), Some("get"));
        assert_eq!(r.concept("sauté the garlic"), None);
    }

    fn info(name: &str, params: &[&str], source: &str) -> ActionInfo {
        ActionInfo {
            name: name.into(),
            params: params.iter().map(|p| p.to_string()).collect(),
            source_text: source.into(),
        }
    }

    #[test]
    fn mapping() {
        let r = rules();
        let prims = [info("moveTo", &["target"], ""), info("pressSpace", &[], "")];
        assert_eq!(r.map("go to the onion", &prims).as_deref(), Some("moveTo"));
        assert_eq!(r.map("sauté the garlic", &prims), None);
        assert_eq!(r.map("get an onion", &prims), None);
        let mut learned = prims.to_vec();
        learned.push(info("get", &["x"], "get an onion"));
        learned.push(info("get2", &["x"], "get a plate"));
        assert_eq!(r.map("get a tomato", &learned).as_deref(), Some("get"));
        assert_eq!(r.map("grab a plate", &learned).as_deref(), Some("get2"));
    }

    #[test]
    fn grounding() {
        let r = rules();
        let move_to = info("moveTo", &["target"], "");
        assert_eq!(r.ground("go to the onion", &move_to, &objects()), ["onion"]);
        assert_eq!(r.ground("get any red vegetable", &move_to, &objects()), ["tomato"]);
        assert!(r.ground("press space", &info("pressSpace", &[], ""), &objects()).is_empty());
    }

    #[test]
    fn verbalize_and_paraphrase() {
        let r = rules();
        let v = r.verbalize(&info("moveTo", &["t"], ""), &["onion".into()]);
        assert_eq!(v, "move to the onion");
        assert_eq!(r.verbalize(&info("pressSpace", &[], ""), &[]), "press the space bar");
        let put = r.verbalize(&info("put", &["x", "y"], ""), &["onion".into(), "pot".into()]);
        assert!(put.contains("onion") && put.contains("pot"));
        assert!(!r.paraphrase("get an onion", "move to the onion"));
        assert!(r.paraphrase("turn the pot on", "switch on the pot"));
        assert!(r.paraphrase("go to the onion", "move to the onion"));
        assert!(r.paraphrase("hit space", "press the space bar"));
        assert!(r.paraphrase("sauté the garlic", "sauté the garlic"));
        assert!(!r.paraphrase("go to the onion", "move to the pot"));
    }

    #[test]
    fn naming_and_generalizing() {
        let r = rules();
        assert_eq!(r.name("cook an onion"), "cook");
        assert_eq!(r.name("turn the pot on"), "turnOn");
        assert_eq!(r.name("put it in the pot and turn it on"), "put");
        let used = vec!["onion".to_string(), "pot".to_string()];
        assert_eq!(r.generalize("cook an onion", &used), ["onion"]);
        assert!(r.generalize("cook an onion", &[]).is_empty());
    }

    #[test]
    fn backend_is_deterministic() {
        let lib = crate::lm::prompts::PromptLibrary::default();
        let p = lib.render(
            Subroutine::Segment,
            json!({"utterance": "Cook an onion.", "known_objects": objects()}),
        );
        let b = MockBackend::default();
        assert_eq!(b.complete(&p).unwrap(), b.complete(&p).unwrap());
        assert_eq!(b.complete(&p).unwrap(), r#"{"steps":["cook an onion"]}"#);
    }
}
