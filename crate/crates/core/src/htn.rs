//! Hierarchical task knowledge: action schemas, the knowledge base, and
//! expansion of parameterized steps into ground primitive calls.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::ObjectRef;

pub const MOVE_TO: &str = "moveTo";
pub const PRESS_SPACE: &str = "pressSpace";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemaKind {
    Primitive,
    Learned,
}

/// An argument inside a schema body: either one of the schema's parameters
/// or a constant captured when the action was taught.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Term {
    Var(String),
    Const(ObjectRef),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(name) => write!(f, "?{name}"),
            Term::Const(obj) => write!(f, "{obj}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub action: String,
    pub args: Vec<Term>,
}

impl Step {
    pub fn new(action: impl Into<String>, args: Vec<Term>) -> Self {
        Self {
            action: action.into(),
            args,
        }
    }

    /// A step whose arguments are all constants.
    pub fn ground(action: impl Into<String>, args: &[ObjectRef]) -> Self {
        Self::new(action, args.iter().cloned().map(Term::Const).collect())
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.action)?;
        for (i, arg) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{arg}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSchema {
    pub name: String,
    pub kind: SchemaKind,
    pub params: Vec<String>,
    pub body: Vec<Step>,
    pub source_text: String,
}

impl ActionSchema {
    pub fn primitive(name: impl Into<String>, params: &[&str]) -> Self {
        Self {
            name: name.into(),
            kind: SchemaKind::Primitive,
            params: params.iter().map(|p| p.to_string()).collect(),
            body: Vec::new(),
            source_text: String::new(),
        }
    }

    pub fn learned(
        name: impl Into<String>,
        params: Vec<String>,
        body: Vec<Step>,
        source_text: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            kind: SchemaKind::Learned,
            params,
            body,
            source_text: source_text.into(),
        }
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn is_primitive(&self) -> bool {
        self.kind == SchemaKind::Primitive
    }
}

/// Ground call of a primitive action, ready to send to the environment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitiveCall {
    pub action: String,
    pub args: Vec<ObjectRef>,
}

impl fmt::Display for PrimitiveCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<&str> = self.args.iter().map(|a| a.as_str()).collect();
        write!(f, "{}({})", self.action, args.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HtnError {
    #[error("an action named `{0}` already exists")]
    DuplicateName(String),
    #[error("reference to unknown action `{0}`")]
    DanglingReference(String),
    #[error("step {step} has the wrong number of arguments")]
    ArityMismatch { step: usize },
    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),
    #[error("schema `{schema}` is malformed: {reason}")]
    InvalidSchema { schema: String, reason: String },
    #[error("malformed knowledge document: {0}")]
    Malformed(String),
}

/// Name -> schema map. Iteration (and display) order is insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    schemas: IndexMap<String, ActionSchema>,
}

impl KnowledgeBase {
    pub fn new() -> Self {
        Self::default()
    }

    /// The two primitives every kitchen session starts with.
    pub fn with_primitives() -> Self {
        let mut kb = Self::new();
        kb.add_schema(ActionSchema::primitive(MOVE_TO, &["target"]))
            .expect("fresh knowledge base");
        kb.add_schema(ActionSchema::primitive(PRESS_SPACE, &[]))
            .expect("fresh knowledge base");
        kb
    }

    pub fn get(&self, name: &str) -> Option<&ActionSchema> {
        self.schemas.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.schemas.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.schemas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schemas.is_empty()
    }

    pub fn schemas(&self) -> impl Iterator<Item = &ActionSchema> {
        self.schemas.values()
    }

    pub fn names(&self) -> Vec<String> {
        self.schemas.keys().cloned().collect()
    }

    pub fn primitive_names(&self) -> Vec<String> {
        self.schemas()
            .filter(|s| s.is_primitive())
            .map(|s| s.name.clone())
            .collect()
    }

    /// Adds a schema after checking it against the current contents. Bodies
    /// may only reference schemas that are already present, which keeps the
    /// reference graph acyclic.
    pub fn add_schema(&mut self, schema: ActionSchema) -> Result<(), HtnError> {
        if self.schemas.contains_key(&schema.name) {
            return Err(HtnError::DuplicateName(schema.name));
        }
        self.validate(&schema)?;
        self.schemas.insert(schema.name.clone(), schema);
        Ok(())
    }

    fn validate(&self, schema: &ActionSchema) -> Result<(), HtnError> {
        let invalid = |reason: &str| HtnError::InvalidSchema {
            schema: schema.name.clone(),
            reason: reason.to_string(),
        };
        if !is_identifier(&schema.name) {
            return Err(invalid("name is not an identifier"));
        }
        let mut seen = HashSet::new();
        for p in &schema.params {
            if !seen.insert(p.as_str()) {
                return Err(invalid("duplicate parameter name"));
            }
        }
        match schema.kind {
            SchemaKind::Primitive if !schema.body.is_empty() => {
                return Err(invalid("primitive with a body"))
            }
            SchemaKind::Learned if schema.body.is_empty() => {
                return Err(invalid("learned action with an empty body"))
            }
            _ => {}
        }
        for (index, step) in schema.body.iter().enumerate() {
            let callee = self
                .schemas
                .get(&step.action)
                .ok_or_else(|| HtnError::DanglingReference(step.action.clone()))?;
            if callee.arity() != step.args.len() {
                return Err(HtnError::ArityMismatch { step: index });
            }
            for term in &step.args {
                if let Term::Var(v) = term {
                    if !seen.contains(v.as_str()) {
                        return Err(HtnError::UnboundVariable(v.clone()));
                    }
                }
            }
        }
        Ok(())
    }

    /// `base` if unused, otherwise the first of `base2`, `base3`, ... that is.
    pub fn unique_name(&self, base: &str) -> String {
        if !self.contains(base) {
            return base.to_string();
        }
        (2u32..)
            .map(|n| format!("{base}{n}"))
            .find(|candidate| !self.contains(candidate))
            .expect("unbounded suffix search")
    }

    /// Expands a step into the primitive calls at the leaves of its task
    /// tree, depth first and left to right.
    pub fn expand(
        &self,
        step: &Step,
        binding: &BTreeMap<String, ObjectRef>,
    ) -> Result<Vec<PrimitiveCall>, HtnError> {
        let mut out = Vec::new();
        self.expand_into(step, binding, &mut out)?;
        Ok(out)
    }

    fn expand_into(
        &self,
        step: &Step,
        binding: &BTreeMap<String, ObjectRef>,
        out: &mut Vec<PrimitiveCall>,
    ) -> Result<(), HtnError> {
        let schema = self
            .get(&step.action)
            .ok_or_else(|| HtnError::DanglingReference(step.action.clone()))?;
        if schema.arity() != step.args.len() {
            return Err(HtnError::ArityMismatch { step: 0 });
        }
        let args = step
            .args
            .iter()
            .map(|t| resolve(t, binding))
            .collect::<Result<Vec<_>, _>>()?;
        if schema.is_primitive() {
            out.push(PrimitiveCall {
                action: schema.name.clone(),
                args,
            });
            return Ok(());
        }
        let inner: BTreeMap<String, ObjectRef> =
            schema.params.iter().cloned().zip(args).collect();
        for child in &schema.body {
            self.expand_into(child, &inner, out)?;
        }
        Ok(())
    }

    pub fn to_document(&self) -> KbDocument {
        KbDocument(self.schemas.values().cloned().collect())
    }

    /// Rebuilds a knowledge base by re-adding every schema in document
    /// order, so the same invariants as [`KnowledgeBase::add_schema`] apply.
    pub fn from_document(doc: KbDocument) -> Result<Self, HtnError> {
        let mut kb = Self::new();
        for schema in doc.0 {
            kb.add_schema(schema)?;
        }
        Ok(kb)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("schemas serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, HtnError> {
        let doc: KbDocument =
            serde_json::from_str(text).map_err(|e| HtnError::Malformed(e.to_string()))?;
        Self::from_document(doc)
    }
}

fn resolve(term: &Term, binding: &BTreeMap<String, ObjectRef>) -> Result<ObjectRef, HtnError> {
    match term {
        Term::Const(obj) => Ok(obj.clone()),
        Term::Var(v) => binding
            .get(v)
            .cloned()
            .ok_or_else(|| HtnError::UnboundVariable(v.clone())),
    }
}

impl Serialize for KnowledgeBase {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_document().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for KnowledgeBase {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = KbDocument::deserialize(deserializer)?;
        Self::from_document(doc).map_err(serde::de::Error::custom)
    }
}

/// Serialized form of a knowledge base: the schema list in insertion order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KbDocument(pub Vec<ActionSchema>);

/// Lower camel case identifier: ASCII letter first, then letters and digits.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric())
}

/// Parameter name for the slot at `index`.
pub fn param_name(index: usize) -> String {
    match index {
        0 => "x".into(),
        1 => "y".into(),
        2 => "z".into(),
        n => format!("x{}", n + 1),
    }
}
