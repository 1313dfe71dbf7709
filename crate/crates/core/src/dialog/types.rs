use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::env::{Milestone, ObjectRef, WorldConfig};
use crate::htn::{PrimitiveCall, SchemaKind, Step};
use crate::lm::{ActionMatch, Exchange, Segment};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub confirmations: bool,
    #[serde(default = "default_max_depth")]
    pub max_depth: usize,
    /// Layout text (not a path) so transcripts are self-contained.
    pub layout: String,
    #[serde(default)]
    pub world: WorldConfig,
    /// Backend label recorded for the session, e.g. `mock`.
    pub backend: String,
    #[serde(default = "default_scold_budget")]
    pub scold_budget: u32,
    /// Oldest snapshots are dropped beyond this many; unbounded when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_cap: Option<usize>,
}

fn default_max_depth() -> usize {
    8
}

fn default_scold_budget() -> u32 {
    2
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            confirmations: true,
            max_depth: default_max_depth(),
            layout: crate::env::DEFAULT_LAYOUT.to_string(),
            world: WorldConfig::default(),
            backend: "mock".into(),
            scold_budget: default_scold_budget(),
            snapshot_cap: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfirmationKind {
    Segmentation,
    Mapping,
    NewAction,
    Grounding,
    Generalization,
    TaskCorrectness,
}

impl ConfirmationKind {
    /// Metrics bucket the verdict counts toward.
    pub fn metric_key(self) -> &'static str {
        match self {
            ConfirmationKind::Segmentation => "segment",
            ConfirmationKind::Mapping | ConfirmationKind::NewAction => "map",
            ConfirmationKind::Grounding => "ground",
            ConfirmationKind::Generalization => "generalize",
            ConfirmationKind::TaskCorrectness => "task",
        }
    }
}

/// What the confirmed subroutine proposed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Proposal {
    Segments(Vec<Segment>),
    Action(ActionMatch),
    Args(Vec<ObjectRef>),
    TaskDone,
}

/// Where the pipeline resumes once the request is settled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum Resume {
    Segments,
    Match { segment: Segment },
    Ground { segment: Segment, action: String },
    Generalize,
    Task,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfirmationRequest {
    pub kind: ConfirmationKind,
    pub question: String,
    pub proposal: Proposal,
    /// Values a correction may draw from; empty means free text.
    pub options: Vec<String>,
    pub resume: Resume,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    AwaitingCommand,
    AwaitingConfirmation { request: ConfirmationRequest },
    AwaitingDefinition { name: String, segment: Segment },
}

impl Mode {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::AwaitingCommand => "awaiting_command",
            Mode::AwaitingConfirmation { .. } => "awaiting_confirmation",
            Mode::AwaitingDefinition { .. } => "awaiting_definition",
        }
    }
}

/// An action being taught: the segment that asked for it and what the user
/// has shown so far.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingDefinition {
    pub source_segment: Segment,
    pub name: String,
    pub steps: Vec<Step>,
    /// Every argument seen so far, in first-use order.
    pub used_args: Vec<ObjectRef>,
    /// Segments of the definition utterance not yet handled.
    pub queue: VecDeque<Segment>,
    pub received: bool,
}

/// The top-level command currently being carried out.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommandFrame {
    pub utterance: String,
    pub queue: VecDeque<Segment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "correction", rename_all = "snake_case")]
pub enum Verdict {
    Approve,
    Correct(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DialogEvent {
    SessionStarted {
        config: SessionConfig,
    },
    UserMessage {
        text: String,
    },
    AgentMessage {
        text: String,
    },
    ConfirmationIssued {
        request: ConfirmationRequest,
    },
    ConfirmationResolved {
        kind: ConfirmationKind,
        verdict: Verdict,
        accepted: bool,
    },
    SubroutineExchange {
        exchange: Exchange,
    },
    ActionDispatched {
        call: PrimitiveCall,
        tick: u64,
    },
    Milestone {
        name: Milestone,
        tick: u64,
    },
    ActionLearned {
        name: String,
        params: Vec<String>,
    },
    UndoApplied {
        restored: bool,
    },
    Error {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedEvent {
    pub seq: u64,
    #[serde(flatten)]
    pub event: DialogEvent,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub approved: u32,
    pub corrected: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    pub segment: Counts,
    pub map: Counts,
    pub ground: Counts,
    pub generalize: Counts,
    pub task: Counts,
    pub undos: u32,
    /// Every milestone reached at any point, undone or not.
    pub milestones: BTreeSet<Milestone>,
    pub scolds: u32,
    pub crashes: u32,
}

impl Metrics {
    pub fn counts_mut(&mut self, kind: ConfirmationKind) -> &mut Counts {
        match kind.metric_key() {
            "segment" => &mut self.segment,
            "map" => &mut self.map,
            "ground" => &mut self.ground,
            "generalize" => &mut self.generalize,
            _ => &mut self.task,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeEntry {
    pub name: String,
    pub params: Vec<String>,
    pub kind: SchemaKind,
}

/// Read-only view of a session for clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub mode: String,
    pub knowledge: Vec<KnowledgeEntry>,
    pub world: Vec<String>,
    pub holding: String,
    pub tick: u64,
    pub milestones: Vec<Milestone>,
    pub pending: Option<ConfirmationRequest>,
    /// Clarification question when a definition is awaited.
    pub question: Option<String>,
    pub last_seq: u64,
}
