//! The teaching dialog: segment, map, ground, check, execute, and ask how
//! to do anything unknown.
//!
//! A [`Session`] is a plain state machine driven by three inputs (a message,
//! a confirmation verdict, undo). All pipeline continuations are stored as
//! data in the session, so a checkpoint of the state fields is enough to
//! rewind it exactly.

mod types;

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use types::*;

use crate::env::{Layout, ObjectRef, WorldState};
use crate::htn::{param_name, ActionSchema, KnowledgeBase, PrimitiveCall, Step, Term};
use crate::lm::{base_name, ActionMatch, Exchange, Segment, Subroutines};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("bad session config: {0}")]
    BadConfig(String),
    #[error("cannot accept {input} while {mode}")]
    WrongMode { input: &'static str, mode: &'static str },
}

/// Everything undo restores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub kb: KnowledgeBase,
    pub world: WorldState,
    pub mode: Mode,
    pub definition_stack: Vec<PendingDefinition>,
    pub command: Option<CommandFrame>,
}

/// A user input, as fed to a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "input", rename_all = "snake_case")]
pub enum Input {
    Say { text: String },
    Confirm { verdict: Verdict },
    Undo,
}

pub type Observer = Box<dyn FnMut(&LoggedEvent) + Send>;

pub struct Session {
    config: SessionConfig,
    lm: Subroutines,
    kb: KnowledgeBase,
    world: WorldState,
    mode: Mode,
    definition_stack: Vec<PendingDefinition>,
    command: Option<CommandFrame>,
    snapshots: Vec<Checkpoint>,
    events: Vec<LoggedEvent>,
    metrics: Metrics,
    observer: Option<Observer>,
}

impl Session {
    pub fn new(config: SessionConfig, lm: Subroutines) -> Result<Self, SessionError> {
        let layout: Layout = config
            .layout
            .parse()
            .map_err(|e| SessionError::BadConfig(format!("{e}")))?;
        if config.max_depth == 0 {
            return Err(SessionError::BadConfig("max_depth must be at least 1".into()));
        }
        let world = WorldState::new(&layout, config.world);
        let mut session = Self {
            config: config.clone(),
            lm,
            kb: KnowledgeBase::with_primitives(),
            world,
            mode: Mode::AwaitingCommand,
            definition_stack: Vec::new(),
            command: None,
            snapshots: Vec::new(),
            events: Vec::new(),
            metrics: Metrics::default(),
            observer: None,
        };
        session.emit(DialogEvent::SessionStarted { config });
        session.push_snapshot();
        Ok(session)
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn kb(&self) -> &KnowledgeBase {
        &self.kb
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    pub fn mode(&self) -> &Mode {
        &self.mode
    }

    pub fn definition_stack(&self) -> &[PendingDefinition] {
        &self.definition_stack
    }

    pub fn events(&self) -> &[LoggedEvent] {
        &self.events
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    /// Number of input prompts that undo can still step back through,
    /// counting the current one.
    pub fn snapshot_depth(&self) -> usize {
        self.snapshots.len()
    }

    pub fn pending(&self) -> Option<&ConfirmationRequest> {
        match &self.mode {
            Mode::AwaitingConfirmation { request } => Some(request),
            _ => None,
        }
    }

    /// Replaces the language backend, e.g. after rebuilding from a
    /// transcript with recorded responses.
    pub fn set_subroutines(&mut self, lm: Subroutines) {
        self.lm = lm;
    }

    /// Called with every event as it is logged.
    pub fn set_observer(&mut self, observer: Observer) {
        self.observer = Some(observer);
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            kb: self.kb.clone(),
            world: self.world.clone(),
            mode: self.mode.clone(),
            definition_stack: self.definition_stack.clone(),
            command: self.command.clone(),
        }
    }

    pub fn knowledge_display(&self) -> Vec<KnowledgeEntry> {
        self.kb
            .schemas()
            .map(|s| KnowledgeEntry {
                name: s.name.clone(),
                params: s.params.clone(),
                kind: s.kind,
            })
            .collect()
    }

    pub fn view(&self) -> SessionView {
        SessionView {
            mode: self.mode.label().to_string(),
            knowledge: self.knowledge_display(),
            world: self.world.render(),
            holding: format!("{:?}", self.world.agent.holding),
            tick: self.world.tick,
            milestones: self.world.milestones.iter().copied().collect(),
            pending: self.pending().cloned(),
            question: match &self.mode {
                Mode::AwaitingDefinition { segment, .. } => Some(question_for(segment)),
                _ => None,
            },
            last_seq: self.events.last().map_or(0, |e| e.seq),
        }
    }

    pub fn apply(&mut self, input: Input) -> Result<Vec<LoggedEvent>, SessionError> {
        match input {
            Input::Say { text } => self.say(&text),
            Input::Confirm { verdict } => self.resolve(verdict),
            Input::Undo => Ok(self.undo()),
        }
    }

    /// A command, or a definition when one was asked for.
    pub fn say(&mut self, text: &str) -> Result<Vec<LoggedEvent>, SessionError> {
        if let Mode::AwaitingConfirmation { .. } = self.mode {
            return Err(SessionError::WrongMode {
                input: "a message",
                mode: self.mode.label(),
            });
        }
        let start = self.events.len();
        self.emit(DialogEvent::UserMessage { text: text.to_string() });
        let text = text.trim();
        if text.is_empty() {
            self.say_agent("Please tell me what to do.");
            return Ok(self.events[start..].to_vec());
        }
        match &self.mode {
            Mode::AwaitingDefinition { .. } => {
                if let Some(def) = self.definition_stack.last_mut() {
                    def.received = true;
                }
            }
            _ => {
                self.command = Some(CommandFrame {
                    utterance: text.to_string(),
                    queue: VecDeque::new(),
                });
            }
        }
        self.mode = Mode::AwaitingCommand;
        self.segment_input(text);
        self.advance();
        self.push_snapshot();
        Ok(self.events[start..].to_vec())
    }

    pub fn resolve(&mut self, verdict: Verdict) -> Result<Vec<LoggedEvent>, SessionError> {
        let Mode::AwaitingConfirmation { request } = &self.mode else {
            return Err(SessionError::WrongMode {
                input: "a confirmation",
                mode: self.mode.label(),
            });
        };
        let request = request.clone();
        let start = self.events.len();
        let settled = self.interpret(&request, &verdict);
        self.emit(DialogEvent::ConfirmationResolved {
            kind: request.kind,
            verdict: verdict.clone(),
            accepted: settled.is_ok(),
        });
        let value = match settled {
            Ok(value) => value,
            Err(reason) => {
                self.say_agent(&reason);
                self.emit(DialogEvent::ConfirmationIssued { request });
                return Ok(self.events[start..].to_vec());
            }
        };
        let counts = self.metrics.counts_mut(request.kind);
        match verdict {
            Verdict::Approve => counts.approved += 1,
            Verdict::Correct(_) => counts.corrected += 1,
        }
        self.mode = Mode::AwaitingCommand;
        match (request.resume, value) {
            (Resume::Segments, Proposal::Segments(segments)) => self.current_queue().extend(segments),
            (Resume::Match { segment }, Proposal::Action(m)) => self.commit_match(segment, m),
            (Resume::Ground { segment, action }, Proposal::Args(args)) => {
                self.commit_args(segment, &action, args)
            }
            (Resume::Generalize, Proposal::Args(args)) => self.commit_generalization(args),
            (Resume::Task, _) => self.command = None,
            (resume, value) => unreachable!("{resume:?} settled with {value:?}"),
        }
        self.advance();
        self.push_snapshot();
        Ok(self.events[start..].to_vec())
    }

    /// Rewinds knowledge, world and dialog to the previous input prompt.
    pub fn undo(&mut self) -> Vec<LoggedEvent> {
        let start = self.events.len();
        if self.snapshots.len() <= 1 {
            self.emit(DialogEvent::UndoApplied { restored: false });
            self.say_agent("There is nothing to undo.");
            return self.events[start..].to_vec();
        }
        self.snapshots.pop();
        let top = self.snapshots.last().expect("checked above").clone();
        self.kb = top.kb;
        self.world = top.world;
        self.mode = top.mode;
        self.definition_stack = top.definition_stack;
        self.command = top.command;
        self.metrics.undos += 1;
        self.emit(DialogEvent::UndoApplied { restored: true });
        self.reprompt();
        self.events[start..].to_vec()
    }

    fn reprompt(&mut self) {
        match self.mode.clone() {
            Mode::AwaitingConfirmation { request } => {
                self.emit(DialogEvent::ConfirmationIssued { request })
            }
            Mode::AwaitingDefinition { segment, .. } => self.say_agent(&question_for(&segment)),
            Mode::AwaitingCommand => {}
        }
    }

    fn push_snapshot(&mut self) {
        self.snapshots.push(self.checkpoint());
        if let Some(cap) = self.config.snapshot_cap {
            let excess = self.snapshots.len().saturating_sub(cap.max(1));
            self.snapshots.drain(..excess);
        }
    }

    fn emit(&mut self, event: DialogEvent) {
        let logged = LoggedEvent {
            seq: self.events.len() as u64 + 1,
            event,
        };
        if let Some(observer) = &mut self.observer {
            observer(&logged);
        }
        self.events.push(logged);
    }

    fn say_agent(&mut self, text: &str) {
        self.emit(DialogEvent::AgentMessage { text: text.to_string() });
    }

    fn log_exchange(&mut self, exchange: Exchange) {
        self.metrics.scolds += exchange.scolds;
        self.emit(DialogEvent::SubroutineExchange { exchange });
    }

    fn ask(&mut self, request: ConfirmationRequest) {
        self.mode = Mode::AwaitingConfirmation {
            request: request.clone(),
        };
        self.emit(DialogEvent::ConfirmationIssued { request });
    }

    /// True once the pipeline has stopped for user input (or the command was
    /// abandoned).
    fn halted(&self) -> bool {
        !matches!(self.mode, Mode::AwaitingCommand) || self.command.is_none()
    }

    fn abort_command(&mut self, message: String) {
        log::warn!("abandoning command: {message}");
        self.emit(DialogEvent::Error { message });
        self.definition_stack.clear();
        self.command = None;
        self.mode = Mode::AwaitingCommand;
    }

    fn current_queue(&mut self) -> &mut VecDeque<Segment> {
        match self.definition_stack.last_mut() {
            Some(def) => &mut def.queue,
            None => &mut self.command.as_mut().expect("a command is running").queue,
        }
    }

    fn segment_input(&mut self, text: &str) {
        let objects = self.world.list_objects();
        let (result, exchange) = self.lm.segment(text, &objects);
        self.log_exchange(exchange);
        match result {
            Ok(segments) if self.config.confirmations => self.ask(segmentation_request(segments)),
            Ok(segments) => self.current_queue().extend(segments),
            Err(e) => {
                log::warn!("segmentation failed: {e}");
                self.ask(segmentation_request(vec![Segment::new(text)]));
            }
        }
    }

    /// Works through queued segments until input is needed.
    fn advance(&mut self) {
        while !self.halted() {
            if let Some(segment) = self.current_queue().pop_front() {
                self.start_segment(segment);
            } else if !self.definition_stack.is_empty() {
                self.finish_definition();
            } else {
                self.ask(ConfirmationRequest {
                    kind: ConfirmationKind::TaskCorrectness,
                    question: "Did I do that right?".into(),
                    proposal: Proposal::TaskDone,
                    options: vec!["yes".into(), "no".into()],
                    resume: Resume::Task,
                });
            }
        }
    }

    fn start_segment(&mut self, segment: Segment) {
        let (result, exchange) = self.lm.map(&segment, &self.kb);
        self.log_exchange(exchange);
        let found = result.unwrap_or_else(|e| {
            log::warn!("map failed for {segment:?}: {e}");
            ActionMatch::NoMatch
        });
        if !self.config.confirmations {
            return self.commit_match(segment, found);
        }
        let mut options = self.kb.names();
        options.push("none".into());
        let (kind, question) = match &found {
            ActionMatch::Known(name) => (
                ConfirmationKind::Mapping,
                format!("Does \"{segment}\" mean the action `{name}`?"),
            ),
            ActionMatch::NoMatch => (
                ConfirmationKind::NewAction,
                format!("I don't know an action for \"{segment}\". Should I learn it as a new one?"),
            ),
        };
        self.ask(ConfirmationRequest {
            kind,
            question,
            proposal: Proposal::Action(found),
            options,
            resume: Resume::Match { segment },
        });
    }

    fn commit_match(&mut self, segment: Segment, found: ActionMatch) {
        match found {
            ActionMatch::Known(name) => self.ground_segment(segment, name),
            ActionMatch::NoMatch => self.new_action(segment),
        }
    }

    fn ground_segment(&mut self, segment: Segment, action: String) {
        let schema = self.kb.get(&action).expect("matched actions exist").clone();
        if schema.arity() == 0 {
            return self.commit_args(segment, &action, Vec::new());
        }
        let objects = self.world.list_objects();
        let (result, exchange) = self.lm.ground(&segment, &schema, &objects);
        self.log_exchange(exchange);
        let options = objects.iter().map(|o| o.to_string()).collect();
        match result {
            Ok(args) if !self.config.confirmations => self.commit_args(segment, &action, args),
            Ok(args) => self.ask(ConfirmationRequest {
                kind: ConfirmationKind::Grounding,
                question: format!(
                    "For \"{segment}\", should `{action}` use: {}?",
                    join_refs(&args)
                ),
                proposal: Proposal::Args(args),
                options,
                resume: Resume::Ground { segment, action },
            }),
            Err(e) => {
                log::warn!("grounding failed for {segment:?}: {e}");
                self.ask(ConfirmationRequest {
                    kind: ConfirmationKind::Grounding,
                    question: format!(
                        "Which objects should `{action}` use for \"{segment}\"? ({} needed)",
                        schema.arity()
                    ),
                    proposal: Proposal::Args(Vec::new()),
                    options,
                    resume: Resume::Ground { segment, action },
                })
            }
        }
    }

    fn commit_args(&mut self, segment: Segment, action: &str, args: Vec<ObjectRef>) {
        if !self.config.confirmations && !self.gate(&segment, action, &args) {
            return self.new_action(segment);
        }
        self.execute(action, args);
    }

    /// Accepts a match iff its verbalization paraphrases the segment.
    fn gate(&mut self, segment: &Segment, action: &str, args: &[ObjectRef]) -> bool {
        let schema = self.kb.get(action).expect("matched actions exist").clone();
        let (sentence, exchange) = self.lm.verbalize(&schema, args);
        self.log_exchange(exchange);
        let Ok(sentence) = sentence else {
            return false;
        };
        let (verdict, exchange) = self.lm.paraphrase(&sentence, segment.as_str());
        self.log_exchange(exchange);
        verdict == Ok(true)
    }

    fn execute(&mut self, action: &str, args: Vec<ObjectRef>) {
        let step = Step::ground(action, &args);
        let calls = match self.kb.expand(&step, &BTreeMap::new()) {
            Ok(calls) => calls,
            Err(e) => return self.abort_command(format!("I can't run {action}: {e}")),
        };
        for call in &calls {
            match self.world.apply(call) {
                Ok((world, reached)) => {
                    self.world = world;
                    let tick = self.world.tick;
                    self.emit(DialogEvent::ActionDispatched {
                        call: call.clone(),
                        tick,
                    });
                    for name in reached {
                        self.metrics.milestones.insert(name);
                        self.emit(DialogEvent::Milestone { name, tick });
                    }
                }
                Err(e) => return self.abort_command(format!("I couldn't do {call}: {e}")),
            }
        }
        if let Some(def) = self.definition_stack.last_mut() {
            def.steps.push(step);
            let seen = args.iter().chain(calls.iter().flat_map(|c| c.args.iter()));
            extend_unique(&mut def.used_args, seen.cloned());
        }
    }

    fn new_action(&mut self, segment: Segment) {
        if self.definition_stack.len() >= self.config.max_depth {
            return self.abort_command(format!(
                "Too many unknown actions nested inside each other (limit {}). \
                 Try describing \"{segment}\" with actions I already know.",
                self.config.max_depth
            ));
        }
        let (result, exchange) = self.lm.name(segment.as_str(), &self.kb);
        self.log_exchange(exchange);
        let base = result.unwrap_or_else(|e| {
            log::warn!("naming failed for {segment:?}: {e}");
            fallback_name(&segment)
        });
        let name = self.free_name(&base);
        self.definition_stack.push(PendingDefinition {
            source_segment: segment.clone(),
            name: name.clone(),
            steps: Vec::new(),
            used_args: Vec::new(),
            queue: VecDeque::new(),
            received: false,
        });
        self.say_agent(&question_for(&segment));
        self.mode = Mode::AwaitingDefinition { name, segment };
    }

    /// `base` if neither learned nor reserved by an open definition,
    /// otherwise the first free numbered variant.
    fn free_name(&self, base: &str) -> String {
        let taken = |n: &str| self.kb.contains(n) || self.definition_stack.iter().any(|d| d.name == n);
        if !taken(base) {
            return base.to_string();
        }
        let stem = base_name(base);
        let stem = if stem.is_empty() { base } else { stem };
        (2..)
            .map(|i| format!("{stem}{i}"))
            .find(|n| !taken(n))
            .expect("unbounded search")
    }

    fn finish_definition(&mut self) {
        let def = self.definition_stack.last().expect("caller checked");
        if def.steps.is_empty() {
            let name = def.name.clone();
            return self.abort_command(format!("I was not shown any steps for `{name}`."));
        }
        let (source, used, name) = (def.source_segment.clone(), def.used_args.clone(), def.name.clone());
        let (result, exchange) = self.lm.generalize(source.as_str(), &used);
        self.log_exchange(exchange);
        let chosen = result.unwrap_or_else(|e| {
            log::warn!("generalization failed for `{name}`: {e}");
            Vec::new()
        });
        if !self.config.confirmations {
            return self.commit_generalization(chosen);
        }
        let fixed: Vec<ObjectRef> = used.iter().filter(|u| !chosen.contains(u)).cloned().collect();
        let question = match (chosen.is_empty(), fixed.is_empty()) {
            (true, _) => format!("Should `{name}` always use exactly the same objects?"),
            (false, true) => format!(
                "Should `{name}` work with other objects in place of {}?",
                join_refs(&chosen)
            ),
            (false, false) => format!(
                "Should `{name}` work with other objects in place of {}, keeping {} fixed?",
                join_refs(&chosen),
                join_refs(&fixed)
            ),
        };
        self.ask(ConfirmationRequest {
            kind: ConfirmationKind::Generalization,
            question,
            proposal: Proposal::Args(chosen),
            options: used.iter().map(|o| o.to_string()).collect(),
            resume: Resume::Generalize,
        });
    }

    fn commit_generalization(&mut self, chosen: Vec<ObjectRef>) {
        let def = self.definition_stack.pop().expect("a definition is open");
        let params: Vec<String> = (0..chosen.len()).map(param_name).collect();
        let slot = |o: &ObjectRef| chosen.iter().position(|c| c == o);
        let body = def
            .steps
            .iter()
            .map(|step| Step {
                action: step.action.clone(),
                args: step
                    .args
                    .iter()
                    .map(|t| match t {
                        Term::Const(o) => match slot(o) {
                            Some(i) => Term::Var(params[i].clone()),
                            None => t.clone(),
                        },
                        var => var.clone(),
                    })
                    .collect(),
            })
            .collect();
        let schema = ActionSchema::learned(
            def.name.clone(),
            params.clone(),
            body,
            def.source_segment.as_str(),
        );
        if let Err(e) = self.kb.add_schema(schema) {
            return self.abort_command(format!("I couldn't store `{}`: {e}", def.name));
        }
        self.emit(DialogEvent::ActionLearned {
            name: def.name.clone(),
            params,
        });
        if let Some(parent) = self.definition_stack.last_mut() {
            parent.steps.push(Step::ground(&def.name, &chosen));
            extend_unique(&mut parent.used_args, chosen.iter().chain(&def.used_args).cloned());
        }
    }

    /// Checks a verdict against the request and returns the committed value.
    fn interpret(&self, request: &ConfirmationRequest, verdict: &Verdict) -> Result<Proposal, String> {
        let proposal = match verdict {
            Verdict::Approve => request.proposal.clone(),
            Verdict::Correct(text) => self.parse_correction(request, text)?,
        };
        self.validate(request, &proposal)?;
        Ok(proposal)
    }

    fn parse_correction(&self, request: &ConfirmationRequest, text: &str) -> Result<Proposal, String> {
        let text = text.trim();
        Ok(match request.kind {
            ConfirmationKind::Segmentation => Proposal::Segments(
                text.split('|')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(Segment::new)
                    .collect(),
            ),
            ConfirmationKind::Mapping | ConfirmationKind::NewAction => {
                match text.to_lowercase().as_str() {
                    "none" | "no match" | "new" | "" => Proposal::Action(ActionMatch::NoMatch),
                    _ => Proposal::Action(ActionMatch::Known(text.to_string())),
                }
            }
            ConfirmationKind::Grounding | ConfirmationKind::Generalization => {
                let parts: Vec<ObjectRef> = match text.to_lowercase().as_str() {
                    "none" | "" => Vec::new(),
                    _ => text
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(ObjectRef::from)
                        .collect(),
                };
                // grounding slots may repeat an object; parameter choices may not
                if request.kind == ConfirmationKind::Generalization {
                    let mut unique = Vec::new();
                    extend_unique(&mut unique, parts);
                    Proposal::Args(unique)
                } else {
                    Proposal::Args(parts)
                }
            }
            ConfirmationKind::TaskCorrectness => Proposal::TaskDone,
        })
    }

    fn validate(&self, request: &ConfirmationRequest, proposal: &Proposal) -> Result<(), String> {
        match (&request.resume, proposal) {
            (Resume::Segments, Proposal::Segments(segments)) => {
                if segments.is_empty() {
                    return Err("Please give at least one step, separated by `|`.".into());
                }
            }
            (Resume::Match { .. }, Proposal::Action(ActionMatch::Known(name))) => {
                if !self.kb.contains(name) {
                    return Err(format!("I don't know an action called `{name}`."));
                }
            }
            (Resume::Match { .. }, Proposal::Action(ActionMatch::NoMatch)) => {}
            (Resume::Ground { action, .. }, Proposal::Args(args)) => {
                let arity = self.kb.get(action).map_or(0, |s| s.arity());
                if args.len() != arity {
                    return Err(format!("`{action}` needs exactly {arity} object(s)."));
                }
                let objects = self.world.list_objects();
                if let Some(bad) = args.iter().find(|a| !objects.contains(a)) {
                    return Err(format!("There is no `{bad}` here."));
                }
            }
            (Resume::Generalize, Proposal::Args(args)) => {
                let used = &self.definition_stack.last().expect("definition open").used_args;
                if let Some(bad) = args.iter().find(|a| !used.contains(a)) {
                    return Err(format!("`{bad}` was not used by this action."));
                }
            }
            (Resume::Task, Proposal::TaskDone) => {}
            _ => return Err("That answer does not fit this question.".into()),
        }
        Ok(())
    }
}

fn segmentation_request(segments: Vec<Segment>) -> ConfirmationRequest {
    let listing: Vec<String> = segments
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{}. {s}", i + 1))
        .collect();
    ConfirmationRequest {
        kind: ConfirmationKind::Segmentation,
        question: format!("I understood these steps: {}. Is that right?", listing.join("; ")),
        proposal: Proposal::Segments(segments),
        options: Vec::new(),
        resume: Resume::Segments,
    }
}

fn question_for(segment: &Segment) -> String {
    format!("How do I {segment}?")
}

fn join_refs(refs: &[ObjectRef]) -> String {
    if refs.is_empty() {
        return "nothing".into();
    }
    refs.iter().map(ObjectRef::as_str).collect::<Vec<_>>().join(", ")
}

fn extend_unique(into: &mut Vec<ObjectRef>, items: impl IntoIterator<Item = ObjectRef>) {
    for item in items {
        if !into.contains(&item) {
            into.push(item);
        }
    }
}

/// Name used when the naming subroutine fails: the segment's first word.
fn fallback_name(segment: &Segment) -> String {
    segment
        .as_str()
        .split_whitespace()
        .find_map(crate::lm::sanitize_identifier)
        .unwrap_or_else(|| "task".to_string())
}

/// Every primitive call dispatched so far, in order.
pub fn dispatched_calls(events: &[LoggedEvent]) -> Vec<PrimitiveCall> {
    events
        .iter()
        .filter_map(|e| match &e.event {
            DialogEvent::ActionDispatched { call, .. } => Some(call.clone()),
            _ => None,
        })
        .collect()
}

#[cfg(test)]
mod tests;
