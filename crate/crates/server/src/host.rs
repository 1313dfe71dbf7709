//! Session registry with per-session serialization, event fan-out and
//! transcript persistence.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock, TryLockError};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::broadcast;

use tasklearn::dialog::{
    Input, LoggedEvent, Metrics, Session, SessionConfig, SessionError, SessionView, Verdict,
};
use tasklearn::htn::KbDocument;
use tasklearn::lm::{LmBackend, LmConfig, MockBackend, PromptLibrary, Subroutines};
use tasklearn::transcript::{self, Transcript};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HostError {
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error("bad config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    WrongMode(SessionError),
    #[error("session is busy with another input")]
    Busy,
    #[error("storage error: {0}")]
    Storage(String),
}

impl From<SessionError> for HostError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::BadConfig(m) => HostError::BadConfig(m),
            wrong => HostError::WrongMode(wrong),
        }
    }
}

/// Body of `POST /sessions`. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(default)]
pub struct CreateRequest {
    pub confirmations: Option<bool>,
    pub backend: Option<String>,
    /// Path to a layout file; the bundled kitchen when absent.
    pub layout: Option<PathBuf>,
    pub scold_budget: Option<u32>,
    pub cook_ticks: Option<u32>,
    pub max_depth: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub id: String,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub backend: String,
    pub confirmations: bool,
    pub transcript: Option<PathBuf>,
    pub kb: KbDocument,
    pub metrics: Metrics,
}

/// Builds the live backend for a backend label.
pub type BackendFactory = Arc<dyn Fn(&str) -> Result<Arc<dyn LmBackend>, String> + Send + Sync>;

/// `mock`, and `remote` when the remote feature is built.
pub fn default_factory() -> BackendFactory {
    Arc::new(|kind: &str| -> Result<Arc<dyn LmBackend>, String> {
        match kind {
            "mock" => Ok(Arc::new(MockBackend::default())),
            "remote" => {
                let config = tasklearn::lm::remote::RemoteConfig::from_env()?;
                let backend =
                    tasklearn::lm::remote::RemoteBackend::new(config).map_err(|e| e.to_string())?;
                Ok(Arc::new(backend))
            }
            other => Err(format!("unknown backend `{other}`")),
        }
    })
}

pub(crate) struct Slot {
    session: Mutex<Session>,
    created_at: u64,
    transcript: Option<PathBuf>,
    pub(crate) events: broadcast::Sender<LoggedEvent>,
}

pub struct SessionHost {
    sessions: RwLock<BTreeMap<String, Arc<Slot>>>,
    data_dir: Option<PathBuf>,
    factory: BackendFactory,
}

impl SessionHost {
    /// A host that keeps sessions in memory only.
    pub fn in_memory(factory: BackendFactory) -> Self {
        Self {
            sessions: RwLock::new(BTreeMap::new()),
            data_dir: None,
            factory,
        }
    }

    /// A host persisting transcripts under `dir`. Sessions already stored
    /// there are rebuilt by replaying their transcripts.
    pub fn open(dir: impl Into<PathBuf>, factory: BackendFactory) -> Result<Self, HostError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(storage)?;
        let host = Self {
            sessions: RwLock::new(BTreeMap::new()),
            data_dir: Some(dir.clone()),
            factory,
        };
        let mut entries: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(storage)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        entries.sort();
        for path in entries {
            let id = path.file_stem().unwrap().to_string_lossy().to_string();
            if let Err(e) = host.restore(&id, &path) {
                log::error!("could not restore session {id}: {e}");
            }
        }
        Ok(host)
    }

    fn restore(&self, id: &str, path: &Path) -> Result<(), HostError> {
        let text = fs::read_to_string(path).map_err(storage)?;
        let t = Transcript::from_jsonl(&text).map_err(|e| HostError::Storage(e.to_string()))?;
        let mut session = transcript::rebuild(&t.events).map_err(|e| HostError::Storage(e.to_string()))?;
        let config = session.config().clone();
        session.set_subroutines(self.subroutines(&config)?);
        let created_at = read_created_at(path).unwrap_or(0);
        self.install(id.to_string(), session, created_at);
        Ok(())
    }

    fn subroutines(&self, config: &SessionConfig) -> Result<Subroutines, HostError> {
        let backend = (self.factory)(&config.backend).map_err(HostError::BadConfig)?;
        Ok(Subroutines::new(
            backend,
            PromptLibrary::default(),
            LmConfig::default().with_scold_budget(config.scold_budget),
        ))
    }

    /// Registers `session`; its future events go to subscribers and, when
    /// persistent, are appended to its transcript.
    fn install(&self, id: String, mut session: Session, created_at: u64) -> Arc<Slot> {
        let (tx, _) = broadcast::channel(1024);
        let transcript = self.data_dir.as_ref().map(|d| d.join(format!("{id}.jsonl")));
        let mut file = transcript.as_ref().and_then(|p| {
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .map_err(|e| log::error!("cannot open {}: {e}", p.display()))
                .ok()
        });
        let sender = tx.clone();
        session.set_observer(Box::new(move |event: &LoggedEvent| {
            if let Some(f) = file.as_mut() {
                let line = serde_json::to_string(event).expect("events serialize");
                if let Err(e) = writeln!(f, "{line}").and_then(|_| f.flush()) {
                    log::error!("transcript write failed: {e}");
                }
            }
            // no subscribers is fine
            let _ = sender.send(event.clone());
        }));
        let slot = Arc::new(Slot {
            session: Mutex::new(session),
            created_at,
            transcript,
            events: tx,
        });
        self.sessions.write().unwrap().insert(id, slot.clone());
        slot
    }

    pub fn create(&self, request: CreateRequest) -> Result<String, HostError> {
        let layout = match &request.layout {
            Some(path) => fs::read_to_string(path)
                .map_err(|e| HostError::BadConfig(format!("layout {}: {e}", path.display())))?,
            None => tasklearn::env::DEFAULT_LAYOUT.to_string(),
        };
        let defaults = SessionConfig::default();
        let mut config = SessionConfig {
            confirmations: request.confirmations.unwrap_or(true),
            layout,
            backend: request.backend.unwrap_or_else(|| "mock".into()),
            scold_budget: request.scold_budget.unwrap_or(defaults.scold_budget),
            max_depth: request.max_depth.unwrap_or(defaults.max_depth),
            ..defaults
        };
        if let Some(ticks) = request.cook_ticks {
            config.world.cook_ticks = ticks;
        }
        let lm = self.subroutines(&config)?;
        let session = Session::new(config, lm)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let created_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        if let Some(dir) = &self.data_dir {
            // the start event was emitted before the observer existed
            let mut f = File::create(dir.join(format!("{id}.jsonl"))).map_err(storage)?;
            for e in session.events() {
                writeln!(f, "{}", serde_json::to_string(e).expect("events serialize")).map_err(storage)?;
            }
            fs::write(dir.join(format!("{id}.created")), created_at.to_string()).map_err(storage)?;
        }
        self.install(id.clone(), session, created_at);
        Ok(id)
    }

    pub(crate) fn slot(&self, id: &str) -> Result<Arc<Slot>, HostError> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| HostError::UnknownSession(id.to_string()))
    }

    pub fn ids(&self) -> Vec<String> {
        self.sessions.read().unwrap().keys().cloned().collect()
    }

    /// Applies one input. Messages and verdicts are refused while another
    /// input is being processed; undo waits its turn.
    pub fn submit(&self, id: &str, input: Input) -> Result<Vec<LoggedEvent>, HostError> {
        let slot = self.slot(id)?;
        let mut session = match input {
            Input::Undo => slot.session.lock().unwrap(),
            _ => match slot.session.try_lock() {
                Ok(guard) => guard,
                Err(TryLockError::WouldBlock) => return Err(HostError::Busy),
                Err(TryLockError::Poisoned(p)) => p.into_inner(),
            },
        };
        Ok(session.apply(input)?)
    }

    pub fn post_message(&self, id: &str, text: &str) -> Result<Vec<LoggedEvent>, HostError> {
        self.submit(id, Input::Say { text: text.to_string() })
    }

    pub fn post_confirmation(&self, id: &str, verdict: Verdict) -> Result<Vec<LoggedEvent>, HostError> {
        self.submit(id, Input::Confirm { verdict })
    }

    pub fn post_undo(&self, id: &str) -> Result<Vec<LoggedEvent>, HostError> {
        self.submit(id, Input::Undo)
    }

    pub fn state(&self, id: &str) -> Result<SessionView, HostError> {
        Ok(self.slot(id)?.session.lock().unwrap().view())
    }

    pub fn metrics(&self, id: &str) -> Result<Metrics, HostError> {
        Ok(self.slot(id)?.session.lock().unwrap().metrics().clone())
    }

    pub fn record(&self, id: &str) -> Result<SessionRecord, HostError> {
        let slot = self.slot(id)?;
        let session = slot.session.lock().unwrap();
        Ok(SessionRecord {
            id: id.to_string(),
            created_at: slot.created_at,
            backend: session.config().backend.clone(),
            confirmations: session.config().confirmations,
            transcript: slot.transcript.clone(),
            kb: session.kb().to_document(),
            metrics: session.metrics().clone(),
        })
    }

    /// Logged events with `seq > since`, plus a receiver for later ones.
    /// The receiver is subscribed before the backlog is read, so nothing
    /// falls between the two.
    pub fn subscribe(
        &self,
        id: &str,
        since: u64,
    ) -> Result<(Vec<LoggedEvent>, broadcast::Receiver<LoggedEvent>), HostError> {
        let slot = self.slot(id)?;
        let rx = slot.events.subscribe();
        let session = slot.session.lock().unwrap();
        let backlog = session.events().iter().filter(|e| e.seq > since).cloned().collect();
        Ok((backlog, rx))
    }
}

fn storage(e: std::io::Error) -> HostError {
    HostError::Storage(e.to_string())
}

fn read_created_at(transcript: &Path) -> Option<u64> {
    fs::read_to_string(transcript.with_extension("created"))
        .ok()?
        .trim()
        .parse()
        .ok()
}
