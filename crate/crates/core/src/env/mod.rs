//! Single-agent kitchen simulation with two primitive actions: `moveTo`
//! (breadth-first search to the target) and `pressSpace` (interact with the
//! faced cell).

mod grid;
mod path;
mod world;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use grid::{CellKind, Dir, Grid, Layout, Pos, DEFAULT_LAYOUT};
pub use path::bfs_path;
pub use world::{
    Agent, Holding, Ingredient, Milestone, MoveOutcome, PotPhase, PotState, Snapshot, WorldConfig,
    WorldState,
};

/// Name of something in the world the agent can target, e.g. `onion`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectRef(String);

impl ObjectRef {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObjectRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ObjectRef {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("no path to {0}")]
    Unreachable(Pos),
    #[error("unknown object `{0}`")]
    UnknownObject(ObjectRef),
    #[error("{0} is not a floor cell")]
    NotFloor(Pos),
    #[error("not a primitive call: {0}")]
    UnknownPrimitive(String),
    #[error("bad layout: {0}")]
    BadLayout(String),
}
