//! Hosts many teaching sessions behind HTTP, with a server-sent event
//! stream per session and transcripts persisted as JSON lines.

pub mod host;
pub mod http;

pub use host::{default_factory, BackendFactory, CreateRequest, HostError, SessionHost, SessionRecord};
pub use http::{router, serve};
