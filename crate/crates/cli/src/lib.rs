//! Headless driver: teaching scripts, transcript replay and the bundled
//! scenario scripts.

pub mod run;
pub mod script;

pub use run::{run_on, run_script, Failure, RunConfig, RunOutcome};
pub use script::{Directive, ParseError, Script};

/// Scripts shipped with the tool, by name.
pub mod scripts {
    pub const ONION_SOUP: &str = include_str!("../scripts/onion_soup.tl");
    pub const NAME_COLLISION: &str = include_str!("../scripts/name_collision.tl");
    pub const METRICS: &str = include_str!("../scripts/metrics.tl");

    pub const ALL: [(&str, &str); 3] = [
        ("onion_soup", ONION_SOUP),
        ("name_collision", NAME_COLLISION),
        ("metrics", METRICS),
    ];
}
