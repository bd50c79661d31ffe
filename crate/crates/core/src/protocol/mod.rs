//! In-process multiparty simulation with replayable transcripts.

mod config;
mod harness;
mod transcript;

pub use config::{InputSpec, ProgramSection, Scenario, SessionConfig, TamperSection};
pub use harness::{kinds, replay, run_scenario, verdict_text, Faults, Harness, Outcome, Party, SessionOutput};
pub use transcript::{Record, Sender, Transcript};
