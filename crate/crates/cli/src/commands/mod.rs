pub mod analyze;
pub mod contagion;
pub mod fit;
pub mod simulate;
pub mod synth;
pub mod ties;

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use emoflow_core::burst::{load_events, BurstError, EventRecord};
use emoflow_core::emotion::{load_tweets, TweetLoad};
use emoflow_core::graph::{load_edge_list, SocialGraph};

use crate::config::FileConfig;
use crate::error::{from_burst, from_emotion, from_graph, io_at, CliError};
use crate::out::OutDir;

/// Resolved globals shared by every subcommand.
pub struct Ctx {
    pub cfg: FileConfig,
    pub out: OutDir,
    pub seed: u64,
}

pub fn load_graph(path: &Path) -> Result<SocialGraph, CliError> {
    let file = File::open(path).map_err(|e| io_at(path, e))?;
    let load = load_edge_list(BufReader::new(file)).map_err(|e| from_graph(path, e))?;
    if load.self_loops_skipped > 0 {
        eprintln!(
            "note: {}: skipped {} self-loop rows",
            path.display(),
            load.self_loops_skipped
        );
    }
    Ok(load.graph)
}

pub fn load_store(path: &Path, g: &SocialGraph) -> Result<TweetLoad, CliError> {
    let file = File::open(path).map_err(|e| io_at(path, e))?;
    let load = load_tweets(BufReader::new(file), g).map_err(|e| from_emotion(path, e))?;
    let dropped = load.unknown_users + load.unknown_emotions + load.dropped_sources;
    if dropped > 0 {
        eprintln!(
            "note: {}: {} unknown users skipped, {} unknown emotion tokens treated as none, {} provenance fields dropped",
            path.display(),
            load.unknown_users,
            load.unknown_emotions,
            load.dropped_sources
        );
    }
    Ok(load)
}

pub fn load_event_file(path: &Path) -> Result<Vec<EventRecord>, CliError> {
    let file = File::open(path).map_err(|e| io_at(path, e))?;
    load_events(BufReader::new(file)).map_err(|e| from_burst(path, e))
}

/// Per-event analysis failures that mean "this event has no burst to
/// measure" rather than "the command failed"; such events are listed in an
/// omissions table with one of these codes. Anything else propagates.
pub fn omit_reason(e: &BurstError) -> Option<&'static str> {
    match e {
        BurstError::NoBurst(r) => Some(r.code()),
        BurstError::DegenerateCurve => Some("degenerate_curve"),
        BurstError::TooFewPoints { .. } => Some("too_few_points"),
        BurstError::EmptyEvent => Some("empty_event"),
        BurstError::NoEmotionalTweets => Some("no_emotional_tweets"),
        BurstError::NoDominantEmotion => Some("no_dominant_emotion"),
        _ => None,
    }
}

/// Range guard for parameters that reach the CLI as plain numbers.
pub fn check(ok: bool, msg: impl Into<String>) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Usage(msg.into()))
    }
}
