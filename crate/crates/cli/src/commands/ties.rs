use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use emoflow_core::graph::{tie_strength_report, RetweetRecord};
use emoflow_core::Emotion;

use crate::error::CliError;
use crate::out::fmt_f64;

use super::{load_graph, load_store, Ctx};

/// Per-emotion tie-strength averages over emotional retweets.
#[derive(Args, Debug)]
pub struct TiesArgs {
    /// Follower graph edge list: `follower followee retweet_count` rows.
    #[arg(long, value_name = "PATH")]
    graph: Option<PathBuf>,
    /// Tweet table; rows with retweet provenance feed the report.
    #[arg(long, value_name = "PATH")]
    tweets: Option<PathBuf>,
}

pub fn run(args: TiesArgs, ctx: &Ctx) -> Result<(), CliError> {
    let graph_path: PathBuf = ctx.cfg.require(args.graph, "graph")?;
    let tweets_path: PathBuf = ctx.cfg.require(args.tweets, "tweets")?;

    let g = load_graph(&graph_path)?;
    let load = load_store(&tweets_path, &g)?;

    let records: Vec<RetweetRecord> = load
        .store
        .tweets()
        .iter()
        .filter_map(|t| {
            t.source.as_ref().map(|s| RetweetRecord {
                retweeter: t.author,
                author: s.author,
                emotion: t.emotion,
                timestamp: t.timestamp,
            })
        })
        .collect();

    let report = tie_strength_report(&g, &records)?;
    if report.skipped_no_edge > 0 {
        eprintln!(
            "note: {} retweet records lack the follow edge and were skipped",
            report.skipped_no_edge
        );
    }

    let mut csv = String::from(
        "emotion,n,common_friends_mean,common_friends_stderr,reciprocity,retweet_strength_mean,retweet_strength_stderr\n",
    );
    for e in Emotion::ALL {
        if let Some(s) = report.stats(e) {
            writeln!(
                csv,
                "{},{},{},{},{},{},{}",
                e.name(),
                s.n,
                fmt_f64(s.common_friends_mean),
                fmt_f64(s.common_friends_stderr),
                fmt_f64(s.reciprocity),
                fmt_f64(s.retweet_strength_mean),
                fmt_f64(s.retweet_strength_stderr)
            )
            .expect("string writes cannot fail");
        }
    }
    ctx.out.write("ties.csv", &csv)
}
