use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use emoflow_core::emotion::{contagion_report, SusceptibilityGroup};
use emoflow_core::graph::SocialGraph;
use emoflow_core::Emotion;
use serde_json::json;

use crate::error::CliError;
use crate::out::fmt_opt;

use super::{check, load_graph, load_store, Ctx};

/// Exposure-based contagion significance across a grid of time windows,
/// plus an optional susceptibility split of the user base.
#[derive(Args, Debug)]
pub struct ContagionArgs {
    /// Follower graph edge list.
    #[arg(long, value_name = "PATH")]
    graph: Option<PathBuf>,
    /// Tweet table driving exposure windows.
    #[arg(long, value_name = "PATH")]
    tweets: Option<PathBuf>,
    /// Comma-separated exposure windows in hours (default 1..8).
    #[arg(long, value_name = "LIST")]
    deltas: Option<String>,
    /// Minimum emotional tweets a user must see within the window.
    #[arg(long, value_name = "N")]
    threshold: Option<u32>,
    /// Susceptibility group size as a fraction of rankable users, in (0, 0.5].
    #[arg(long, value_name = "F")]
    fraction: Option<f64>,
    /// Window used for the susceptibility split (default: first of --deltas).
    #[arg(long, value_name = "HOURS")]
    susceptibility_delta: Option<u32>,
    /// Skip the susceptibility split entirely.
    #[arg(long)]
    no_susceptibility: bool,
}

pub fn run(args: ContagionArgs, ctx: &Ctx) -> Result<(), CliError> {
    let graph_path: PathBuf = ctx.cfg.require(args.graph, "graph")?;
    let tweets_path: PathBuf = ctx.cfg.require(args.tweets, "tweets")?;
    let deltas: Vec<u32> = ctx
        .cfg
        .list(args.deltas.as_deref(), "deltas")?
        .unwrap_or_else(|| (1..=8).collect());
    let threshold: u32 = ctx.cfg.get(args.threshold, "threshold", 20)?;
    let fraction: f64 = ctx.cfg.get(args.fraction, "fraction", 0.15)?;

    check(!deltas.is_empty(), "--deltas must list at least one window")?;
    check(
        deltas.iter().all(|&d| d >= 1),
        "--deltas entries must be at least 1 hour",
    )?;
    check(threshold >= 1, "--threshold must be at least 1")?;
    check(
        fraction > 0.0 && fraction <= 0.5,
        format!("--fraction {fraction} outside (0, 0.5]"),
    )?;
    let sus_delta: u32 = ctx
        .cfg
        .get(args.susceptibility_delta, "susceptibility_delta", deltas[0])?;
    check(sus_delta >= 1, "--susceptibility-delta must be at least 1")?;

    let g = load_graph(&graph_path)?;
    let load = load_store(&tweets_path, &g)?;

    let susceptibility = (!args.no_susceptibility).then_some((sus_delta, fraction));
    let report = contagion_report(&load.store, &g, &deltas, threshold, susceptibility)?;

    let mut csv = String::from(
        "emotion,delta_hours,significance,influenced_within,influenced_of_total,qualifying\n",
    );
    for e in Emotion::ALL {
        for row in &report.rows {
            writeln!(
                csv,
                "{},{},{},{},{},{}",
                e.name(),
                row.delta_hours,
                fmt_opt(row.significance[e as usize]),
                fmt_opt(row.influenced_within[e as usize]),
                fmt_opt(row.influenced_of_total[e as usize]),
                row.qualifying[e as usize]
            )
            .expect("string writes cannot fail");
        }
    }
    ctx.out.write("significance.csv", &csv)?;

    if let Some(partition) = &report.susceptibility {
        let mut csv = String::from("group,rank,user\n");
        let groups = [("high", &partition.high), ("low", &partition.low)];
        for (name, group) in groups {
            for (rank, &user) in group.users.iter().enumerate() {
                writeln!(csv, "{},{},{}", name, rank + 1, g.label(user))
                    .expect("string writes cannot fail");
            }
        }
        ctx.out.write("susceptibility.csv", &csv)?;
    }

    let shares = |group: &SusceptibilityGroup| {
        let mut map = serde_json::Map::new();
        for e in Emotion::ALL {
            map.insert(e.name().to_string(), json!(group.influenced_share[e as usize]));
        }
        json!({ "size": group.users.len(), "influenced_share": map })
    };
    let susceptibility_json = match &report.susceptibility {
        Some(p) => json!({
            "delta_hours": sus_delta,
            "fraction": fraction,
            "rankable_users": p.rankable_users,
            "high": shares(&p.high),
            "low": shares(&p.low),
        }),
        None => serde_json::Value::Null,
    };
    let below: Vec<_> = report
        .rows
        .iter()
        .map(|r| json!({ "delta_hours": r.delta_hours, "below_threshold": r.below_threshold }))
        .collect();
    let summary = json!({
        "deltas": deltas,
        "threshold": threshold,
        "tweets": tweet_counters(&load, &g),
        "below_threshold": below,
        "susceptibility": susceptibility_json,
    });
    let mut body = serde_json::to_string_pretty(&summary).expect("summary serializes");
    body.push('\n');
    ctx.out.write("contagion_summary.json", &body)
}

fn tweet_counters(load: &emoflow_core::emotion::TweetLoad, g: &SocialGraph) -> serde_json::Value {
    json!({
        "kept": load.store.len(),
        "users": g.node_count(),
        "unknown_users": load.unknown_users,
        "unknown_emotions": load.unknown_emotions,
        "dropped_sources": load.dropped_sources,
    })
}
