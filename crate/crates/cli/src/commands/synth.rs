use std::fmt::Write as _;

use clap::Args;
use emoflow_core::burst::write_events;
use emoflow_core::emotion::write_tweets;
use emoflow_core::rng::derive_seed;
use emoflow_core::synth::{sbm_graph, synth_events, synth_tweets, EventsSpec, SbmSpec, StreamSpec};
use emoflow_core::Emotion;

use crate::config::parse_list;
use crate::error::{usage, CliError};

use super::{check, Ctx};

/// Generates a block-structured follower graph, a tweet stream over it,
/// and hourly event tables with planted bursts — a desk-scale corpus for
/// exercising the other commands.
#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Comma-separated block sizes of the follower graph.
    #[arg(long, value_name = "LIST")]
    blocks: Option<String>,
    /// Follow probability inside a block.
    #[arg(long, value_name = "P")]
    intra_p: Option<f64>,
    /// Follow probability across blocks.
    #[arg(long, value_name = "P")]
    inter_p: Option<f64>,
    /// Undirected weight range `lo,hi` for intra-block links.
    #[arg(long, value_name = "LO,HI")]
    intra_weight: Option<String>,
    /// Undirected weight range `lo,hi` for cross-block links.
    #[arg(long, value_name = "LO,HI")]
    inter_weight: Option<String>,
    /// Share of tweets carrying an emotion.
    #[arg(long, value_name = "F")]
    emotional_fraction: Option<f64>,
    /// Emotion mix `anger,disgust,joy,sadness` for spontaneous tweets.
    #[arg(long, value_name = "LIST")]
    base_mix: Option<String>,
    /// Mean tweets per user (Poisson).
    #[arg(long, value_name = "M")]
    mean_tweets: Option<f64>,
    /// Share of emotional tweets that copy a recent followee emotion.
    #[arg(long, value_name = "F")]
    influence_fraction: Option<f64>,
    /// Restrict copying to one emotion (`any` to copy whatever is seen).
    #[arg(long, value_name = "EMOTION")]
    influence_emotion: Option<String>,
    /// How far back a copied tweet may look, in hours.
    #[arg(long, value_name = "HOURS")]
    window_hours: Option<u32>,
    /// Stream length in hours.
    #[arg(long, value_name = "HOURS")]
    span_hours: Option<u32>,
    /// Number of synthetic events.
    #[arg(long, value_name = "N")]
    n_events: Option<usize>,
    /// Hours per event.
    #[arg(long, value_name = "N")]
    event_hours: Option<u32>,
    /// Hourly tweet-count range `lo,hi` outside the burst.
    #[arg(long, value_name = "LO,HI")]
    base_rate: Option<String>,
    /// Hourly tweet-count range `lo,hi` inside the burst.
    #[arg(long, value_name = "LO,HI")]
    burst_rate: Option<String>,
    /// Share of each event's tweets carrying its dominant emotion.
    #[arg(long, value_name = "F")]
    dominant_share: Option<f64>,
    /// Dominant emotions assigned to events, cycled in order.
    #[arg(long, value_name = "LIST")]
    event_emotions: Option<String>,
}

pub fn run(args: SynthArgs, ctx: &Ctx) -> Result<(), CliError> {
    let blocks: Vec<usize> = ctx
        .cfg
        .list(args.blocks.as_deref(), "blocks")?
        .unwrap_or_else(|| vec![250; 4]);
    let base_mix: Vec<f64> = ctx
        .cfg
        .list(args.base_mix.as_deref(), "base_mix")?
        .unwrap_or_else(|| vec![0.25; 4]);
    check(
        base_mix.len() == 4,
        "--base-mix needs exactly four components (anger,disgust,joy,sadness)",
    )?;
    let influence_emotion = match args
        .influence_emotion
        .as_deref()
        .or_else(|| ctx.cfg.raw("influence_emotion"))
    {
        None | Some("any") => None,
        Some(s) => Some(
            Emotion::parse(s)
                .ok_or_else(|| usage(format!("--influence-emotion: unknown emotion `{s}`")))?,
        ),
    };
    let event_emotions: Vec<Emotion> = match args
        .event_emotions
        .as_deref()
        .or_else(|| ctx.cfg.raw("event_emotions"))
    {
        None => vec![Emotion::Anger, Emotion::Joy],
        Some(raw) => parse_list::<String>(raw)
            .map_err(|e| usage(format!("--event-emotions: {e}")))?
            .iter()
            .map(|s| {
                Emotion::parse(s)
                    .ok_or_else(|| usage(format!("--event-emotions: unknown emotion `{s}`")))
            })
            .collect::<Result<_, _>>()?,
    };

    // One global seed fans out into independent per-artifact seeds, so the
    // three outputs never share random draws.
    let sbm = SbmSpec {
        blocks,
        intra_p: ctx.cfg.get(args.intra_p, "intra_p", 0.05)?,
        inter_p: ctx.cfg.get(args.inter_p, "inter_p", 0.005)?,
        intra_weight: ctx
            .cfg
            .pair(args.intra_weight.as_deref(), "intra_weight", (2, 6))?,
        inter_weight: ctx
            .cfg
            .pair(args.inter_weight.as_deref(), "inter_weight", (1, 1))?,
        seed: derive_seed(ctx.seed, &[1]),
    };
    let g = sbm_graph(&sbm)?;

    let stream = StreamSpec {
        emotional_fraction: ctx
            .cfg
            .get(args.emotional_fraction, "emotional_fraction", 0.5)?,
        base_mix: [base_mix[0], base_mix[1], base_mix[2], base_mix[3]],
        mean_tweets_per_user: ctx.cfg.get(args.mean_tweets, "mean_tweets", 20.0)?,
        influence_fraction: ctx
            .cfg
            .get(args.influence_fraction, "influence_fraction", 0.0)?,
        influence_emotion,
        window_hours: ctx.cfg.get(args.window_hours, "window_hours", 1)?,
        span_hours: ctx.cfg.get(args.span_hours, "span_hours", 240)?,
        seed: derive_seed(ctx.seed, &[2]),
    };
    let tweets = synth_tweets(&stream, &g)?;

    let events_spec = EventsSpec {
        n_events: ctx.cfg.get(args.n_events, "n_events", 12)?,
        hours: ctx.cfg.get(args.event_hours, "event_hours", 48)?,
        base_rate: ctx.cfg.pair(args.base_rate.as_deref(), "base_rate", (1, 3))?,
        burst_rate: ctx
            .cfg
            .pair(args.burst_rate.as_deref(), "burst_rate", (20, 40))?,
        dominant_share: ctx.cfg.get(args.dominant_share, "dominant_share", 0.75)?,
        emotions: event_emotions,
        seed: derive_seed(ctx.seed, &[3]),
    };
    let events = synth_events(&events_spec)?;

    let mut graph_csv = Vec::new();
    g.write_edge_list(&mut graph_csv)
        .expect("in-memory writes cannot fail");
    ctx.out.write(
        "graph.csv",
        std::str::from_utf8(&graph_csv).expect("edge list is utf-8"),
    )?;

    let mut tweets_csv = Vec::new();
    write_tweets(&mut tweets_csv, &tweets, &g).expect("in-memory writes cannot fail");
    ctx.out.write(
        "tweets.csv",
        std::str::from_utf8(&tweets_csv).expect("tweet table is utf-8"),
    )?;

    let records: Vec<_> = events.iter().map(|ev| ev.record.clone()).collect();
    let mut events_csv = Vec::new();
    write_events(&mut events_csv, &records).expect("in-memory writes cannot fail");
    ctx.out.write(
        "events.csv",
        std::str::from_utf8(&events_csv).expect("event table is utf-8"),
    )?;

    let mut truth = String::from("event_id,burst_start,burst_end,dominant\n");
    for ev in &events {
        writeln!(
            truth,
            "{},{},{},{}",
            ev.record.id,
            ev.burst_start,
            ev.burst_end,
            ev.dominant.name()
        )
        .expect("string writes cannot fail");
    }
    ctx.out.write("events_truth.csv", &truth)?;

    eprintln!(
        "note: graph has {} nodes / {} directed edges; {} tweets; {} events",
        g.node_count(),
        g.edge_count(),
        tweets.len(),
        events.len()
    );
    Ok(())
}
