use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use emoflow_core::burst::{dominant_emotion, event_curve};
use emoflow_core::fit::{
    build_fit_grid, default_alpha_grid, default_gamma_grid, fit_event, EventFit, FitError,
    FitReport, Parameter,
};
use emoflow_core::sim::{run_ensemble, EnsembleOptions, StopCondition};
use emoflow_core::Emotion;
use serde_json::json;

use crate::error::{from_burst, usage, CliError};
use crate::out::fmt_f64;

use super::analyze::curve_filter;
use super::{check, load_event_file, load_graph, omit_reason, Ctx};

/// Fits (α, γ) to observed event curves by warping distance against a
/// simulated ensemble grid.
#[derive(Args, Debug)]
pub struct FitArgs {
    /// Follower graph the ensemble grid is simulated on.
    #[arg(long, value_name = "PATH")]
    graph: Option<PathBuf>,
    /// Event table to fit.
    #[arg(long, value_name = "PATH")]
    events: Option<PathBuf>,
    /// Comma-separated α search grid (default: -1.0..1.0 step 0.1).
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    alphas: Option<String>,
    /// Comma-separated γ search grid (default: 0.1..1.0 step 0.1).
    #[arg(long, value_name = "LIST")]
    gammas: Option<String>,
    /// Simulated runs per grid cell.
    #[arg(long, value_name = "N")]
    runs: Option<usize>,
    /// Step budget per simulated run.
    #[arg(long, value_name = "N")]
    max_steps: Option<u32>,
    /// Infection-tree prefix size for cell statistics.
    #[arg(long, value_name = "K")]
    snapshot_k: Option<usize>,
    /// Best cells kept per event.
    #[arg(long, value_name = "K")]
    top_k: Option<usize>,
    /// Share an emotion must strictly exceed to dominate an event.
    #[arg(long, value_name = "F")]
    dominant_threshold: Option<f64>,
    /// Which tweets feed each observed curve: `all` or `dominant`.
    #[arg(long, value_name = "MODE")]
    curve: Option<String>,
}

pub fn run(args: FitArgs, ctx: &Ctx) -> Result<(), CliError> {
    let graph_path: PathBuf = ctx.cfg.require(args.graph, "graph")?;
    let events_path: PathBuf = ctx.cfg.require(args.events, "events")?;
    let alphas: Vec<f64> = ctx
        .cfg
        .list(args.alphas.as_deref(), "alphas")?
        .unwrap_or_else(default_alpha_grid);
    let gammas: Vec<f64> = ctx
        .cfg
        .list(args.gammas.as_deref(), "gammas")?
        .unwrap_or_else(default_gamma_grid);
    let runs: usize = ctx.cfg.get(args.runs, "runs", 50)?;
    let max_steps: u32 = ctx.cfg.get(args.max_steps, "max_steps", 10_000)?;
    let snapshot_k: usize = ctx.cfg.get(args.snapshot_k, "snapshot_k", 50)?;
    let top_k: usize = ctx.cfg.get(args.top_k, "top_k", 20)?;
    let threshold: f64 = ctx.cfg.get(args.dominant_threshold, "dominant_threshold", 0.6)?;

    check(!alphas.is_empty(), "--alphas must list at least one value")?;
    check(!gammas.is_empty(), "--gammas must list at least one value")?;
    check(
        alphas.iter().all(|a| a.is_finite()),
        "--alphas entries must be finite",
    )?;
    check(
        gammas.iter().all(|g| g.is_finite() && *g >= 0.0),
        "--gammas entries must be finite and non-negative",
    )?;
    check(runs >= 1, "--runs must be at least 1")?;
    check(max_steps >= 1, "--max-steps must be at least 1")?;
    check(snapshot_k >= 1, "--snapshot-k must be at least 1")?;
    check(top_k >= 1, "--top-k must be at least 1")?;
    check(
        threshold > 0.5 && threshold < 1.0,
        format!("--dominant-threshold {threshold} outside (0.5, 1)"),
    )?;
    let filter = curve_filter(ctx, args.curve, threshold)?;

    let events = load_event_file(&events_path)?;
    if events.is_empty() {
        return Err(usage(format!(
            "{}: no events to fit",
            events_path.display()
        )));
    }

    let g = load_graph(&graph_path)?;
    let view = g.undirected();
    let opts = EnsembleOptions {
        n_runs: runs,
        max_steps,
        stop: StopCondition::AllInfected,
        snapshot_k,
        base_seed: ctx.seed,
    };
    let stats = run_ensemble(&view, &alphas, &gammas, &opts)?;
    let grid = build_fit_grid(&stats)?;
    let k = if top_k > grid.usable_cells() {
        eprintln!(
            "warning: --top-k {} exceeds the {} usable grid cells; clamping",
            top_k,
            grid.usable_cells()
        );
        grid.usable_cells()
    } else {
        top_k
    };

    let mut report = FitReport { events: Vec::new() };
    let mut omitted_csv = String::from("event_id,reason\n");
    let mut omitted = 0usize;
    for ev in &events {
        // Dominance only tags the fit for CDF pooling; events without a
        // dominant emotion still fit when the curve itself is usable.
        let dominant = dominant_emotion(ev, threshold).ok().flatten();
        let fitted = event_curve(ev, filter)
            .map_err(FitError::Markers)
            .and_then(|curve| fit_event(&grid, &curve, k));
        match fitted {
            Ok(entry) => report.events.push(EventFit {
                event_id: ev.id.clone(),
                dominant,
                entry,
            }),
            Err(FitError::Markers(e)) => match omit_reason(&e) {
                Some(reason) => {
                    writeln!(omitted_csv, "{},{}", ev.id, reason)
                        .expect("string writes cannot fail");
                    omitted += 1;
                }
                None => return Err(from_burst(&events_path, e)),
            },
            Err(e) => return Err(e.into()),
        }
    }

    let mut fits_csv = String::from("event_id,rank,alpha,gamma,dtw_distance\n");
    for ev in &report.events {
        for (idx, c) in ev.entry.candidates.iter().enumerate() {
            writeln!(
                fits_csv,
                "{},{},{},{},{}",
                ev.event_id,
                idx + 1,
                fmt_f64(c.alpha),
                fmt_f64(c.gamma),
                fmt_f64(c.dtw_distance)
            )
            .expect("string writes cannot fail");
        }
    }
    ctx.out.write("fits.csv", &fits_csv)?;
    ctx.out.write("fit_omitted.csv", &omitted_csv)?;

    let mut cdf_csv = String::from("parameter,value,cdf\n");
    if !report.events.is_empty() {
        for (name, parameter) in [("alpha", Parameter::Alpha), ("gamma", Parameter::Gamma)] {
            for (value, cdf) in report.cdf(parameter, None)? {
                writeln!(cdf_csv, "{},{},{}", name, fmt_f64(value), fmt_f64(cdf))
                    .expect("string writes cannot fail");
            }
        }
    }
    ctx.out.write("cdf.csv", &cdf_csv)?;

    let mut split_csv = String::from("emotion,parameter,value,cdf\n");
    for e in Emotion::ALL {
        if !report.events.iter().any(|ev| ev.dominant == Some(e)) {
            continue;
        }
        for (name, parameter) in [("alpha", Parameter::Alpha), ("gamma", Parameter::Gamma)] {
            for (value, cdf) in report.cdf(parameter, Some(e))? {
                writeln!(
                    split_csv,
                    "{},{},{},{}",
                    e.name(),
                    name,
                    fmt_f64(value),
                    fmt_f64(cdf)
                )
                .expect("string writes cannot fail");
            }
        }
    }
    ctx.out.write("cdf_by_emotion.csv", &split_csv)?;

    let summary = json!({
        "events": events.len(),
        "fitted": report.events.len(),
        "omitted": omitted,
        "top_k": k,
        "grid": {
            "alphas": alphas.len(),
            "gammas": gammas.len(),
            "usable_cells": grid.usable_cells(),
            "excluded_cells": grid.excluded_cells(),
        },
        "runs": runs,
        "base_seed": ctx.seed,
    });
    let mut body = serde_json::to_string_pretty(&summary).expect("summary serializes");
    body.push('\n');
    ctx.out.write("fit_summary.json", &body)
}
