use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use emoflow_core::fit::{default_alpha_grid, default_gamma_grid};
use emoflow_core::rng::derive_seed;
use emoflow_core::sim::{
    run, run_ensemble, CellStats, EnsembleOptions, SeedChoice, SimConfig, StopCondition,
};
use serde_json::json;

use crate::error::{usage, CliError};
use crate::out::{fmt_f64, fmt_opt};

use super::{check, load_graph, Ctx};

/// Spreading ensembles over an (α, γ) grid on the undirected follower
/// graph, with per-cell speed and structure statistics.
#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Follower graph edge list.
    #[arg(long, value_name = "PATH")]
    graph: Option<PathBuf>,
    /// Comma-separated tie-strength exponents (default: -1.0..1.0 step 0.1).
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    alphas: Option<String>,
    /// Comma-separated base infectivities (default: 0.1..1.0 step 0.1).
    #[arg(long, value_name = "LIST")]
    gammas: Option<String>,
    /// Independent runs per grid cell.
    #[arg(long, value_name = "N")]
    runs: Option<usize>,
    /// Step budget per run.
    #[arg(long, value_name = "N")]
    max_steps: Option<u32>,
    /// Infection-tree prefix size used for the virality statistic.
    #[arg(long, value_name = "K")]
    snapshot_k: Option<usize>,
    /// Stop once this many nodes are infected (default: run to saturation).
    #[arg(long, value_name = "N")]
    target: Option<usize>,
    /// Seed-node label for the single-run artifacts; ensembles always draw
    /// the seed uniformly.
    #[arg(long, value_name = "LABEL")]
    seed_node: Option<String>,
}

pub fn run_cmd(args: SimulateArgs, ctx: &Ctx) -> Result<(), CliError> {
    let graph_path: PathBuf = ctx.cfg.require(args.graph, "graph")?;
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
    let target: Option<usize> = ctx.cfg.opt(args.target, "target")?;
    let seed_node: Option<String> = ctx.cfg.opt(args.seed_node, "seed_node")?;

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
    if let Some(t) = target {
        check(t >= 1, "--target must be at least 1")?;
    }

    let g = load_graph(&graph_path)?;
    let view = g.undirected();
    let stop = match target {
        Some(t) => StopCondition::TargetInfected(t),
        None => StopCondition::AllInfected,
    };

    let single = alphas.len() == 1 && gammas.len() == 1 && runs == 1;
    if !single && seed_node.is_some() {
        eprintln!("warning: --seed-node only applies to single-run output; ignored");
    }
    if single {
        let seed_choice = match &seed_node {
            Some(label) => {
                let node = g
                    .node_by_label(label)
                    .ok_or_else(|| usage(format!("--seed-node `{label}` is not a graph node")))?;
                SeedChoice::Explicit(node)
            }
            None => SeedChoice::UniformRandom,
        };
        // Same derived seed as the ensemble's run 0 of this cell, so the
        // curve file shows exactly the run the statistics summarize.
        let config = SimConfig {
            alpha: alphas[0],
            gamma: gammas[0],
            seed_choice,
            max_steps,
            stop,
            rng_seed: derive_seed(ctx.seed, &[alphas[0].to_bits(), gammas[0].to_bits(), 0]),
        };
        let result = run(&view, &config)?;

        let mut curve = String::from("step,cumulative_infected\n");
        for (step, y) in result.curve.iter().enumerate() {
            writeln!(curve, "{step},{y}").expect("string writes cannot fail");
        }
        ctx.out.write("curve.csv", &curve)?;

        let mut edges = String::from("infector,infectee,step\n");
        for &u in &result.infection_order {
            if let Some(p) = result.parent[u.index()] {
                let step = result.infection_step[u.index()].expect("infected nodes carry a step");
                writeln!(edges, "{},{},{}", g.label(p), g.label(u), step)
                    .expect("string writes cannot fail");
            }
        }
        ctx.out.write("infection_edges.csv", &edges)?;

        let summary = json!({
            "seed_node": g.label(result.seed),
            "infected": result.infected_count(),
            "steps": result.curve.len() - 1,
            "saturated": result.saturated,
            "clamp_events": result.clamp_events,
        });
        let mut body = serde_json::to_string_pretty(&summary).expect("summary serializes");
        body.push('\n');
        ctx.out.write("run_summary.json", &body)?;
    }

    let opts = EnsembleOptions {
        n_runs: runs,
        max_steps,
        stop,
        snapshot_k,
        base_seed: ctx.seed,
    };
    let stats = run_ensemble(&view, &alphas, &gammas, &opts)?;

    let mut table = String::from("alpha,gamma,metric,mean,std,n,degenerate_count\n");
    for cell in &stats.cells {
        let metrics = [
            ("time_difference", &cell.time_difference, cell.degenerate_runs),
            ("slope", &cell.slope, cell.degenerate_runs),
            ("normalized_slope", &cell.normalized_slope, cell.degenerate_runs),
            ("virality", &cell.virality, cell.virality_undefined_runs),
        ];
        for (name, stat, degenerate) in metrics {
            writeln!(
                table,
                "{},{},{},{},{},{},{}",
                fmt_f64(cell.alpha),
                fmt_f64(cell.gamma),
                name,
                fmt_opt(stat.as_ref().map(|m| m.mean)),
                fmt_opt(stat.as_ref().map(|m| m.std)),
                stat.as_ref().map_or(0, |m| m.n),
                degenerate
            )
            .expect("string writes cannot fail");
        }
    }
    ctx.out.write("ensemble_stats.csv", &table)?;

    let mut curves = String::from("alpha,gamma,step,mean_infected\n");
    for cell in &stats.cells {
        for (step, y) in cell.mean_curve.iter().enumerate() {
            writeln!(
                curves,
                "{},{},{},{}",
                fmt_f64(cell.alpha),
                fmt_f64(cell.gamma),
                step,
                fmt_f64(*y)
            )
            .expect("string writes cannot fail");
        }
    }
    ctx.out.write("mean_curves.csv", &curves)?;

    let cells: Vec<_> = stats.cells.iter().map(cell_summary).collect();
    let summary = json!({
        "base_seed": ctx.seed,
        "runs": runs,
        "max_steps": max_steps,
        "snapshot_k": snapshot_k,
        "stop": match target { Some(t) => json!({ "target": t }), None => json!("all_infected") },
        "nodes": g.node_count(),
        "cells": cells,
    });
    let mut body = serde_json::to_string_pretty(&summary).expect("summary serializes");
    body.push('\n');
    ctx.out.write("simulate_summary.json", &body)
}

fn cell_summary(cell: &CellStats) -> serde_json::Value {
    json!({
        "alpha": cell.alpha,
        "gamma": cell.gamma,
        "n_runs": cell.n_runs,
        "degenerate_runs": cell.degenerate_runs,
        "virality_undefined_runs": cell.virality_undefined_runs,
        "clamp_events": cell.clamp_events,
        "empty": cell.is_empty(),
    })
}
