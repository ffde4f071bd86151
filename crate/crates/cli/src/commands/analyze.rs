use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use emoflow_core::burst::{
    detect_markers, dominant_emotion, event_curve, speed_metrics, CurveFilter, SpeedMetrics,
};
use emoflow_core::Emotion;
use serde_json::json;

use crate::error::{from_burst, usage, CliError};
use crate::out::fmt_f64;

use super::{check, load_event_file, omit_reason, Ctx};

/// Burst markers and growth-speed metrics for hourly event curves.
#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Event table: `event_id,hour_index,anger,disgust,joy,sadness` rows.
    #[arg(long, value_name = "PATH")]
    events: Option<PathBuf>,
    /// Share an emotion must strictly exceed to dominate an event.
    #[arg(long, value_name = "F")]
    dominant_threshold: Option<f64>,
    /// Which tweets feed each curve: `all` emotional or `dominant` only.
    #[arg(long, value_name = "MODE")]
    curve: Option<String>,
}

pub fn run(args: AnalyzeArgs, ctx: &Ctx) -> Result<(), CliError> {
    let events_path: PathBuf = ctx.cfg.require(args.events, "events")?;
    let threshold: f64 = ctx.cfg.get(args.dominant_threshold, "dominant_threshold", 0.6)?;
    check(
        threshold > 0.5 && threshold < 1.0,
        format!("--dominant-threshold {threshold} outside (0.5, 1)"),
    )?;
    let filter = curve_filter(ctx, args.curve, threshold)?;

    let events = load_event_file(&events_path)?;

    let mut markers_csv = String::from(
        "event_id,x_a,y_a,x_p,y_p,time_difference,slope,normalized_slope,dominant_emotion\n",
    );
    let mut omitted_csv = String::from("event_id,reason\n");
    let mut omitted = 0usize;
    let mut by_emotion: [Vec<SpeedMetrics>; 4] = Default::default();
    let mut analyzed = 0usize;

    for ev in &events {
        let omit = |reason: &str, omitted_csv: &mut String, omitted: &mut usize| {
            writeln!(omitted_csv, "{},{}", ev.id, reason).expect("string writes cannot fail");
            *omitted += 1;
        };
        let dominant = match dominant_emotion(ev, threshold) {
            Ok(d) => d,
            Err(e) => {
                let reason = fatal_or_reason(&events_path, e)?;
                omit(reason, &mut omitted_csv, &mut omitted);
                continue;
            }
        };
        let markers = event_curve(ev, filter).and_then(|c| detect_markers(&c));
        let markers = match markers {
            Ok(m) => m,
            Err(e) => {
                let reason = fatal_or_reason(&events_path, e)?;
                omit(reason, &mut omitted_csv, &mut omitted);
                continue;
            }
        };
        let speed = speed_metrics(&markers);
        writeln!(
            markers_csv,
            "{},{},{},{},{},{},{},{},{}",
            ev.id,
            fmt_f64(markers.x_a),
            fmt_f64(markers.y_a),
            fmt_f64(markers.x_p),
            fmt_f64(markers.y_p),
            fmt_f64(speed.time_difference),
            fmt_f64(speed.slope),
            fmt_f64(speed.normalized_slope),
            dominant.map_or("none", Emotion::name)
        )
        .expect("string writes cannot fail");
        analyzed += 1;
        if let Some(e) = dominant {
            by_emotion[e as usize].push(speed);
        }
    }

    ctx.out.write("markers.csv", &markers_csv)?;
    ctx.out.write("omitted.csv", &omitted_csv)?;

    let mut speed_csv = String::from(
        "emotion,n,mean_time_difference,mean_slope,mean_normalized_slope\n",
    );
    for e in Emotion::ALL {
        let group = &by_emotion[e as usize];
        if group.is_empty() {
            continue;
        }
        let n = group.len() as f64;
        let mean = |pick: fn(&SpeedMetrics) -> f64| group.iter().map(pick).sum::<f64>() / n;
        writeln!(
            speed_csv,
            "{},{},{},{},{}",
            e.name(),
            group.len(),
            fmt_f64(mean(|s| s.time_difference)),
            fmt_f64(mean(|s| s.slope)),
            fmt_f64(mean(|s| s.normalized_slope))
        )
        .expect("string writes cannot fail");
    }
    ctx.out.write("speed_by_emotion.csv", &speed_csv)?;

    let summary = json!({
        "events": events.len(),
        "analyzed": analyzed,
        "omitted": omitted,
        "dominant_threshold": threshold,
        "curve": match filter { CurveFilter::AllEmotional => "all", CurveFilter::DominantOnly { .. } => "dominant" },
    });
    let mut body = serde_json::to_string_pretty(&summary).expect("summary serializes");
    body.push('\n');
    ctx.out.write("analyze_summary.json", &body)
}

/// Per-event analysis errors downgrade to an omission reason; anything
/// else (I/O, malformed data) aborts the command.
fn fatal_or_reason(
    path: &Path,
    e: emoflow_core::burst::BurstError,
) -> Result<&'static str, CliError> {
    omit_reason(&e).ok_or_else(|| from_burst(path, e))
}

pub fn curve_filter(
    ctx: &Ctx,
    flag: Option<String>,
    threshold: f64,
) -> Result<CurveFilter, CliError> {
    let mode: String = ctx.cfg.get(flag, "curve", "all".into())?;
    match mode.as_str() {
        "all" => Ok(CurveFilter::AllEmotional),
        "dominant" => Ok(CurveFilter::DominantOnly { threshold }),
        other => Err(usage(format!("--curve must be `all` or `dominant`, got `{other}`"))),
    }
}
