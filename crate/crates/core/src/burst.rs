//! Awakening/peak detection on cumulative curves and burst speed metrics.
//!
//! A burst's growth phase is bounded by two marker points found with a
//! parameterless reference-line construction: normalize both axes to [0,1],
//! join the first and last points by the line L (the diagonal after
//! normalization), and take the point of maximum perpendicular distance
//! strictly below L as the awakening and strictly above L as the peak.
//! Curves with no such pair — linear, purely convex, or markers in the
//! wrong order — carry no detectable burst and are reported as such.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read};

use thiserror::Error;

use crate::emotion::Emotion;

/// Why a curve has no detectable burst.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoBurstReason {
    /// No point lies strictly above the reference line (linear or convex
    /// growth with no deceleration bend).
    NoPointAbove,
    /// No point lies strictly below the reference line.
    NoPointBelow,
    /// The best below-line point does not precede the best above-line point.
    MarkerOrder,
}

impl NoBurstReason {
    pub fn code(self) -> &'static str {
        match self {
            NoBurstReason::NoPointAbove => "no_point_above",
            NoBurstReason::NoPointBelow => "no_point_below",
            NoBurstReason::MarkerOrder => "marker_order",
        }
    }
}

#[derive(Debug, Error)]
pub enum BurstError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("curve needs at least {needed} points, got {got}")]
    TooFewPoints { got: usize, needed: usize },
    #[error("x must increase strictly (violated at point {index})")]
    NonIncreasingX { index: usize },
    #[error("y must be non-negative and non-decreasing (violated at point {index})")]
    InvalidY { index: usize },
    #[error("curve values must be finite (violated at point {index})")]
    NonFinite { index: usize },
    #[error("degenerate curve: no growth between first and last point")]
    DegenerateCurve,
    #[error("no burst: {}", .0.code())]
    NoBurst(NoBurstReason),
    #[error("event has no hourly bins")]
    EmptyEvent,
    #[error("event has no emotional tweets")]
    NoEmotionalTweets,
    #[error("event has no dominant emotion")]
    NoDominantEmotion,
    #[error("dominance threshold {0} outside (0.5, 1)")]
    InvalidThreshold(f64),
}

/// An ordered cumulative curve: strictly increasing x, non-decreasing
/// non-negative y. Monotonicity is enforced at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeCurve {
    points: Vec<(f64, f64)>,
}

impl CumulativeCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, BurstError> {
        if points.is_empty() {
            return Err(BurstError::TooFewPoints { got: 0, needed: 1 });
        }
        for (k, &(x, y)) in points.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(BurstError::NonFinite { index: k });
            }
            if y < 0.0 || (k > 0 && y < points[k - 1].1) {
                return Err(BurstError::InvalidY { index: k });
            }
            if k > 0 && x <= points[k - 1].0 {
                return Err(BurstError::NonIncreasingX { index: k });
            }
        }
        Ok(CumulativeCurve { points })
    }

    /// Curve over y-values at x = 0, 1, 2, …, the native form of
    /// per-step simulation counts.
    pub fn from_ys<T: Into<f64> + Copy>(ys: &[T]) -> Result<Self, BurstError> {
        Self::new(
            ys.iter()
                .enumerate()
                .map(|(k, &y)| (k as f64, y.into()))
                .collect(),
        )
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// The awakening and peak points of a burst, in original curve coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BurstMarkers {
    pub x_a: f64,
    pub y_a: f64,
    pub x_p: f64,
    pub y_p: f64,
    pub awakening_index: usize,
    pub peak_index: usize,
}

/// Classification tolerance on normalized coordinates: points within this
/// band of the reference line count as neither above nor below.
const LINE_TOL: f64 = 1e-12;

/// Locates the awakening (maximum-distance point strictly below the
/// reference line) and peak (strictly above) of a cumulative curve.
///
/// Both axes are normalized to [0,1] first, so the result is invariant
/// under affine rescaling of either axis and marker points always coincide
/// with input points. Distance ties resolve to the earliest x.
pub fn detect_markers(curve: &CumulativeCurve) -> Result<BurstMarkers, BurstError> {
    let pts = curve.points();
    if pts.len() < 3 {
        return Err(BurstError::TooFewPoints {
            got: pts.len(),
            needed: 3,
        });
    }
    let (x0, y0) = pts[0];
    let (xn, yn) = pts[pts.len() - 1];
    if yn == y0 {
        // x0 == xn is impossible: x increases strictly.
        return Err(BurstError::DegenerateCurve);
    }

    // After normalization the reference line is the diagonal; the signed
    // offset yn − xn determines the side and |yn − xn|/√2 the perpendicular
    // distance.
    let mut peak: Option<(usize, f64)> = None;
    let mut awakening: Option<(usize, f64)> = None;
    for (k, &(x, y)) in pts.iter().enumerate() {
        let xs = (x - x0) / (xn - x0);
        let ys = (y - y0) / (yn - y0);
        let s = ys - xs;
        let d = s.abs() / std::f64::consts::SQRT_2;
        if s > LINE_TOL {
            if peak.map_or(true, |(_, best)| d > best) {
                peak = Some((k, d));
            }
        } else if s < -LINE_TOL {
            if awakening.map_or(true, |(_, best)| d > best) {
                awakening = Some((k, d));
            }
        }
    }

    let (peak_index, _) = peak.ok_or(BurstError::NoBurst(NoBurstReason::NoPointAbove))?;
    let (awakening_index, _) =
        awakening.ok_or(BurstError::NoBurst(NoBurstReason::NoPointBelow))?;
    if awakening_index >= peak_index {
        return Err(BurstError::NoBurst(NoBurstReason::MarkerOrder));
    }
    Ok(BurstMarkers {
        x_a: pts[awakening_index].0,
        y_a: pts[awakening_index].1,
        x_p: pts[peak_index].0,
        y_p: pts[peak_index].1,
        awakening_index,
        peak_index,
    })
}

/// Spread-speed measures of a burst: the reciprocal of the growth-phase
/// duration, its average growth velocity, and that velocity normalized by
/// the peak volume. Units follow the curve's x axis (1/hours for events,
/// 1/steps for simulations).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedMetrics {
    pub time_difference: f64,
    pub slope: f64,
    pub normalized_slope: f64,
}

pub fn speed_metrics(markers: &BurstMarkers) -> SpeedMetrics {
    let dx = markers.x_p - markers.x_a;
    debug_assert!(dx > 0.0, "marker contract guarantees x_a < x_p");
    let slope = (markers.y_p - markers.y_a) / dx;
    SpeedMetrics {
        time_difference: 1.0 / dx,
        slope,
        normalized_slope: slope / markers.y_p,
    }
}

/// The awakening-to-peak y-values of a curve, each divided by the peak
/// volume y_P — the segment and normalization used for model fitting.
/// The last element is always 1.
pub fn normalized_growth_segment(curve: &CumulativeCurve) -> Result<Vec<f64>, BurstError> {
    let m = detect_markers(curve)?;
    Ok(curve.points()[m.awakening_index..=m.peak_index]
        .iter()
        .map(|&(_, y)| y / m.y_p)
        .collect())
}

/// One burst event: hourly per-emotion tweet counts, sorted by hour.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRecord {
    pub id: String,
    /// (hour index, counts per emotion), strictly increasing hours.
    pub hours: Vec<(i64, [u64; 4])>,
}

impl EventRecord {
    pub fn total_emotional(&self) -> u64 {
        self.hours
            .iter()
            .map(|(_, counts)| counts.iter().sum::<u64>())
            .sum()
    }

    /// Emotion shares over the whole event; None when empty.
    pub fn shares(&self) -> Option<[f64; 4]> {
        let total = self.total_emotional();
        if total == 0 {
            return None;
        }
        let mut sums = [0u64; 4];
        for (_, counts) in &self.hours {
            for k in 0..4 {
                sums[k] += counts[k];
            }
        }
        Some(sums.map(|s| s as f64 / total as f64))
    }
}

/// The emotion holding strictly more than `threshold` of the event's
/// emotional tweets, or None when no emotion dominates.
pub fn dominant_emotion(
    event: &EventRecord,
    threshold: f64,
) -> Result<Option<Emotion>, BurstError> {
    if !(threshold > 0.5 && threshold < 1.0) {
        return Err(BurstError::InvalidThreshold(threshold));
    }
    let shares = event.shares().ok_or(BurstError::NoEmotionalTweets)?;
    for e in Emotion::ALL {
        if shares[e as usize] > threshold {
            return Ok(Some(e));
        }
    }
    Ok(None)
}

/// Which tweets of an event feed its cumulative curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveFilter {
    /// All emotional tweets regardless of emotion.
    AllEmotional,
    /// Only tweets of the dominant emotion; errors when none dominates.
    DominantOnly { threshold: f64 },
}

/// Cumulative tweet counts of an event over its recorded hours.
pub fn event_curve(event: &EventRecord, filter: CurveFilter) -> Result<CumulativeCurve, BurstError> {
    if event.hours.is_empty() {
        return Err(BurstError::EmptyEvent);
    }
    let pick: Box<dyn Fn(&[u64; 4]) -> u64> = match filter {
        CurveFilter::AllEmotional => Box::new(|c: &[u64; 4]| c.iter().sum()),
        CurveFilter::DominantOnly { threshold } => {
            let dominant = dominant_emotion(event, threshold)?
                .ok_or(BurstError::NoDominantEmotion)?;
            Box::new(move |c: &[u64; 4]| c[dominant as usize])
        }
    };
    let mut points = Vec::with_capacity(event.hours.len());
    let mut cumulative = 0u64;
    for (hour, counts) in &event.hours {
        cumulative += pick(counts);
        points.push((*hour as f64, cumulative as f64));
    }
    CumulativeCurve::new(points)
}

/// Parses event rows: `event_id, hour_index, anger, disgust, joy, sadness`,
/// comma- or tab-separated, header auto-detected by a first row with no
/// numeric field. Events keep first-appearance order; duplicate
/// (event, hour) rows merge by summing counts.
pub fn load_events<R: Read>(source: R) -> Result<Vec<EventRecord>, BurstError> {
    let reader = BufReader::new(source);
    let mut order: Vec<String> = Vec::new();
    let mut by_id: HashMap<String, HashMap<i64, [u64; 4]>> = HashMap::new();
    let mut delim: Option<char> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let first_data_line = delim.is_none();
        let delim = *delim.get_or_insert(if line.contains('\t') { '\t' } else { ',' });
        let fields: Vec<&str> = line.split(delim).map(str::trim).collect();
        if first_data_line && fields.iter().all(|f| f.parse::<f64>().is_err()) {
            continue; // header row
        }
        if fields.len() != 6 {
            return Err(BurstError::Parse {
                line: line_no,
                msg: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        let hour: i64 = fields[1].parse().map_err(|_| BurstError::Parse {
            line: line_no,
            msg: format!("invalid hour index {:?}", fields[1]),
        })?;
        let mut counts = [0u64; 4];
        for k in 0..4 {
            counts[k] = fields[2 + k].parse().map_err(|_| BurstError::Parse {
                line: line_no,
                msg: format!("invalid count {:?}", fields[2 + k]),
            })?;
        }
        let id = fields[0].to_string();
        if !by_id.contains_key(&id) {
            order.push(id.clone());
        }
        let hours = by_id.entry(id).or_default();
        let entry = hours.entry(hour).or_insert([0; 4]);
        for k in 0..4 {
            entry[k] += counts[k];
        }
    }

    Ok(order
        .into_iter()
        .map(|id| {
            let mut hours: Vec<(i64, [u64; 4])> =
                by_id.remove(&id).unwrap().into_iter().collect();
            hours.sort_unstable_by_key(|&(h, _)| h);
            EventRecord { id, hours }
        })
        .collect())
}

/// Writes events in the six-column layout `load_events` reads.
pub fn write_events<W: std::io::Write>(w: &mut W, events: &[EventRecord]) -> std::io::Result<()> {
    writeln!(w, "event_id,hour_index,anger,disgust,joy,sadness")?;
    for ev in events {
        for (hour, c) in &ev.hours {
            writeln!(w, "{},{},{},{},{},{}", ev.id, hour, c[0], c[1], c[2], c[3])?;
        }
    }
    Ok(())
}
