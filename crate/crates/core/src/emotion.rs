//! Tweet ingestion and exposure-based contagion analytics.
//!
//! The central object is the exposure vector: for a tweet posted at time t,
//! the distribution over the four emotions of everything the author's
//! followees posted in the Δ-hour window before t. Comparing per-emotion
//! mean exposure against the global baseline yields the contagion
//! significance d_i; nearest-center classification of individual exposure
//! vectors yields influenced-tweet shares and per-user susceptibility.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{NodeId, SocialGraph};

/// The four emotion categories tracked throughout the toolkit.
///
/// The discriminant order doubles as the deterministic tie-break order for
/// nearest-center classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Emotion {
    Anger = 0,
    Disgust = 1,
    Joy = 2,
    Sadness = 3,
}

impl Emotion {
    pub const ALL: [Emotion; 4] = [
        Emotion::Anger,
        Emotion::Disgust,
        Emotion::Joy,
        Emotion::Sadness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Emotion::Anger => "anger",
            Emotion::Disgust => "disgust",
            Emotion::Joy => "joy",
            Emotion::Sadness => "sadness",
        }
    }

    /// Parses one of the four emotion names; `None` for anything else
    /// (including the literal label "none").
    pub fn parse(s: &str) -> Option<Emotion> {
        match s {
            "anger" => Some(Emotion::Anger),
            "disgust" => Some(Emotion::Disgust),
            "joy" => Some(Emotion::Joy),
            "sadness" => Some(Emotion::Sadness),
            _ => None,
        }
    }
}

impl std::fmt::Display for Emotion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
pub enum EmotionError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("node {0} does not exist in this graph")]
    UnknownUser(NodeId),
    #[error("invalid distribution: components {components:?} (sum {sum})")]
    InvalidDistribution { components: [f64; 4], sum: f64 },
    #[error("no emotional tweet passes the exposure threshold")]
    NoQualifyingTweets,
    #[error("influenced share undefined: no qualifying {0} tweets")]
    UndefinedRatio(Emotion),
    #[error("baseline center undefined for {0}: no qualifying tweets")]
    CenterUndefined(Emotion),
    #[error("susceptibility fraction {0} outside (0, 0.5]")]
    InvalidFraction(f64),
    #[error("cannot partition: {rankable} rankable users, need at least {needed}")]
    PartitionTooSmall { rankable: usize, needed: usize },
}

/// A point in the 4-simplex: non-negative components over
/// (anger, disgust, joy, sadness) summing to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmotionDistribution([f64; 4]);

impl EmotionDistribution {
    /// Validates non-negativity and a component sum of 1 ± 1e-9.
    pub fn new(components: [f64; 4]) -> Result<Self, EmotionError> {
        let sum: f64 = components.iter().sum();
        if components.iter().any(|&c| c < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(EmotionError::InvalidDistribution { components, sum });
        }
        Ok(EmotionDistribution(components))
    }

    /// Normalizes raw counts; `None` when all counts are zero.
    pub fn from_counts(counts: [u32; 4]) -> Option<Self> {
        let total: u32 = counts.iter().sum();
        if total == 0 {
            return None;
        }
        Some(EmotionDistribution(
            counts.map(|c| c as f64 / total as f64),
        ))
    }

    pub fn get(&self, e: Emotion) -> f64 {
        self.0[e as usize]
    }

    pub fn components(&self) -> [f64; 4] {
        self.0
    }

    pub fn squared_distance(&self, other: &EmotionDistribution) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    pub fn distance(&self, other: &EmotionDistribution) -> f64 {
        self.squared_distance(other).sqrt()
    }
}

/// Retweet provenance carried by a tweet row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TweetSource {
    pub tweet_id: String,
    pub author: NodeId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tweet {
    pub id: String,
    pub author: NodeId,
    /// Unix seconds.
    pub timestamp: i64,
    /// None for neutral tweets and unrecognized labels.
    pub emotion: Option<Emotion>,
    pub source: Option<TweetSource>,
}

/// Per-author timeline of emotional tweets: sorted timestamps plus prefix
/// emotion counts, so any half-open window reduces to two binary searches.
#[derive(Debug, Clone, Default)]
struct Timeline {
    times: Vec<i64>,
    prefix: Vec<[u32; 4]>, // prefix[k] = emotion counts among the first k
}

impl Timeline {
    fn push(&mut self, t: i64, e: Emotion) {
        if self.prefix.is_empty() {
            self.prefix.push([0; 4]);
        }
        debug_assert!(self.times.last().map_or(true, |&last| last <= t));
        self.times.push(t);
        let mut next = *self.prefix.last().unwrap();
        next[e as usize] += 1;
        self.prefix.push(next);
    }

    /// Emotion counts in [start, end).
    fn counts_in(&self, start: i64, end: i64) -> [u32; 4] {
        if self.times.is_empty() || start >= end {
            return [0; 4];
        }
        let lo = self.times.partition_point(|&t| t < start);
        let hi = self.times.partition_point(|&t| t < end);
        let mut out = [0u32; 4];
        for k in 0..4 {
            out[k] = self.prefix[hi][k] - self.prefix[lo][k];
        }
        out
    }
}

/// Tweets sorted by time with per-author timelines for window queries.
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct TweetStore {
    tweets: Vec<Tweet>,
    timelines: Vec<Timeline>, // indexed by author NodeId
}

impl TweetStore {
    /// Builds a store over tweets whose authors index into `0..node_count`.
    pub fn from_tweets(mut tweets: Vec<Tweet>, node_count: usize) -> TweetStore {
        tweets.sort_by_key(|t| t.timestamp);
        let mut timelines = vec![Timeline::default(); node_count];
        for t in &tweets {
            assert!(
                t.author.index() < node_count,
                "tweet author {} outside graph",
                t.author
            );
            if let Some(e) = t.emotion {
                timelines[t.author.index()].push(t.timestamp, e);
            }
        }
        TweetStore { tweets, timelines }
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    /// Per-emotion counts of `author`'s emotional tweets in [start, end).
    pub fn emotional_counts_in(&self, author: NodeId, start: i64, end: i64) -> [u32; 4] {
        self.timelines
            .get(author.index())
            .map_or([0; 4], |tl| tl.counts_in(start, end))
    }

    /// Returns a store with the multiset of emotion labels randomly
    /// permuted across tweets (authors and timestamps fixed) — the null
    /// model for permutation-testing contagion significance.
    pub fn shuffle_emotions(&self, seed: u64) -> TweetStore {
        let mut labels: Vec<Option<Emotion>> = self.tweets.iter().map(|t| t.emotion).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        labels.shuffle(&mut rng);
        let tweets = self
            .tweets
            .iter()
            .zip(labels)
            .map(|(t, e)| Tweet {
                emotion: e,
                ..t.clone()
            })
            .collect();
        TweetStore::from_tweets(tweets, self.timelines.len())
    }
}

/// A loaded store plus ingestion warnings that are not hard errors.
#[derive(Debug)]
pub struct TweetLoad {
    pub store: TweetStore,
    /// Unrecognized emotion tokens mapped to no-emotion.
    pub unknown_emotions: usize,
    /// Rows whose author is not a graph node.
    pub unknown_users: usize,
    /// Rows whose retweet-source author is not a graph node; the tweet is
    /// kept, the provenance dropped.
    pub dropped_sources: usize,
}

/// Parses tweet rows: `tweet_id, user_id, unix_timestamp, emotion` plus
/// optional `source_tweet_id, source_user_id` (six fields; leave both empty
/// for originals). Tab- or comma-separated like edge lists, header
/// auto-detected by a first row with no numeric field.
pub fn load_tweets<R: Read>(source: R, g: &SocialGraph) -> Result<TweetLoad, EmotionError> {
    let reader = BufReader::new(source);
    let mut tweets = Vec::new();
    let mut unknown_emotions = 0usize;
    let mut unknown_users = 0usize;
    let mut dropped_sources = 0usize;
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
        if fields.len() != 4 && fields.len() != 6 {
            return Err(EmotionError::Parse {
                line: line_no,
                msg: format!("expected 4 or 6 fields, got {}", fields.len()),
            });
        }
        let timestamp: i64 = fields[2].parse().map_err(|_| EmotionError::Parse {
            line: line_no,
            msg: format!("invalid timestamp {:?}", fields[2]),
        })?;
        let author = match g.node_by_label(fields[1]) {
            Some(id) => id,
            None => {
                unknown_users += 1;
                continue;
            }
        };
        let emotion = match fields[3] {
            "none" | "" => None,
            token => match Emotion::parse(token) {
                Some(e) => Some(e),
                None => {
                    unknown_emotions += 1;
                    None
                }
            },
        };
        let source = if fields.len() == 6 && !(fields[4].is_empty() && fields[5].is_empty()) {
            match g.node_by_label(fields[5]) {
                Some(src_author) => Some(TweetSource {
                    tweet_id: fields[4].to_string(),
                    author: src_author,
                }),
                None => {
                    dropped_sources += 1;
                    None
                }
            }
        } else {
            None
        };
        tweets.push(Tweet {
            id: fields[0].to_string(),
            author,
            timestamp,
            emotion,
            source,
        });
    }

    Ok(TweetLoad {
        store: TweetStore::from_tweets(tweets, g.node_count()),
        unknown_emotions,
        unknown_users,
        dropped_sources,
    })
}

/// Writes tweets in the six-column layout `load_tweets` reads, with empty
/// provenance fields for originals. Input order is preserved.
pub fn write_tweets<W: Write>(
    w: &mut W,
    tweets: &[Tweet],
    g: &SocialGraph,
) -> std::io::Result<()> {
    writeln!(
        w,
        "tweet_id,user_id,timestamp,emotion,source_tweet_id,source_user_id"
    )?;
    for t in tweets {
        let emotion = t.emotion.map_or("none", Emotion::name);
        let (src_id, src_user) = match &t.source {
            Some(src) => (src.tweet_id.as_str(), g.label(src.author)),
            None => ("", ""),
        };
        writeln!(
            w,
            "{},{},{},{},{},{}",
            t.id,
            g.label(t.author),
            t.timestamp,
            emotion,
            src_id,
            src_user
        )?;
    }
    Ok(())
}

/// Outcome of an exposure-window query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exposure {
    Measured(EmotionDistribution),
    /// Fewer emotional tweets in the window than the threshold requires.
    BelowThreshold { count: u32 },
}

/// Raw per-emotion counts of emotional tweets posted by `u`'s followees in
/// the half-open window `[t − Δ·3600, t)`.
fn exposure_counts(
    store: &TweetStore,
    g: &SocialGraph,
    u: NodeId,
    t: i64,
    delta_hours: u32,
) -> [u32; 4] {
    let start = t - i64::from(delta_hours) * 3600;
    let mut counts = [0u32; 4];
    for &followee in g.out_neighbors(u) {
        let c = store.emotional_counts_in(followee, start, t);
        for k in 0..4 {
            counts[k] += c[k];
        }
    }
    counts
}

/// Distribution over emotions to which `u` was exposed in the Δ-hour window
/// before posting `t_u`; [`Exposure::BelowThreshold`] when fewer than
/// `threshold` emotional followee tweets fall in the window.
pub fn exposure_vector(
    store: &TweetStore,
    g: &SocialGraph,
    u: NodeId,
    t_u: &Tweet,
    delta_hours: u32,
    threshold: u32,
) -> Result<Exposure, EmotionError> {
    if !g.contains(u) {
        return Err(EmotionError::UnknownUser(u));
    }
    let counts = exposure_counts(store, g, u, t_u.timestamp, delta_hours);
    let total: u32 = counts.iter().sum();
    if total < threshold {
        return Ok(Exposure::BelowThreshold { count: total });
    }
    Ok(Exposure::Measured(
        EmotionDistribution::from_counts(counts).expect("total ≥ threshold ≥ 1"),
    ))
}

/// Global and per-emotion mean exposure vectors.
#[derive(Debug, Clone)]
pub struct Baselines {
    /// Mean over all qualifying emotional tweets.
    pub v_all: EmotionDistribution,
    /// Mean over qualifying tweets of each emotion; None when an emotion has
    /// no qualifying tweet.
    pub per_emotion: [Option<EmotionDistribution>; 4],
    /// Qualifying tweet counts per emotion.
    pub qualifying: [usize; 4],
    /// Emotional tweets whose exposure fell below the threshold.
    pub below_threshold: usize,
}

impl Baselines {
    pub fn center(&self, e: Emotion) -> Option<&EmotionDistribution> {
        self.per_emotion[e as usize].as_ref()
    }

    fn centers(&self) -> Result<[EmotionDistribution; 4], EmotionError> {
        let mut out = [EmotionDistribution([0.0; 4]); 4];
        for e in Emotion::ALL {
            out[e as usize] = *self
                .center(e)
                .ok_or(EmotionError::CenterUndefined(e))?;
        }
        Ok(out)
    }
}

/// Per-tweet exposure outcome for every emotional tweet, computed in
/// parallel but reduced in tweet order so results never depend on thread
/// count. `None` marks neutral tweets; `Some((emotion, None))` marks
/// below-threshold exposure.
fn qualifying_exposures(
    store: &TweetStore,
    g: &SocialGraph,
    delta_hours: u32,
    threshold: u32,
) -> Vec<Option<(Emotion, Option<EmotionDistribution>)>> {
    store
        .tweets()
        .par_iter()
        .map(|t| {
            let e = t.emotion?;
            let counts = exposure_counts(store, g, t.author, t.timestamp, delta_hours);
            let total: u32 = counts.iter().sum();
            if total < threshold {
                return Some((e, None));
            }
            Some((e, Some(EmotionDistribution::from_counts(counts).unwrap())))
        })
        .collect()
}

/// Computes v_all and the four per-emotion mean exposure vectors over all
/// emotional tweets passing the exposure threshold.
pub fn baseline_vectors(
    store: &TweetStore,
    g: &SocialGraph,
    delta_hours: u32,
    threshold: u32,
) -> Result<Baselines, EmotionError> {
    let exposures = qualifying_exposures(store, g, delta_hours, threshold);

    let mut sums = [[0.0f64; 4]; 4];
    let mut all_sum = [0.0f64; 4];
    let mut qualifying = [0usize; 4];
    let mut below_threshold = 0usize;
    for entry in exposures.iter().flatten() {
        match entry {
            (_, None) => below_threshold += 1,
            (e, Some(v)) => {
                qualifying[*e as usize] += 1;
                for k in 0..4 {
                    sums[*e as usize][k] += v.0[k];
                    all_sum[k] += v.0[k];
                }
            }
        }
    }

    let total: usize = qualifying.iter().sum();
    if total == 0 {
        return Err(EmotionError::NoQualifyingTweets);
    }
    let v_all = EmotionDistribution(all_sum.map(|s| s / total as f64));
    let mut per_emotion = [None; 4];
    for e in 0..4 {
        if qualifying[e] > 0 {
            per_emotion[e] = Some(EmotionDistribution(
                sums[e].map(|s| s / qualifying[e] as f64),
            ));
        }
    }
    Ok(Baselines {
        v_all,
        per_emotion,
        qualifying,
        below_threshold,
    })
}

/// Contagion significance of emotion `i`: how much more of emotion `i`
/// the authors of `i`-tweets saw beforehand than the average author did,
/// `d_i = v_i[i] − v_all[i]`. A raw probability difference; multiply by 100
/// for percentage points.
pub fn contagion_significance(
    v_all: &EmotionDistribution,
    v_i: &EmotionDistribution,
    i: Emotion,
) -> f64 {
    v_i.get(i) - v_all.get(i)
}

/// Nearest-center classification of an exposure vector, squared-Euclidean,
/// ties broken by the fixed order (anger, disgust, joy, sadness).
pub fn classify_influenced(v: &EmotionDistribution, centers: &[EmotionDistribution; 4]) -> Emotion {
    let mut best = Emotion::Anger;
    let mut best_d = f64::INFINITY;
    for e in Emotion::ALL {
        let d = v.squared_distance(&centers[e as usize]);
        if d < best_d {
            best_d = d;
            best = e;
        }
    }
    best
}

/// Per-tweet classification outcomes at one Δ: `(label, influenced)` for
/// each emotional tweet passing the threshold, indexed like `store.tweets()`.
fn classify_all(
    store: &TweetStore,
    g: &SocialGraph,
    baselines: &Baselines,
    delta_hours: u32,
    threshold: u32,
) -> Result<Vec<Option<(Emotion, bool)>>, EmotionError> {
    let centers = baselines.centers()?;
    Ok(qualifying_exposures(store, g, delta_hours, threshold)
        .into_iter()
        .map(|entry| {
            entry.and_then(|(e, v)| {
                v.map(|v| (e, classify_influenced(&v, &centers) == e))
            })
        })
        .collect())
}

/// Fraction of qualifying `emotion`-labeled tweets classified as influenced
/// by their own emotion class.
pub fn influenced_percentage(
    store: &TweetStore,
    g: &SocialGraph,
    baselines: &Baselines,
    emotion: Emotion,
    delta_hours: u32,
    threshold: u32,
) -> Result<f64, EmotionError> {
    let outcomes = classify_all(store, g, baselines, delta_hours, threshold)?;
    let mut qualifying = 0usize;
    let mut influenced = 0usize;
    for (e, hit) in outcomes.into_iter().flatten() {
        if e == emotion {
            qualifying += 1;
            influenced += usize::from(hit);
        }
    }
    if qualifying == 0 {
        return Err(EmotionError::UndefinedRatio(emotion));
    }
    Ok(influenced as f64 / qualifying as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SusceptibilityGroup {
    /// Members in ranking order (most extreme first).
    pub users: Vec<NodeId>,
    /// Per-emotion influenced share within the group's qualifying tweets;
    /// None when the group holds no qualifying tweets of that emotion.
    pub influenced_share: [Option<f64>; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SusceptibilityPartition {
    pub high: SusceptibilityGroup,
    pub low: SusceptibilityGroup,
    /// Users that had at least one qualifying tweet.
    pub rankable_users: usize,
}

/// Splits users into the most- and least-susceptible `fraction` by the share
/// of their own qualifying tweets classified as influenced. Ties rank by
/// ascending user id; users without qualifying tweets are excluded.
pub fn susceptibility_partition(
    store: &TweetStore,
    g: &SocialGraph,
    baselines: &Baselines,
    delta_hours: u32,
    threshold: u32,
    fraction: f64,
) -> Result<SusceptibilityPartition, EmotionError> {
    if !(fraction > 0.0 && fraction <= 0.5) {
        return Err(EmotionError::InvalidFraction(fraction));
    }
    let outcomes = classify_all(store, g, baselines, delta_hours, threshold)?;

    // Per-user (influenced, qualifying) counts.
    let mut per_user: HashMap<NodeId, (usize, usize)> = HashMap::new();
    for (t, outcome) in store.tweets().iter().zip(&outcomes) {
        if let Some((_, hit)) = outcome {
            let entry = per_user.entry(t.author).or_insert((0, 0));
            entry.1 += 1;
            entry.0 += usize::from(*hit);
        }
    }

    let needed = (1.0 / fraction).ceil() as usize;
    if per_user.len() < needed {
        return Err(EmotionError::PartitionTooSmall {
            rankable: per_user.len(),
            needed,
        });
    }

    let mut ranked: Vec<(NodeId, f64)> = per_user
        .iter()
        .map(|(&u, &(inf, qual))| (u, inf as f64 / qual as f64))
        .collect();
    // Descending ratio, ascending id on ties.
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));

    let k = (ranked.len() as f64 * fraction).floor() as usize;
    debug_assert!(k >= 1 && 2 * k <= ranked.len());
    let high_users: Vec<NodeId> = ranked[..k].iter().map(|&(u, _)| u).collect();
    // Ascending ratio, ascending id on ties: least susceptible first.
    let mut low_ranked = ranked[ranked.len() - k..].to_vec();
    low_ranked.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    let low_users: Vec<NodeId> = low_ranked.into_iter().map(|(u, _)| u).collect();

    let group_shares = |members: &[NodeId]| {
        let set: std::collections::HashSet<NodeId> = members.iter().copied().collect();
        let mut qual = [0usize; 4];
        let mut inf = [0usize; 4];
        for (t, outcome) in store.tweets().iter().zip(&outcomes) {
            if let Some((e, hit)) = outcome {
                if set.contains(&t.author) {
                    qual[*e as usize] += 1;
                    inf[*e as usize] += usize::from(*hit);
                }
            }
        }
        let mut shares = [None; 4];
        for e in 0..4 {
            if qual[e] > 0 {
                shares[e] = Some(inf[e] as f64 / qual[e] as f64);
            }
        }
        shares
    };

    let high = SusceptibilityGroup {
        influenced_share: group_shares(&high_users),
        users: high_users,
    };
    let low = SusceptibilityGroup {
        influenced_share: group_shares(&low_users),
        users: low_users,
    };
    Ok(SusceptibilityPartition {
        high,
        low,
        rankable_users: ranked.len(),
    })
}

/// One row of the Δ-sweep in a [`ContagionReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct ContagionRow {
    pub delta_hours: u32,
    /// d_i per emotion; None when the emotion has no qualifying tweets.
    pub significance: [Option<f64>; 4],
    /// Influenced share within each emotion's qualifying tweets.
    pub influenced_within: [Option<f64>; 4],
    /// Influenced count of each emotion over all qualifying tweets; these
    /// four sum to ≤ 1.
    pub influenced_of_total: [Option<f64>; 4],
    pub qualifying: [usize; 4],
    pub below_threshold: usize,
}

/// Contagion significance and influenced shares across a Δ grid, plus an
/// optional susceptibility partition at one reference Δ.
#[derive(Debug, Clone)]
pub struct ContagionReport {
    pub rows: Vec<ContagionRow>,
    pub susceptibility: Option<SusceptibilityPartition>,
}

/// Runs the full exposure analysis over `deltas`, and the susceptibility
/// partition at `susceptibility_delta` when set.
pub fn contagion_report(
    store: &TweetStore,
    g: &SocialGraph,
    deltas: &[u32],
    threshold: u32,
    susceptibility: Option<(u32, f64)>,
) -> Result<ContagionReport, EmotionError> {
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let baselines = baseline_vectors(store, g, delta, threshold)?;
        let outcomes = classify_all(store, g, &baselines, delta, threshold);
        let mut significance = [None; 4];
        let mut influenced_within = [None; 4];
        let mut influenced_of_total = [None; 4];
        for e in Emotion::ALL {
            if let Some(v_i) = baselines.center(e) {
                significance[e as usize] =
                    Some(contagion_significance(&baselines.v_all, v_i, e));
            }
        }
        // Classification needs all four centers; leave shares None otherwise.
        if let Ok(outcomes) = outcomes {
            let mut qual = [0usize; 4];
            let mut inf = [0usize; 4];
            for (e, hit) in outcomes.into_iter().flatten() {
                qual[e as usize] += 1;
                inf[e as usize] += usize::from(hit);
            }
            let total: usize = qual.iter().sum();
            for e in 0..4 {
                if qual[e] > 0 {
                    influenced_within[e] = Some(inf[e] as f64 / qual[e] as f64);
                    influenced_of_total[e] = Some(inf[e] as f64 / total as f64);
                }
            }
        }
        rows.push(ContagionRow {
            delta_hours: delta,
            significance,
            influenced_within,
            influenced_of_total,
            qualifying: baselines.qualifying,
            below_threshold: baselines.below_threshold,
        });
    }

    let susceptibility = match susceptibility {
        None => None,
        Some((delta, fraction)) => {
            let baselines = baseline_vectors(store, g, delta, threshold)?;
            Some(susceptibility_partition(
                store, g, &baselines, delta, threshold, fraction,
            )?)
        }
    };

    Ok(ContagionReport {
        rows,
        susceptibility,
    })
}
