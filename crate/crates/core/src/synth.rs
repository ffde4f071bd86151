//! Deterministic synthetic data: stochastic-block-model graphs, tweet
//! streams with an injectable contagion signal, and burst-shaped event
//! tables. Everything is a pure function of its spec (seed included), so
//! generated corpora are reproducible byte for byte.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::burst::EventRecord;
use crate::emotion::{Emotion, Tweet, TweetSource};
use crate::graph::{NodeId, SocialGraph};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("need at least one block, every block non-empty")]
    InvalidBlocks,
    #[error("weight range ({0}, {1}) invalid: need 1 <= lo <= hi")]
    InvalidWeightRange(u64, u64),
    #[error("emotion mix must be non-negative and sum to 1")]
    InvalidMix,
    #[error("fraction {0} outside [0, 1]")]
    InvalidFraction(f64),
    #[error("mean tweets per user must be positive and finite, got {0}")]
    InvalidRate(f64),
    #[error("time span must be at least 1 hour")]
    ZeroSpan,
    #[error("events need at least 3 hours")]
    TooFewHours,
    #[error("rate range ({0}, {1}) invalid: need 1 <= lo <= hi")]
    InvalidRateRange(u64, u64),
    #[error("burst rates must exceed base rates")]
    BurstNotAboveBase,
    #[error("dominant share {0} outside (0.5, 1)")]
    InvalidShare(f64),
    #[error("need at least one event and one emotion to cycle")]
    EmptyEventSpec,
}

/// Stochastic-block-model graph: within-block pairs are linked with
/// probability `intra_p`, cross-block pairs with `inter_p`. Each link
/// becomes one directed follow edge with a retweet count of weight − 1,
/// so the undirected tie weight is exactly the sampled weight.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmSpec {
    pub blocks: Vec<usize>,
    pub intra_p: f64,
    pub inter_p: f64,
    /// Inclusive undirected-weight range for within-block links (≥ 1).
    pub intra_weight: (u64, u64),
    /// Inclusive undirected-weight range for cross-block links (≥ 1).
    pub inter_weight: (u64, u64),
    pub seed: u64,
}

fn check_probability(p: f64) -> Result<(), SynthError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(SynthError::InvalidProbability(p));
    }
    Ok(())
}

fn check_weight_range((lo, hi): (u64, u64)) -> Result<(), SynthError> {
    if lo < 1 || lo > hi {
        return Err(SynthError::InvalidWeightRange(lo, hi));
    }
    Ok(())
}

/// Samples the model. Nodes are labeled `u000…` with enough digits for the
/// whole graph; a node whose every link trial failed is given one fallback
/// edge to its block neighbor (minimal intra weight), so the returned graph
/// always carries exactly Σ blocks nodes. At practical sizes and densities
/// the fallback is a ~1e-8 probability event per node.
pub fn sbm_graph(spec: &SbmSpec) -> Result<SocialGraph, SynthError> {
    if spec.blocks.is_empty() || spec.blocks.iter().any(|&b| b == 0) {
        return Err(SynthError::InvalidBlocks);
    }
    check_probability(spec.intra_p)?;
    check_probability(spec.inter_p)?;
    check_weight_range(spec.intra_weight)?;
    check_weight_range(spec.inter_weight)?;

    let n: usize = spec.blocks.iter().sum();
    if n < 2 {
        return Err(SynthError::InvalidBlocks);
    }
    let width = (n - 1).to_string().len();
    let label = |i: usize| format!("u{i:0width$}");
    let mut block_of = Vec::with_capacity(n);
    for (b, &size) in spec.blocks.iter().enumerate() {
        block_of.extend(std::iter::repeat(b).take(size));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows: Vec<(String, String, u64)> = Vec::new();
    let mut linked = vec![false; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let intra = block_of[i] == block_of[j];
            let p = if intra { spec.intra_p } else { spec.inter_p };
            let (lo, hi) = if intra {
                spec.intra_weight
            } else {
                spec.inter_weight
            };
            // Both draws happen for every pair so the stream layout does
            // not depend on earlier outcomes.
            let hit = rng.gen::<f64>() < p;
            let w = rng.gen_range(lo..=hi);
            if hit {
                rows.push((label(i), label(j), w - 1));
                linked[i] = true;
                linked[j] = true;
            }
        }
    }
    for i in 0..n {
        if !linked[i] {
            // Deterministic rescue link within the block (wrapping to the
            // block start), weight at the intra minimum.
            let block = block_of[i];
            let start: usize = spec.blocks[..block].iter().sum();
            let size = spec.blocks[block];
            let j = if size > 1 {
                start + (i - start + 1) % size
            } else {
                (i + 1) % n
            };
            rows.push((label(i), label(j), spec.intra_weight.0 - 1));
            linked[i] = true;
        }
    }
    // First-appearance interning must see nodes in index order.
    rows.sort();
    Ok(SocialGraph::from_records(rows).graph)
}

/// Synthetic tweet stream with a plantable contagion signal.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSpec {
    /// Share of tweets that carry any emotion at all.
    pub emotional_fraction: f64,
    /// Emotion mix of non-influenced emotional tweets; sums to 1.
    pub base_mix: [f64; 4],
    /// Poisson mean of tweets per user.
    pub mean_tweets_per_user: f64,
    /// Probability that an emotional tweet tries to copy the emotion of a
    /// recent followee tweet instead of drawing from the base mix.
    pub influence_fraction: f64,
    /// When set, a copy attempt only succeeds if the picked followee tweet
    /// carries this emotion; otherwise any emotional tweet can be copied.
    pub influence_emotion: Option<Emotion>,
    /// How far back (hours) a copied tweet may lie.
    pub window_hours: u32,
    /// Timestamps are uniform over [0, span_hours · 3600).
    pub span_hours: u32,
    pub seed: u64,
}

fn pick_emotion(mix: &[f64; 4], u: f64) -> Emotion {
    let mut acc = 0.0;
    for e in Emotion::ALL {
        acc += mix[e as usize];
        if u < acc {
            return e;
        }
    }
    Emotion::Sadness
}

/// Generates the stream in chronological order. Copied tweets record their
/// source, so the output doubles as retweet provenance for tie-strength
/// analysis. Draw order per tweet: emotional? → influence attempt? →
/// candidate pick → base-mix pick; each stage draws only when reached.
pub fn synth_tweets(spec: &StreamSpec, g: &SocialGraph) -> Result<Vec<Tweet>, SynthError> {
    if !(0.0..=1.0).contains(&spec.emotional_fraction) {
        return Err(SynthError::InvalidFraction(spec.emotional_fraction));
    }
    if !(0.0..=1.0).contains(&spec.influence_fraction) {
        return Err(SynthError::InvalidFraction(spec.influence_fraction));
    }
    if spec.base_mix.iter().any(|&m| !(0.0..=1.0).contains(&m))
        || (spec.base_mix.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(SynthError::InvalidMix);
    }
    if !(spec.mean_tweets_per_user > 0.0) || !spec.mean_tweets_per_user.is_finite() {
        return Err(SynthError::InvalidRate(spec.mean_tweets_per_user));
    }
    if spec.span_hours == 0 || spec.window_hours == 0 {
        return Err(SynthError::ZeroSpan);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let poisson = Poisson::new(spec.mean_tweets_per_user).expect("validated above");
    let span = i64::from(spec.span_hours) * 3600;

    // Draft (timestamp, author) pairs, then assign emotions in time order.
    let mut drafts: Vec<(i64, NodeId)> = Vec::new();
    for u in 0..g.node_count() as u32 {
        let count = poisson.sample(&mut rng) as u64;
        for _ in 0..count {
            drafts.push((rng.gen_range(0..span), NodeId::new(u)));
        }
    }
    drafts.sort_unstable();
    let id_width = drafts.len().saturating_sub(1).to_string().len().max(1);

    // Per-author emotional history: (timestamp, index into `tweets`).
    let mut history: Vec<Vec<(i64, usize)>> = vec![Vec::new(); g.node_count()];
    let mut tweets: Vec<Tweet> = Vec::with_capacity(drafts.len());
    let window = i64::from(spec.window_hours) * 3600;

    for (k, &(t, author)) in drafts.iter().enumerate() {
        let id = format!("t{k:0id_width$}");
        let emotional = rng.gen::<f64>() < spec.emotional_fraction;
        let mut emotion = None;
        let mut source = None;
        if emotional {
            let mut copied = false;
            if rng.gen::<f64>() < spec.influence_fraction {
                let mut candidates: Vec<usize> = Vec::new();
                for &f in g.out_neighbors(author) {
                    let hist = &history[f.index()];
                    let lo = hist.partition_point(|&(ts, _)| ts < t - window);
                    let hi = hist.partition_point(|&(ts, _)| ts < t);
                    candidates.extend(hist[lo..hi].iter().map(|&(_, idx)| idx));
                }
                if !candidates.is_empty() {
                    let picked = candidates[rng.gen_range(0..candidates.len())];
                    let picked_emotion =
                        tweets[picked].emotion.expect("history holds emotional tweets");
                    if spec
                        .influence_emotion
                        .map_or(true, |want| want == picked_emotion)
                    {
                        emotion = Some(picked_emotion);
                        source = Some(TweetSource {
                            tweet_id: tweets[picked].id.clone(),
                            author: tweets[picked].author,
                        });
                        copied = true;
                    }
                }
            }
            if !copied {
                emotion = Some(pick_emotion(&spec.base_mix, rng.gen::<f64>()));
            }
        }
        if emotion.is_some() {
            history[author.index()].push((t, tweets.len()));
        }
        tweets.push(Tweet {
            id,
            author,
            timestamp: t,
            emotion,
            source,
        });
    }
    Ok(tweets)
}

/// Burst-shaped synthetic events: a low base rate, a high plateau over a
/// random window, then the base rate again.
#[derive(Debug, Clone, PartialEq)]
pub struct EventsSpec {
    pub n_events: usize,
    /// Hours per event; each event spans hour indices 0..hours.
    pub hours: u32,
    /// Inclusive hourly-count range outside the burst (≥ 1).
    pub base_rate: (u64, u64),
    /// Inclusive hourly-count range inside the burst; must exceed the base.
    pub burst_rate: (u64, u64),
    /// Share of each hour's tweets given to the event's dominant emotion.
    pub dominant_share: f64,
    /// Dominant emotion of event k is emotions[k % len].
    pub emotions: Vec<Emotion>,
    pub seed: u64,
}

/// An event plus the ground truth it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthEvent {
    pub record: EventRecord,
    /// Burst hours are [burst_start, burst_end); on the cumulative curve,
    /// the awakening corner is burst_start − 1 and the peak corner
    /// burst_end − 1.
    pub burst_start: u32,
    pub burst_end: u32,
    pub dominant: Emotion,
}

pub fn synth_events(spec: &EventsSpec) -> Result<Vec<SynthEvent>, SynthError> {
    if spec.n_events == 0 || spec.emotions.is_empty() {
        return Err(SynthError::EmptyEventSpec);
    }
    if spec.hours < 3 {
        return Err(SynthError::TooFewHours);
    }
    for &(lo, hi) in [&spec.base_rate, &spec.burst_rate] {
        if lo < 1 || lo > hi {
            return Err(SynthError::InvalidRateRange(lo, hi));
        }
    }
    if spec.burst_rate.0 <= spec.base_rate.1 {
        return Err(SynthError::BurstNotAboveBase);
    }
    if !(spec.dominant_share > 0.5 && spec.dominant_share < 1.0) {
        return Err(SynthError::InvalidShare(spec.dominant_share));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let id_width = (spec.n_events - 1).to_string().len().max(1);
    let hours = spec.hours;
    let mut events = Vec::with_capacity(spec.n_events);
    for k in 0..spec.n_events {
        let dominant = spec.emotions[k % spec.emotions.len()];
        // Keep at least one base hour before the burst and one after.
        let burst_start = rng.gen_range(1..hours.saturating_sub(1).max(2));
        let burst_end = rng.gen_range((burst_start + 1)..=(hours - 1));
        let base = rng.gen_range(spec.base_rate.0..=spec.base_rate.1);
        let burst = rng.gen_range(spec.burst_rate.0..=spec.burst_rate.1);

        let mut rows = Vec::with_capacity(hours as usize);
        for h in 0..hours {
            let total = if (burst_start..burst_end).contains(&h) {
                burst
            } else {
                base
            };
            let dom = ((total as f64) * spec.dominant_share).round() as u64;
            // Low-volume hours round up to a strict majority so the event's
            // overall dominant share never dips toward 1/2.
            let dom = dom.max(total / 2 + 1).min(total);
            let rest = total - dom;
            let mut counts = [0u64; 4];
            counts[dominant as usize] = dom;
            let others: Vec<Emotion> =
                Emotion::ALL.into_iter().filter(|&e| e != dominant).collect();
            for (pos, &e) in others.iter().enumerate() {
                counts[e as usize] = rest / 3 + u64::from((pos as u64) < rest % 3);
            }
            rows.push((i64::from(h), counts));
        }
        events.push(SynthEvent {
            record: EventRecord {
                id: format!("ev{k:0id_width$}"),
                hours: rows,
            },
            burst_start,
            burst_end,
            dominant,
        });
    }
    Ok(events)
}
