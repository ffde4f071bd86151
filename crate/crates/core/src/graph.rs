//! Social graph storage and tie-strength metrics.
//!
//! The graph is directed (follower → followee) with a retweet count on every
//! edge. Analyses that treat links as channels — tie strength, diffusion —
//! run on the [`UndirectedView`] projection, where each link carries the
//! smoothed weight `R_ij + R_ji + 1`. The add-one smoothing keeps every
//! follow edge usable as a diffusion channel even when nobody has retweeted
//! across it, which matters because the diffusion model raises weights to
//! negative exponents. Raw directed counts stay available for the
//! retweet-strength metric.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};

use thiserror::Error;

use crate::emotion::Emotion;

/// Dense node handle, valid only for the graph that produced it.
///
/// Original string identifiers live in a side table on the graph; all
/// computation uses these compact indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub fn new(raw: u32) -> Self {
        NodeId(raw)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("node {0} does not exist in this graph")]
    InvalidNode(NodeId),
    #[error("({i}, {j}) is not an edge of the undirected view")]
    NotAnEdge { i: NodeId, j: NodeId },
    #[error("retweet count {s} outside observed bounds [{s_min}, {s_max}]")]
    StrengthOutOfBounds { s: u64, s_min: u64, s_max: u64 },
    #[error("virality undefined: need at least one connected pair of infected nodes")]
    UndefinedVirality,
    #[error("tie-strength report undefined: no usable emotional retweet records")]
    EmptyReport,
}

/// A loaded graph plus ingestion warnings that are not hard errors.
#[derive(Debug)]
pub struct EdgeListLoad {
    pub graph: SocialGraph,
    /// Rows of the form `a a <count>` are dropped rather than rejected.
    pub self_loops_skipped: usize,
}

/// Directed follower → followee graph with per-edge retweet counts.
///
/// Immutable after construction; metric operations are pure reads, so a
/// loaded graph can be shared freely across threads.
#[derive(Debug, Clone)]
pub struct SocialGraph {
    labels: Vec<String>,
    by_label: HashMap<String, NodeId>,
    out_offsets: Vec<usize>,
    out_targets: Vec<NodeId>, // sorted within each node's slice
    out_counts: Vec<u64>,
}

impl SocialGraph {
    /// Builds a graph from `(src, dst, retweet_count)` rows.
    ///
    /// Duplicate directed rows merge by summing counts; self-loops are
    /// skipped and counted. NodeIds are dense in first-appearance order.
    pub fn from_records<I>(rows: I) -> EdgeListLoad
    where
        I: IntoIterator<Item = (String, String, u64)>,
    {
        let mut labels: Vec<String> = Vec::new();
        let mut by_label: HashMap<String, NodeId> = HashMap::new();
        let mut merged: HashMap<(NodeId, NodeId), u64> = HashMap::new();
        let mut self_loops_skipped = 0usize;

        let intern = |labels: &mut Vec<String>, by_label: &mut HashMap<String, NodeId>, s: String| {
            if let Some(&id) = by_label.get(&s) {
                return id;
            }
            let id = NodeId(labels.len() as u32);
            by_label.insert(s.clone(), id);
            labels.push(s);
            id
        };

        for (src, dst, count) in rows {
            if src == dst {
                self_loops_skipped += 1;
                continue;
            }
            let i = intern(&mut labels, &mut by_label, src);
            let j = intern(&mut labels, &mut by_label, dst);
            *merged.entry((i, j)).or_insert(0) += count;
        }

        let n = labels.len();
        let mut edges: Vec<(NodeId, NodeId, u64)> = merged
            .into_iter()
            .map(|((i, j), c)| (i, j, c))
            .collect();
        edges.sort_unstable_by_key(|&(i, j, _)| (i, j));

        let mut out_offsets = vec![0usize; n + 1];
        for &(i, _, _) in &edges {
            out_offsets[i.index() + 1] += 1;
        }
        for k in 0..n {
            out_offsets[k + 1] += out_offsets[k];
        }
        let out_targets = edges.iter().map(|&(_, j, _)| j).collect();
        let out_counts = edges.iter().map(|&(_, _, c)| c).collect();

        EdgeListLoad {
            graph: SocialGraph {
                labels,
                by_label,
                out_offsets,
                out_targets,
                out_counts,
            },
            self_loops_skipped,
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of directed edges after merging duplicates.
    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.labels.len() as u32).map(NodeId)
    }

    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.by_label.get(label).copied()
    }

    /// Original string identifier of a node. Panics on a foreign NodeId.
    pub fn label(&self, u: NodeId) -> &str {
        &self.labels[u.index()]
    }

    pub fn contains(&self, u: NodeId) -> bool {
        u.index() < self.labels.len()
    }

    fn check_node(&self, u: NodeId) -> Result<(), GraphError> {
        if self.contains(u) {
            Ok(())
        } else {
            Err(GraphError::InvalidNode(u))
        }
    }

    /// Followees of `u` (targets of out-edges), ascending by NodeId.
    pub fn out_neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.out_targets[self.out_offsets[u.index()]..self.out_offsets[u.index() + 1]]
    }

    pub fn out_degree(&self, u: NodeId) -> usize {
        self.out_neighbors(u).len()
    }

    /// Directed retweet count R_ij; 0 when the edge does not exist.
    pub fn retweet_count(&self, i: NodeId, j: NodeId) -> u64 {
        let lo = self.out_offsets[i.index()];
        let slice = &self.out_targets[lo..self.out_offsets[i.index() + 1]];
        match slice.binary_search(&j) {
            Ok(pos) => self.out_counts[lo + pos],
            Err(_) => 0,
        }
    }

    pub fn has_directed_edge(&self, i: NodeId, j: NodeId) -> bool {
        self.out_neighbors(i).binary_search(&j).is_ok()
    }

    /// All directed edges as `(src, dst, retweet_count)`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, u64)> + '_ {
        (0..self.node_count()).flat_map(move |i| {
            let lo = self.out_offsets[i];
            let hi = self.out_offsets[i + 1];
            (lo..hi).map(move |k| (NodeId(i as u32), self.out_targets[k], self.out_counts[k]))
        })
    }

    /// Symmetric projection with smoothed weights `R_ij + R_ji + 1`.
    pub fn undirected(&self) -> UndirectedView {
        let n = self.node_count();
        let mut sums: HashMap<(NodeId, NodeId), u64> = HashMap::new();
        for (i, j, c) in self.edges() {
            let key = if i < j { (i, j) } else { (j, i) };
            *sums.entry(key).or_insert(0) += c;
        }
        let mut half_edges: Vec<(NodeId, NodeId, f64)> = Vec::with_capacity(sums.len() * 2);
        for (&(a, b), &sum) in &sums {
            let w = (sum + 1) as f64;
            half_edges.push((a, b, w));
            half_edges.push((b, a, w));
        }
        half_edges.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));

        let mut offsets = vec![0usize; n + 1];
        for &(a, _, _) in &half_edges {
            offsets[a.index() + 1] += 1;
        }
        for k in 0..n {
            offsets[k + 1] += offsets[k];
        }
        UndirectedView {
            offsets,
            neighbors: half_edges.iter().map(|&(_, b, _)| b).collect(),
            weights: half_edges.iter().map(|&(_, _, w)| w).collect(),
        }
    }

    /// Writes the canonical edge-list form: a `src,dst,retweet_count` header
    /// and comma-separated rows sorted by (src label, dst label).
    ///
    /// Reloading the output reproduces an isomorphic graph with identical
    /// counts, and re-serializing that reproduces identical bytes.
    pub fn write_edge_list<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let mut rows: Vec<(&str, &str, u64)> = self
            .edges()
            .map(|(i, j, c)| (self.label(i), self.label(j), c))
            .collect();
        rows.sort_unstable();
        writeln!(w, "src,dst,retweet_count")?;
        for (src, dst, c) in rows {
            writeln!(w, "{src},{dst},{c}")?;
        }
        Ok(())
    }
}

/// Parses an edge list: UTF-8 rows `src,dst[,retweet_count]`, tab- or
/// comma-separated (detected from the first non-empty line, whitespace as a
/// fallback), count defaulting to 0. A first row with no numeric field is
/// treated as a header — data with purely alphabetic ids and no count column
/// should therefore carry one, as the serializer always writes.
pub fn load_edge_list<R: Read>(source: R) -> Result<EdgeListLoad, GraphError> {
    enum Delim {
        Tab,
        Comma,
        Whitespace,
    }
    let reader = BufReader::new(source);
    let mut delim: Option<Delim> = None;
    let mut rows: Vec<(String, String, u64)> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let first_data_line = delim.is_none();
        let delim = delim.get_or_insert_with(|| {
            if line.contains('\t') {
                Delim::Tab
            } else if line.contains(',') {
                Delim::Comma
            } else {
                Delim::Whitespace
            }
        });
        let fields: Vec<&str> = match delim {
            Delim::Tab => line.split('\t').map(str::trim).collect(),
            Delim::Comma => line.split(',').map(str::trim).collect(),
            Delim::Whitespace => line.split_whitespace().collect(),
        };
        if first_data_line && fields.iter().all(|f| f.parse::<f64>().is_err()) {
            continue; // header row
        }
        if fields.len() < 2 || fields.len() > 3 {
            return Err(GraphError::Parse {
                line: line_no,
                msg: format!("expected 2 or 3 fields, got {}", fields.len()),
            });
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(GraphError::Parse {
                line: line_no,
                msg: "empty node id".into(),
            });
        }
        let count = match fields.get(2) {
            None => 0,
            Some(raw) => raw.parse::<u64>().map_err(|_| GraphError::Parse {
                line: line_no,
                msg: format!("invalid retweet count {raw:?}"),
            })?,
        };
        rows.push((fields[0].to_string(), fields[1].to_string(), count));
    }
    Ok(SocialGraph::from_records(rows))
}

/// Symmetric view of a [`SocialGraph`]: an edge exists if either direction
/// exists, weighted `R_ij + R_ji + 1` (strictly positive by construction).
#[derive(Debug, Clone)]
pub struct UndirectedView {
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>, // sorted within each node's slice
    weights: Vec<f64>,      // aligned with `neighbors`
}

impl UndirectedView {
    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn contains(&self, u: NodeId) -> bool {
        u.index() < self.node_count()
    }

    fn check_node(&self, u: NodeId) -> Result<(), GraphError> {
        if self.contains(u) {
            Ok(())
        } else {
            Err(GraphError::InvalidNode(u))
        }
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.offsets[u.index() + 1] - self.offsets[u.index()]
    }

    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.neighbors[self.offsets[u.index()]..self.offsets[u.index() + 1]]
    }

    /// Weights aligned with [`Self::neighbors`].
    pub fn weights(&self, u: NodeId) -> &[f64] {
        &self.weights[self.offsets[u.index()]..self.offsets[u.index() + 1]]
    }

    pub fn has_edge(&self, i: NodeId, j: NodeId) -> bool {
        self.neighbors(i).binary_search(&j).is_ok()
    }

    pub fn weight(&self, i: NodeId, j: NodeId) -> Option<f64> {
        let lo = self.offsets[i.index()];
        let slice = &self.neighbors[lo..self.offsets[i.index() + 1]];
        slice.binary_search(&j).ok().map(|pos| self.weights[lo + pos])
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }
}

/// Neighborhood-overlap tie strength: `c_ij / (k_i − 1 + k_j − 1 − c_ij)`,
/// where `c_ij` counts common neighbors of the connected pair (i, j),
/// excluding the endpoints themselves. Returns 0 when the denominator is 0
/// (both endpoints degree 1), and 1 exactly when the neighborhoods coincide.
pub fn common_friends_strength(
    g: &UndirectedView,
    i: NodeId,
    j: NodeId,
) -> Result<f64, GraphError> {
    g.check_node(i)?;
    g.check_node(j)?;
    if !g.has_edge(i, j) {
        return Err(GraphError::NotAnEdge { i, j });
    }
    let (ni, nj) = (g.neighbors(i), g.neighbors(j));
    // Both slices are sorted; stride through them in lockstep. Endpoints
    // cannot appear in the intersection (no self-loops), but skip them
    // anyway to keep the definition explicit.
    let mut c = 0usize;
    let (mut a, mut b) = (0usize, 0usize);
    while a < ni.len() && b < nj.len() {
        match ni[a].cmp(&nj[b]) {
            std::cmp::Ordering::Less => a += 1,
            std::cmp::Ordering::Greater => b += 1,
            std::cmp::Ordering::Equal => {
                if ni[a] != i && ni[a] != j {
                    c += 1;
                }
                a += 1;
                b += 1;
            }
        }
    }
    let denom = (ni.len() - 1 + nj.len() - 1 - c) as f64;
    if denom == 0.0 {
        debug_assert_eq!(c, 0);
        return Ok(0.0);
    }
    Ok(c as f64 / denom)
}

/// Reciprocity tie strength: `2·min(R_ij, R_ji) / (R_ij + R_ji)` — the share
/// of the pair's total retweet flux that is reciprocated. 0 when no retweets
/// flowed either way, 1 exactly for balanced nonzero flux.
pub fn reciprocity_strength(g: &SocialGraph, i: NodeId, j: NodeId) -> Result<f64, GraphError> {
    g.check_node(i)?;
    g.check_node(j)?;
    let (rij, rji) = (g.retweet_count(i, j), g.retweet_count(j, i));
    let total = rij + rji;
    if total == 0 {
        return Ok(0.0);
    }
    Ok(2.0 * rij.min(rji) as f64 / total as f64)
}

/// Min–max normalization of a retweet count against the bounds observed in
/// the analysis batch: `(S − S_min) / (S_max − S_min)`, or 0 when the batch
/// is constant.
pub fn normalize_retweet_strength(s: u64, s_min: u64, s_max: u64) -> Result<f64, GraphError> {
    if s_min > s_max || s < s_min || s > s_max {
        return Err(GraphError::StrengthOutOfBounds { s, s_min, s_max });
    }
    if s_min == s_max {
        return Ok(0.0);
    }
    Ok((s - s_min) as f64 / (s_max - s_min) as f64)
}

/// Mean shortest-path length among infected nodes.
///
/// Within the subgraph induced by `infected`, every connected component of
/// at least two nodes contributes the mean distance over its unordered
/// pairs; components are then averaged with equal weight. Singleton
/// components are ignored, and the measure is undefined when nothing else
/// remains.
pub fn virality(g: &UndirectedView, infected: &[NodeId]) -> Result<f64, GraphError> {
    for &u in infected {
        g.check_node(u)?;
    }
    let mut set: Vec<NodeId> = infected.to_vec();
    set.sort_unstable();
    set.dedup();
    let k = set.len();
    if k < 2 {
        return Err(GraphError::UndefinedVirality);
    }

    // Induced adjacency on local indices 0..k.
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (li, &u) in set.iter().enumerate() {
        for &v in g.neighbors(u) {
            if let Ok(lj) = set.binary_search(&v) {
                adj[li].push(lj);
            }
        }
    }

    // Component labels.
    let mut comp = vec![usize::MAX; k];
    let mut n_comps = 0usize;
    let mut queue = std::collections::VecDeque::new();
    for start in 0..k {
        if comp[start] != usize::MAX {
            continue;
        }
        comp[start] = n_comps;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = n_comps;
                    queue.push_back(v);
                }
            }
        }
        n_comps += 1;
    }
    let mut comp_sizes = vec![0usize; n_comps];
    for &c in &comp {
        comp_sizes[c] += 1;
    }

    // Sum of ordered-pair distances per component via BFS from every node;
    // mean over unordered pairs equals ordered sum / (m·(m−1)).
    let mut dist_sums = vec![0u64; n_comps];
    let mut dist = vec![u32::MAX; k];
    for start in 0..k {
        if comp_sizes[comp[start]] < 2 {
            continue;
        }
        dist.iter_mut().for_each(|d| *d = u32::MAX);
        dist[start] = 0;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v] == u32::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        for v in 0..k {
            if v != start && dist[v] != u32::MAX {
                dist_sums[comp[start]] += dist[v] as u64;
            }
        }
    }

    let mut total = 0.0;
    let mut counted = 0usize;
    for c in 0..n_comps {
        let m = comp_sizes[c];
        if m >= 2 {
            total += dist_sums[c] as f64 / (m * (m - 1)) as f64;
            counted += 1;
        }
    }
    if counted == 0 {
        return Err(GraphError::UndefinedVirality);
    }
    Ok(total / counted as f64)
}

/// One retweet event: `retweeter` reposted content originally authored by
/// `author`. `emotion` is None for neutral retweets, which still count as
/// pair history for the retweet-strength metric but are never averaged.
#[derive(Debug, Clone, PartialEq)]
pub struct RetweetRecord {
    pub retweeter: NodeId,
    pub author: NodeId,
    pub emotion: Option<Emotion>,
    pub timestamp: i64,
}

/// Per-emotion tie-strength averages over emotional retweets.
#[derive(Debug, Clone, PartialEq)]
pub struct EmotionTieStats {
    pub n: usize,
    pub common_friends_mean: f64,
    /// Sample stddev / √n; 0 when n = 1.
    pub common_friends_stderr: f64,
    /// Pooled over the emotion's records: 2·Σ min(R_ij, R_ji) / Σ (R_ij + R_ji).
    /// A single ratio, so it carries no error bar.
    pub reciprocity: f64,
    pub retweet_strength_mean: f64,
    pub retweet_strength_stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TieStrengthReport {
    /// Indexed by `Emotion as usize`; None when no qualifying record carried
    /// that emotion.
    pub per_emotion: [Option<EmotionTieStats>; 4],
    /// Records whose follow edge retweeter → author is missing.
    pub skipped_no_edge: usize,
}

impl TieStrengthReport {
    pub fn stats(&self, e: Emotion) -> Option<&EmotionTieStats> {
        self.per_emotion[e as usize].as_ref()
    }
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt() / (n as f64).sqrt())
}

/// Averages the three tie-strength metrics per emotion over a batch of
/// retweet records.
///
/// A record qualifies when the follow edge retweeter → author exists;
/// others are skipped and counted. The retweet-strength sample for a record
/// counts earlier qualifying retweets of the same directed pair within the
/// batch, min–max normalized against the bounds observed across all
/// emotional qualifying records (so per-emotion means share one scale).
pub fn tie_strength_report(
    g: &SocialGraph,
    records: &[RetweetRecord],
) -> Result<TieStrengthReport, GraphError> {
    let undirected = g.undirected();

    let mut skipped_no_edge = 0usize;
    let mut qualifying: Vec<&RetweetRecord> = Vec::with_capacity(records.len());
    for r in records {
        g.check_node(r.retweeter)?;
        g.check_node(r.author)?;
        if g.has_directed_edge(r.retweeter, r.author) {
            qualifying.push(r);
        } else {
            skipped_no_edge += 1;
        }
    }

    // Pair history for the time-respecting retweet count: all qualifying
    // records, emotional or not.
    let mut history: HashMap<(NodeId, NodeId), Vec<i64>> = HashMap::new();
    for r in &qualifying {
        history.entry((r.retweeter, r.author)).or_default().push(r.timestamp);
    }
    for times in history.values_mut() {
        times.sort_unstable();
    }

    let emotional: Vec<&RetweetRecord> =
        qualifying.iter().copied().filter(|r| r.emotion.is_some()).collect();
    if emotional.is_empty() {
        return Err(GraphError::EmptyReport);
    }

    let prior_count = |r: &RetweetRecord| -> u64 {
        let times = &history[&(r.retweeter, r.author)];
        times.partition_point(|&t| t < r.timestamp) as u64
    };
    let s_values: Vec<u64> = emotional.iter().map(|r| prior_count(r)).collect();
    let s_min = *s_values.iter().min().expect("nonempty");
    let s_max = *s_values.iter().max().expect("nonempty");

    let mut cf: [Vec<f64>; 4] = Default::default();
    let mut rs: [Vec<f64>; 4] = Default::default();
    let mut flux_min: [u64; 4] = [0; 4];
    let mut flux_sum: [u64; 4] = [0; 4];
    for (r, &s) in emotional.iter().zip(&s_values) {
        let e = r.emotion.expect("filtered") as usize;
        cf[e].push(common_friends_strength(&undirected, r.retweeter, r.author)?);
        rs[e].push(normalize_retweet_strength(s, s_min, s_max)?);
        let (rij, rji) = (
            g.retweet_count(r.retweeter, r.author),
            g.retweet_count(r.author, r.retweeter),
        );
        flux_min[e] += rij.min(rji);
        flux_sum[e] += rij + rji;
    }

    let mut per_emotion: [Option<EmotionTieStats>; 4] = Default::default();
    for e in 0..4 {
        if cf[e].is_empty() {
            continue;
        }
        let (cf_mean, cf_se) = mean_and_stderr(&cf[e]);
        let (rs_mean, rs_se) = mean_and_stderr(&rs[e]);
        let reciprocity = if flux_sum[e] == 0 {
            0.0
        } else {
            2.0 * flux_min[e] as f64 / flux_sum[e] as f64
        };
        per_emotion[e] = Some(EmotionTieStats {
            n: cf[e].len(),
            common_friends_mean: cf_mean,
            common_friends_stderr: cf_se,
            reciprocity,
            retweet_strength_mean: rs_mean,
            retweet_strength_stderr: rs_se,
        });
    }

    Ok(TieStrengthReport {
        per_emotion,
        skipped_no_edge,
    })
}
