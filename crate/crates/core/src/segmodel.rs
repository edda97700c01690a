//! Segment covers, their BIC scores, and the dynamic program that finds the
//! best cover for a fixed order.
//!
//! A cover is an antichain of intervals (in order positions) whose union is
//! every position. Consecutive segments may overlap; the model factorizes as
//! `prod p(C_i) / prod p(S_i)` with `S_i = C_i ∩ C_{i+1}`, so its maximum
//! log-likelihood and its parameter count both decompose over segments and
//! overlaps:
//!
//! ```text
//! s(C)       = N H(C) + (log2 N / 2) (2^|C| - 1)
//! s(cover)   = sum s(C_i) - sum s(S_i)
//! ```
//!
//! All positions and segment bounds here are 0-based and inclusive; the text
//! form used by the CLI is 1-based.

use serde::Serialize;

use crate::dataset::BinaryDataset;
use crate::entropy::EntropyCache;
use crate::error::{Error, Result};
use crate::order::Order;

/// Absolute tolerance for comparing scores.
pub const SCORE_TOLERANCE: f64 = 1e-6;

/// Longest segment the model will consider. `2^len` parameters must fit in a
/// `u64`; no dataset that fits in memory makes longer segments worthwhile.
pub const MAX_SEGMENT_LEN: usize = 60;

/// An interval of order positions, `start..=end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Segment {
    pub start: usize,
    pub end: usize,
}

impl Segment {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Segment { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, other: &Segment) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// Overlap with the following segment of a cover, if any.
    pub fn overlap(&self, next: &Segment) -> Option<Segment> {
        let start = self.start.max(next.start);
        let end = self.end.min(next.end);
        (start <= end).then(|| Segment::new(start, end))
    }
}

/// An ordered antichain of segments covering every position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SegmentCover {
    segments: Vec<Segment>,
}

impl SegmentCover {
    /// Validates that `segments` cover `0..n_positions`, are sorted by start,
    /// and that no segment contains another.
    pub fn new(segments: Vec<Segment>, n_positions: usize) -> Result<Self> {
        let (first, last) = match (segments.first(), segments.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::InvalidCover("cover has no segments".into())),
        };
        if first.start != 0 || last.end + 1 != n_positions {
            return Err(Error::InvalidCover(format!(
                "segments span {}..={} but there are {} positions",
                first.start + 1,
                last.end + 1,
                n_positions
            )));
        }
        for s in &segments {
            if s.start > s.end {
                return Err(Error::InvalidCover(format!(
                    "segment [{}, {}] is reversed",
                    s.start + 1,
                    s.end + 1
                )));
            }
        }
        for w in segments.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b.start <= a.start || b.end <= a.end {
                return Err(Error::InvalidCover(format!(
                    "segments [{}, {}] and [{}, {}] are not a sorted antichain",
                    a.start + 1,
                    a.end + 1,
                    b.start + 1,
                    b.end + 1
                )));
            }
            if b.start > a.end + 1 {
                return Err(Error::InvalidCover(format!(
                    "positions {}..={} are not covered",
                    a.end + 2,
                    b.start
                )));
            }
        }
        Ok(SegmentCover { segments })
    }

    /// Builds a cover from 1-based `[start, end]` pairs.
    pub fn from_one_based(pairs: &[[usize; 2]], n_positions: usize) -> Result<Self> {
        let segments = pairs
            .iter()
            .map(|&[s, e]| {
                if s == 0 || e == 0 || s > e {
                    Err(Error::InvalidCover(format!("bad segment [{s}, {e}]")))
                } else {
                    Ok(Segment::new(s - 1, e - 1))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(segments, n_positions)
    }

    /// The independence model: one singleton per position.
    pub fn singletons(n_positions: usize) -> Self {
        SegmentCover {
            segments: (0..n_positions).map(|i| Segment::new(i, i)).collect(),
        }
    }

    /// One segment holding every position.
    pub fn full(n_positions: usize) -> Self {
        SegmentCover {
            segments: vec![Segment::new(0, n_positions - 1)],
        }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn n_positions(&self) -> usize {
        self.segments.last().map_or(0, |s| s.end + 1)
    }

    /// `S_i = C_i ∩ C_{i+1}`, `None` where consecutive segments do not overlap.
    pub fn overlaps(&self) -> impl Iterator<Item = Option<Segment>> + '_ {
        self.segments.windows(2).map(|w| w[0].overlap(&w[1]))
    }

    pub fn max_segment_len(&self) -> usize {
        self.segments.iter().map(Segment::len).max().unwrap_or(0)
    }

    pub fn contains_segment(&self, seg: &Segment) -> bool {
        self.segments.contains(seg)
    }

    /// 1-based `[start, end]` pairs.
    pub fn to_one_based(&self) -> Vec<[usize; 2]> {
        self.segments
            .iter()
            .map(|s| [s.start + 1, s.end + 1])
            .collect()
    }
}

/// BIC score of a cover and its parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverScore {
    /// `-log_likelihood + penalty`; lower is better.
    pub total: f64,
    /// Maximum log-likelihood (bits) of the data under the cover's model; never positive.
    pub log_likelihood: f64,
    /// Number of free parameters.
    pub df: u64,
    /// `(log2 N / 2) * df`.
    pub penalty: f64,
}

impl CoverScore {
    fn from_parts(neg_log_likelihood: f64, df: u64, n_rows: usize) -> Self {
        let penalty = penalty_factor(n_rows) * df as f64;
        CoverScore {
            total: neg_log_likelihood + penalty,
            log_likelihood: -neg_log_likelihood,
            df,
            penalty,
        }
    }
}

/// BIC weight per free parameter, `log2(N) / 2`.
pub fn penalty_factor(n_rows: usize) -> f64 {
    (n_rows as f64).log2() / 2.0
}

fn params(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

/// `s(C) = N H(C) + (log2 N / 2)(2^|C| - 1)`.
pub fn segment_score(cache: &EntropyCache, seg: Segment) -> Result<f64> {
    let h = cache.entropy(seg.start, seg.end)?;
    let n = cache.n_rows();
    Ok(n as f64 * h + penalty_factor(n) * params(seg.len()) as f64)
}

/// Free parameters: `sum (2^|C_i| - 1) - sum (2^|S_i| - 1)`.
pub fn cover_df(cover: &SegmentCover) -> u64 {
    let plus = cover
        .segments()
        .iter()
        .fold(0u64, |acc, s| acc.saturating_add(params(s.len())));
    let minus = cover
        .overlaps()
        .flatten()
        .fold(0u64, |acc, s| acc.saturating_add(params(s.len())));
    plus.saturating_sub(minus)
}

/// Scores `cover` against the data summarized by `cache`.
pub fn cover_score(cache: &EntropyCache, cover: &SegmentCover) -> Result<CoverScore> {
    if cover.n_positions() != cache.n_positions() {
        return Err(Error::InvalidCover(format!(
            "cover spans {} positions, cache has {}",
            cover.n_positions(),
            cache.n_positions()
        )));
    }
    let n = cache.n_rows() as f64;
    let mut entropy = 0.0;
    for s in cover.segments() {
        entropy += cache.entropy(s.start, s.end)?;
    }
    for s in cover.overlaps().flatten() {
        entropy -= cache.entropy(s.start, s.end)?;
    }
    Ok(CoverScore::from_parts(n * entropy, cover_df(cover), cache.n_rows()))
}

/// Longest segment that can appear in an optimal cover for `n_rows` rows.
///
/// A segment of length `l + 1` is the union of two length-`l` segments
/// sharing `l - 1` items; it can be dropped from some optimal cover once
/// `2^(l-2) log2 N >= N`. The result is one more than the largest `l` for
/// which that test fails. Returns `None` when `N <= 2`, where the test
/// degenerates and no pruning is done.
pub fn prune_length(n_rows: usize) -> Option<usize> {
    if n_rows <= 2 {
        return None;
    }
    let n = n_rows as f64;
    let log_n = n.log2();
    let mut l = 1usize;
    while 2f64.powi(l as i32 - 1) * log_n < n {
        l += 1;
    }
    // `l` is the largest length with 2^(l-2) log N < N
    Some(l + 1)
}

/// Segment length bound used for a dataset: the pruning length clamped to
/// `1..=min(n_cols, MAX_SEGMENT_LEN)`.
pub fn effective_max_len(n_rows: usize, n_cols: usize) -> usize {
    let cap = n_cols.min(MAX_SEGMENT_LEN);
    prune_length(n_rows).unwrap_or(cap).clamp(1, cap)
}

#[derive(Debug, Clone, Copy)]
struct State {
    neg_ll: f64,
    df: u64,
    total: f64,
    // first segment is [i, end]; the rest of the cover is state (next, end + 1)
    end: usize,
    next: Option<usize>,
}

struct Table {
    k: usize,
    max_len: usize,
    states: Vec<Option<State>>,
}

impl Table {
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.max_len + (j - i)
    }

    fn get(&self, i: usize, j: usize) -> Option<&State> {
        if j < i || j >= self.k || j - i >= self.max_len {
            return None;
        }
        self.states[self.idx(i, j)].as_ref()
    }

    fn starts(&self, i: usize, state: &State) -> Vec<usize> {
        let mut out = vec![i];
        let mut cur = *state;
        while let Some(k) = cur.next {
            out.push(k);
            cur = *self.get(k, cur.end + 1).expect("dangling dp pointer");
        }
        out
    }

    /// Whether `a` (covering from `i`) beats `b`: lower score, then lower
    /// df, then lexicographically earlier segment starts.
    fn better(&self, i: usize, a: &State, b: &State) -> bool {
        if a.total < b.total - SCORE_TOLERANCE {
            return true;
        }
        if a.total > b.total + SCORE_TOLERANCE {
            return false;
        }
        if a.df != b.df {
            return a.df < b.df;
        }
        self.starts(i, a) < self.starts(i, b)
    }
}

/// Finds a minimum-score cover using segments of length at most `max_len`.
///
/// `f(i, j)` is the best cover of positions `i..` whose first segment starts
/// at `i` and reaches at least `j`. Either the first segment is exactly
/// `[i, j]`, followed by the best `f(k, j + 1)` for some `i < k <= j + 1`
/// (sharing `[k, j]`), or it is longer and `f(i, j) = f(i, j + 1)`.
/// Runs in `O(K max_len^2)`.
pub fn optimal_cover(
    cache: &EntropyCache,
    max_len: usize,
) -> Result<(SegmentCover, CoverScore)> {
    let k = cache.n_positions();
    if max_len == 0 {
        return Err(Error::InvalidArgument("max_len must be at least 1".into()));
    }
    let max_len = max_len.min(k);
    if max_len > cache.max_len() {
        return Err(Error::InvalidArgument(format!(
            "max_len {max_len} exceeds the cached length {}",
            cache.max_len()
        )));
    }
    let n = cache.n_rows() as f64;
    let factor = penalty_factor(cache.n_rows());
    // entropy and parameter count of [start, end]
    let part = |start: usize, end: usize| -> (f64, u64) {
        let h = cache.get(start, end).expect("segment within max_len is cached");
        (n * h, params(end - start + 1))
    };

    let mut table = Table {
        k,
        max_len,
        states: vec![None; k * max_len],
    };

    for i in (0..k).rev() {
        let last_j = (i + max_len - 1).min(k - 1);
        for j in (i..=last_j).rev() {
            let (seg_ll, seg_df) = part(i, j);
            let mut best: Option<State> = None;
            if j == k - 1 {
                best = Some(State {
                    neg_ll: seg_ll,
                    df: seg_df,
                    total: seg_ll + factor * seg_df as f64,
                    end: j,
                    next: None,
                });
            } else {
                for next in (i + 1)..=(j + 1) {
                    let rest = table
                        .get(next, j + 1)
                        .expect("dp state computed before use");
                    let (ov_ll, ov_df) = if next <= j { part(next, j) } else { (0.0, 0) };
                    let neg_ll = seg_ll + rest.neg_ll - ov_ll;
                    let df = seg_df + rest.df - ov_df;
                    let cand = State {
                        neg_ll,
                        df,
                        total: neg_ll + factor * df as f64,
                        end: j,
                        next: Some(next),
                    };
                    best = match best {
                        Some(b) if !table.better(i, &cand, &b) => Some(b),
                        _ => Some(cand),
                    };
                }
            }
            let mut best = best.expect("at least one candidate");
            if let Some(longer) = table.get(i, j + 1) {
                if table.better(i, longer, &best) {
                    best = *longer;
                }
            }
            let idx = table.idx(i, j);
            table.states[idx] = Some(best);
        }
    }

    let root = *table.get(0, 0).expect("root state");
    let mut segments = Vec::new();
    let (mut i, mut cur) = (0, root);
    loop {
        segments.push(Segment::new(i, cur.end));
        match cur.next {
            Some(next) => {
                let following = *table.get(next, cur.end + 1).expect("dp pointer");
                i = next;
                cur = following;
            }
            None => break,
        }
    }
    let cover = SegmentCover::new(segments, k)?;
    Ok((cover, CoverScore::from_parts(root.neg_ll, root.df, cache.n_rows())))
}

/// Builds the entropy cache for `order` and returns its optimal cover.
/// `max_len` defaults to [`effective_max_len`].
pub fn score_order(
    ds: &BinaryDataset,
    order: &Order,
    max_len: Option<usize>,
) -> Result<(SegmentCover, CoverScore)> {
    let max_len = max_len
        .unwrap_or_else(|| effective_max_len(ds.n_rows(), ds.n_cols()))
        .clamp(1, ds.n_cols());
    let cache = EntropyCache::build(ds, order, max_len)?;
    optimal_cover(&cache, max_len)
}

/// Score of the all-singletons cover, which does not depend on the order.
pub fn independence_score(ds: &BinaryDataset) -> Result<CoverScore> {
    let cache = EntropyCache::build(ds, &Order::identity(ds.n_cols()), 1)?;
    cover_score(&cache, &SegmentCover::singletons(ds.n_cols()))
}

/// Largest position count accepted by [`enumerate_covers`].
pub const MAX_ENUMERATED_POSITIONS: usize = 12;

/// Every valid cover of `0..n_positions` with segments of length at most
/// `max_len`, each exactly once.
pub fn enumerate_covers(n_positions: usize, max_len: usize) -> Result<Vec<SegmentCover>> {
    if n_positions == 0 || n_positions > MAX_ENUMERATED_POSITIONS {
        return Err(Error::InvalidArgument(format!(
            "exhaustive enumeration needs 1..={MAX_ENUMERATED_POSITIONS} positions, got {n_positions}"
        )));
    }
    if max_len == 0 {
        return Err(Error::InvalidArgument("max_len must be at least 1".into()));
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    extend_covers(n_positions, max_len, &mut current, &mut out);
    Ok(out)
}

fn extend_covers(
    n: usize,
    max_len: usize,
    current: &mut Vec<Segment>,
    out: &mut Vec<SegmentCover>,
) {
    let (start_range, min_end) = match current.last() {
        None => (0..=0, 0),
        Some(prev) if prev.end + 1 == n => {
            out.push(SegmentCover {
                segments: current.clone(),
            });
            return;
        }
        Some(prev) => ((prev.start + 1)..=(prev.end + 1), prev.end + 1),
    };
    for start in start_range {
        let lo = min_end.max(start);
        let hi = (start + max_len - 1).min(n - 1);
        for end in lo..=hi {
            current.push(Segment::new(start, end));
            extend_covers(n, max_len, current, out);
            current.pop();
        }
    }
}

/// The smallest-df cover under `order` whose model contains a Markov chain
/// over `chain_edges` (pairs of 0-based attributes forming one simple path).
///
/// Each edge must sit inside one segment, so each edge's positional span is
/// forced; the cover keeps the maximal spans and fills the remaining
/// positions with singletons.
pub fn chain_cover(order: &Order, chain_edges: &[(usize, usize)]) -> Result<SegmentCover> {
    let k = order.len();
    check_path(k, chain_edges)?;
    let pos = order.positions();
    let mut spans: Vec<Segment> = chain_edges
        .iter()
        .map(|&(a, b)| {
            let (pa, pb) = (pos[a], pos[b]);
            Segment::new(pa.min(pb), pa.max(pb))
        })
        .collect();
    spans.sort();
    spans.dedup();
    let maximal: Vec<Segment> = spans
        .iter()
        .filter(|s| !spans.iter().any(|t| t != *s && t.contains(s)))
        .copied()
        .collect();

    let mut segments = Vec::new();
    let mut next_free = 0;
    for span in maximal {
        for p in next_free..span.start {
            segments.push(Segment::new(p, p));
        }
        next_free = next_free.max(span.end + 1);
        segments.push(span);
    }
    for p in next_free..k {
        segments.push(Segment::new(p, p));
    }
    SegmentCover::new(segments, k)
}

/// Degrees of freedom of [`chain_cover`].
pub fn min_df_for_chain(order: &Order, chain_edges: &[(usize, usize)]) -> Result<u64> {
    Ok(cover_df(&chain_cover(order, chain_edges)?))
}

/// Edges `(i, i + 1)` of the chain `a_0 - a_1 - ... - a_{k-1}`.
pub fn path_edges(n_attributes: usize) -> Vec<(usize, usize)> {
    (1..n_attributes).map(|i| (i - 1, i)).collect()
}

fn check_path(k: usize, edges: &[(usize, usize)]) -> Result<()> {
    if edges.is_empty() {
        return Ok(());
    }
    let mut degree = vec![0usize; k];
    let mut adjacent = vec![Vec::new(); k];
    for &(a, b) in edges {
        if a >= k || b >= k {
            return Err(Error::NotAPath(format!(
                "edge ({}, {}) refers to a missing attribute",
                a + 1,
                b + 1
            )));
        }
        if a == b {
            return Err(Error::NotAPath(format!("self loop on {}", a + 1)));
        }
        if adjacent[a].contains(&b) {
            return Err(Error::NotAPath(format!(
                "duplicate edge ({}, {})",
                a + 1,
                b + 1
            )));
        }
        adjacent[a].push(b);
        adjacent[b].push(a);
        degree[a] += 1;
        degree[b] += 1;
    }
    if let Some(v) = degree.iter().position(|&d| d > 2) {
        return Err(Error::NotAPath(format!("attribute {} has degree > 2", v + 1)));
    }
    let vertices: Vec<usize> = (0..k).filter(|&v| degree[v] > 0).collect();
    if edges.len() + 1 != vertices.len() {
        return Err(Error::NotAPath("edges contain a cycle or several components".into()));
    }
    // connected?
    let mut seen = vec![false; k];
    let mut stack = vec![vertices[0]];
    seen[vertices[0]] = true;
    let mut reached = 1;
    while let Some(v) = stack.pop() {
        for &w in &adjacent[v] {
            if !seen[w] {
                seen[w] = true;
                reached += 1;
                stack.push(w);
            }
        }
    }
    if reached != vertices.len() {
        return Err(Error::NotAPath("edges are not connected".into()));
    }
    Ok(())
}
