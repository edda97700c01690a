//! Inducing orders from data.
//!
//! Spectral orders sort attributes by the Fiedler vector of the Laplacian of
//! a similarity matrix. Four similarities are supported: mutual information
//! (`mi`), mutual information with a BIC cut-off (`m2`), co-occurrence
//! counts (`co`) and cosine similarity (`cs`). Entries of the Fiedler vector
//! that tie form groups whose internal arrangement is arbitrary; those groups
//! are shuffled from a seed.
//!
//! [`greedy_order`] then improves an order by steepest descent over adjacent
//! swaps.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::BinaryDataset;
use crate::entropy::EntropyCache;
use crate::error::{Error, Result};
use crate::order::Order;
use crate::segmodel::{optimal_cover, CoverScore, SCORE_TOLERANCE};

/// Fiedler entries closer than this are treated as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Relative residual required from the eigensolver.
pub const EIGEN_RESIDUAL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpectralMethod {
    /// Pairwise mutual information.
    Mi,
    /// Mutual information, zeroed where BIC prefers independence.
    M2,
    /// Co-occurrence counts `D^T D`.
    Co,
    /// Cosine similarity `V D^T D V`.
    Cs,
}

impl SpectralMethod {
    pub const ALL: [SpectralMethod; 4] = [
        SpectralMethod::Co,
        SpectralMethod::Cs,
        SpectralMethod::Mi,
        SpectralMethod::M2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpectralMethod::Mi => "mi",
            SpectralMethod::M2 => "m2",
            SpectralMethod::Co => "co",
            SpectralMethod::Cs => "cs",
        }
    }
}

impl fmt::Display for SpectralMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpectralMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mi" => Ok(SpectralMethod::Mi),
            "m2" => Ok(SpectralMethod::M2),
            "co" => Ok(SpectralMethod::Co),
            "cs" => Ok(SpectralMethod::Cs),
            other => Err(Error::InvalidArgument(format!(
                "unknown spectral method {other:?}"
            ))),
        }
    }
}

/// A symmetric, nonnegative `K x K` attribute similarity.
#[derive(Debug, Clone)]
pub struct SimilarityMatrix {
    pub kind: SpectralMethod,
    pub entries: DMatrix<f64>,
}

impl SimilarityMatrix {
    pub fn from_entries(kind: SpectralMethod, entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidArgument("similarity matrix is not square".into()));
        }
        Ok(SimilarityMatrix { kind, entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `L = diag(row sums) - C`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let k = self.dim();
        let mut lap = -self.entries.clone();
        for i in 0..k {
            let row_sum: f64 = self.entries.row(i).sum();
            lap[(i, i)] += row_sum;
        }
        lap
    }
}

/// Columns packed into 64-bit words for popcount-based co-occurrence.
fn packed_columns(ds: &BinaryDataset) -> Vec<Vec<u64>> {
    let words = ds.n_rows().div_ceil(64);
    (0..ds.n_cols())
        .map(|c| {
            let mut packed = vec![0u64; words];
            for (r, &v) in ds.column(c).iter().enumerate() {
                if v == 1 {
                    packed[r / 64] |= 1 << (r % 64);
                }
            }
            packed
        })
        .collect()
}

/// `D^T D`: entry `(i, j)` counts rows where both attributes are 1.
pub fn cooccurrence(ds: &BinaryDataset) -> DMatrix<f64> {
    let cols = packed_columns(ds);
    let k = ds.n_cols();
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let n: u32 = cols[i]
                .iter()
                .zip(&cols[j])
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            m[(i, j)] = n as f64;
            m[(j, i)] = n as f64;
        }
    }
    m
}

fn entropy_of_counts(counts: &[f64], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / n;
            -p * p.log2()
        })
        .sum()
}

fn mutual_information(ds: &BinaryDataset, co: &DMatrix<f64>) -> DMatrix<f64> {
    let k = ds.n_cols();
    let n = ds.n_rows() as f64;
    let single: Vec<f64> = (0..k)
        .map(|i| {
            let ones = co[(i, i)];
            entropy_of_counts(&[ones, n - ones], n)
        })
        .collect();
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        m[(i, i)] = single[i];
        for j in (i + 1)..k {
            let n11 = co[(i, j)];
            let n10 = co[(i, i)] - n11;
            let n01 = co[(j, j)] - n11;
            let n00 = n - n11 - n10 - n01;
            let joint = entropy_of_counts(&[n00, n01, n10, n11], n);
            let mi = (single[i] + single[j] - joint).max(0.0);
            m[(i, j)] = mi;
            m[(j, i)] = mi;
        }
    }
    m
}

/// Builds the similarity matrix of the given kind. Logs are base 2.
pub fn similarity_matrix(ds: &BinaryDataset, kind: SpectralMethod) -> Result<SimilarityMatrix> {
    let co = cooccurrence(ds);
    let entries = match kind {
        SpectralMethod::Co => co,
        SpectralMethod::Mi => mutual_information(ds, &co),
        SpectralMethod::M2 => {
            let n = ds.n_rows() as f64;
            let threshold = n.log2() / (2.0 * n);
            mutual_information(ds, &co).map(|v| if v <= threshold { 0.0 } else { v })
        }
        SpectralMethod::Cs => {
            let k = ds.n_cols();
            if let Some(c) = (0..k).find(|&c| co[(c, c)] == 0.0) {
                return Err(Error::ZeroColumn { column: c + 1 });
            }
            let scale: Vec<f64> = (0..k).map(|c| co[(c, c)].sqrt().recip()).collect();
            DMatrix::from_fn(k, k, |i, j| co[(i, j)] * scale[i] * scale[j])
        }
    };
    Ok(SimilarityMatrix { kind, entries })
}

/// Number of connected components of the graph with an edge wherever
/// `C_ij > 0`, `i != j`.
fn component_count(c: &DMatrix<f64>) -> usize {
    let k = c.nrows();
    let mut seen = vec![false; k];
    let mut components = 0;
    for root in 0..k {
        if seen[root] {
            continue;
        }
        components += 1;
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for w in 0..k {
                if !seen[w] && w != v && c[(v, w)] > 0.0 {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    components
}

/// Unit eigenvector of the Laplacian for its second-smallest eigenvalue,
/// with the first nonzero entry positive.
///
/// When the similarity graph has `c > 1` components the eigenvalue 0 has
/// multiplicity `c`; the vector of the smallest positive eigenvalue is used
/// instead. A graph without edges yields the constant vector.
pub fn fiedler_vector(m: &SimilarityMatrix) -> Result<Vec<f64>> {
    let k = m.dim();
    if k < 2 {
        return Err(Error::InvalidArgument(
            "a Fiedler vector needs at least two attributes".into(),
        ));
    }
    let components = component_count(&m.entries);
    if components == k {
        log::warn!("similarity graph has no edges; every order is a Fiedler order");
        return Ok(vec![(k as f64).sqrt().recip(); k]);
    }
    if components > 1 {
        log::warn!(
            "similarity graph has {components} components; using the smallest positive eigenvalue"
        );
    }
    let lap = m.laplacian();
    let norm = lap.norm().max(f64::MIN_POSITIVE);
    let max_iter = 10 * k * k;
    let eig = SymmetricEigen::try_new(lap.clone(), f64::EPSILON, max_iter).ok_or(
        Error::EigenNoConvergence {
            residual: f64::INFINITY,
        },
    )?;
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let pick = idx[components];
    let lambda = eig.eigenvalues[pick];
    let mut v: DVector<f64> = eig.eigenvectors.column(pick).into_owned();
    v /= v.norm();

    let residual = (&lap * &v - &v * lambda).norm();
    if residual > EIGEN_RESIDUAL * norm {
        return Err(Error::EigenNoConvergence { residual });
    }
    let scale = v.amax();
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12 * scale) {
        if *first < 0.0 {
            v = -v;
        }
    }
    Ok(v.iter().copied().collect())
}

/// Attributes sorted by descending Fiedler entry, grouped into ties.
#[derive(Debug, Clone)]
pub struct FiedlerOrders {
    groups: Vec<Vec<usize>>,
}

impl FiedlerOrders {
    pub fn from_vector(v: &[f64]) -> Self {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut prev = f64::NAN;
        for a in idx {
            match groups.last_mut() {
                Some(g) if (prev - v[a]).abs() <= TIE_TOLERANCE => g.push(a),
                _ => groups.push(vec![a]),
            }
            prev = v[a];
        }
        FiedlerOrders { groups }
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    /// Number of distinct orders, saturating at `usize::MAX`.
    pub fn count(&self) -> usize {
        self.groups
            .iter()
            .flat_map(|g| 1..=g.len())
            .fold(1usize, |acc, f| acc.saturating_mul(f))
    }

    /// One order with every tie group shuffled by `seed`.
    pub fn sample(&self, seed: u64) -> Order {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm = Vec::new();
        for g in &self.groups {
            let mut g = g.clone();
            if g.len() > 1 {
                g.shuffle(&mut rng);
            }
            perm.extend(g);
        }
        Order::new(perm).expect("groups partition the attributes")
    }

    /// All orders when there are at most `limit` of them, otherwise `limit`
    /// seeded samples.
    pub fn candidates(&self, limit: usize, seed: u64) -> Vec<Order> {
        let limit = limit.max(1);
        if self.count() <= limit {
            let mut out = vec![Vec::new()];
            for g in &self.groups {
                let perms = permutations(g);
                out = out
                    .into_iter()
                    .flat_map(|prefix| {
                        perms.iter().map(move |p| {
                            let mut v = prefix.clone();
                            v.extend_from_slice(p);
                            v
                        })
                    })
                    .collect();
            }
            out.into_iter()
                .map(|p| Order::new(p).expect("permutation"))
                .collect()
        } else {
            (0..limit as u64)
                .map(|i| self.sample(seed.wrapping_add(i)))
                .collect()
        }
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// The Fiedler order of `m`, tie groups shuffled by `seed`.
pub fn fiedler_order(m: &SimilarityMatrix, seed: u64) -> Result<Order> {
    Ok(FiedlerOrders::from_vector(&fiedler_vector(m)?).sample(seed))
}

/// Similarity matrix, Fiedler vector and tie groups for one method.
pub fn spectral_orders(ds: &BinaryDataset, method: SpectralMethod) -> Result<FiedlerOrders> {
    if ds.n_cols() == 1 {
        return Ok(FiedlerOrders {
            groups: vec![vec![0]],
        });
    }
    let m = similarity_matrix(ds, method)?;
    Ok(FiedlerOrders::from_vector(&fiedler_vector(&m)?))
}

/// Result of [`greedy_order`].
#[derive(Debug, Clone)]
pub struct GreedyOutcome {
    pub order: Order,
    pub score: CoverScore,
    /// Score after each accepted step, starting with the initial order.
    pub history: Vec<f64>,
}

/// Steepest descent over adjacent swaps.
///
/// Each round scores every adjacent transposition of the current order and
/// moves to the best one if it improves the score by more than
/// [`SCORE_TOLERANCE`]; among equal best moves the leftmost wins. Stops at
/// an order no adjacent swap improves.
pub fn greedy_order(
    ds: &BinaryDataset,
    initial: &Order,
    max_len: usize,
) -> Result<GreedyOutcome> {
    let k = ds.n_cols();
    let max_len = max_len.clamp(1, k);
    let mut cache = EntropyCache::build(ds, initial, max_len)?;
    let (_, mut score) = optimal_cover(&cache, max_len)?;
    let mut history = vec![score.total];

    loop {
        let moves: Vec<(EntropyCache, CoverScore)> = (0..k.saturating_sub(1))
            .into_par_iter()
            .map(|pos| {
                let swapped = cache.swapped(ds, pos)?;
                let (_, s) = optimal_cover(&swapped, max_len)?;
                Ok((swapped, s))
            })
            .collect::<Result<_>>()?;
        let mut best: Option<(EntropyCache, CoverScore)> = None;
        for (c, s) in moves {
            let bar = best.as_ref().map_or(score.total, |(_, b)| b.total);
            if s.total < bar - SCORE_TOLERANCE {
                best = Some((c, s));
            }
        }
        match best {
            Some((c, s)) => {
                cache = c;
                score = s;
                history.push(score.total);
            }
            None => break,
        }
    }
    Ok(GreedyOutcome {
        order: cache.order().clone(),
        score,
        history,
    })
}
