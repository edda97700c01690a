//! Segment entropies by partition refinement.
//!
//! Rows are grouped by their values on the attributes seen so far. Adding an
//! attribute splits every group in two, so the entropies of all prefixes
//! `a_s`, `a_s a_{s+1}`, ..., `a_s .. a_e` come out of a single
//! `O((e - s + 1) N)` pass. Groups are contiguous ranges of a permuted row-index
//! array, split in place.

use crate::dataset::BinaryDataset;
use crate::error::{Error, Result};
use crate::order::Order;

/// Entropies (bits) of the attribute sets `attrs[..1]`, `attrs[..2]`, ... .
pub fn refine_entropies<I>(ds: &BinaryDataset, attrs: I) -> Vec<f64>
where
    I: IntoIterator<Item = usize>,
{
    let n = ds.n_rows();
    let n_f = n as f64;
    let log_n = n_f.log2();
    let mut idx: Vec<u32> = (0..n as u32).collect();
    let mut bounds = vec![0usize, n];
    let mut next_bounds = Vec::with_capacity(n + 1);
    let mut out = Vec::new();

    for attr in attrs {
        let col = ds.column(attr);
        next_bounds.clear();
        let mut weighted = 0.0;
        for w in bounds.windows(2) {
            let (start, end) = (w[0], w[1]);
            let group = &mut idx[start..end];
            // two-pointer partition: zeros to the front
            let (mut lo, mut hi) = (0usize, group.len());
            while lo < hi {
                if col[group[lo] as usize] == 0 {
                    lo += 1;
                } else {
                    hi -= 1;
                    group.swap(lo, hi);
                }
            }
            let zeros = lo;
            let ones = group.len() - zeros;
            next_bounds.push(start);
            if zeros > 0 && ones > 0 {
                next_bounds.push(start + zeros);
            }
            weighted += xlog2x(zeros) + xlog2x(ones);
        }
        next_bounds.push(n);
        std::mem::swap(&mut bounds, &mut next_bounds);
        out.push((log_n - weighted / n_f).max(0.0));
    }
    out
}

#[inline]
fn xlog2x(count: usize) -> f64 {
    if count <= 1 {
        0.0
    } else {
        let c = count as f64;
        c * c.log2()
    }
}

/// Entropy in bits of an arbitrary set of attributes.
pub fn set_entropy(ds: &BinaryDataset, attrs: &[usize]) -> f64 {
    if attrs.is_empty() {
        return 0.0;
    }
    *refine_entropies(ds, attrs.iter().copied()).last().unwrap()
}

/// `H(a_{o(s)} .. a_{o(j)})` for `j = s..=e` (0-based positions under `order`).
pub fn prefix_entropies(
    ds: &BinaryDataset,
    order: &Order,
    s: usize,
    e: usize,
) -> Result<Vec<f64>> {
    let k = order.len();
    if k != ds.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: ds.n_cols(),
            found: k,
        });
    }
    if s > e || e >= k {
        return Err(Error::InvalidArgument(format!(
            "positions {s}..={e} out of range for {k} attributes"
        )));
    }
    Ok(refine_entropies(
        ds,
        order.as_slice()[s..=e].iter().copied(),
    ))
}

/// Entropies of every segment of length at most `max_len` under one order,
/// keyed by positions.
#[derive(Debug, Clone)]
pub struct EntropyCache {
    order: Order,
    max_len: usize,
    n_rows: usize,
    // values[start * max_len + len - 1]
    values: Vec<f64>,
}

impl EntropyCache {
    /// Runs one refinement pass per start position.
    pub fn build(ds: &BinaryDataset, order: &Order, max_len: usize) -> Result<Self> {
        let k = order.len();
        if k != ds.n_cols() {
            return Err(Error::DimensionMismatch {
                expected: ds.n_cols(),
                found: k,
            });
        }
        if max_len == 0 || max_len > k {
            return Err(Error::InvalidArgument(format!(
                "max_len {max_len} not in 1..={k}"
            )));
        }
        let mut values = vec![f64::NAN; k * max_len];
        for s in 0..k {
            let e = (s + max_len - 1).min(k - 1);
            let h = prefix_entropies(ds, order, s, e)?;
            values[s * max_len..s * max_len + h.len()].copy_from_slice(&h);
        }
        Ok(EntropyCache {
            order: order.clone(),
            max_len,
            n_rows: ds.n_rows(),
            values,
        })
    }

    /// Cache for `order` with positions `pos` and `pos + 1` swapped. Only
    /// segments holding exactly one of the two positions change, so they are
    /// the only ones recomputed: the segments ending at `pos` and those
    /// starting at `pos + 1`.
    pub fn swapped(&self, ds: &BinaryDataset, pos: usize) -> Result<Self> {
        let k = self.order.len();
        if pos + 1 >= k {
            return Err(Error::InvalidArgument(format!(
                "cannot swap position {pos} with {} in {k} attributes",
                pos + 1
            )));
        }
        if ds.n_rows() != self.n_rows || ds.n_cols() != k {
            return Err(Error::InvalidArgument(
                "dataset does not match the cache".into(),
            ));
        }
        let order = self.order.swap_adjacent(pos);
        let mut values = self.values.clone();
        let m = self.max_len;

        let back_len = m.min(pos + 1);
        let backward = refine_entropies(ds, (0..back_len).map(|d| order.attribute(pos - d)));
        for (d, h) in backward.into_iter().enumerate() {
            // segment [pos - d, pos], length d + 1
            values[(pos - d) * m + d] = h;
        }
        let e = (pos + m).min(k - 1);
        let forward = refine_entropies(ds, ((pos + 1)..=e).map(|p| order.attribute(p)));
        values[(pos + 1) * m..(pos + 1) * m + forward.len()].copy_from_slice(&forward);

        Ok(EntropyCache {
            order,
            max_len: m,
            n_rows: self.n_rows,
            values,
        })
    }

    pub fn order(&self) -> &Order {
        &self.order
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_positions(&self) -> usize {
        self.order.len()
    }

    /// Entropy of positions `start..=end`, if cached.
    pub fn get(&self, start: usize, end: usize) -> Option<f64> {
        if start > end || end >= self.order.len() || end - start >= self.max_len {
            return None;
        }
        Some(self.values[start * self.max_len + (end - start)])
    }

    pub fn entropy(&self, start: usize, end: usize) -> Result<f64> {
        self.get(start, end).ok_or(Error::UncachedSegment {
            start: start + 1,
            end: end + 1,
            max_len: self.max_len,
        })
    }
}
