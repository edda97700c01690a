//! Binary transaction datasets: loading, synthetic generation and splitting.
//!
//! Data is stored column-major, since every consumer in this crate (entropy
//! refinement, similarity matrices) walks one attribute at a time.
//!
//! All randomness comes from [`ChaCha8Rng`] seeded with [`SeedableRng::seed_from_u64`],
//! so a given seed produces the same dataset on every platform.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// An `N x K` binary matrix of transactions.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryDataset {
    n_rows: usize,
    n_cols: usize,
    // column-major, `cols[c * n_rows + r]`
    cols: Vec<u8>,
}

impl fmt::Debug for BinaryDataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BinaryDataset")
            .field("n_rows", &self.n_rows)
            .field("n_cols", &self.n_cols)
            .finish()
    }
}

impl BinaryDataset {
    /// Builds a dataset from row vectors. Every row must have the same
    /// non-zero length and contain only 0 and 1.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let n_rows = rows.len();
        if n_rows == 0 {
            return Err(Error::InvalidArgument("dataset has no rows".into()));
        }
        let n_cols = rows[0].as_ref().len();
        if n_cols == 0 {
            return Err(Error::InvalidArgument("dataset has no columns".into()));
        }
        let mut cols = vec![0u8; n_rows * n_cols];
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n_cols {
                return Err(Error::InvalidArgument(format!(
                    "row {} has {} entries, expected {}",
                    r + 1,
                    row.len(),
                    n_cols
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                if v > 1 {
                    return Err(Error::InvalidArgument(format!(
                        "row {} column {} holds {}, expected 0 or 1",
                        r + 1,
                        c + 1,
                        v
                    )));
                }
                cols[c * n_rows + r] = v;
            }
        }
        Ok(BinaryDataset { n_rows, n_cols, cols })
    }

    /// Builds a dataset from column vectors of equal length.
    pub fn from_columns<C: AsRef<[u8]>>(columns: &[C]) -> Result<Self> {
        let n_cols = columns.len();
        if n_cols == 0 {
            return Err(Error::InvalidArgument("dataset has no columns".into()));
        }
        let n_rows = columns[0].as_ref().len();
        if n_rows == 0 {
            return Err(Error::InvalidArgument("dataset has no rows".into()));
        }
        let mut cols = Vec::with_capacity(n_rows * n_cols);
        for (c, col) in columns.iter().enumerate() {
            let col = col.as_ref();
            if col.len() != n_rows {
                return Err(Error::InvalidArgument(format!(
                    "column {} has {} entries, expected {}",
                    c + 1,
                    col.len(),
                    n_rows
                )));
            }
            if let Some(&v) = col.iter().find(|&&v| v > 1) {
                return Err(Error::InvalidArgument(format!(
                    "column {} holds {}, expected 0 or 1",
                    c + 1,
                    v
                )));
            }
            cols.extend_from_slice(col);
        }
        Ok(BinaryDataset { n_rows, n_cols, cols })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Values of attribute `c` for every row.
    pub fn column(&self, c: usize) -> &[u8] {
        &self.cols[c * self.n_rows..(c + 1) * self.n_rows]
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cols[col * self.n_rows + row]
    }

    pub fn row(&self, r: usize) -> Vec<u8> {
        (0..self.n_cols).map(|c| self.get(r, c)).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = Vec<u8>> + '_ {
        (0..self.n_rows).map(|r| self.row(r))
    }

    /// Number of ones in attribute `c`.
    pub fn column_support(&self, c: usize) -> usize {
        self.column(c).iter().map(|&v| v as usize).sum()
    }

    /// Returns a dataset whose column `i` is column `perm[i]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n_cols)?;
        let columns: Vec<&[u8]> = perm.iter().map(|&c| self.column(c)).collect();
        Self::from_columns(&columns)
    }

    /// Returns the dataset made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("row selection is empty".into()));
        }
        if let Some(&r) = rows.iter().find(|&&r| r >= self.n_rows) {
            return Err(Error::InvalidArgument(format!("row {r} out of range")));
        }
        let mut cols = Vec::with_capacity(rows.len() * self.n_cols);
        for c in 0..self.n_cols {
            let col = self.column(c);
            cols.extend(rows.iter().map(|&r| col[r]));
        }
        Ok(BinaryDataset {
            n_rows: rows.len(),
            n_cols: self.n_cols,
            cols,
        })
    }

    /// Writes the dataset in the dense text format, one space-separated row per line.
    pub fn to_dense_string(&self) -> String {
        let mut out = String::with_capacity(self.n_rows * self.n_cols * 2);
        for r in 0..self.n_rows {
            for c in 0..self.n_cols {
                if c > 0 {
                    out.push(' ');
                }
                out.push(if self.get(r, c) == 1 { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: perm.len(),
        });
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidArgument(format!(
                "not a permutation of 0..{n}: {perm:?}"
            )));
        }
        seen[p] = true;
    }
    Ok(())
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a dense file: one transaction per line, `0`/`1` tokens separated by
/// commas and/or whitespace. Blank lines are skipped.
pub fn load_dense(path: impl AsRef<Path>) -> Result<BinaryDataset> {
    parse_dense(&read_file(path.as_ref())?)
}

pub fn parse_dense(text: &str) -> Result<BinaryDataset> {
    let mut rows: Vec<Vec<u8>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let tokens: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() {
            if line.contains(',') {
                return Err(Error::Parse {
                    line: line_no,
                    message: "line has separators but no values".into(),
                });
            }
            continue;
        }
        let row = tokens
            .iter()
            .map(|t| match *t {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                other => Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 0 or 1, found {other:?}"),
                }),
            })
            .collect::<Result<Vec<u8>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!(
                        "ragged row: {} values, expected {}",
                        row.len(),
                        first.len()
                    ),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "file contains no transactions".into(),
        });
    }
    BinaryDataset::from_rows(&rows)
}

/// Loads a sparse file: one transaction per line listing the 1-based indices
/// of its ones. An empty line is an all-zero transaction.
pub fn load_sparse(path: impl AsRef<Path>, n_cols: usize) -> Result<BinaryDataset> {
    parse_sparse(&read_file(path.as_ref())?, n_cols)
}

pub fn parse_sparse(text: &str, n_cols: usize) -> Result<BinaryDataset> {
    if n_cols == 0 {
        return Err(Error::InvalidArgument("n_cols must be at least 1".into()));
    }
    let mut columns = vec![Vec::new(); n_cols];
    let mut n_rows = 0;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        for col in columns.iter_mut() {
            col.push(0u8);
        }
        for token in line.split_whitespace() {
            let idx = usize::from_str(token).map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid item index {token:?}"),
            })?;
            if idx == 0 || idx > n_cols {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("item index {idx} out of range 1..={n_cols}"),
                });
            }
            let cell = &mut columns[idx - 1][n_rows];
            if *cell == 1 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate item index {idx}"),
                });
            }
            *cell = 1;
        }
        n_rows += 1;
    }
    if n_rows == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "file contains no transactions".into(),
        });
    }
    BinaryDataset::from_columns(&columns)
}

/// Splits rows uniformly at random into two parts; the first gets
/// `round(fraction * N)` rows, clamped so that neither part is empty.
/// Each part keeps the original relative row order.
pub fn split(
    ds: &BinaryDataset,
    fraction: f64,
    seed: u64,
) -> Result<(BinaryDataset, BinaryDataset)> {
    let n = ds.n_rows();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "cannot split a dataset with fewer than 2 rows".into(),
        ));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split fraction {fraction} is not in (0, 1)"
        )));
    }
    let n_first = ((fraction * n as f64).round() as usize).clamp(1, n - 1);
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let (first, second) = idx.split_at_mut(n_first);
    first.sort_unstable();
    second.sort_unstable();
    Ok((ds.select_rows(first)?, ds.select_rows(second)?))
}

/// Generative laws for the synthetic benchmark datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// Independent attributes, each 1 with probability `param`.
    Ind,
    /// Two equal clusters of independent attributes with 1-probabilities
    /// 3/4 and 1/4. `param` is ignored.
    Clust,
    /// Markov chain: `a_1` is a fair coin and `a_i` flips `a_{i-1}` with probability `param`.
    Path,
    /// Same law as [`SyntheticKind::Path`]; conventionally used with a flip probability above 1/2.
    Npath,
}

impl SyntheticKind {
    /// Parameter used by the reference benchmark: 1/2 for Ind, 1/4 for Path, 3/4 for Npath.
    pub fn default_param(self) -> f64 {
        match self {
            SyntheticKind::Ind => 0.5,
            SyntheticKind::Clust => 0.5,
            SyntheticKind::Path => 0.25,
            SyntheticKind::Npath => 0.75,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SyntheticKind::Ind => "ind",
            SyntheticKind::Clust => "clust",
            SyntheticKind::Path => "path",
            SyntheticKind::Npath => "npath",
        }
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ind" => Ok(SyntheticKind::Ind),
            "clust" => Ok(SyntheticKind::Clust),
            "path" => Ok(SyntheticKind::Path),
            "npath" => Ok(SyntheticKind::Npath),
            other => Err(Error::InvalidArgument(format!(
                "unknown synthetic kind {other:?}"
            ))),
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Draws `n_rows` independent transactions from the given generative law.
pub fn gen_synthetic(
    kind: SyntheticKind,
    n_cols: usize,
    n_rows: usize,
    param: f64,
    seed: u64,
) -> Result<BinaryDataset> {
    if n_cols == 0 || n_rows == 0 {
        return Err(Error::InvalidArgument(
            "synthetic dataset needs at least one row and one column".into(),
        ));
    }
    if !(0.0..=1.0).contains(&param) {
        return Err(Error::InvalidArgument(format!(
            "probability {param} is not in [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns = vec![vec![0u8; n_rows]; n_cols];
    let first_cluster = n_rows.div_ceil(2);
    for r in 0..n_rows {
        match kind {
            SyntheticKind::Ind => {
                for col in columns.iter_mut() {
                    col[r] = rng.random_bool(param) as u8;
                }
            }
            SyntheticKind::Clust => {
                let p = if r < first_cluster { 0.75 } else { 0.25 };
                for col in columns.iter_mut() {
                    col[r] = rng.random_bool(p) as u8;
                }
            }
            SyntheticKind::Path | SyntheticKind::Npath => {
                let mut prev = rng.random_bool(0.5) as u8;
                columns[0][r] = prev;
                for col in columns.iter_mut().skip(1) {
                    let flip = rng.random_bool(param) as u8;
                    prev ^= flip;
                    col[r] = prev;
                }
            }
        }
    }
    BinaryDataset::from_columns(&columns)
}
