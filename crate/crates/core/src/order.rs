use std::fmt;
use std::str::FromStr;

use crate::dataset::check_permutation;
use crate::error::{Error, Result};

/// A linear order of attributes: `perm[position] = attribute`, both 0-based.
///
/// The text form is one line of 1-based attribute indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Order(Vec<usize>);

impl Order {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        check_permutation(&perm, perm.len())?;
        if perm.is_empty() {
            return Err(Error::InvalidArgument("order is empty".into()));
        }
        Ok(Order(perm))
    }

    pub fn identity(n: usize) -> Self {
        Order((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Attribute at `position`.
    pub fn attribute(&self, position: usize) -> usize {
        self.0[position]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn reversed(&self) -> Self {
        Order(self.0.iter().rev().copied().collect())
    }

    /// Swaps the attributes at `position` and `position + 1`.
    pub fn swap_adjacent(&self, position: usize) -> Self {
        let mut perm = self.0.clone();
        perm.swap(position, position + 1);
        Order(perm)
    }

    /// Inverse permutation: `positions()[attribute] = position`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.0.len()];
        for (p, &a) in self.0.iter().enumerate() {
            pos[a] = p;
        }
        pos
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", a + 1)?;
        }
        Ok(())
    }
}

impl FromStr for Order {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let perm = s
            .split_whitespace()
            .map(|t| match t.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(Error::Parse {
                    line: 1,
                    message: format!("invalid attribute index {t:?}"),
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        Order::new(perm)
    }
}
