//! Square matrices over GF(2), one `u32` per row.
//!
//! Row `i` (1-based in the API) is `rows[i - 1]`; bit `j - 1` of that word is
//! the entry `A_{i,j}`. Vectors use the same convention as cube vertices:
//! bit `i - 1` holds `x_i`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cube::MAX_DIMENSION;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("entry ({i}, {j}) outside a {n}x{n} matrix")]
    IndexOutOfRange { n: usize, i: usize, j: usize },
    #[error("dimension {0} outside 1..=32")]
    BadDimension(usize),
    #[error("malformed matrix: {0}")]
    Parse(String),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinMatrix {
    n: usize,
    rows: Vec<u32>,
}

fn row_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

fn check_dim(n: usize) -> Result<(), Gf2Error> {
    if n == 0 || n > MAX_DIMENSION {
        Err(Gf2Error::BadDimension(n))
    } else {
        Ok(())
    }
}

impl BinMatrix {
    pub fn from_rows(n: usize, rows: Vec<u32>) -> Result<Self, Gf2Error> {
        check_dim(n)?;
        if rows.len() != n {
            return Err(Gf2Error::Parse(format!(
                "expected {n} rows, got {}",
                rows.len()
            )));
        }
        if let Some(r) = rows.iter().find(|&&r| r & !row_mask(n) != 0) {
            return Err(Gf2Error::Parse(format!("row {r:#b} wider than {n} bits")));
        }
        Ok(BinMatrix { n, rows })
    }

    pub fn zero(n: usize) -> Self {
        BinMatrix {
            n,
            rows: vec![0; n],
        }
    }

    pub fn identity(n: usize) -> Self {
        BinMatrix {
            n,
            rows: (0..n).map(|i| 1 << i).collect(),
        }
    }

    /// The anti-diagonal matrix `C` with `C x = (x_n, ..., x_1)`.
    pub fn reversal(n: usize) -> Self {
        BinMatrix {
            n,
            rows: (0..n).map(|i| 1 << (n - 1 - i)).collect(),
        }
    }

    /// `E_{i,j}`: a single one at row `i`, column `j` (1-based).
    pub fn unit(n: usize, i: usize, j: usize) -> Result<Self, Gf2Error> {
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Gf2Error::IndexOutOfRange { n, i, j });
        }
        let mut m = BinMatrix::zero(n);
        m.rows[i - 1] = 1 << (j - 1);
        Ok(m)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    /// Entry `A_{i,j}`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.rows[i - 1] >> (j - 1)) & 1 == 1
    }

    /// Column `A^{(j)}` as a vector word, 1-based.
    pub fn column(&self, j: usize) -> u32 {
        self.rows
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &r)| acc | (((r >> (j - 1)) & 1) << i))
    }

    pub fn weight(&self) -> u32 {
        self.rows.iter().map(|r| r.count_ones()).sum()
    }

    /// Toggles entry `(i, j)`, i.e. adds `E_{i,j}`.
    pub fn plus_unit(mut self, i: usize, j: usize) -> Result<Self, Gf2Error> {
        if i == 0 || j == 0 || i > self.n || j > self.n {
            return Err(Gf2Error::IndexOutOfRange { n: self.n, i, j });
        }
        self.rows[i - 1] ^= 1 << (j - 1);
        Ok(self)
    }

    fn same_dim(&self, other: &BinMatrix) -> Result<(), Gf2Error> {
        if self.n != other.n {
            Err(Gf2Error::DimensionMismatch {
                left: self.n,
                right: other.n,
            })
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &BinMatrix) -> Result<BinMatrix, Gf2Error> {
        self.same_dim(other)?;
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(BinMatrix { n: self.n, rows })
    }

    pub fn mul(&self, other: &BinMatrix) -> Result<BinMatrix, Gf2Error> {
        self.same_dim(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &BinMatrix) -> BinMatrix {
        // Row i of AB is the sum of the rows of B selected by row i of A.
        let rows = self
            .rows
            .iter()
            .map(|&a| {
                let mut acc = 0;
                let mut sel = a;
                while sel != 0 {
                    let k = sel.trailing_zeros() as usize;
                    acc ^= other.rows[k];
                    sel &= sel - 1;
                }
                acc
            })
            .collect();
        BinMatrix { n: self.n, rows }
    }

    pub fn matvec(&self, x: u32) -> u32 {
        matvec_rows(&self.rows, x)
    }

    pub fn pow(&self, mut e: u64) -> BinMatrix {
        let mut base = self.clone();
        let mut acc = BinMatrix::identity(self.n);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            base = base.mul_unchecked(&base);
            e >>= 1;
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, &r)| r == 1 << i)
    }

    pub fn rank(&self) -> usize {
        rank_rows(&self.rows, self.n)
    }

    pub fn is_invertible(&self) -> bool {
        self.rank() == self.n
    }

    /// Gauss-Jordan inverse. Pivot rows are chosen lowest index first.
    pub fn inverse(&self) -> Option<BinMatrix> {
        let n = self.n;
        let mut a = self.rows.clone();
        let mut inv = BinMatrix::identity(n).rows;
        for col in 0..n {
            let pivot = (col..n).find(|&r| (a[r] >> col) & 1 == 1)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            for r in 0..n {
                if r != col && (a[r] >> col) & 1 == 1 {
                    a[r] ^= a[col];
                    inv[r] ^= inv[col];
                }
            }
        }
        Some(BinMatrix { n, rows: inv })
    }

    /// Row `i` of the result is row `((i - 1 + k) mod n) + 1` of `self`.
    pub fn cyclic_row_shift(&self, k: usize) -> BinMatrix {
        let n = self.n;
        let rows = (0..n).map(|i| self.rows[(i + k) % n]).collect();
        BinMatrix { n, rows }
    }

    pub fn transpose(&self) -> BinMatrix {
        let rows = (1..=self.n).map(|j| self.column(j)).collect();
        BinMatrix { n: self.n, rows }
    }

    /// `0`/`1` strings, column 1 leftmost.
    pub fn row_strings(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|&r| crate::cube::bitstring(r, self.n))
            .collect()
    }

    pub fn from_row_strings<S: AsRef<str>>(lines: &[S]) -> Result<Self, Gf2Error> {
        let n = lines.len();
        check_dim(n)?;
        let mut rows = Vec::with_capacity(n);
        for line in lines {
            let line = line.as_ref().trim();
            if line.len() != n {
                return Err(Gf2Error::Parse(format!(
                    "row {line:?} has {} entries, expected {n}",
                    line.len()
                )));
            }
            let (bits, _) = crate::cube::parse_bitstring(line)
                .map_err(|_| Gf2Error::Parse(format!("row {line:?} is not a 0/1 string")))?;
            rows.push(bits);
        }
        Ok(BinMatrix { n, rows })
    }

    /// Text format: `n` lines of `n` characters, row 1 first.
    pub fn to_text(&self) -> String {
        let mut s = self.row_strings().join("\n");
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<Self, Gf2Error> {
        let lines: Vec<&str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        Self::from_row_strings(&lines)
    }
}

impl fmt::Debug for BinMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinMatrix[{}]", self.row_strings().join("/"))
    }
}

impl fmt::Display for BinMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.row_strings().join("\n"))
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    rows: Vec<String>,
}

impl Serialize for BinMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixJson {
            n: self.n,
            rows: self.row_strings(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BinMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        let m = BinMatrix::from_row_strings(&raw.rows).map_err(serde::de::Error::custom)?;
        if m.n != raw.n {
            return Err(serde::de::Error::custom(format!(
                "declared n = {} but {} rows given",
                raw.n, m.n
            )));
        }
        Ok(m)
    }
}

#[inline]
pub(crate) fn matvec_rows(rows: &[u32], x: u32) -> u32 {
    rows.iter()
        .enumerate()
        .fold(0, |acc, (i, &r)| acc | (((r & x).count_ones() & 1) << i))
}

pub(crate) fn rank_rows(rows: &[u32], n: usize) -> usize {
    let mut a = rows.to_vec();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..a.len()).find(|&r| (a[r] >> col) & 1 == 1) else {
            continue;
        };
        a.swap(rank, p);
        let pivot = a[rank];
        for (r, row) in a.iter_mut().enumerate() {
            if r != rank && (*row >> col) & 1 == 1 {
                *row ^= pivot;
            }
        }
        rank += 1;
    }
    rank
}
