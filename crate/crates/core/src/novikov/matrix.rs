//! Dense matrices over the formal-series ring.
//!
//! - Row-major storage with explicit row/column counts so degenerate shapes
//!   (zero rows or columns) keep their dimensions.
//! - Multiplication, stacking, transposition, and entrywise truncation are
//!   exact; shape mismatches are precondition errors.
//! - The JSON form is an array of rows, each entry a term list; zero-row or
//!   zero-column matrices need their shape restated by the container.

use super::series::NovikovElement;
use crate::error::{Error, Result};
use crate::exact::Rat;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A `rows × cols` matrix of series-ring elements.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NovikovMatrix {
    rows: usize,
    cols: usize,
    data: Vec<NovikovElement>,
}

impl NovikovMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        NovikovMatrix { rows, cols, data: vec![NovikovElement::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.set(i, i, NovikovElement::one());
        }
        m
    }

    /// Square matrix with the given diagonal.
    pub fn diagonal(entries: &[NovikovElement]) -> Self {
        let n = entries.len();
        let mut m = Self::zero(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.set(i, i, e.clone());
        }
        m
    }

    /// Builds from rows; all rows must share one length.  An empty list is
    /// the 0×0 matrix (use `zero(0, c)` to keep a column count).
    pub fn from_rows(rows: Vec<Vec<NovikovElement>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in &rows {
            if row.len() != c {
                return Err(Error::precondition("matrix rows have unequal lengths"));
            }
            data.extend(row.iter().cloned());
        }
        Ok(NovikovMatrix { rows: r, cols: c, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &NovikovElement {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: NovikovElement) {
        self.data[i * self.cols + j] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(NovikovElement::is_zero)
    }

    pub fn is_effective(&self) -> bool {
        self.data.iter().all(NovikovElement::is_effective)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::precondition(format!(
                "matrix product shape mismatch: {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = NovikovElement::zero();
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(other.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::precondition("matrix sum shape mismatch"));
        }
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).add(other.get(i, j)));
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for e in &mut out.data {
            *e = e.neg();
        }
        out
    }

    /// Side-by-side concatenation `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::precondition("hstack row-count mismatch"));
        }
        let mut out = Self::zero(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        Ok(out)
    }

    /// Vertical concatenation, `self` on top.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::precondition("vstack column-count mismatch"));
        }
        let mut out = Self::zero(self.rows + other.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..self.cols {
                out.set(self.rows + i, j, other.get(i, j).clone());
            }
        }
        Ok(out)
    }

    pub fn column(&self, j: usize) -> Vec<NovikovElement> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<NovikovElement> {
        (0..self.cols).map(|j| self.get(i, j).clone()).collect()
    }

    /// Copies columns `lo..hi` into a new matrix.
    pub fn column_slice(&self, lo: usize, hi: usize) -> Self {
        let mut out = Self::zero(self.rows, hi - lo);
        for i in 0..self.rows {
            for j in lo..hi {
                out.set(i, j - lo, self.get(i, j).clone());
            }
        }
        out
    }

    /// Matrix–vector product.
    pub fn mul_vec(&self, v: &[NovikovElement]) -> Result<Vec<NovikovElement>> {
        if v.len() != self.cols {
            return Err(Error::precondition("matrix-vector shape mismatch"));
        }
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut acc = NovikovElement::zero();
            for j in 0..self.cols {
                acc = acc.add(&self.get(i, j).mul(&v[j]));
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Entrywise reduction mod `T^lambda`.
    pub fn truncate(&self, lambda: &Rat) -> Self {
        let mut out = self.clone();
        for e in &mut out.data {
            *e = e.truncate(lambda);
        }
        out
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub(crate) fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }
}

impl Serialize for NovikovMatrix {
    fn serialize<S: Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let wire: Vec<Vec<&NovikovElement>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j)).collect())
            .collect();
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NovikovMatrix {
    fn deserialize<D: Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let wire: Vec<Vec<NovikovElement>> = Vec::deserialize(deserializer)?;
        NovikovMatrix::from_rows(wire).map_err(serde::de::Error::custom)
    }
}
