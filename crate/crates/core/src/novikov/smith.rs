//! Exact diagonalization of matrices over the effective series ring.
//!
//! - Pivoting always selects a minimal-valuation entry, so a single
//!   elimination pass yields nondecreasing diagonal exponents.
//! - Row and column operations use the cross-multiplication form
//!   `row_i ← unit(p)·row_i − shift(b, −val p)·row_k`, which cancels exactly
//!   without ever dividing; the accumulated factors stay finite and their
//!   determinants are units, so they are invertible over the completed ring
//!   (the inverses are infinite series and are never materialized).
//! - An independent oracle recovers the exponents from minor valuations:
//!   `d_i` = least valuation of an `i × i` minor, `a_i = d_i − d_{i−1}`.

use super::matrix::NovikovMatrix;
use super::series::NovikovElement;
use crate::error::{Error, Result};
use crate::exact::Rat;
use num_traits::Zero;

/// Outcome of diagonalization: `u · m · v` equals the diagonal matrix with
/// the listed entries (padded with zeros to the original shape).
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: NovikovMatrix,
    pub v: NovikovMatrix,
    pub diag: Vec<NovikovElement>,
    pub exponents: Vec<Rat>,
    pub rank: usize,
}

impl SmithForm {
    /// The diagonal embedded in the original `rows × cols` shape.
    pub fn diagonal_matrix(&self, rows: usize, cols: usize) -> NovikovMatrix {
        let mut d = NovikovMatrix::zero(rows, cols);
        for (k, e) in self.diag.iter().enumerate() {
            d.set(k, k, e.clone());
        }
        d
    }
}

/// Diagonalizes `m` over the effective ring.
pub fn smith_form(m: &NovikovMatrix) -> Result<SmithForm> {
    if !m.is_effective() {
        return Err(Error::precondition(
            "smith form requires entries with nonnegative exponents",
        ));
    }
    let rows = m.rows();
    let cols = m.cols();
    let mut work = m.clone();
    let mut u = NovikovMatrix::identity(rows);
    let mut v = NovikovMatrix::identity(cols);
    let mut k = 0;
    while k < rows && k < cols {
        // Minimal-valuation entry of the lower-right submatrix.
        let mut pivot: Option<(usize, usize, Rat)> = None;
        for i in k..rows {
            for j in k..cols {
                if let Some(val) = work.get(i, j).valuation() {
                    match &pivot {
                        Some((_, _, best)) if *best <= val => {}
                        _ => pivot = Some((i, j, val)),
                    }
                }
            }
        }
        let Some((pi, pj, pval)) = pivot else { break };
        work.swap_rows(k, pi);
        u.swap_rows(k, pi);
        work.swap_cols(k, pj);
        v.swap_cols(k, pj);

        let p = work.get(k, k).clone();
        let p_unit = p.unit_part();
        // Clear the column below the pivot.
        for i in k + 1..rows {
            let b = work.get(i, k).clone();
            if b.is_zero() {
                continue;
            }
            let factor = b.shift(&-pval.clone());
            for j in 0..cols {
                let e = p_unit.mul(work.get(i, j)).sub(&factor.mul(work.get(k, j)));
                work.set(i, j, e);
            }
            for j in 0..rows {
                let e = p_unit.mul(u.get(i, j)).sub(&factor.mul(u.get(k, j)));
                u.set(i, j, e);
            }
        }
        // Clear the row to the right of the pivot.
        for j in k + 1..cols {
            let b = work.get(k, j).clone();
            if b.is_zero() {
                continue;
            }
            let factor = b.shift(&-pval.clone());
            for i in 0..rows {
                let e = p_unit.mul(work.get(i, j)).sub(&factor.mul(work.get(i, k)));
                work.set(i, j, e);
            }
            for i in 0..cols {
                let e = p_unit.mul(v.get(i, j)).sub(&factor.mul(v.get(i, k)));
                v.set(i, j, e);
            }
        }
        k += 1;
    }
    let rank = k;
    let mut diag = Vec::with_capacity(rank);
    let mut exponents = Vec::with_capacity(rank);
    for d in 0..rank {
        let e = work.get(d, d).clone();
        exponents.push(e.valuation().expect("pivot entries are nonzero"));
        diag.push(e);
    }
    debug_assert!({
        let mut clean = true;
        for i in 0..rows {
            for j in 0..cols {
                if i != j && !work.get(i, j).is_zero() {
                    clean = false;
                }
            }
        }
        clean
    });
    Ok(SmithForm { u, v, diag, exponents, rank })
}

/// Basis of the kernel of `m` (one column per basis vector); empty when the
/// kernel is trivial.
pub fn kernel_basis(m: &NovikovMatrix) -> Result<NovikovMatrix> {
    let s = smith_form(m)?;
    Ok(s.v.column_slice(s.rank, m.cols()))
}

/// Independent exponent computation from minor valuations.
pub fn smith_exponents_oracle(m: &NovikovMatrix) -> Result<Vec<Rat>> {
    if !m.is_effective() {
        return Err(Error::precondition(
            "minor oracle requires entries with nonnegative exponents",
        ));
    }
    let n = m.rows().min(m.cols());
    let mut exponents = Vec::new();
    let mut prev = Rat::zero();
    for size in 1..=n {
        let mut best: Option<Rat> = None;
        for rows in combinations(m.rows(), size) {
            for cols in combinations(m.cols(), size) {
                let det = minor_determinant(m, &rows, &cols);
                if let Some(val) = det.valuation() {
                    match &best {
                        Some(b) if *b <= val => {}
                        _ => best = Some(val),
                    }
                }
            }
        }
        match best {
            Some(d) => {
                exponents.push(d.clone() - &prev);
                prev = d;
            }
            None => break,
        }
    }
    Ok(exponents)
}

/// Determinant of the submatrix on the given row/column index sets.
fn minor_determinant(m: &NovikovMatrix, rows: &[usize], cols: &[usize]) -> NovikovElement {
    if rows.is_empty() {
        return NovikovElement::one();
    }
    let mut det = NovikovElement::zero();
    let rest: Vec<usize> = rows[1..].to_vec();
    for (idx, &c) in cols.iter().enumerate() {
        let entry = m.get(rows[0], c);
        if entry.is_zero() {
            continue;
        }
        let mut remaining = cols.to_vec();
        remaining.remove(idx);
        let cofactor = minor_determinant(m, &rest, &remaining);
        let signed = if idx % 2 == 0 { cofactor } else { cofactor.neg() };
        det = det.add(&entry.mul(&signed));
    }
    det
}

/// Determinant of a square matrix (Laplace expansion; intended for the
/// small factor matrices that show up in verification).
pub fn determinant(m: &NovikovMatrix) -> Result<NovikovElement> {
    if m.rows() != m.cols() {
        return Err(Error::precondition("determinant requires a square matrix"));
    }
    let idx: Vec<usize> = (0..m.rows()).collect();
    Ok(minor_determinant(m, &idx, &idx))
}

/// Whether `v` lies in the span of the columns of `m` (over the completed
/// ring): adjoining it must leave rank and exponents unchanged.
pub fn in_column_span(m: &NovikovMatrix, v: &[NovikovElement]) -> Result<bool> {
    if v.len() != m.rows() {
        return Err(Error::precondition("span membership shape mismatch"));
    }
    let col = {
        let mut c = NovikovMatrix::zero(m.rows(), 1);
        for (i, e) in v.iter().enumerate() {
            c.set(i, 0, e.clone());
        }
        c
    };
    let widened = m.hstack(&col)?;
    let base = smith_form(m)?;
    let ext = smith_form(&widened)?;
    Ok(base.rank == ext.rank && base.exponents == ext.exponents)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}
