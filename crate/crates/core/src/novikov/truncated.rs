//! Linear algebra over the truncation `Λ_λ = Λ≥0 / T^λ`.
//!
//! - Elements are represented by their canonical truncated form (all
//!   exponents < λ); every product is reduced immediately.
//! - Valuation-0 elements are genuine units here: the geometric series for
//!   the inverse terminates mod `T^λ`, so — unlike over the full ring — the
//!   diagonalization factors can be inverted exactly.
//! - `TruncatedKernel` packages generators of `ker(A mod T^λ)` together
//!   with their annihilator exponents and a coordinate solver, which is
//!   what presentation-level homology and transition maps are built from.

use super::matrix::NovikovMatrix;
use super::series::NovikovElement;
use crate::error::{Error, Result};
use crate::exact::Rat;
use num_traits::Zero;

/// Inverse of a valuation-0 element mod `T^lambda` (finite by truncation).
pub fn invert_unit_mod(u: &NovikovElement, lambda: &Rat) -> Result<NovikovElement> {
    let v = u.valuation().ok_or_else(|| Error::precondition("cannot invert zero"))?;
    if !v.is_zero() {
        return Err(Error::precondition("cannot invert an element of positive valuation"));
    }
    let c0 = u.leading_coeff().expect("nonzero element has a leading coefficient").clone();
    let c0_inv = Rat::from_integer(1.into()) / c0;
    // u = c0 (1 + w) with val(w) > 0; invert by a terminating geometric series.
    let w = u.scale(&c0_inv).sub(&NovikovElement::one()).truncate(lambda);
    let mut acc = NovikovElement::one();
    let mut power = NovikovElement::one();
    loop {
        power = power.mul(&w).neg().truncate(lambda);
        if power.is_zero() {
            break;
        }
        acc = acc.add(&power);
    }
    Ok(acc.scale(&c0_inv).truncate(lambda))
}

/// Diagonalization over `Λ_λ` with all four change-of-basis factors:
/// `u · m · v ≡ diag` and `u · u_inv ≡ I ≡ v · v_inv` mod `T^λ`.
#[derive(Clone, Debug)]
pub struct TruncatedSmith {
    pub lambda: Rat,
    pub u: NovikovMatrix,
    pub u_inv: NovikovMatrix,
    pub v: NovikovMatrix,
    pub v_inv: NovikovMatrix,
    pub diag: Vec<NovikovElement>,
    pub exponents: Vec<Rat>,
    pub rank: usize,
    rows: usize,
    cols: usize,
}

impl TruncatedSmith {
    pub fn diagonal_matrix(&self) -> NovikovMatrix {
        let mut d = NovikovMatrix::zero(self.rows, self.cols);
        for (k, e) in self.diag.iter().enumerate() {
            d.set(k, k, e.clone());
        }
        d
    }
}

/// Runs minimal-valuation elimination on `m` reduced mod `T^lambda`.
pub fn smith_form_mod(m: &NovikovMatrix, lambda: &Rat) -> Result<TruncatedSmith> {
    if *lambda <= Rat::zero() {
        return Err(Error::precondition("truncation level must be positive"));
    }
    if !m.is_effective() {
        return Err(Error::precondition(
            "truncated smith form requires entries with nonnegative exponents",
        ));
    }
    let rows = m.rows();
    let cols = m.cols();
    let mut work = m.truncate(lambda);
    let mut u = NovikovMatrix::identity(rows);
    let mut u_inv = NovikovMatrix::identity(rows);
    let mut v = NovikovMatrix::identity(cols);
    let mut v_inv = NovikovMatrix::identity(cols);
    let mut k = 0;
    while k < rows && k < cols {
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
        u_inv.swap_cols(k, pi);
        work.swap_cols(k, pj);
        v.swap_cols(k, pj);
        v_inv.swap_rows(k, pj);

        let p = work.get(k, k).clone();
        let p_unit = p.unit_part().truncate(lambda);
        let p_unit_inv = invert_unit_mod(&p_unit, lambda)?;
        for i in k + 1..rows {
            let b = work.get(i, k).clone();
            if b.is_zero() {
                continue;
            }
            let factor = b.shift(&-pval.clone()).truncate(lambda);
            for j in 0..cols {
                let e = p_unit
                    .mul(work.get(i, j))
                    .sub(&factor.mul(work.get(k, j)))
                    .truncate(lambda);
                work.set(i, j, e);
            }
            for j in 0..rows {
                let e =
                    p_unit.mul(u.get(i, j)).sub(&factor.mul(u.get(k, j))).truncate(lambda);
                u.set(i, j, e);
            }
            // u_inv picks up the inverse column operation:
            // col_k += factor·p_unit⁻¹·col_i, then col_i ·= p_unit⁻¹.
            let fui = factor.mul(&p_unit_inv).truncate(lambda);
            for a in 0..rows {
                let add = u_inv.get(a, i).mul(&fui).truncate(lambda);
                let e = u_inv.get(a, k).add(&add).truncate(lambda);
                u_inv.set(a, k, e);
                let scaled = u_inv.get(a, i).mul(&p_unit_inv).truncate(lambda);
                u_inv.set(a, i, scaled);
            }
        }
        for j in k + 1..cols {
            let b = work.get(k, j).clone();
            if b.is_zero() {
                continue;
            }
            let factor = b.shift(&-pval.clone()).truncate(lambda);
            for i in 0..rows {
                let e = p_unit
                    .mul(work.get(i, j))
                    .sub(&factor.mul(work.get(i, k)))
                    .truncate(lambda);
                work.set(i, j, e);
            }
            for i in 0..cols {
                let e =
                    p_unit.mul(v.get(i, j)).sub(&factor.mul(v.get(i, k))).truncate(lambda);
                v.set(i, j, e);
            }
            // v_inv picks up the inverse row operation:
            // row_k += factor·p_unit⁻¹·row_j, then row_j ·= p_unit⁻¹.
            let fvi = factor.mul(&p_unit_inv).truncate(lambda);
            for b_col in 0..cols {
                let add = v_inv.get(j, b_col).mul(&fvi).truncate(lambda);
                let e = v_inv.get(k, b_col).add(&add).truncate(lambda);
                v_inv.set(k, b_col, e);
                let scaled = v_inv.get(j, b_col).mul(&p_unit_inv).truncate(lambda);
                v_inv.set(j, b_col, scaled);
            }
        }
        k += 1;
    }
    let rank = k;
    let mut diag = Vec::with_capacity(rank);
    let mut exponents = Vec::with_capacity(rank);
    for d in 0..rank {
        let e = work.get(d, d).clone();
        exponents.push(e.valuation().expect("pivot entries are nonzero mod the truncation"));
        diag.push(e);
    }
    Ok(TruncatedSmith {
        lambda: lambda.clone(),
        u,
        u_inv,
        v,
        v_inv,
        diag,
        exponents,
        rank,
        rows,
        cols,
    })
}

/// Generators of `ker(A mod T^λ)` with annihilator exponents and
/// exact coordinates of arbitrary kernel vectors.
#[derive(Clone, Debug)]
pub struct TruncatedKernel {
    pub lambda: Rat,
    /// Ambient-space generator columns (`ambient × count`).
    pub gens: NovikovMatrix,
    /// `T^{ann_exps[g]}` annihilates generator `g` (and no smaller power).
    pub ann_exps: Vec<Rat>,
    meta: Vec<GenMeta>,
    smith: TruncatedSmith,
}

#[derive(Clone, Debug)]
struct GenMeta {
    v_col: usize,
    scale: Rat,
}

/// Builds the kernel package for `m` mod `T^lambda`.
pub fn truncated_kernel(m: &NovikovMatrix, lambda: &Rat) -> Result<TruncatedKernel> {
    let smith = smith_form_mod(m, lambda)?;
    let mut meta = Vec::new();
    let mut ann_exps = Vec::new();
    for (j, a) in smith.exponents.iter().enumerate() {
        if a.is_zero() {
            // Unit pivot: no kernel contribution in this direction.
            continue;
        }
        meta.push(GenMeta { v_col: j, scale: lambda.clone() - a });
        ann_exps.push(a.clone());
    }
    for j in smith.rank..m.cols() {
        meta.push(GenMeta { v_col: j, scale: Rat::zero() });
        ann_exps.push(lambda.clone());
    }
    let mut gens = NovikovMatrix::zero(m.cols(), meta.len());
    for (g, gm) in meta.iter().enumerate() {
        for i in 0..m.cols() {
            let e = smith.v.get(i, gm.v_col).shift(&gm.scale).truncate(lambda);
            gens.set(i, g, e);
        }
    }
    Ok(TruncatedKernel { lambda: lambda.clone(), gens, ann_exps, meta, smith })
}

impl TruncatedKernel {
    pub fn ambient_dim(&self) -> usize {
        self.gens.rows()
    }

    pub fn count(&self) -> usize {
        self.meta.len()
    }

    /// Coordinates of `vector` over the kernel generators, or `None` if it
    /// is not in the kernel mod `T^λ`.
    pub fn coordinates(&self, vector: &[NovikovElement]) -> Result<Option<Vec<NovikovElement>>> {
        if vector.len() != self.ambient_dim() {
            return Err(Error::precondition("kernel coordinate shape mismatch"));
        }
        let reduced: Vec<NovikovElement> =
            vector.iter().map(|e| e.truncate(&self.lambda)).collect();
        let y = self.smith.v_inv.mul_vec(&reduced)?;
        let y: Vec<NovikovElement> = y.into_iter().map(|e| e.truncate(&self.lambda)).collect();
        // Membership: each pivot coordinate must be annihilated by the
        // corresponding diagonal entry.
        for (j, a) in self.smith.exponents.iter().enumerate() {
            let needed = self.lambda.clone() - a;
            match y[j].valuation() {
                None => {}
                Some(val) if val >= needed => {}
                Some(_) => return Ok(None),
            }
        }
        let mut coords = Vec::with_capacity(self.meta.len());
        for gm in &self.meta {
            let c = y[gm.v_col].shift(&-gm.scale.clone()).truncate(&self.lambda);
            coords.push(c);
        }
        Ok(Some(coords))
    }
}
