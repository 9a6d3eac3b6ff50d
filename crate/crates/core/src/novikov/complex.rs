//! Cochain complexes of finite free modules over the effective series ring.
//!
//! - A complex stores graded ranks from a minimal degree upward plus one
//!   differential per adjacent pair; `d ∘ d = 0` is checked exactly.
//! - Homology invariants fall out of diagonalization alone: the kernel of a
//!   differential is a free direct summand, so the free rank in degree `k`
//!   is `rank_k − rank d_k − rank d_{k−1}` and the torsion exponents are the
//!   positive diagonal exponents of `d_{k−1}`.
//! - Mod `T^λ` the same decomposition argument gives an extra kernel-side
//!   contribution: each positive diagonal exponent `a` of `d_k` mod `T^λ`
//!   adds a `Λ/T^a` summand, and surviving free directions become `Λ/T^λ`.
//! - The presentation route (`truncated_homology_presented`) builds the
//!   same module from explicit kernel generators and syzygy relations, and
//!   supplies the transition maps between truncation levels; the two routes
//!   are compared in tests as independent computations.

use super::matrix::NovikovMatrix;
use super::module::{FPModule, ModuleInvariants};
use super::series::NovikovElement;
use super::smith::smith_form;
use super::truncated::{smith_form_mod, truncated_kernel, TruncatedKernel};
use crate::error::{Error, Result};
use crate::exact::Rat;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A bounded complex `C^m → C^{m+1} → …` of finite free modules.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NovikovComplex {
    min_degree: i64,
    ranks: Vec<usize>,
    diffs: Vec<NovikovMatrix>,
}

impl NovikovComplex {
    /// Validates shapes, effectiveness, and `d ∘ d = 0`.
    pub fn new(min_degree: i64, ranks: Vec<usize>, diffs: Vec<NovikovMatrix>) -> Result<Self> {
        let expected = ranks.len().saturating_sub(1);
        if diffs.len() != expected {
            return Err(Error::precondition(format!(
                "complex with {} degrees needs {} differentials, got {}",
                ranks.len(),
                expected,
                diffs.len()
            )));
        }
        for (j, d) in diffs.iter().enumerate() {
            if d.rows() != ranks[j + 1] || d.cols() != ranks[j] {
                return Err(Error::precondition(format!(
                    "differential {} has shape {}x{}, expected {}x{}",
                    j,
                    d.rows(),
                    d.cols(),
                    ranks[j + 1],
                    ranks[j]
                )));
            }
            if !d.is_effective() {
                return Err(Error::precondition(
                    "differential entries must have nonnegative exponents",
                ));
            }
        }
        for j in 0..diffs.len().saturating_sub(1) {
            let square = diffs[j + 1].mul(&diffs[j])?;
            if !square.is_zero() {
                return Err(Error::precondition(format!(
                    "differentials {} and {} do not compose to zero",
                    j,
                    j + 1
                )));
            }
        }
        Ok(NovikovComplex { min_degree, ranks, diffs })
    }

    pub fn zero() -> Self {
        NovikovComplex { min_degree: 0, ranks: Vec::new(), diffs: Vec::new() }
    }

    pub fn min_degree(&self) -> i64 {
        self.min_degree
    }

    /// Inclusive degree span; `None` for the zero complex.
    pub fn degree_span(&self) -> Option<(i64, i64)> {
        if self.ranks.is_empty() {
            None
        } else {
            Some((self.min_degree, self.min_degree + self.ranks.len() as i64 - 1))
        }
    }

    pub fn rank(&self, degree: i64) -> usize {
        let idx = degree - self.min_degree;
        if idx < 0 || idx as usize >= self.ranks.len() {
            0
        } else {
            self.ranks[idx as usize]
        }
    }

    /// The differential out of `degree` (a correctly shaped zero matrix
    /// when out of range).
    pub fn differential(&self, degree: i64) -> NovikovMatrix {
        let idx = degree - self.min_degree;
        if idx >= 0 && (idx as usize) < self.diffs.len() {
            self.diffs[idx as usize].clone()
        } else {
            NovikovMatrix::zero(self.rank(degree + 1), self.rank(degree))
        }
    }

    /// Homology invariants in one degree, straight from diagonalization.
    pub fn homology_invariants(&self, degree: i64) -> ModuleInvariants {
        let out = smith_form(&self.differential(degree)).expect("validated effective");
        let into = smith_form(&self.differential(degree - 1)).expect("validated effective");
        let free_rank = self.rank(degree) - out.rank - into.rank;
        let torsion: Vec<Rat> =
            into.exponents.iter().filter(|e| !e.is_zero()).cloned().collect();
        ModuleInvariants { torsion, free_rank }
    }

    /// Homology as a canonically presented module.
    pub fn homology(&self, degree: i64) -> FPModule {
        FPModule::from_invariants(&self.homology_invariants(degree))
    }

    /// Homology after reduction mod `T^lambda`, by the decomposition
    /// formula; every summand is annihilated by `T^λ`.
    pub fn truncated_homology(&self, lambda: &Rat, degree: i64) -> Result<FPModule> {
        if *lambda <= Rat::zero() {
            return Err(Error::precondition("truncation level must be positive"));
        }
        // Ranks and exponents must come from elimination carried out in the
        // quotient: truncating entries first and diagonalizing over the full
        // ring can break a dependency between columns and inflate the rank.
        let s_out = smith_form_mod(&self.differential(degree), lambda)?;
        let s_into = smith_form_mod(&self.differential(degree - 1), lambda)?;
        let free_dirs = self.rank(degree) - s_out.rank - s_into.rank;
        let mut torsion: Vec<Rat> = Vec::new();
        torsion.extend(s_out.exponents.iter().filter(|e| !e.is_zero()).cloned());
        torsion.extend(s_into.exponents.iter().filter(|e| !e.is_zero()).cloned());
        torsion.extend(std::iter::repeat(lambda.clone()).take(free_dirs));
        torsion.sort();
        Ok(FPModule::from_invariants(&ModuleInvariants { torsion, free_rank: 0 }))
    }

    /// Presentation-level truncated homology: explicit kernel generators
    /// with syzygy relations through the incoming differential.
    pub fn truncated_homology_presented(
        &self,
        lambda: &Rat,
        degree: i64,
    ) -> Result<PresentedTruncatedHomology> {
        if *lambda <= Rat::zero() {
            return Err(Error::precondition("truncation level must be positive"));
        }
        let out = self.differential(degree);
        let into = self.differential(degree - 1);
        let kernel = truncated_kernel(&out, lambda)?;
        let stacked = kernel.gens.hstack(&into)?;
        let syzygies = truncated_kernel(&stacked, lambda)?;
        let gen_count = kernel.count();
        let mut rows: Vec<Vec<NovikovElement>> = Vec::new();
        for j in 0..syzygies.count() {
            let col = syzygies.gens.column(j);
            rows.push(col[..gen_count].to_vec());
        }
        // Annihilator relations: T^{ann} kills each generator in the
        // ambient quotient, and they complete the relation span over the
        // untruncated ring.
        for (g, ann) in kernel.ann_exps.iter().enumerate() {
            let mut row = vec![NovikovElement::zero(); gen_count];
            row[g] = NovikovElement::monomial(ann.clone(), Rat::from_integer(1.into()));
            rows.push(row);
        }
        let relations = if rows.is_empty() {
            NovikovMatrix::zero(0, gen_count)
        } else {
            NovikovMatrix::from_rows(rows)?
        };
        let module = FPModule::from_presentation(relations)?;
        Ok(PresentedTruncatedHomology { lambda: lambda.clone(), degree, module, kernel })
    }

    /// Universal-coefficient comparison in one degree at one level.
    pub fn uct_verify(&self, lambda: &Rat, degree: i64) -> Result<UctReport> {
        if *lambda <= Rat::zero() {
            return Err(Error::precondition("truncation level must be positive"));
        }
        let tensor_term = self.homology(degree).tensor_truncation(lambda)?;
        let truncated_term = self.truncated_homology(lambda, degree)?;
        let torsion_term = self.homology(degree + 1).tor1(lambda)?;
        let ti = tensor_term.invariants();
        let mi = truncated_term.invariants();
        let fi = torsion_term.invariants();
        let volume_additive =
            mi.torsion_volume() == ti.torsion_volume() + fi.torsion_volume();
        let divisors_dominated =
            dominated(&ti.torsion, &mi.torsion) && dominated(&fi.torsion, &mi.torsion);
        let generator_counts_consistent = ti.summands() <= mi.summands()
            && fi.summands() <= mi.summands()
            && mi.summands() <= ti.summands() + fi.summands();
        let exact = volume_additive && divisors_dominated && generator_counts_consistent;
        Ok(UctReport {
            tensor_term,
            truncated_term,
            torsion_term,
            volume_additive,
            divisors_dominated,
            generator_counts_consistent,
            exact,
        })
    }
}

/// Every exponent of `part` (descending) is dominated by the matching
/// exponent of `whole`.
fn dominated(part: &[Rat], whole: &[Rat]) -> bool {
    let mut p: Vec<&Rat> = part.iter().collect();
    let mut w: Vec<&Rat> = whole.iter().collect();
    p.sort_by(|a, b| b.cmp(a));
    w.sort_by(|a, b| b.cmp(a));
    if p.len() > w.len() {
        return false;
    }
    p.iter().zip(w.iter()).all(|(a, b)| a <= b)
}

/// Truncated homology with its explicit kernel-generator frame.
#[derive(Clone, Debug)]
pub struct PresentedTruncatedHomology {
    pub lambda: Rat,
    pub degree: i64,
    pub module: FPModule,
    kernel: TruncatedKernel,
}

impl PresentedTruncatedHomology {
    /// Ambient kernel generators (one column per module generator).
    pub fn generator_columns(&self) -> &NovikovMatrix {
        &self.kernel.gens
    }
}

/// Generator-level matrix of the canonical map from level `from.lambda`
/// down to level `to.lambda` (same degree, `from.lambda ≥ to.lambda`).
pub fn truncation_transition(
    from: &PresentedTruncatedHomology,
    to: &PresentedTruncatedHomology,
) -> Result<NovikovMatrix> {
    if from.degree != to.degree {
        return Err(Error::precondition("transition degrees disagree"));
    }
    if from.lambda < to.lambda {
        return Err(Error::precondition(
            "transition must go from a higher level to a lower one",
        ));
    }
    let mut matrix = NovikovMatrix::zero(to.kernel.count(), from.kernel.count());
    for g in 0..from.kernel.count() {
        let col = from.kernel.gens.column(g);
        let coords = to.kernel.coordinates(&col)?.ok_or_else(|| {
            Error::precondition("higher-level kernel vector escapes the lower-level kernel")
        })?;
        for (i, c) in coords.into_iter().enumerate() {
            matrix.set(i, g, c);
        }
    }
    Ok(matrix)
}

/// Universal-coefficient report: the three terms and the bookkeeping
/// checks certifying the short exact sequence.
#[derive(Clone, Debug, Serialize)]
pub struct UctReport {
    pub tensor_term: FPModule,
    pub truncated_term: FPModule,
    pub torsion_term: FPModule,
    pub volume_additive: bool,
    pub divisors_dominated: bool,
    pub generator_counts_consistent: bool,
    pub exact: bool,
}

#[derive(Serialize, Deserialize)]
struct WireComplex {
    min_degree: i64,
    ranks: Vec<usize>,
    differentials: Vec<NovikovMatrix>,
}

impl Serialize for NovikovComplex {
    fn serialize<S: Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        WireComplex {
            min_degree: self.min_degree,
            ranks: self.ranks.clone(),
            differentials: self.diffs.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NovikovComplex {
    fn deserialize<D: Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = WireComplex::deserialize(deserializer)?;
        // Zero-row/column differentials lose their shape in the nested-array
        // wire form; restore it from the rank list before validating.
        let mut diffs = Vec::with_capacity(wire.differentials.len());
        for (j, d) in wire.differentials.into_iter().enumerate() {
            let rows = wire.ranks.get(j + 1).copied().unwrap_or(0);
            let cols = wire.ranks.get(j).copied().unwrap_or(0);
            if d.rows() == 0 || d.cols() == 0 {
                diffs.push(NovikovMatrix::zero(rows, cols));
            } else {
                diffs.push(d);
            }
        }
        NovikovComplex::new(wire.min_degree, wire.ranks, diffs).map_err(D::Error::custom)
    }
}
