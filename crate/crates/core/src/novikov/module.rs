//! Finitely presented modules over the effective series ring.
//!
//! - A module is a relation matrix (rows = relations, cols = generators);
//!   diagonalizing it reads off the invariant decomposition
//!   `⊕ Λ/T^{a_i} ⊕ Λ^{free}`, which classifies the module completely.
//! - Torsion functor: `tor1` against a truncation caps every torsion
//!   exponent at the level and kills free factors.
//! - Maps between presented modules are generator-image matrices; they are
//!   validated by pushing each source relation into the target's relation
//!   span, and surjectivity is decided by diagonalizing the map alongside
//!   the target relations.
//! - Inverse systems over strictly decreasing levels get the on-samples
//!   stabilization verdict: every consecutive transition must be onto.

use super::matrix::NovikovMatrix;
use super::series::NovikovElement;
use super::smith::{in_column_span, kernel_basis, smith_form};
use crate::error::{Error, Result};
use crate::exact::Rat;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Classifying data: positive torsion exponents (ascending) plus free rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModuleInvariants {
    pub torsion: Vec<Rat>,
    pub free_rank: usize,
}

impl ModuleInvariants {
    pub fn is_trivial(&self) -> bool {
        self.torsion.is_empty() && self.free_rank == 0
    }

    /// Sum of torsion exponents: the additive length of the torsion part.
    pub fn torsion_volume(&self) -> Rat {
        let mut v = Rat::zero();
        for t in &self.torsion {
            v += t;
        }
        v
    }

    /// Number of cyclic summands.
    pub fn summands(&self) -> usize {
        self.torsion.len() + self.free_rank
    }
}

/// Largest finite torsion exponent of a module, if any.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TorsionBound {
    /// Torsion-free module: no finite exponent exists.
    NegInfinity,
    /// Largest torsion exponent.
    Finite(Rat),
    /// Unbounded torsion.  Never produced for a finitely presented module —
    /// a finite relation matrix always has finitely many exponents — and
    /// present only so consumers can speak about completed limits.
    PosInfinity,
}

/// A module given by generators and a finite relation matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FPModule {
    relations: NovikovMatrix,
}

impl FPModule {
    /// Rows are relations among the `cols` generators.
    pub fn from_presentation(relations: NovikovMatrix) -> Result<Self> {
        if !relations.is_effective() {
            return Err(Error::precondition(
                "module relations must have nonnegative exponents",
            ));
        }
        Ok(FPModule { relations })
    }

    pub fn free(rank: usize) -> Self {
        FPModule { relations: NovikovMatrix::zero(0, rank) }
    }

    pub fn zero_module() -> Self {
        Self::free(0)
    }

    /// Canonical diagonal presentation realizing the given invariants.
    pub fn from_invariants(inv: &ModuleInvariants) -> Self {
        let gens = inv.torsion.len() + inv.free_rank;
        let mut relations = NovikovMatrix::zero(inv.torsion.len(), gens);
        for (i, a) in inv.torsion.iter().enumerate() {
            relations.set(i, i, NovikovElement::monomial(a.clone(), Rat::from_integer(1.into())));
        }
        FPModule { relations }
    }

    pub fn generators(&self) -> usize {
        self.relations.cols()
    }

    pub fn relations(&self) -> &NovikovMatrix {
        &self.relations
    }

    pub fn invariants(&self) -> ModuleInvariants {
        let s = smith_form(&self.relations).expect("relations are validated effective");
        let torsion: Vec<Rat> =
            s.exponents.iter().filter(|e| !e.is_zero()).cloned().collect();
        ModuleInvariants { torsion, free_rank: self.relations.cols() - s.rank }
    }

    pub fn is_zero_module(&self) -> bool {
        self.invariants().is_trivial()
    }

    pub fn is_isomorphic_to(&self, other: &FPModule) -> bool {
        self.invariants() == other.invariants()
    }

    pub fn max_torsion(&self) -> TorsionBound {
        match self.invariants().torsion.last() {
            Some(t) => TorsionBound::Finite(t.clone()),
            None => TorsionBound::NegInfinity,
        }
    }

    /// First torsion functor against the level-`lambda` truncation:
    /// each `Λ/T^a` contributes `Λ/T^{min(a, λ)}`, free factors vanish.
    pub fn tor1(&self, lambda: &Rat) -> Result<FPModule> {
        if *lambda <= Rat::zero() {
            return Err(Error::precondition("torsion level must be positive"));
        }
        let inv = self.invariants();
        let capped: Vec<Rat> =
            inv.torsion.iter().map(|a| a.min(lambda).clone()).collect();
        Ok(Self::from_invariants(&ModuleInvariants { torsion: capped, free_rank: 0 }))
    }

    /// Tensor with the level-`lambda` truncation: torsion exponents cap at
    /// the level and each free factor becomes a full `Λ/T^λ`.
    pub fn tensor_truncation(&self, lambda: &Rat) -> Result<FPModule> {
        if *lambda <= Rat::zero() {
            return Err(Error::precondition("truncation level must be positive"));
        }
        let inv = self.invariants();
        let mut torsion: Vec<Rat> =
            inv.torsion.iter().map(|a| a.min(lambda).clone()).collect();
        torsion.extend(std::iter::repeat(lambda.clone()).take(inv.free_rank));
        torsion.sort();
        Ok(Self::from_invariants(&ModuleInvariants { torsion, free_rank: 0 }))
    }
}

#[derive(Serialize, Deserialize)]
struct WireModule {
    generators: usize,
    relations: Vec<Vec<NovikovElement>>,
}

impl Serialize for FPModule {
    fn serialize<S: Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let relations: Vec<Vec<NovikovElement>> =
            (0..self.relations.rows()).map(|i| self.relations.row(i)).collect();
        WireModule { generators: self.generators(), relations }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FPModule {
    fn deserialize<D: Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = WireModule::deserialize(deserializer)?;
        let relations = if wire.relations.is_empty() {
            NovikovMatrix::zero(0, wire.generators)
        } else {
            let m = NovikovMatrix::from_rows(wire.relations).map_err(D::Error::custom)?;
            if m.cols() != wire.generators {
                return Err(D::Error::custom("relation width disagrees with generator count"));
            }
            m
        };
        FPModule::from_presentation(relations).map_err(D::Error::custom)
    }
}

/// Whether `matrix` (target gens × source gens) sends every source relation
/// into the target's relation span, i.e. defines a module map.
pub fn is_well_defined_map(
    source: &FPModule,
    target: &FPModule,
    matrix: &NovikovMatrix,
) -> Result<bool> {
    if matrix.rows() != target.generators() || matrix.cols() != source.generators() {
        return Err(Error::precondition("module map shape mismatch"));
    }
    if !matrix.is_effective() {
        return Err(Error::precondition("module map entries must have nonnegative exponents"));
    }
    let target_span = target.relations().transpose();
    for i in 0..source.relations().rows() {
        let rel = source.relations().row(i);
        let image = matrix.mul_vec(&rel)?;
        if !in_column_span(&target_span, &image)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether the map is onto: its columns together with the target relations
/// must span the whole generator space with unit exponents.
pub fn is_surjective_map(
    source: &FPModule,
    target: &FPModule,
    matrix: &NovikovMatrix,
) -> Result<bool> {
    if matrix.rows() != target.generators() || matrix.cols() != source.generators() {
        return Err(Error::precondition("module map shape mismatch"));
    }
    let stacked = matrix.hstack(&target.relations().transpose())?;
    let s = smith_form(&stacked)?;
    Ok(s.rank == target.generators() && s.exponents.iter().all(|e| e.is_zero()))
}

/// The image of a map as a presented module: source generators modulo the
/// syzygies that land in the target's relation span.
pub fn image_module(
    source: &FPModule,
    target: &FPModule,
    matrix: &NovikovMatrix,
) -> Result<FPModule> {
    if matrix.rows() != target.generators() || matrix.cols() != source.generators() {
        return Err(Error::precondition("module map shape mismatch"));
    }
    let stacked = matrix.hstack(&target.relations().transpose())?;
    let kernel = kernel_basis(&stacked)?;
    let mut rows = Vec::with_capacity(kernel.cols());
    for j in 0..kernel.cols() {
        let col = kernel.column(j);
        rows.push(col[..source.generators()].to_vec());
    }
    let relations = if rows.is_empty() {
        NovikovMatrix::zero(0, source.generators())
    } else {
        NovikovMatrix::from_rows(rows)?
    };
    FPModule::from_presentation(relations)
}

/// A finite inverse system over strictly decreasing positive levels
/// `λ_1 > … > λ_k`, with `maps[i]` carrying stage `i` to stage `i+1`.
#[derive(Clone, Debug)]
pub struct InverseSystem {
    pub indices: Vec<Rat>,
    pub modules: Vec<FPModule>,
    pub maps: Vec<NovikovMatrix>,
}

/// On-samples stabilization verdict: true iff every consecutive transition
/// in the supplied window is surjective.  The caller chooses the window, so
/// a detected failure anywhere in it is a failure of the system.
pub fn mittag_leffler(system: &InverseSystem) -> Result<bool> {
    let k = system.modules.len();
    if k == 0 {
        return Err(Error::precondition("inverse system must contain at least one stage"));
    }
    if system.indices.len() != k {
        return Err(Error::precondition("inverse system index count mismatch"));
    }
    if system.maps.len() + 1 != k {
        return Err(Error::precondition("inverse system map count mismatch"));
    }
    for w in system.indices.windows(2) {
        if w[0] <= w[1] {
            return Err(Error::precondition(
                "inverse system levels must be strictly decreasing",
            ));
        }
    }
    if let Some(last) = system.indices.last() {
        if *last <= Rat::zero() {
            return Err(Error::precondition("inverse system levels must be positive"));
        }
    }
    for (i, map) in system.maps.iter().enumerate() {
        if !is_well_defined_map(&system.modules[i], &system.modules[i + 1], map)? {
            return Err(Error::precondition(
                "inconsistent system: a transition does not respect relations",
            ));
        }
    }
    for (i, map) in system.maps.iter().enumerate() {
        if !is_surjective_map(&system.modules[i], &system.modules[i + 1], map)? {
            return Ok(false);
        }
    }
    Ok(true)
}
