//! One-directional rays of complexes and their mapping telescopes.
//!
//! - A ray is a finite chain `C_1 → C_2 → … → C_N` of complexes connected
//!   by degreewise chain maps (validated to commute with differentials).
//! - The telescope totalizes the ray: one shifted copy of each complex but
//!   the last, one unshifted copy of each; a shifted element maps to its
//!   negated differential, itself, and minus its image one step along.
//!   The result is validated as a genuine complex, so the squared
//!   differential vanishing is checked exactly on construction.
//! - The relative-versus-reduced report compares homology of the telescope
//!   over the full ring with the inverse system of its truncations: the
//!   stabilization verdict one degree below, the image of the top sample in
//!   the bottom one, and whether the canonical comparison is an
//!   isomorphism on the sampled window.

use super::complex::{truncation_transition, NovikovComplex, PresentedTruncatedHomology};
use super::matrix::NovikovMatrix;
use super::module::{image_module, mittag_leffler, FPModule, InverseSystem};
use crate::error::{Error, Result};
use crate::exact::{fmt_rat, Rat};
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Degreewise components of a chain map between two complexes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainMap {
    min_degree: i64,
    components: Vec<NovikovMatrix>,
}

impl ChainMap {
    pub fn new(min_degree: i64, components: Vec<NovikovMatrix>) -> Self {
        ChainMap { min_degree, components }
    }

    /// The identity chain map on `c`.
    pub fn identity_for(c: &NovikovComplex) -> Self {
        let Some((lo, hi)) = c.degree_span() else {
            return ChainMap { min_degree: 0, components: Vec::new() };
        };
        let components =
            (lo..=hi).map(|d| NovikovMatrix::identity(c.rank(d))).collect();
        ChainMap { min_degree: lo, components }
    }

    /// The component at `degree`, shaped `target.rank × source.rank`.
    pub fn component(
        &self,
        source: &NovikovComplex,
        target: &NovikovComplex,
        degree: i64,
    ) -> NovikovMatrix {
        let idx = degree - self.min_degree;
        if idx >= 0 && (idx as usize) < self.components.len() {
            self.components[idx as usize].clone()
        } else {
            NovikovMatrix::zero(target.rank(degree), source.rank(degree))
        }
    }

    /// Shape and commutation checks against the two complexes.
    pub fn validate(&self, source: &NovikovComplex, target: &NovikovComplex) -> Result<()> {
        for (j, m) in self.components.iter().enumerate() {
            let d = self.min_degree + j as i64;
            if m.rows() != target.rank(d) || m.cols() != source.rank(d) {
                return Err(Error::precondition(format!(
                    "chain map component at degree {} has shape {}x{}, expected {}x{}",
                    d,
                    m.rows(),
                    m.cols(),
                    target.rank(d),
                    source.rank(d)
                )));
            }
            if !m.is_effective() {
                return Err(Error::precondition(
                    "chain map entries must have nonnegative exponents",
                ));
            }
        }
        let spans = [source.degree_span(), target.degree_span()];
        let lo = spans.iter().flatten().map(|s| s.0).min().unwrap_or(0) - 1;
        let hi = spans.iter().flatten().map(|s| s.1).max().unwrap_or(0) + 1;
        for d in lo..=hi {
            let left = target
                .differential(d)
                .mul(&self.component(source, target, d))?;
            let right = self
                .component(source, target, d + 1)
                .mul(&source.differential(d))?;
            if left != right {
                return Err(Error::precondition(format!(
                    "chain map does not commute with differentials at degree {d}"
                )));
            }
        }
        Ok(())
    }
}

/// A finite chain of complexes and connecting chain maps.
#[derive(Clone, Debug)]
pub struct OneRay {
    complexes: Vec<NovikovComplex>,
    maps: Vec<ChainMap>,
}

impl OneRay {
    pub fn new(complexes: Vec<NovikovComplex>, maps: Vec<ChainMap>) -> Result<Self> {
        if complexes.is_empty() {
            if !maps.is_empty() {
                return Err(Error::precondition("an empty ray cannot carry maps"));
            }
            return Ok(OneRay { complexes, maps });
        }
        if maps.len() + 1 != complexes.len() {
            return Err(Error::precondition(format!(
                "a ray of {} complexes needs {} maps, got {}",
                complexes.len(),
                complexes.len() - 1,
                maps.len()
            )));
        }
        for (i, f) in maps.iter().enumerate() {
            f.validate(&complexes[i], &complexes[i + 1])?;
        }
        Ok(OneRay { complexes, maps })
    }

    pub fn complexes(&self) -> &[NovikovComplex] {
        &self.complexes
    }

    pub fn maps(&self) -> &[ChainMap] {
        &self.maps
    }
}

/// Builds the mapping telescope of a ray.
pub fn telescope(ray: &OneRay) -> Result<NovikovComplex> {
    let n = ray.complexes.len();
    if n == 0 {
        return Ok(NovikovComplex::zero());
    }
    // Degree span of the telescope: shifted copies reach one lower.
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for (i, c) in ray.complexes.iter().enumerate() {
        if let Some((clo, chi)) = c.degree_span() {
            lo = lo.min(clo);
            hi = hi.max(chi);
            if i + 1 < n {
                lo = lo.min(clo - 1);
                hi = hi.max(chi - 1);
            }
        }
    }
    if lo > hi {
        return Ok(NovikovComplex::zero());
    }

    // Block layout per telescope degree k:
    // [shifted_0 … shifted_{n−2} | unshifted_0 … unshifted_{n−1}],
    // where shifted_i holds C_i^{k+1} and unshifted_i holds C_i^k.
    let shifted_width = |i: usize, k: i64| ray.complexes[i].rank(k + 1);
    let unshifted_width = |i: usize, k: i64| ray.complexes[i].rank(k);
    let offsets = |k: i64| -> (Vec<usize>, Vec<usize>, usize) {
        let mut sh = Vec::with_capacity(n.saturating_sub(1));
        let mut un = Vec::with_capacity(n);
        let mut at = 0usize;
        for i in 0..n.saturating_sub(1) {
            sh.push(at);
            at += shifted_width(i, k);
        }
        for i in 0..n {
            un.push(at);
            at += unshifted_width(i, k);
        }
        (sh, un, at)
    };

    let mut ranks = Vec::new();
    for k in lo..=hi {
        ranks.push(offsets(k).2);
    }
    let mut diffs = Vec::new();
    for k in lo..hi {
        let (src_sh, src_un, src_total) = offsets(k);
        let (dst_sh, dst_un, dst_total) = offsets(k + 1);
        let mut d = NovikovMatrix::zero(dst_total, src_total);
        let mut write_block = |m: &NovikovMatrix, row0: usize, col0: usize| {
            for r in 0..m.rows() {
                for c in 0..m.cols() {
                    let e = m.get(r, c);
                    if !e.is_zero() {
                        d.set(row0 + r, col0 + c, e.clone());
                    }
                }
            }
        };
        for i in 0..n.saturating_sub(1) {
            let ci = &ray.complexes[i];
            // Shifted source C_i^{k+1}: negated internal differential …
            write_block(&ci.differential(k + 1).neg(), dst_sh[i], src_sh[i]);
            // … the identity into the unshifted copy …
            write_block(
                &NovikovMatrix::identity(ci.rank(k + 1)),
                dst_un[i],
                src_sh[i],
            );
            // … and minus the connecting map one step along.
            let f = ray.maps[i].component(ci, &ray.complexes[i + 1], k + 1);
            write_block(&f.neg(), dst_un[i + 1], src_sh[i]);
        }
        for i in 0..n {
            write_block(&ray.complexes[i].differential(k), dst_un[i], src_un[i]);
        }
        diffs.push(d);
    }
    NovikovComplex::new(lo, ranks, diffs)
}

/// One truncation sample inside a relative-versus-reduced report.
#[derive(Clone, Debug, Serialize)]
pub struct TruncatedSample {
    pub level: String,
    pub module: FPModule,
}

/// Comparison of telescope homology over the full ring against its sampled
/// inverse system of truncations.
#[derive(Clone, Debug, Serialize)]
pub struct RelVsRedReport {
    pub degree: i64,
    pub relative: FPModule,
    pub truncated: Vec<TruncatedSample>,
    pub reduced: FPModule,
    pub stabilizes_below: bool,
    pub comparison_iso: bool,
}

/// Runs the comparison for `ray` in `degree` over the given positive
/// truncation levels.
pub fn rel_vs_red(ray: &OneRay, degree: i64, samples: &[Rat]) -> Result<RelVsRedReport> {
    if samples.is_empty() {
        return Err(Error::precondition("at least one truncation sample is required"));
    }
    let mut levels: Vec<Rat> = samples.to_vec();
    for l in &levels {
        if *l <= Rat::zero() {
            return Err(Error::precondition("truncation samples must be positive"));
        }
    }
    levels.sort_by(|a, b| b.cmp(a));
    levels.dedup();

    let tel = telescope(ray)?;
    let relative = tel.homology(degree);

    let mut truncated = Vec::with_capacity(levels.len());
    let mut presented_here: Vec<PresentedTruncatedHomology> = Vec::new();
    let mut presented_below: Vec<PresentedTruncatedHomology> = Vec::new();
    for l in &levels {
        truncated.push(TruncatedSample {
            level: fmt_rat(l),
            module: tel.truncated_homology(l, degree)?,
        });
        presented_here.push(tel.truncated_homology_presented(l, degree)?);
        presented_below.push(tel.truncated_homology_presented(l, degree - 1)?);
    }

    let stabilizes_below = if levels.len() < 2 {
        true
    } else {
        let maps: Vec<NovikovMatrix> = presented_below
            .windows(2)
            .map(|w| truncation_transition(&w[0], &w[1]))
            .collect::<Result<_>>()?;
        let system = InverseSystem {
            indices: levels.clone(),
            modules: presented_below.iter().map(|p| p.module.clone()).collect(),
            maps,
        };
        mittag_leffler(&system)?
    };

    // Image of the top sample inside the bottom one: the sampled stand-in
    // for the stable part of the limit.
    let top = &presented_here[0];
    let bottom = presented_here.last().expect("levels nonempty");
    let reduced = if presented_here.len() < 2 {
        top.module.clone()
    } else {
        let mut composite: Option<NovikovMatrix> = None;
        for w in presented_here.windows(2) {
            let step = truncation_transition(&w[0], &w[1])?;
            composite = Some(match composite {
                None => step,
                Some(acc) => step.mul(&acc)?,
            });
        }
        image_module(
            &top.module,
            &bottom.module,
            &composite.expect("at least one step"),
        )?
    };

    let expected = relative.tensor_truncation(levels.last().expect("nonempty"))?;
    let comparison_iso = stabilizes_below && reduced.is_isomorphic_to(&expected);

    Ok(RelVsRedReport {
        degree,
        relative,
        truncated,
        reduced,
        stabilizes_below,
        comparison_iso,
    })
}

#[derive(Serialize, Deserialize)]
struct WireChainMap {
    min_degree: i64,
    components: Vec<NovikovMatrix>,
}

#[derive(Serialize, Deserialize)]
struct WireRay {
    complexes: Vec<NovikovComplex>,
    maps: Vec<WireChainMap>,
}

impl Serialize for OneRay {
    fn serialize<S: Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        WireRay {
            complexes: self.complexes.clone(),
            maps: self
                .maps
                .iter()
                .map(|m| WireChainMap {
                    min_degree: m.min_degree,
                    components: m.components.clone(),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for OneRay {
    fn deserialize<D: Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let wire = WireRay::deserialize(deserializer)?;
        // Restore shapes of degenerate components from the adjacent
        // complexes before validating.
        let mut maps = Vec::with_capacity(wire.maps.len());
        for (i, wm) in wire.maps.into_iter().enumerate() {
            let (Some(src), Some(dst)) =
                (wire.complexes.get(i), wire.complexes.get(i + 1))
            else {
                return Err(D::Error::custom("ray maps outnumber its complexes"));
            };
            let mut components = Vec::with_capacity(wm.components.len());
            for (j, m) in wm.components.into_iter().enumerate() {
                let d = wm.min_degree + j as i64;
                if m.rows() == 0 || m.cols() == 0 {
                    components.push(NovikovMatrix::zero(dst.rank(d), src.rank(d)));
                } else {
                    components.push(m);
                }
            }
            maps.push(ChainMap::new(wm.min_degree, components));
        }
        OneRay::new(wire.complexes, maps).map_err(D::Error::custom)
    }
}
