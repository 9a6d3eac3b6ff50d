//! Seeded builders for randomized verification batches.
//!
//! - Diagrams with bounded ray counts and small rational coordinates, plus
//!   loops suitable for holonomy probes.
//! - Chain complexes over the effective coefficient ring with exact `d² = 0`
//!   by construction, finitely presented modules, and telescope families.
//! - Valuation-algebra data: polygons, elements, affine maps, wall data.
//!
//! Everything is driven by a caller-provided `ChaCha8Rng`, so batches are
//! reproducible from their seeds.

use crate::affine::{IntegralAffineMap, Vec2Q, Vec2Z};
use crate::atlas::Loop;
use crate::diagram::{EigenrayDiagram, SubRay};
use crate::error::Result;
use crate::exact::{int, rat, rat_int, Rat};
use crate::ks::{KSElement, RationalPolygon, WallDatum};
use crate::novikov::{
    ChainMap, FPModule, NovikovComplex, NovikovElement, NovikovMatrix, OneRay,
};
use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A rational in `[-10, 10]` with denominator at most 8.
pub fn rational_coord(rng: &mut ChaCha8Rng) -> Rat {
    let den = rng.gen_range(1..=8i64);
    let num = rng.gen_range(-10 * den..=10 * den);
    rat(num, den)
}

/// A primitive nonzero integer direction with small entries.
pub fn random_direction(rng: &mut ChaCha8Rng) -> Vec2Z {
    loop {
        let x = rng.gen_range(-3..=3i64);
        let y = rng.gen_range(-3..=3i64);
        if let Ok(v) = Vec2Z::primitive(x, y) {
            return v;
        }
    }
}

/// A valid diagram with between 1 and `max_rays` sub-rays.
pub fn random_diagram(rng: &mut ChaCha8Rng, max_rays: usize) -> EigenrayDiagram {
    loop {
        let count = rng.gen_range(1..=max_rays);
        let elements: Vec<SubRay> = (0..count)
            .map(|_| {
                SubRay::new(
                    Vec2Q::new(rational_coord(rng), rational_coord(rng)),
                    random_direction(rng),
                    rng.gen_range(1..=3),
                )
            })
            .collect();
        if let Ok(d) = EigenrayDiagram::from_elements(elements) {
            return d;
        }
    }
}

/// A small rational polygon loop: a triangle or an axis-aligned rectangle.
pub fn random_loop(rng: &mut ChaCha8Rng) -> Loop {
    if rng.gen_bool(0.4) {
        loop {
            let vs: Vec<Vec2Q> = (0..3)
                .map(|_| Vec2Q::new(rational_coord(rng), rational_coord(rng)))
                .collect();
            let ab = vs[1].sub(&vs[0]);
            let ac = vs[2].sub(&vs[0]);
            if !(&ab.x * &ac.y - &ab.y * &ac.x).is_zero() {
                return Loop { vertices: vs };
            }
        }
    }
    loop {
        let x0 = rational_coord(rng);
        let x1 = rational_coord(rng);
        let y0 = rational_coord(rng);
        let y1 = rational_coord(rng);
        if x0 == x1 || y0 == y1 {
            continue;
        }
        let (x0, x1) = if x0 < x1 { (x0, x1) } else { (x1, x0) };
        let (y0, y1) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
        return Loop {
            vertices: vec![
                Vec2Q::new(x0.clone(), y0.clone()),
                Vec2Q::new(x1.clone(), y0),
                Vec2Q::new(x1, y1.clone()),
                Vec2Q::new(x0, y1),
            ],
        };
    }
}

/// A chain complex with at most 4 degrees and ranks at most 4: a split
/// staircase differential conjugated by random transvections, so `d² = 0`
/// holds exactly while the matrices look generic.
pub fn random_complex(rng: &mut ChaCha8Rng) -> NovikovComplex {
    let degrees = rng.gen_range(2..=4);
    let ranks: Vec<usize> = (0..degrees).map(|_| rng.gen_range(1..=4)).collect();
    let mut diffs = Vec::new();
    let mut used_in_prev = 0usize;
    for j in 0..degrees - 1 {
        let avail_src = ranks[j] - used_in_prev;
        let avail_dst = ranks[j + 1];
        let r = rng.gen_range(0..=avail_src.min(avail_dst));
        let mut d = NovikovMatrix::zero(ranks[j + 1], ranks[j]);
        for k in 0..r {
            let exp = rat(rng.gen_range(0..=4), rng.gen_range(1..=2));
            d.set(k, used_in_prev + k, NovikovElement::monomial(exp, rat_int(1)));
        }
        diffs.push(d);
        used_in_prev = r;
    }
    let bases: Vec<(NovikovMatrix, NovikovMatrix)> =
        ranks.iter().map(|&n| random_basis(rng, n)).collect();
    let conj: Vec<NovikovMatrix> = diffs
        .iter()
        .enumerate()
        .map(|(j, d)| bases[j + 1].0.mul(d).unwrap().mul(&bases[j].1).unwrap())
        .collect();
    NovikovComplex::new(0, ranks, conj).unwrap()
}

/// Random product of transvections together with its exact inverse
/// (transvections invert by negation, composed in reverse order).
fn random_basis(rng: &mut ChaCha8Rng, n: usize) -> (NovikovMatrix, NovikovMatrix) {
    let mut m = NovikovMatrix::identity(n);
    let mut inv = NovikovMatrix::identity(n);
    if n == 0 {
        return (m, inv);
    }
    let mut ops: Vec<(usize, usize, NovikovElement)> = Vec::new();
    for _ in 0..4 {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i == j {
            continue;
        }
        let x = NovikovElement::monomial(
            rat(rng.gen_range(0..=2), 1),
            rat_int(rng.gen_range(1..=3)),
        );
        for c in 0..n {
            let e = m.get(i, c).add(&x.mul(m.get(j, c)));
            m.set(i, c, e);
        }
        ops.push((i, j, x));
    }
    for (i, j, x) in ops.iter().rev() {
        for c in 0..n {
            let e = inv.get(*i, c).sub(&x.mul(inv.get(*j, c)));
            inv.set(*i, c, e);
        }
    }
    (m, inv)
}

/// A finitely presented module from a random effective relation matrix.
pub fn random_module(rng: &mut ChaCha8Rng) -> FPModule {
    let gens = rng.gen_range(1..=4);
    let rels = rng.gen_range(0..=4);
    let mut m = NovikovMatrix::zero(gens, rels);
    for i in 0..gens {
        for j in 0..rels {
            if rng.gen_bool(0.6) {
                let exp = rat(rng.gen_range(0..=6), rng.gen_range(1..=2));
                let coeff = rat(rng.gen_range(-3..=3i64).max(1), 1);
                m.set(i, j, NovikovElement::monomial(exp, coeff));
            }
        }
    }
    FPModule::from_presentation(m).expect("random presentation is well-formed")
}

/// The one-ray family whose stages are `[Λ → Λ]` scaled by growing powers,
/// connected by `(1, T)`: torsion accumulates without bound along it.
pub fn growing_torsion_ray(stages: usize) -> OneRay {
    let interval = |k: i64| {
        let d = NovikovMatrix::diagonal(&[NovikovElement::monomial(rat(k, 1), rat_int(1))]);
        NovikovComplex::new(0, vec![1, 1], vec![d]).unwrap()
    };
    let complexes: Vec<NovikovComplex> = (1..=stages as i64).map(interval).collect();
    let maps: Vec<ChainMap> = (0..stages.saturating_sub(1))
        .map(|_| {
            ChainMap::new(
                0,
                vec![
                    NovikovMatrix::identity(1),
                    NovikovMatrix::diagonal(&[NovikovElement::monomial(
                        rat(1, 1),
                        rat_int(1),
                    )]),
                ],
            )
        })
        .collect();
    OneRay::new(complexes, maps).unwrap()
}

/// An eventually-constant family: `stages` copies of one random complex
/// joined by identity maps. Its telescope carries finite torsion and the
/// family stabilizes.
pub fn random_stable_ray(rng: &mut ChaCha8Rng, stages: usize) -> OneRay {
    let c = random_complex(rng);
    let maps: Vec<ChainMap> = (0..stages.saturating_sub(1))
        .map(|_| ChainMap::identity_for(&c))
        .collect();
    let complexes = vec![c; stages.max(1)];
    OneRay::new(complexes, maps).unwrap()
}

/// A convex rational polygon: an axis box, or occasionally a triangle.
pub fn random_polygon(rng: &mut ChaCha8Rng) -> RationalPolygon {
    let r = |rng: &mut ChaCha8Rng| rat(rng.gen_range(-8..=8), rng.gen_range(1..=4));
    if rng.gen_bool(0.3) {
        loop {
            let a = Vec2Q::new(r(rng), r(rng));
            let b = Vec2Q::new(r(rng), r(rng));
            let c = Vec2Q::new(r(rng), r(rng));
            if let Ok(p) = RationalPolygon::new(vec![a, b, c]) {
                return p;
            }
        }
    }
    let mut x0 = r(rng);
    let mut x1 = r(rng);
    if x0 > x1 {
        std::mem::swap(&mut x0, &mut x1);
    }
    let mut y0 = r(rng);
    let mut y1 = r(rng);
    if y0 > y1 {
        std::mem::swap(&mut y0, &mut y1);
    }
    RationalPolygon::rect(x0, x1 + rat_int(1), y0, y1 + rat_int(1)).unwrap()
}

/// A sparse element with characters in `[-3, 3]²` and effective
/// single-term coefficients.
pub fn random_ks_element(rng: &mut ChaCha8Rng, precision: Rat) -> KSElement {
    let count = rng.gen_range(1..=4);
    let mut terms = Vec::new();
    for _ in 0..count {
        let n = Vec2Z::new(rng.gen_range(-3..=3i64), rng.gen_range(-3..=3i64));
        let coeff = NovikovElement::from_terms(vec![(
            rat(rng.gen_range(0..=8), rng.gen_range(1..=2)),
            rat(rng.gen_range(-5..=5i64), 1),
        )]);
        if !coeff.is_zero() {
            terms.push((n, coeff));
        }
    }
    KSElement::from_terms(terms, precision)
}

/// Like `random_ks_element` but with characters in the first quadrant, so
/// every valuation is nonnegative on effective polygons.
pub fn random_effective_ks_element(rng: &mut ChaCha8Rng, precision: Rat) -> KSElement {
    let count = rng.gen_range(1..=4);
    let mut terms = Vec::new();
    for _ in 0..count {
        let n = Vec2Z::new(rng.gen_range(0..=3i64), rng.gen_range(0..=3i64));
        let coeff = NovikovElement::from_terms(vec![(
            rat(rng.gen_range(0..=8), rng.gen_range(1..=2)),
            rat(rng.gen_range(-5..=5i64), 1),
        )]);
        if !coeff.is_zero() {
            terms.push((n, coeff));
        }
    }
    KSElement::from_terms(terms, precision)
}

/// A random integral affine map: a short product of transvections composed
/// with a rational translation.
pub fn random_affine_map(rng: &mut ChaCha8Rng) -> IntegralAffineMap {
    let mut m = IntegralAffineMap::identity();
    for _ in 0..rng.gen_range(0..4) {
        let k = int(rng.gen_range(-2..=2i64));
        let s = if rng.gen_bool(0.5) {
            IntegralAffineMap::from_parts([[int(1), k], [int(0), int(1)]], Vec2Q::zero())
        } else {
            IntegralAffineMap::from_parts([[int(1), int(0)], [k, int(1)]], Vec2Q::zero())
        }
        .unwrap();
        m = m.compose(&s);
    }
    let t = Vec2Q::new(
        rat(rng.gen_range(-4..=4), rng.gen_range(1..=3)),
        rat(rng.gen_range(-4..=4), rng.gen_range(1..=3)),
    );
    m.compose(&IntegralAffineMap::translation(t))
}

/// A wall over the given polygon whose crossing converges: the flux is
/// chosen so the per-order gain is strictly positive.
pub fn random_wall(rng: &mut ChaCha8Rng, polygon: &RationalPolygon) -> Result<WallDatum> {
    let e = random_direction(rng);
    let slack = rat(rng.gen_range(1..=6), rng.gen_range(1..=3));
    let f = slack - polygon.min_pairing(&e);
    let m = rng.gen_range(1..=2);
    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
    WallDatum::new(e, f, m, sign)
}
