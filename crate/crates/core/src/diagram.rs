//! Eigenray diagrams and their moves.
//!
//! An eigenray diagram is a finite set of pairwise disjoint rays of rational
//! slope in the plane, each carrying marked nodes with positive integer
//! multiplicities (the ray's starting point is always a node).  Internally a
//! diagram is kept in a canonical form: the multiset of *sub-rays*, one
//! element per node, each running from its node in the ray direction.  The
//! grouped (ray + node list) presentation used on the wire is derived from the
//! multiset on demand.
//!
//! Provided operations:
//!
//! - [`DiagramDoc::validate`] — report-valued validation of the wire form;
//! - [`EigenrayDiagram::node_removal`] — delete one multiset element;
//! - [`EigenrayDiagram::nodal_slide`] — move a node along its line, merging
//!   coincident nodes;
//! - [`EigenrayDiagram::is_mutable`] / [`EigenrayDiagram::branch_move`] — ray
//!   reversal with the based piecewise shear applied to the rest;
//! - [`EigenrayDiagram::is_exact`], [`EigenrayDiagram::seed_data`],
//!   [`affine_equivalent`], [`normalize_weak`].

use crate::affine::{det2q, det2z, det2zq, IntegralAffineMap, Vec2Q, Vec2Z};
use crate::error::{Error, Result};
use crate::exact::{fmt_rat, Int, Rat, WireInt, WireRat};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// One multiset element: the sub-ray from node `base` in direction `dir`,
/// with the node's multiplicity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubRay {
    pub base: Vec2Q,
    pub dir: Vec2Z,
    pub mult: u32,
}

impl SubRay {
    pub fn new(base: Vec2Q, dir: Vec2Z, mult: u32) -> Self {
        SubRay { base, dir, mult }
    }

    /// True when `p` lies on the closed ray `{base + t dir : t >= 0}`.
    pub fn contains(&self, p: &Vec2Q) -> bool {
        let delta = p.sub(&self.base);
        det2zq(&self.dir, &delta).is_zero() && !param_along(&self.dir, &self.base, p).is_negative()
    }
}

/// Parameter of `p` along `dir` measured from `from`; `p` must lie on the line.
pub(crate) fn param_along(dir: &Vec2Z, from: &Vec2Q, p: &Vec2Q) -> Rat {
    if !dir.x.is_zero() {
        (&p.x - &from.x) / Rat::from_integer(dir.x.clone())
    } else {
        (&p.y - &from.y) / Rat::from_integer(dir.y.clone())
    }
}

/// Do the closed rays `{b1 + t d1}` and `{b2 + s d2}` (t, s >= 0) meet?
fn rays_intersect(b1: &Vec2Q, d1: &Vec2Z, b2: &Vec2Q, d2: &Vec2Z) -> bool {
    let delta = b2.sub(b1);
    let det = Rat::from_integer(det2z(d1, d2));
    if !det.is_zero() {
        let t = det2q(&delta, &d2.to_q()) / &det;
        let s = -(det2zq(d1, &delta) / &det);
        return !t.is_negative() && !s.is_negative();
    }
    if !det2zq(d1, &delta).is_zero() {
        return false; // parallel, different lines
    }
    // Same line; primitive parallel directions are equal or opposite.
    if d1 == d2 {
        true
    } else {
        // Opposite: ray 2 covers parameters <= c on ray 1's line.
        !param_along(d1, b1, b2).is_negative()
    }
}

/// Does the full line `{lb + t ld : t in Q}` meet the closed ray `{b + s d}`?
fn line_meets_ray(lb: &Vec2Q, ld: &Vec2Z, b: &Vec2Q, d: &Vec2Z) -> bool {
    let delta = b.sub(lb);
    let det = Rat::from_integer(det2z(ld, d));
    if det.is_zero() {
        det2zq(ld, &delta).is_zero()
    } else {
        let s = -(det2zq(ld, &delta) / det);
        !s.is_negative()
    }
}

/// Wire form of one node: ray parameter `t >= 0` and multiplicity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireNode {
    pub t: WireRat,
    pub mult: u32,
}

/// Wire form of one ray with its nodes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireRay {
    pub base: [WireRat; 2],
    pub dir: [WireInt; 2],
    pub nodes: Vec<WireNode>,
}

impl WireRay {
    fn base_point(&self) -> Vec2Q {
        Vec2Q::new(self.base[0].0.clone(), self.base[1].0.clone())
    }

    fn direction(&self) -> Vec2Z {
        Vec2Z { x: self.dir[0].0.clone(), y: self.dir[1].0.clone() }
    }
}

/// Grouped wire form of a diagram: the JSON schema
/// `{"rays":[{"base":["p/q","p/q"],"dir":[i,j],"nodes":[{"t":"p/q","mult":m}]}]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramDoc {
    pub rays: Vec<WireRay>,
}

/// Outcome of validation: empty `violations` means valid.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl DiagramDoc {
    /// Checks every structural invariant and lists each violation found.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (i, ray) in self.rays.iter().enumerate() {
            let dir = ray.direction();
            if !dir.is_primitive() {
                violations.push(format!("ray {i}: direction {dir:?} is not primitive"));
            }
            if ray.nodes.is_empty() {
                violations.push(format!("ray {i}: no nodes"));
                continue;
            }
            if !ray.nodes.iter().any(|n| n.t.0.is_zero()) {
                violations.push(format!("ray {i}: base point (t = 0) is not a node"));
            }
            let mut seen: Vec<&Rat> = Vec::new();
            for node in &ray.nodes {
                if node.t.0.is_negative() {
                    violations.push(format!("ray {i}: node at t = {} is off the ray", node.t.0));
                }
                if node.mult == 0 {
                    violations.push(format!("ray {i}: node at t = {} has multiplicity 0", node.t.0));
                }
                if seen.contains(&&node.t.0) {
                    violations.push(format!("ray {i}: duplicate node at t = {}", node.t.0));
                }
                seen.push(&node.t.0);
            }
        }
        for i in 0..self.rays.len() {
            for j in (i + 1)..self.rays.len() {
                let (ri, rj) = (&self.rays[i], &self.rays[j]);
                let (di, dj) = (ri.direction(), rj.direction());
                if !di.is_primitive() || !dj.is_primitive() {
                    continue;
                }
                if rays_intersect(&ri.base_point(), &di, &rj.base_point(), &dj) {
                    violations.push(format!("ray {i} and ray {j} are not disjoint"));
                }
            }
        }
        ValidationReport { violations }
    }

    /// Canonical multiset form; errors on the first validation failure.
    pub fn to_diagram(&self) -> Result<EigenrayDiagram> {
        let report = self.validate();
        if !report.is_valid() {
            return Err(Error::precondition(report.violations.join("; ")));
        }
        let mut elements = Vec::new();
        for ray in &self.rays {
            let base = ray.base_point();
            let dir = ray.direction();
            for node in &ray.nodes {
                let pos = base.add(&dir.to_q().scale(&node.t.0));
                elements.push(SubRay::new(pos, dir.clone(), node.mult));
            }
        }
        EigenrayDiagram::from_elements(elements)
    }
}

/// Canonical diagram: sorted multiset of sub-rays, one per node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenrayDiagram {
    elements: Vec<SubRay>,
}

/// Result of an affine-equivalence search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Equivalence {
    /// A witness map carrying the first diagram onto the second.
    Map(IntegralAffineMap),
    /// Definitively not equivalent.
    NotEquivalent,
    /// The bounded shear search was exhausted without a verdict.
    Indeterminate,
}

impl EigenrayDiagram {
    pub fn empty() -> Self {
        EigenrayDiagram { elements: Vec::new() }
    }

    /// The two-node example: multiplicity-one nodes at `(1,0)` and `(0,1)`
    /// with rays in the `+x` and `+y` directions.
    pub fn five_charts() -> Self {
        EigenrayDiagram::from_elements(vec![
            SubRay::new(
                Vec2Q::new(Rat::from_integer(Int::from(1)), Rat::zero()),
                Vec2Z::new(1, 0),
                1,
            ),
            SubRay::new(
                Vec2Q::new(Rat::zero(), Rat::from_integer(Int::from(1))),
                Vec2Z::new(0, 1),
                1,
            ),
        ])
        .expect("reference diagram is valid")
    }

    /// Builds a diagram from multiset elements, merging duplicate
    /// `(base, dir)` keys by adding multiplicities, and validates the result.
    pub fn from_elements(elements: Vec<SubRay>) -> Result<Self> {
        let mut merged: BTreeMap<(Vec2Z, Vec2Q), u32> = BTreeMap::new();
        for e in elements {
            if !e.dir.is_primitive() {
                return Err(Error::precondition(format!(
                    "direction {:?} is not primitive",
                    e.dir
                )));
            }
            if e.mult == 0 {
                return Err(Error::precondition(format!(
                    "node at {:?} has multiplicity 0",
                    e.base
                )));
            }
            let slot = merged.entry((e.dir, e.base)).or_insert(0);
            *slot = slot.checked_add(e.mult).ok_or_else(|| {
                Error::precondition("multiplicity overflow while merging nodes")
            })?;
        }
        let elements: Vec<SubRay> = merged
            .into_iter()
            .map(|((dir, base), mult)| SubRay { base, dir, mult })
            .collect();
        let diagram = EigenrayDiagram { elements };
        if let Some(v) = diagram.multiset_violation() {
            return Err(Error::precondition(v));
        }
        Ok(diagram)
    }

    /// First violation of the multiset validity rules, if any: transverse
    /// crossings and overlapping opposite rays are forbidden; nested rays in
    /// the same direction are how multi-node rays are represented.
    fn multiset_violation(&self) -> Option<String> {
        let n = self.elements.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (&self.elements[i], &self.elements[j]);
                let det = det2z(&a.dir, &b.dir);
                if det.is_zero() {
                    if a.dir == b.dir {
                        continue; // same or parallel line, same direction: fine
                    }
                    if det2zq(&a.dir, &b.base.sub(&a.base)).is_zero()
                        && !param_along(&a.dir, &a.base, &b.base).is_negative()
                    {
                        return Some(format!(
                            "opposite sub-rays from {:?} and {:?} overlap",
                            a.base, b.base
                        ));
                    }
                } else if rays_intersect(&a.base, &a.dir, &b.base, &b.dir) {
                    return Some(format!(
                        "sub-rays from {:?} and {:?} cross",
                        a.base, b.base
                    ));
                }
            }
        }
        None
    }

    pub fn elements(&self) -> &[SubRay] {
        &self.elements
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// The multiset element whose node sits at `p`, if any (unique when
    /// present, since distinct elements of a valid diagram have distinct
    /// nodes or share a node only with equal directions, which get merged).
    pub fn element_at(&self, p: &Vec2Q) -> Option<&SubRay> {
        self.elements.iter().find(|e| &e.base == p)
    }

    fn expect_element(&self, p: &Vec2Q) -> Result<usize> {
        self.elements
            .iter()
            .position(|e| &e.base == p)
            .ok_or_else(|| Error::precondition(format!("no node at {p:?}")))
    }

    /// Grouped wire form: maximal rays with node parameter lists, rays sorted
    /// lexicographically by `(dir, base)` and nodes by `t`.
    pub fn to_doc(&self) -> DiagramDoc {
        // Group by (direction, line): the line through `base` along `dir` is
        // identified by det2(dir, base), which is constant along it.
        let mut groups: BTreeMap<(Vec2Z, Rat), Vec<&SubRay>> = BTreeMap::new();
        for e in &self.elements {
            let key = (e.dir.clone(), det2zq(&e.dir, &e.base));
            groups.entry(key).or_default().push(e);
        }
        let mut rays = Vec::new();
        for ((dir, _), members) in groups {
            let origin = members[0].base.clone();
            let mut params: Vec<(Rat, &SubRay)> = members
                .iter()
                .map(|e| (param_along(&dir, &origin, &e.base), *e))
                .collect();
            params.sort_by(|a, b| a.0.cmp(&b.0));
            let t_min = params[0].0.clone();
            let base = params[0].1.base.clone();
            let nodes = params
                .iter()
                .map(|(t, e)| WireNode { t: WireRat(t - &t_min), mult: e.mult })
                .collect();
            rays.push(WireRay {
                base: [WireRat(base.x), WireRat(base.y)],
                dir: [WireInt(dir.x), WireInt(dir.y)],
                nodes,
            });
        }
        rays.sort_by(|a, b| {
            (&a.dir[0].0, &a.dir[1].0, &a.base[0].0, &a.base[1].0)
                .cmp(&(&b.dir[0].0, &b.dir[1].0, &b.base[0].0, &b.base[1].0))
        });
        DiagramDoc { rays }
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_doc()).expect("diagram serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: DiagramDoc =
            serde_json::from_str(s).map_err(|e| Error::parse(format!("diagram JSON: {e}")))?;
        doc.to_diagram()
    }

    /// Sum of node multiplicities along the maximal ray with the given base
    /// and direction; errors when no such ray exists in the grouped view.
    pub fn total_multiplicity(&self, base: &Vec2Q, dir: &Vec2Z) -> Result<u32> {
        let doc = self.to_doc();
        for ray in &doc.rays {
            if &ray.base_point() == base && &ray.direction() == dir {
                return Ok(ray.nodes.iter().map(|n| n.mult).sum());
            }
        }
        Err(Error::precondition(format!(
            "no ray with base {base:?} and direction {dir:?}"
        )))
    }

    /// Removes one copy of the multiset element at `node`: multiplicity is
    /// decremented, and the element disappears when it reaches zero.  In the
    /// grouped view this reproduces all four removal cases (drop the ray,
    /// re-base it at the next node, delete an interior node, or decrement).
    pub fn node_removal(&self, node: &Vec2Q) -> Result<EigenrayDiagram> {
        let idx = self.expect_element(node)?;
        let mut elements = self.elements.clone();
        if elements[idx].mult > 1 {
            elements[idx].mult -= 1;
        } else {
            elements.remove(idx);
        }
        Ok(EigenrayDiagram { elements })
    }

    /// Moves the node at `node` to `new_pos` along its own line, merging with
    /// a node already sitting at the target.  The result must again be a
    /// valid diagram.
    pub fn nodal_slide(&self, node: &Vec2Q, new_pos: &Vec2Q) -> Result<EigenrayDiagram> {
        let idx = self.expect_element(node)?;
        let moved = &self.elements[idx];
        if !det2zq(&moved.dir, &new_pos.sub(&moved.base)).is_zero() {
            return Err(Error::precondition(format!(
                "{new_pos:?} is not on the line of the node at {node:?}"
            )));
        }
        let mut elements = self.elements.clone();
        let mut slid = elements.remove(idx);
        slid.base = new_pos.clone();
        elements.push(slid);
        EigenrayDiagram::from_elements(elements)
    }

    /// True iff the node is the only one on its ray and the full line through
    /// it meets no other ray of the diagram.
    pub fn is_mutable(&self, node: &Vec2Q) -> Result<bool> {
        let idx = self.expect_element(node)?;
        let e = &self.elements[idx];
        for (j, other) in self.elements.iter().enumerate() {
            if j == idx {
                continue;
            }
            if line_meets_ray(&e.base, &e.dir, &other.base, &other.dir) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Reverses the mutable ray at `node` and transforms every other element
    /// by the based piecewise shear with direction `dir(node)` and power
    /// `mult(node)`: the half-plane `det2(e, v - node) > 0` is sheared, the
    /// other is fixed.  Each other ray sits wholly in one open half-plane, so
    /// the piecewise map is affine on it.
    pub fn branch_move(&self, node: &Vec2Q) -> Result<EigenrayDiagram> {
        if !self.is_mutable(node)? {
            return Err(Error::precondition(format!("node at {node:?} is not mutable")));
        }
        let idx = self.expect_element(node)?;
        let pivot = self.elements[idx].clone();
        let m = Int::from(pivot.mult);
        let e = &pivot.dir;
        let mut elements = Vec::with_capacity(self.elements.len());
        for (j, other) in self.elements.iter().enumerate() {
            if j == idx {
                elements.push(SubRay::new(pivot.base.clone(), e.neg(), pivot.mult));
                continue;
            }
            let sigma = det2zq(e, &other.base.sub(&pivot.base));
            if sigma.is_positive() {
                let shift = e.to_q().scale(&(sigma * Rat::from_integer(m.clone())));
                let dz = &m * det2z(e, &other.dir);
                let dir = Vec2Z::new(&other.dir.x + &dz * &e.x, &other.dir.y + &dz * &e.y);
                elements.push(SubRay::new(other.base.add(&shift), dir, other.mult));
            } else {
                elements.push(other.clone());
            }
        }
        EigenrayDiagram::from_elements(elements)
    }

    /// A common point of all the full lines containing the rays, when one
    /// exists (origin for the empty diagram, the node for a single ray).
    pub fn is_exact(&self) -> Option<Vec2Q> {
        if self.elements.len() <= 1 {
            return Some(
                self.elements
                    .first()
                    .map(|e| e.base.clone())
                    .unwrap_or_else(Vec2Q::zero),
            );
        }
        let first = &self.elements[0];
        // Look for a line independent from the first one.
        let other = self
            .elements
            .iter()
            .find(|e| !det2z(&first.dir, &e.dir).is_zero());
        let candidate = match other {
            Some(e) => {
                let det = Rat::from_integer(det2z(&first.dir, &e.dir));
                let delta = e.base.sub(&first.base);
                let t = det2q(&delta, &e.dir.to_q()) / det;
                first.base.add(&first.dir.to_q().scale(&t))
            }
            None => first.base.clone(), // all lines parallel: must coincide
        };
        for e in &self.elements {
            if !det2zq(&e.dir, &candidate.sub(&e.base)).is_zero() {
                return None;
            }
        }
        Some(candidate)
    }

    /// One `(direction, flux)` pair per multiset element counted with
    /// multiplicity, flux being `det2(node, dir)`.
    pub fn seed_data(&self) -> Vec<(Vec2Z, Rat)> {
        let mut out = Vec::new();
        for e in &self.elements {
            let flux = det2q(&e.base, &e.dir.to_q());
            for _ in 0..e.mult {
                out.push((e.dir.clone(), flux.clone()));
            }
        }
        out
    }

    /// Image of the diagram under an integral affine map.
    pub fn apply_map(&self, map: &IntegralAffineMap) -> Result<EigenrayDiagram> {
        let elements = self
            .elements
            .iter()
            .map(|e| SubRay::new(map.apply(&e.base), map.apply_vec(&e.dir), e.mult))
            .collect();
        EigenrayDiagram::from_elements(elements)
    }
}

fn mapped_elements(
    elements: &[SubRay],
    linear: &IntegralAffineMap,
    translate: &Vec2Q,
) -> Vec<SubRay> {
    let mut out: Vec<SubRay> = elements
        .iter()
        .map(|e| {
            SubRay::new(
                linear.apply(&e.base).add(translate),
                linear.apply_vec(&e.dir),
                e.mult,
            )
        })
        .collect();
    out.sort_by(|a, b| (&a.dir, &a.base).cmp(&(&b.dir, &b.base)));
    out
}

/// Searches for an integral affine map carrying `d1`'s multiset onto `d2`'s,
/// with the shear search along a shared direction capped at `|k| <= 64`.
pub fn affine_equivalent(d1: &EigenrayDiagram, d2: &EigenrayDiagram) -> Equivalence {
    affine_equivalent_bounded(d1, d2, 64)
}

/// As [`affine_equivalent`] with an explicit shear bound.  When both diagrams
/// are all-parallel the linear part is only determined up to a shear power
/// `k`; exhausting `|k| <= shear_bound` yields `Indeterminate`, not
/// `NotEquivalent`.
pub fn affine_equivalent_bounded(
    d1: &EigenrayDiagram,
    d2: &EigenrayDiagram,
    shear_bound: i64,
) -> Equivalence {
    let e1 = d1.elements();
    let e2 = d2.elements();
    if e1.len() != e2.len() {
        return Equivalence::NotEquivalent;
    }
    let mut m1: Vec<u32> = e1.iter().map(|e| e.mult).collect();
    let mut m2: Vec<u32> = e2.iter().map(|e| e.mult).collect();
    m1.sort_unstable();
    m2.sort_unstable();
    if m1 != m2 {
        return Equivalence::NotEquivalent;
    }
    if e1.is_empty() {
        return Equivalence::Map(IntegralAffineMap::identity());
    }

    let check = |linear: &IntegralAffineMap, translate: &Vec2Q| -> Option<IntegralAffineMap> {
        if mapped_elements(e1, linear, translate) == e2 {
            Some(IntegralAffineMap {
                linear: linear.linear.clone(),
                translate: translate.clone(),
            })
        } else {
            None
        }
    };

    // An independent pair of directions pins the linear part completely.
    let indep = (0..e1.len())
        .flat_map(|i| (0..e1.len()).map(move |j| (i, j)))
        .find(|&(i, j)| i != j && !det2z(&e1[i].dir, &e1[j].dir).is_zero());

    if let Some((i0, i1)) = indep {
        let (u1, u2) = (&e1[i0].dir, &e1[i1].dir);
        let du = det2z(u1, u2);
        for j0 in 0..e2.len() {
            for j1 in 0..e2.len() {
                if j0 == j1 || e2[j0].mult != e1[i0].mult || e2[j1].mult != e1[i1].mult {
                    continue;
                }
                let (v1, v2) = (&e2[j0].dir, &e2[j1].dir);
                // Solve M [u1 u2] = [v1 v2]; integrality requires du | each
                // entry of [v1 v2] adj([u1 u2]).
                let raw = [
                    [&v1.x * &u2.y - &v2.x * &u1.y, &v2.x * &u1.x - &v1.x * &u2.x],
                    [&v1.y * &u2.y - &v2.y * &u1.y, &v2.y * &u1.x - &v1.y * &u2.x],
                ];
                let mut linear = [[Int::zero(), Int::zero()], [Int::zero(), Int::zero()]];
                let mut integral = true;
                'fill: for r in 0..2 {
                    for c in 0..2 {
                        let (q, rem) = num_integer::Integer::div_rem(&raw[r][c], &du);
                        if !rem.is_zero() {
                            integral = false;
                            break 'fill;
                        }
                        linear[r][c] = q;
                    }
                }
                if !integral {
                    continue;
                }
                let linear = match IntegralAffineMap::from_parts(linear, Vec2Q::zero()) {
                    Ok(l) => l,
                    Err(_) => continue,
                };
                let translate = e2[j0].base.sub(&linear.apply(&e1[i0].base));
                if let Some(m) = check(&linear, &translate) {
                    return Equivalence::Map(m);
                }
            }
        }
        return Equivalence::NotEquivalent;
    }

    // All directions in d1 are parallel; so must d2's be.
    if (0..e2.len()).any(|j| !det2z(&e2[0].dir, &e2[j].dir).is_zero()) {
        return Equivalence::NotEquivalent;
    }
    let u = &e1[0].dir;
    let v = &e2[0].dir;
    let cu = lattice_complement(u);
    let cv = lattice_complement(v);
    for eps in [1i64, -1] {
        for delta in [1i64, -1] {
            for k in -shear_bound..=shear_bound {
                // M u = eps v, M cu = k v + delta cv; [u cu] has det 1 so
                // M = [eps v | k v + delta cv] [u cu]^{-1} is integral.
                let img_u = Vec2Z::new(Int::from(eps) * &v.x, Int::from(eps) * &v.y);
                let img_c = Vec2Z::new(
                    Int::from(k) * &v.x + Int::from(delta) * &cv.x,
                    Int::from(k) * &v.y + Int::from(delta) * &cv.y,
                );
                // Inverse of [u cu] (det 1) is [[cu.y, -cu.x], [-u.y, u.x]].
                let linear = [
                    [&img_u.x * &cu.y - &img_c.x * &u.y, -(&img_u.x * &cu.x) + &img_c.x * &u.x],
                    [&img_u.y * &cu.y - &img_c.y * &u.y, -(&img_u.y * &cu.x) + &img_c.y * &u.x],
                ];
                let linear = match IntegralAffineMap::from_parts(linear, Vec2Q::zero()) {
                    Ok(l) => l,
                    Err(_) => continue,
                };
                for anchor in e2 {
                    if anchor.mult != e1[0].mult {
                        continue;
                    }
                    let translate = anchor.base.sub(&linear.apply(&e1[0].base));
                    if let Some(m) = check(&linear, &translate) {
                        return Equivalence::Map(m);
                    }
                }
            }
        }
    }
    Equivalence::Indeterminate
}

/// An integer vector `c` with `det2(u, c) = 1` (u primitive).
fn lattice_complement(u: &Vec2Z) -> Vec2Z {
    let g = num_integer::Integer::extended_gcd(&u.x, &u.y);
    debug_assert!(g.gcd.is_one());
    // g.x * u.x + g.y * u.y = 1; det2(u, (-g.y, g.x)) = u.x g.x + u.y g.y = 1.
    Vec2Z::new(-g.y.clone(), g.x.clone())
}

/// Repairs a weak diagram: pairs of sub-rays that overlap while running in
/// opposite directions along one line are resolved by reversing one of the
/// two (the reversed ray is contained in the other, landing in the nested
/// configuration).  Transverse crossings are not repairable and error.
pub fn normalize_weak(elements: Vec<SubRay>) -> Result<EigenrayDiagram> {
    for e in &elements {
        if !e.dir.is_primitive() {
            return Err(Error::precondition(format!("direction {:?} is not primitive", e.dir)));
        }
        if e.mult == 0 {
            return Err(Error::precondition(format!("node at {:?} has multiplicity 0", e.base)));
        }
    }
    // Transverse crossings disqualify the input outright.
    for i in 0..elements.len() {
        for j in (i + 1)..elements.len() {
            let (a, b) = (&elements[i], &elements[j]);
            if !det2z(&a.dir, &b.dir).is_zero()
                && rays_intersect(&a.base, &a.dir, &b.base, &b.dir)
            {
                return Err(Error::precondition(format!(
                    "sub-rays from {:?} and {:?} cross transversely; not a weak diagram",
                    a.base, b.base
                )));
            }
        }
    }
    let mut elements = elements;
    elements.sort_by(|a, b| (&a.dir, &a.base).cmp(&(&b.dir, &b.base)));
    let cap = 4 * elements.len() * elements.len() + 8;
    for _ in 0..cap {
        let mut flipped = false;
        'scan: for i in 0..elements.len() {
            for j in (i + 1)..elements.len() {
                let (a, b) = (&elements[i], &elements[j]);
                if a.dir != b.dir.neg() || !det2zq(&a.dir, &b.base.sub(&a.base)).is_zero() {
                    continue;
                }
                if param_along(&a.dir, &a.base, &b.base).is_negative() {
                    continue; // disjoint opposite rays
                }
                // Reverse the later element; its reversal is contained in the
                // other ray.
                elements[j].dir = elements[j].dir.neg();
                elements.sort_by(|x, y| (&x.dir, &x.base).cmp(&(&y.dir, &y.base)));
                flipped = true;
                break 'scan;
            }
        }
        if !flipped {
            return EigenrayDiagram::from_elements(elements);
        }
    }
    Err(Error::precondition("weak-diagram normalization did not converge"))
}

/// A point common to the two closed rays, or `None` when they are disjoint.
///
/// For transverse rays the (unique) crossing point is returned; for collinear
/// overlapping rays the witness is the base point of whichever ray starts
/// inside the other.
pub fn ray_intersection(a: &SubRay, b: &SubRay) -> Option<Vec2Q> {
    let delta = b.base.sub(&a.base);
    let det = Rat::from_integer(det2z(&a.dir, &b.dir));
    if !det.is_zero() {
        let t = det2q(&delta, &b.dir.to_q()) / &det;
        let s = -(det2zq(&a.dir, &delta) / &det);
        if t.is_negative() || s.is_negative() {
            return None;
        }
        return Some(a.base.add(&a.dir.to_q().scale(&t)));
    }
    if !det2zq(&a.dir, &delta).is_zero() {
        return None; // parallel, different lines
    }
    let c = param_along(&a.dir, &a.base, &b.base);
    if a.dir == b.dir {
        // Codirected: the later base lies on the earlier ray.
        Some(if c.is_negative() { a.base.clone() } else { b.base.clone() })
    } else if c.is_negative() {
        None // opposite rays pointing away from each other
    } else {
        Some(a.base.clone())
    }
}

/// Disjointness audit of one labelled pair of closed rays.
#[derive(Clone, Debug, Serialize)]
pub struct PairCheck {
    pub first: String,
    pub second: String,
    pub disjoint: bool,
    /// Witness point when the rays meet, as `["x", "y"]` rationals.
    pub intersection: Option<[String; 2]>,
}

/// Eigenray-pair enumeration for the two-node standard diagram.
///
/// For each node the eigenline through it splits into the sub-ray itself and
/// its opposite closed ray.  `direct` audits the four pair choices on the
/// standard diagram; `after_slides` audits the previously blocked opposite
/// pair after each node is slid through the origin to the far side.
#[derive(Clone, Debug, Serialize)]
pub struct FiveChartsReport {
    pub direct: Vec<PairCheck>,
    pub direct_disjoint: usize,
    pub after_slides: Vec<PairCheck>,
    pub additional: usize,
    pub total: usize,
    pub ok: bool,
}

fn pair_check(label_a: &str, ray_a: &SubRay, label_b: &str, ray_b: &SubRay) -> PairCheck {
    let hit = ray_intersection(ray_a, ray_b);
    PairCheck {
        first: label_a.to_string(),
        second: label_b.to_string(),
        disjoint: hit.is_none(),
        intersection: hit.map(|p| [fmt_rat(&p.x), fmt_rat(&p.y)]),
    }
}

/// Enumerate disjoint eigenray pairs on [`EigenrayDiagram::five_charts`].
///
/// Three of the four direct pair choices are disjoint; the double-opposite
/// pair meets at the origin.  Sliding either node through the origin to the
/// opposite side unblocks that pair, giving two further configurations and a
/// tally of five.  `ok` records that exactly this 3 + 2 pattern was found.
pub fn five_charts_report() -> Result<FiveChartsReport> {
    let one = Rat::one();
    let base_x = Vec2Q::new(one.clone(), Rat::zero());
    let base_y = Vec2Q::new(Rat::zero(), one.clone());
    let dir_x = Vec2Z::primitive(Int::one(), Int::zero())?;
    let dir_y = Vec2Z::primitive(Int::zero(), Int::one())?;
    let half = |base: &Vec2Q, dir: &Vec2Z, forward: bool| {
        SubRay::new(base.clone(), if forward { dir.clone() } else { dir.neg() }, 1)
    };

    let x_plus = half(&base_x, &dir_x, true);
    let x_minus = half(&base_x, &dir_x, false);
    let y_plus = half(&base_y, &dir_y, true);
    let y_minus = half(&base_y, &dir_y, false);
    let direct = vec![
        pair_check("x+", &x_plus, "y+", &y_plus),
        pair_check("x-", &x_minus, "y+", &y_plus),
        pair_check("x+", &x_plus, "y-", &y_minus),
        pair_check("x-", &x_minus, "y-", &y_minus),
    ];
    let direct_disjoint = direct.iter().filter(|p| p.disjoint).count();

    let diagram = EigenrayDiagram::five_charts();
    let far_x = Vec2Q::new(-one.clone(), Rat::zero());
    let far_y = Vec2Q::new(Rat::zero(), -one.clone());
    // Slide the x-node through the origin; its opposite ray now points away
    // from the y-node's opposite ray.  Then the same with roles swapped.
    let slid_x = diagram.nodal_slide(&base_x, &far_x)?;
    let slid_y = diagram.nodal_slide(&base_y, &far_y)?;
    debug_assert!(slid_x.elements().iter().any(|e| e.base == far_x));
    debug_assert!(slid_y.elements().iter().any(|e| e.base == far_y));
    let x_prime_minus = half(&far_x, &dir_x, false);
    let y_prime_minus = half(&far_y, &dir_y, false);
    let after_slides = vec![
        pair_check("x'-", &x_prime_minus, "y'-", &y_minus),
        pair_check("x''-", &x_minus, "y''-", &y_prime_minus),
    ];
    let additional = after_slides.iter().filter(|p| p.disjoint).count();

    let total = direct_disjoint + additional;
    Ok(FiveChartsReport {
        ok: direct_disjoint == 3 && additional == 2,
        direct,
        direct_disjoint,
        after_slides,
        additional,
        total,
    })
}
