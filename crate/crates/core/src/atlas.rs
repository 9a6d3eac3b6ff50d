//! The nodal integral affine plane of a diagram, as a chart atlas with branch
//! cuts along the sub-rays.
//!
//! Every multiset element of the diagram contributes one *cut*: the based
//! piecewise shear anchored at its node.  Crossing conventions, fixed once
//! here and used everywhere:
//!
//! - a path crossing cut `(b, e, m)` at a point with crossing direction `w`
//!   is *positive* when `det2(e, w) > 0`;
//! - a positive crossing refracts moving directions by
//!   `u -> u - m det2(e, u) e` (negative crossings by the inverse), so the
//!   transverse rate `det2(e, u)` is invariant;
//! - the developing map accumulates the inverse factors: after a positive
//!   crossing the developed frame composes on the right with the based shear
//!   `v -> v + m det2(e, v - b) e`, which straightens the traced path exactly.
//!
//! [`ChartAtlas::holonomy`] composes those based factors along a loop;
//! [`ChartAtlas::holonomy_reference`] recomputes it by stepping from event to
//! event and must agree bit for bit.  [`ChartAtlas::trace_geodesic`] follows a
//! straight line through the cuts under a total affine-parameter budget, and
//! [`ChartAtlas::gauss_bonnet_check`] verifies on the developed picture that a
//! traced geodesic meets an eigenray line at most once.

use crate::affine::{det2q, det2zq, IntegralAffineMap, PLShear, Vec2Q};
use crate::diagram::{param_along, EigenrayDiagram, SubRay};
use crate::error::{Error, Result};
use crate::exact::{Int, Rat, WireRat};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Safety valve against event storms; the budget is the real limit.
const MAX_CROSSINGS: usize = 100_000;

/// A diagram together with one cut per multiset element.
#[derive(Clone, Debug)]
pub struct ChartAtlas {
    diagram: EigenrayDiagram,
    cuts: Vec<PLShear>,
}

/// Closed rational polygon used as a holonomy loop.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    pub vertices: Vec<Vec2Q>,
}

/// One straight piece of a traced geodesic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub start: Vec2Q,
    pub dir: Vec2Q,
    pub length: Rat,
}

impl Segment {
    pub fn end(&self) -> Vec2Q {
        self.start.add(&self.dir.scale(&self.length))
    }
}

/// A transverse passage through a cut.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Crossing {
    pub cut: usize,
    pub point: Vec2Q,
}

/// Why tracing stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeodesicStatus {
    ExtendedToBudget,
    ConvergedToEigenrayPoint,
    HitNode,
}

/// Chart-by-chart record of a traced affine geodesic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeodesicPath {
    pub segments: Vec<Segment>,
    pub crossings: Vec<Crossing>,
    pub status: GeodesicStatus,
}

#[derive(Serialize, Deserialize)]
struct WireSegment {
    start: [WireRat; 2],
    dir: [WireRat; 2],
    length: WireRat,
}

#[derive(Serialize, Deserialize)]
struct WireCrossing {
    cut: usize,
    point: [WireRat; 2],
}

#[derive(Serialize, Deserialize)]
struct WirePath {
    segments: Vec<WireSegment>,
    crossings: Vec<WireCrossing>,
    status: GeodesicStatus,
}

fn wire_pt(p: &Vec2Q) -> [WireRat; 2] {
    [WireRat(p.x.clone()), WireRat(p.y.clone())]
}

fn unwire_pt(p: &[WireRat; 2]) -> Vec2Q {
    Vec2Q::new(p[0].0.clone(), p[1].0.clone())
}

impl GeodesicPath {
    pub fn to_json_string(&self) -> String {
        let wire = WirePath {
            segments: self
                .segments
                .iter()
                .map(|s| WireSegment {
                    start: wire_pt(&s.start),
                    dir: wire_pt(&s.dir),
                    length: WireRat(s.length.clone()),
                })
                .collect(),
            crossings: self
                .crossings
                .iter()
                .map(|c| WireCrossing { cut: c.cut, point: wire_pt(&c.point) })
                .collect(),
            status: self.status,
        };
        let mut s = serde_json::to_string_pretty(&wire).expect("path serializes");
        s.push('\n');
        s
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let wire: WirePath =
            serde_json::from_str(s).map_err(|e| Error::parse(format!("geodesic JSON: {e}")))?;
        Ok(GeodesicPath {
            segments: wire
                .segments
                .iter()
                .map(|s| Segment {
                    start: unwire_pt(&s.start),
                    dir: unwire_pt(&s.dir),
                    length: s.length.0.clone(),
                })
                .collect(),
            crossings: wire
                .crossings
                .iter()
                .map(|c| Crossing { cut: c.cut, point: unwire_pt(&c.point) })
                .collect(),
            status: wire.status,
        })
    }

    /// Total affine parameter actually traced.
    pub fn total_length(&self) -> Rat {
        self.segments.iter().map(|s| s.length.clone()).sum()
    }
}

/// Verdict of the developed no-double-hit verification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussBonnetReport {
    /// The developed geodesic is exactly one straight parameterized line.
    pub developed_straight: bool,
    /// Transverse meetings with the node's eigenray line.
    pub transverse_meetings: usize,
    /// Meetings where the geodesic runs along the eigenray line (flagged,
    /// never counted as crossings).
    pub tangential_meetings: usize,
    /// At most one transverse meeting over the whole trace.
    pub no_double_hit: bool,
    /// Turning-angle sum at the first meeting (radians); zero when straight.
    pub alpha_sum: f64,
    pub passes: bool,
}

#[derive(Clone)]
enum Event {
    /// Transverse passage through the interior of a cut.
    Cross(usize),
    /// Transverse passage through a node.
    HitNode,
    /// Motion along a cut line reaching the node.
    Tangent,
}

impl ChartAtlas {
    pub fn new(diagram: EigenrayDiagram) -> Self {
        let cuts = diagram
            .elements()
            .iter()
            .map(|e| {
                PLShear::new(e.base.clone(), e.dir.clone(), e.mult)
                    .expect("diagram elements satisfy the shear invariants")
            })
            .collect();
        ChartAtlas { diagram, cuts }
    }

    pub fn diagram(&self) -> &EigenrayDiagram {
        &self.diagram
    }

    /// Cuts in canonical element order; indices are the cut ids used in
    /// crossings.
    pub fn cuts(&self) -> &[PLShear] {
        &self.cuts
    }

    /// The two rays from the node in the holonomy-fixed directions `±dir`.
    pub fn eigen_directions(&self, node: &Vec2Q) -> Result<(SubRay, SubRay)> {
        let e = self
            .diagram
            .element_at(node)
            .ok_or_else(|| Error::precondition(format!("no node at {node:?}")))?;
        Ok((
            SubRay::new(e.base.clone(), e.dir.clone(), e.mult),
            SubRay::new(e.base.clone(), e.dir.neg(), e.mult),
        ))
    }

    /// The based affine factor contributed to holonomy/developing by crossing
    /// `cut` with sign `sigma`.
    fn develop_factor(&self, cut: usize, sigma: i64) -> IntegralAffineMap {
        let c = &self.cuts[cut];
        let k = Int::from(sigma) * Int::from(c.mult);
        IntegralAffineMap::shear_about(&c.base, &c.dir, k).expect("cut direction is primitive")
    }

    /// Refracts a moving direction through `cut` with crossing sign `sigma`:
    /// the inverse of the develop factor's linear part.
    fn refract(&self, cut: usize, sigma: i64, u: &Vec2Q) -> Vec2Q {
        let c = &self.cuts[cut];
        let rate = det2zq(&c.dir, u);
        let k = Rat::from_integer(Int::from(-sigma) * Int::from(c.mult));
        u.add(&c.dir.to_q().scale(&(k * rate)))
    }

    fn is_on_cut(&self, p: &Vec2Q) -> Option<usize> {
        for (i, c) in self.cuts.iter().enumerate() {
            if c.side(p).is_zero() && !param_along(&c.dir, &c.base, p).is_negative() {
                return Some(i);
            }
        }
        None
    }

    /// Validates one open edge for holonomy purposes and returns its cut
    /// crossings as `(t, cut, sigma)` sorted by `(t, cut)`.  Errors when the
    /// edge passes through a node, has an endpoint on a cut, runs along a
    /// cut, or is degenerate.
    fn edge_crossings(&self, a: &Vec2Q, w: &Vec2Q) -> Result<Vec<(Rat, usize, i64)>> {
        if w.is_zero() {
            return Err(Error::precondition("degenerate zero-length edge"));
        }
        let one = Rat::from_integer(Int::from(1));
        let mut out = Vec::new();
        for (i, c) in self.cuts.iter().enumerate() {
            let rate = det2zq(&c.dir, w);
            let off = c.side(a);
            if rate.is_zero() {
                if off.is_zero() {
                    // Collinear with the cut line: forbidden when any part of
                    // the closed edge meets the closed ray.
                    let ca = param_along(&c.dir, &c.base, a);
                    let cb = param_along(&c.dir, &c.base, &a.add(w));
                    if !ca.max(cb).is_negative() {
                        return Err(Error::precondition(format!("edge runs along cut {i}")));
                    }
                }
                continue;
            }
            let t = -(off / &rate);
            if t.is_negative() || t > one {
                continue;
            }
            let p = a.add(&w.scale(&t));
            let s = param_along(&c.dir, &c.base, &p);
            if s.is_negative() {
                continue;
            }
            if s.is_zero() {
                return Err(Error::precondition(format!(
                    "edge passes through the node at {:?}",
                    c.base
                )));
            }
            if t.is_zero() || t == one {
                return Err(Error::precondition(format!("vertex lies on cut {i}")));
            }
            let sigma = if rate.is_positive() { 1 } else { -1 };
            out.push((t, i, sigma));
        }
        out.sort_by(|x, y| (&x.0, x.1).cmp(&(&y.0, y.1)));
        Ok(out)
    }

    /// Developing map along a piecewise-linear path given by its vertices:
    /// the composition of the based crossing factors in traversal order.
    /// Functorial under concatenation; equals [`Self::holonomy`] on loops.
    pub fn develop(&self, path: &[Vec2Q]) -> Result<IntegralAffineMap> {
        let mut acc = IntegralAffineMap::identity();
        for pair in path.windows(2) {
            let w = pair[1].sub(&pair[0]);
            for (_, cut, sigma) in self.edge_crossings(&pair[0], &w)? {
                acc = acc.compose(&self.develop_factor(cut, sigma));
            }
        }
        Ok(acc)
    }

    fn closed_path(l: &Loop) -> Vec<Vec2Q> {
        let mut path = l.vertices.clone();
        path.push(l.vertices[0].clone());
        path
    }

    /// Holonomy around a closed loop: [`Self::develop`] along the closed-up
    /// vertex cycle.
    pub fn holonomy(&self, l: &Loop) -> Result<IntegralAffineMap> {
        if l.vertices.is_empty() {
            return Ok(IntegralAffineMap::identity());
        }
        self.develop(&Self::closed_path(l))
    }

    /// Independent recomputation of [`Self::holonomy`] that steps from one
    /// nearest event to the next instead of batch-collecting crossings per
    /// edge; must agree bit for bit with the fast path.
    pub fn holonomy_reference(&self, l: &Loop) -> Result<IntegralAffineMap> {
        if l.vertices.is_empty() {
            return Ok(IntegralAffineMap::identity());
        }
        let path = Self::closed_path(l);
        let one = Rat::from_integer(Int::from(1));
        let mut acc = IntegralAffineMap::identity();
        for pair in path.windows(2) {
            let a = &pair[0];
            let w = pair[1].sub(a);
            if w.is_zero() {
                return Err(Error::precondition("degenerate zero-length edge"));
            }
            // Validation sweep, separate from the crossing walk below.
            for (i, c) in self.cuts.iter().enumerate() {
                let rate = det2zq(&c.dir, &w);
                let off = c.side(a);
                if rate.is_zero() {
                    if off.is_zero() {
                        let ca = param_along(&c.dir, &c.base, a);
                        let cb = param_along(&c.dir, &c.base, &pair[1]);
                        if !ca.max(cb).is_negative() {
                            return Err(Error::precondition(format!("edge runs along cut {i}")));
                        }
                    }
                    continue;
                }
                let t = -(off / &rate);
                if t.is_negative() || t > one {
                    continue;
                }
                let p = a.add(&w.scale(&t));
                let s = param_along(&c.dir, &c.base, &p);
                if s.is_negative() {
                    continue;
                }
                if s.is_zero() {
                    return Err(Error::precondition(format!(
                        "edge passes through the node at {:?}",
                        c.base
                    )));
                }
                if t.is_zero() || t == one {
                    return Err(Error::precondition(format!("vertex lies on cut {i}")));
                }
            }
            // Event walk: repeatedly take the earliest unconsumed crossing.
            let mut cur = Rat::zero();
            let mut consumed_at_cur: Vec<usize> = Vec::new();
            loop {
                let mut next: Option<(Rat, usize, i64)> = None;
                for (i, c) in self.cuts.iter().enumerate() {
                    let rate = det2zq(&c.dir, &w);
                    if rate.is_zero() {
                        continue;
                    }
                    let t = -(c.side(a) / &rate);
                    if t < cur
                        || t > one
                        || !t.is_positive()
                        || (t == cur && consumed_at_cur.contains(&i))
                    {
                        continue;
                    }
                    let p = a.add(&w.scale(&t));
                    if param_along(&c.dir, &c.base, &p).is_negative() {
                        continue;
                    }
                    let sigma = if rate.is_positive() { 1 } else { -1 };
                    let cand = (t, i, sigma);
                    next = match next {
                        None => Some(cand),
                        Some(best) => {
                            if (&cand.0, cand.1) < (&best.0, best.1) {
                                Some(cand)
                            } else {
                                Some(best)
                            }
                        }
                    };
                }
                match next {
                    None => break,
                    Some((t, cut, sigma)) => {
                        acc = acc.compose(&self.develop_factor(cut, sigma));
                        if t == cur {
                            consumed_at_cur.push(cut);
                        } else {
                            cur = t;
                            consumed_at_cur = vec![cut];
                        }
                    }
                }
            }
        }
        Ok(acc)
    }

    /// Traces the affine geodesic from `start` with direction `dir` for a
    /// total affine parameter `budget`, refracting at each transverse cut
    /// crossing and stopping early on node contact.
    pub fn trace_geodesic(&self, start: &Vec2Q, dir: &Vec2Q, budget: &Rat) -> Result<GeodesicPath> {
        if dir.is_zero() {
            return Err(Error::precondition("geodesic direction is zero"));
        }
        if !budget.is_positive() {
            return Err(Error::precondition("budget must be positive"));
        }
        if let Some(i) = self.is_on_cut(start) {
            return Err(Error::precondition(format!("start point lies on cut {i}")));
        }
        let mut p = start.clone();
        let mut u = dir.clone();
        let mut remaining = budget.clone();
        let mut segments = Vec::new();
        let mut crossings = Vec::new();
        loop {
            // Earliest event strictly ahead of the current point.  Node
            // contact dominates a same-parameter cut passage (they share the
            // point); among simultaneous crossings the smallest id leads.
            let mut best: Option<(Rat, Event)> = None;
            let consider = |t: Rat, ev: Event, best: &mut Option<(Rat, Event)>| {
                let replace = match best {
                    None => true,
                    Some((bt, bev)) => {
                        t < *bt
                            || (t == *bt
                                && match (&ev, bev) {
                                    (Event::Cross(a), Event::Cross(b)) => a < b,
                                    (Event::Cross(_), _) => false,
                                    (_, Event::Cross(_)) => true,
                                    _ => false,
                                })
                    }
                };
                if replace {
                    *best = Some((t, ev));
                }
            };
            for (i, c) in self.cuts.iter().enumerate() {
                let rate = det2zq(&c.dir, &u);
                let off = c.side(&p);
                if rate.is_zero() {
                    if off.is_zero() {
                        // Moving along the cut line: the node is met first.
                        let kappa = if !c.dir.x.is_zero() {
                            &u.x / Rat::from_integer(c.dir.x.clone())
                        } else {
                            &u.y / Rat::from_integer(c.dir.y.clone())
                        };
                        let cparam = param_along(&c.dir, &c.base, &p);
                        let t = -(cparam / kappa);
                        if t.is_positive() {
                            consider(t, Event::Tangent, &mut best);
                        }
                    }
                    continue;
                }
                let t = -(off / &rate);
                if !t.is_positive() {
                    continue;
                }
                let q = p.add(&u.scale(&t));
                let s = param_along(&c.dir, &c.base, &q);
                if s.is_negative() {
                    continue;
                }
                if s.is_zero() {
                    consider(t, Event::HitNode, &mut best);
                } else {
                    consider(t, Event::Cross(i), &mut best);
                }
            }
            match best {
                Some((t, ev)) if t <= remaining => {
                    let q = p.add(&u.scale(&t));
                    segments.push(Segment { start: p.clone(), dir: u.clone(), length: t.clone() });
                    match ev {
                        Event::HitNode => {
                            return Ok(GeodesicPath {
                                segments,
                                crossings,
                                status: GeodesicStatus::HitNode,
                            });
                        }
                        Event::Tangent => {
                            return Ok(GeodesicPath {
                                segments,
                                crossings,
                                status: GeodesicStatus::ConvergedToEigenrayPoint,
                            });
                        }
                        Event::Cross(first) => {
                            // Apply every cut passing through q transversely;
                            // nested cuts share the line, so their shears
                            // commute and ids ascend deterministically.
                            for (i, c) in self.cuts.iter().enumerate() {
                                if i < first {
                                    continue;
                                }
                                let rate = det2zq(&c.dir, &u);
                                if rate.is_zero() || !c.side(&q).is_zero() {
                                    continue;
                                }
                                if !param_along(&c.dir, &c.base, &q).is_positive() {
                                    continue;
                                }
                                let sigma = if rate.is_positive() { 1 } else { -1 };
                                crossings.push(Crossing { cut: i, point: q.clone() });
                                u = self.refract(i, sigma, &u);
                                if crossings.len() > MAX_CROSSINGS {
                                    return Err(Error::precondition(
                                        "crossing limit exceeded while tracing",
                                    ));
                                }
                            }
                            remaining -= &t;
                            p = q;
                            if remaining.is_zero() {
                                return Ok(GeodesicPath {
                                    segments,
                                    crossings,
                                    status: GeodesicStatus::ExtendedToBudget,
                                });
                            }
                        }
                    }
                }
                _ => {
                    segments.push(Segment {
                        start: p.clone(),
                        dir: u.clone(),
                        length: remaining.clone(),
                    });
                    return Ok(GeodesicPath {
                        segments,
                        crossings,
                        status: GeodesicStatus::ExtendedToBudget,
                    });
                }
            }
        }
    }

    /// Developed frame of each segment: `frames[j]` maps segment `j` into the
    /// starting chart.  Crossings are grouped by the junction they occur at;
    /// the sign of each factor comes from the incoming segment's direction,
    /// which nested same-line cuts leave invariant.
    fn segment_frames(&self, path: &GeodesicPath) -> Vec<IntegralAffineMap> {
        let mut frames = Vec::with_capacity(path.segments.len());
        let mut acc = IntegralAffineMap::identity();
        let mut ci = 0usize;
        for seg in &path.segments {
            frames.push(acc.clone());
            let junction = seg.end();
            while ci < path.crossings.len() && path.crossings[ci].point == junction {
                let cut = path.crossings[ci].cut;
                let rate = det2zq(&self.cuts[cut].dir, &seg.dir);
                let sigma = if rate.is_positive() { 1 } else { -1 };
                acc = acc.compose(&self.develop_factor(cut, sigma));
                ci += 1;
            }
        }
        frames
    }

    /// Straightness of the developed path, exactly: every developed direction
    /// equals the initial one and developed positions chain continuously.
    fn developed_straight(&self, path: &GeodesicPath, frames: &[IntegralAffineMap]) -> bool {
        if path.segments.is_empty() {
            return true;
        }
        let u0 = &path.segments[0].dir;
        let mut expected = path.segments[0].start.clone();
        for (j, seg) in path.segments.iter().enumerate() {
            let f = &frames[j];
            if &f.apply_dir(&seg.dir) != u0 {
                return false;
            }
            if f.apply(&seg.start) != expected {
                return false;
            }
            expected = expected.add(&u0.scale(&seg.length));
        }
        true
    }

    /// Verifies, on the developed picture, that the traced geodesic meets the
    /// eigenray line of `node` at most once transversely, flags tangential
    /// meetings, and reports the turning-angle sum at the first meeting.
    pub fn gauss_bonnet_check(
        &self,
        node: &Vec2Q,
        path: &GeodesicPath,
    ) -> Result<GaussBonnetReport> {
        let element = self
            .diagram
            .element_at(node)
            .ok_or_else(|| Error::precondition(format!("no node at {node:?}")))?
            .clone();
        let frames = self.segment_frames(path);
        let developed_straight = self.developed_straight(path, &frames);
        let e = &element.dir;
        let b = &element.base;

        let ang = |a: &Vec2Q, bv: &Vec2Q| -> f64 {
            let d = det2q(a, bv).to_f64().unwrap_or(f64::NAN);
            let dot = a.dot(bv).to_f64().unwrap_or(f64::NAN);
            d.atan2(dot)
        };

        let mut meeting_params: Vec<Rat> = Vec::new();
        let mut tangential = 0usize;
        let mut alpha_sum = 0.0f64;
        let mut first_meeting_done = false;
        let mut offset = Rat::zero();
        for (j, seg) in path.segments.iter().enumerate() {
            let rate = det2zq(e, &seg.dir);
            let off = det2zq(e, &seg.start.sub(b));
            if rate.is_zero() {
                if off.is_zero() {
                    tangential += 1;
                }
            } else {
                let t = -(off / &rate);
                if !t.is_negative() && t <= seg.length {
                    let at_junction = t == seg.length && j + 1 < path.segments.len();
                    let global = &offset + &t;
                    if !meeting_params.contains(&global) {
                        meeting_params.push(global);
                        if !first_meeting_done {
                            first_meeting_done = true;
                            // Signed turning angles against the developed
                            // eigenray direction; the incoming and outgoing
                            // developed directions agree exactly when the
                            // developed path is straight, so the sum vanishes.
                            let incoming = frames[j].apply_dir(&seg.dir);
                            let outgoing = if at_junction {
                                frames[j + 1].apply_dir(&path.segments[j + 1].dir)
                            } else {
                                incoming.clone()
                            };
                            let e_dev = frames[j].apply_dir(&e.to_q());
                            alpha_sum = ang(&incoming, &e_dev) + ang(&e_dev, &outgoing);
                        }
                    }
                }
            }
            offset += &seg.length;
        }
        let transverse_meetings = meeting_params.len();
        let no_double_hit = transverse_meetings <= 1;
        let passes = developed_straight && no_double_hit && alpha_sum.abs() < 1e-9;
        Ok(GaussBonnetReport {
            developed_straight,
            transverse_meetings,
            tangential_meetings: tangential,
            no_double_hit,
            alpha_sum,
            passes,
        })
    }
}
