//! Exact planar integral affine geometry.
//!
//! Building blocks for the diagram calculus:
//!
//! - [`Vec2Q`] — points and rational vectors of the plane;
//! - [`Vec2Z`] — primitive integer directions;
//! - [`IntegralAffineMap`] — `GL(2, Z)`-linear part (determinant ±1) with a
//!   rational translation;
//! - [`PLShear`] — a piecewise-linear shear anchored at a base point: one
//!   closed half-plane is sheared, the other is fixed.
//!
//! Sign convention used everywhere: `det2(u, v) = u.x v.y - u.y v.x`, and a
//! (based) shear with direction `e` and power `k` sends `v` to
//! `v + k * det2(e, v - base) * e` on the half-plane `det2(e, v - base) >= 0`.
//! The dividing line `base + R e` is fixed pointwise.

use crate::error::{Error, Result};
use crate::exact::{Int, Rat};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Point or vector of the rational plane.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vec2Q {
    pub x: Rat,
    pub y: Rat,
}

impl Vec2Q {
    #[inline]
    pub fn new(x: Rat, y: Rat) -> Self {
        Vec2Q { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Vec2Q { x: Rat::zero(), y: Rat::zero() }
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    #[inline]
    pub fn add(&self, o: &Vec2Q) -> Vec2Q {
        Vec2Q::new(&self.x + &o.x, &self.y + &o.y)
    }

    #[inline]
    pub fn sub(&self, o: &Vec2Q) -> Vec2Q {
        Vec2Q::new(&self.x - &o.x, &self.y - &o.y)
    }

    #[inline]
    pub fn scale(&self, k: &Rat) -> Vec2Q {
        Vec2Q::new(&self.x * k, &self.y * k)
    }

    #[inline]
    pub fn dot(&self, o: &Vec2Q) -> Rat {
        &self.x * &o.x + &self.y * &o.y
    }
}

impl fmt::Debug for Vec2Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Integer lattice vector, used for ray directions and characters.
///
/// Directions are required to be primitive (`gcd(|x|, |y|) = 1`); operations
/// that consume a direction check this and error otherwise.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vec2Z {
    pub x: Int,
    pub y: Int,
}

impl Vec2Z {
    #[inline]
    pub fn new(x: impl Into<Int>, y: impl Into<Int>) -> Self {
        Vec2Z { x: x.into(), y: y.into() }
    }

    /// Validated primitive direction.
    pub fn primitive(x: impl Into<Int>, y: impl Into<Int>) -> Result<Self> {
        let v = Vec2Z::new(x, y);
        if !v.is_primitive() {
            return Err(Error::precondition(format!("direction {v:?} is not primitive")));
        }
        Ok(v)
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    pub fn is_primitive(&self) -> bool {
        !self.is_zero() && self.x.gcd(&self.y).is_one()
    }

    #[inline]
    pub fn neg(&self) -> Vec2Z {
        Vec2Z::new(-&self.x, -&self.y)
    }

    #[inline]
    pub fn to_q(&self) -> Vec2Q {
        Vec2Q::new(Rat::from_integer(self.x.clone()), Rat::from_integer(self.y.clone()))
    }
}

impl fmt::Debug for Vec2Z {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// `u.x v.y - u.y v.x` for rational vectors.
#[inline]
pub fn det2q(u: &Vec2Q, v: &Vec2Q) -> Rat {
    &u.x * &v.y - &u.y * &v.x
}

/// `u.x v.y - u.y v.x` for integer vectors.
#[inline]
pub fn det2z(u: &Vec2Z, v: &Vec2Z) -> Int {
    &u.x * &v.y - &u.y * &v.x
}

/// `det2` of an integer direction against a rational vector.
#[inline]
pub fn det2zq(u: &Vec2Z, v: &Vec2Q) -> Rat {
    Rat::from_integer(u.x.clone()) * &v.y - Rat::from_integer(u.y.clone()) * &v.x
}

/// Affine map `p -> L p + t` with `L` an integer matrix of determinant ±1.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntegralAffineMap {
    /// Row-major linear part `[[a, b], [c, d]]`.
    pub linear: [[Int; 2]; 2],
    pub translate: Vec2Q,
}

impl IntegralAffineMap {
    pub fn identity() -> Self {
        IntegralAffineMap {
            linear: [[Int::one(), Int::zero()], [Int::zero(), Int::one()]],
            translate: Vec2Q::zero(),
        }
    }

    /// Validated constructor: the linear part must have determinant ±1.
    pub fn from_parts(linear: [[Int; 2]; 2], translate: Vec2Q) -> Result<Self> {
        let m = IntegralAffineMap { linear, translate };
        let d = m.det();
        if !(d == Int::one() || d == -Int::one()) {
            return Err(Error::precondition(format!(
                "linear part has determinant {d}, expected ±1"
            )));
        }
        Ok(m)
    }

    /// Linear shear `v -> v + k * det2(e, v) * e` for a primitive `e`.
    ///
    /// Its matrix is `I + k * e * (-e.y, e.x)`; it is unipotent: trace 2,
    /// determinant 1, `(M - I)^2 = 0`.
    pub fn linear_shear(e: &Vec2Z, k: impl Into<Int>) -> Result<Self> {
        if !e.is_primitive() {
            return Err(Error::precondition(format!("shear direction {e:?} is not primitive")));
        }
        let k: Int = k.into();
        let (ex, ey) = (&e.x, &e.y);
        let linear = [
            [Int::one() - &k * ex * ey, &k * ex * ex],
            [-(&k * ey * ey), Int::one() + &k * ex * ey],
        ];
        Ok(IntegralAffineMap { linear, translate: Vec2Q::zero() })
    }

    /// Affine shear about `base`: `p -> p + k * det2(e, p - base) * e`.
    ///
    /// Fixes the line `base + R e` pointwise.
    pub fn shear_about(base: &Vec2Q, e: &Vec2Z, k: impl Into<Int>) -> Result<Self> {
        let lin = Self::linear_shear(e, k)?;
        let translate = base.sub(&lin.apply_to_point(base));
        Ok(IntegralAffineMap { linear: lin.linear, translate })
    }

    /// Pure translation.
    pub fn translation(t: Vec2Q) -> Self {
        IntegralAffineMap {
            linear: [[Int::one(), Int::zero()], [Int::zero(), Int::one()]],
            translate: t,
        }
    }

    #[inline]
    pub fn det(&self) -> Int {
        &self.linear[0][0] * &self.linear[1][1] - &self.linear[0][1] * &self.linear[1][0]
    }

    #[inline]
    pub fn trace(&self) -> Int {
        &self.linear[0][0] + &self.linear[1][1]
    }

    /// Linear action only (no translation); for points use [`Self::apply`].
    pub fn apply_vec(&self, v: &Vec2Z) -> Vec2Z {
        Vec2Z::new(
            &self.linear[0][0] * &v.x + &self.linear[0][1] * &v.y,
            &self.linear[1][0] * &v.x + &self.linear[1][1] * &v.y,
        )
    }

    fn apply_to_point(&self, p: &Vec2Q) -> Vec2Q {
        let ax = Rat::from_integer(self.linear[0][0].clone()) * &p.x
            + Rat::from_integer(self.linear[0][1].clone()) * &p.y;
        let ay = Rat::from_integer(self.linear[1][0].clone()) * &p.x
            + Rat::from_integer(self.linear[1][1].clone()) * &p.y;
        Vec2Q::new(ax, ay)
    }

    /// Linear action on a rational direction vector.
    pub fn apply_dir(&self, v: &Vec2Q) -> Vec2Q {
        self.apply_to_point(v)
    }

    /// Full affine action `L p + t`.
    pub fn apply(&self, p: &Vec2Q) -> Vec2Q {
        self.apply_to_point(p).add(&self.translate)
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &IntegralAffineMap) -> IntegralAffineMap {
        let a = &self.linear;
        let b = &other.linear;
        let linear = [
            [
                &a[0][0] * &b[0][0] + &a[0][1] * &b[1][0],
                &a[0][0] * &b[0][1] + &a[0][1] * &b[1][1],
            ],
            [
                &a[1][0] * &b[0][0] + &a[1][1] * &b[1][0],
                &a[1][0] * &b[0][1] + &a[1][1] * &b[1][1],
            ],
        ];
        let translate = self.apply_to_point(&other.translate).add(&self.translate);
        IntegralAffineMap { linear, translate }
    }

    /// Two-sided inverse; exists because the determinant is ±1.
    pub fn inverse(&self) -> IntegralAffineMap {
        let d = self.det();
        // adj / det with det = ±1, so dividing is multiplying by det.
        let linear = [
            [&self.linear[1][1] * &d, -(&self.linear[0][1] * &d)],
            [-(&self.linear[1][0] * &d), &self.linear[0][0] * &d],
        ];
        let inv_lin = IntegralAffineMap { linear, translate: Vec2Q::zero() };
        let translate = inv_lin.apply_to_point(&self.translate);
        IntegralAffineMap {
            linear: inv_lin.linear,
            translate: Vec2Q::new(-translate.x, -translate.y),
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }
}

/// Piecewise-linear shear: direction `dir` (primitive), positive integer
/// multiplicity, anchored at `base`.
///
/// Applies `p -> p + mult * det2(dir, p - base) * dir` on the closed
/// half-plane `det2(dir, p - base) >= 0` and the identity elsewhere.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PLShear {
    pub base: Vec2Q,
    pub dir: Vec2Z,
    pub mult: u32,
}

impl PLShear {
    pub fn new(base: Vec2Q, dir: Vec2Z, mult: u32) -> Result<Self> {
        if !dir.is_primitive() {
            return Err(Error::precondition(format!("shear direction {dir:?} is not primitive")));
        }
        if mult == 0 {
            return Err(Error::precondition("shear multiplicity must be positive"));
        }
        Ok(PLShear { base, dir, mult })
    }

    /// Signed offset of `p` from the dividing line, `det2(dir, p - base)`.
    pub fn side(&self, p: &Vec2Q) -> Rat {
        det2zq(&self.dir, &p.sub(&self.base))
    }

    /// The piecewise map itself.
    pub fn apply(&self, p: &Vec2Q) -> Vec2Q {
        let sigma = self.side(p);
        if sigma.is_negative() {
            p.clone()
        } else {
            let k = sigma * Rat::from_integer(Int::from(self.mult));
            p.add(&self.dir.to_q().scale(&k))
        }
    }

    /// The globally affine shear with power `sign * mult` about the same line.
    pub fn global(&self, sign: i64) -> IntegralAffineMap {
        let k = Int::from(sign) * Int::from(self.mult);
        IntegralAffineMap::shear_about(&self.base, &self.dir, k)
            .expect("PLShear invariants imply a valid shear")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, rat_int};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(x: i64, y: i64) -> Vec2Q {
        Vec2Q::new(rat_int(x), rat_int(y))
    }

    #[test]
    fn det2_basics() {
        assert_eq!(det2z(&Vec2Z::new(1, 0), &Vec2Z::new(0, 1)), Int::one());
        assert_eq!(det2z(&Vec2Z::new(2, 3), &Vec2Z::new(4, 6)), Int::zero());
        assert_eq!(det2q(&q(1, 2), &q(3, 4)), rat_int(-2));
    }

    #[test]
    fn pl_shear_moves_one_side_only() {
        let s = PLShear::new(q(0, 0), Vec2Z::new(1, 0), 2).unwrap();
        // det2((1,0), (1,1)) = 1 >= 0: sheared by 2*1*(1,0).
        assert_eq!(s.apply(&q(1, 1)), q(3, 1));
        // Other side fixed.
        assert_eq!(s.apply(&q(1, -1)), q(1, -1));
        // Dividing line fixed pointwise.
        for t in -4..=4 {
            let p = Vec2Q::new(rat(t, 3), rat_int(0));
            assert_eq!(s.apply(&p), p);
        }
    }

    #[test]
    fn pl_shear_rejects_bad_input() {
        assert!(PLShear::new(q(0, 0), Vec2Z::new(2, 4), 1).is_err());
        assert!(PLShear::new(q(0, 0), Vec2Z::new(0, 0), 1).is_err());
        assert!(PLShear::new(q(0, 0), Vec2Z::new(1, 0), 0).is_err());
    }

    #[test]
    fn linear_shear_convention() {
        // v -> v + k * det2(e, v) * e throughout this crate.
        let m = IntegralAffineMap::linear_shear(&Vec2Z::new(1, 0), -1).unwrap();
        assert_eq!(m.apply(&q(0, 1)), q(-1, 1));
        let m = IntegralAffineMap::linear_shear(&Vec2Z::new(0, 1), 2).unwrap();
        assert_eq!(m.apply(&q(1, 0)), q(1, -2));
    }

    #[test]
    fn linear_shear_is_unipotent() {
        let dirs = [(1i64, 0i64), (0, 1), (1, 1), (2, -1), (-3, 5)];
        for (x, y) in dirs {
            for k in -4i64..=4 {
                let m = IntegralAffineMap::linear_shear(&Vec2Z::new(x, y), k).unwrap();
                assert_eq!(m.trace(), Int::from(2));
                assert_eq!(m.det(), Int::one());
                // (M - I)^2 = 0.
                let id = IntegralAffineMap::identity();
                let n = [
                    [&m.linear[0][0] - &id.linear[0][0], m.linear[0][1].clone()],
                    [m.linear[1][0].clone(), &m.linear[1][1] - &id.linear[1][1]],
                ];
                for i in 0..2 {
                    for j in 0..2 {
                        let v = &n[i][0] * &n[0][j] + &n[i][1] * &n[1][j];
                        assert!(v.is_zero());
                    }
                }
            }
        }
    }

    #[test]
    fn linear_shear_rejects_non_primitive() {
        assert!(IntegralAffineMap::linear_shear(&Vec2Z::new(2, 4), 1).is_err());
        assert!(IntegralAffineMap::linear_shear(&Vec2Z::new(0, 0), 1).is_err());
    }

    #[test]
    fn shear_about_fixes_its_line() {
        let base = Vec2Q::new(rat(3, 2), rat(-1, 4));
        let e = Vec2Z::new(2, 1);
        let m = IntegralAffineMap::shear_about(&base, &e, 3).unwrap();
        for t in -3..=3 {
            let p = base.add(&e.to_q().scale(&rat(t, 2)));
            assert_eq!(m.apply(&p), p);
        }
        // Off the line it agrees with the based formula.
        let p = q(0, 5);
        let sigma = det2zq(&e, &p.sub(&base));
        let expect = p.add(&e.to_q().scale(&(sigma * rat_int(3))));
        assert_eq!(m.apply(&p), expect);
    }

    fn random_map(rng: &mut ChaCha8Rng) -> IntegralAffineMap {
        let dirs = [(1i64, 0i64), (0, 1), (1, 1), (1, -1), (2, 1), (3, -2)];
        let mut m = IntegralAffineMap::translation(Vec2Q::new(
            rat(rng.gen_range(-8..8), rng.gen_range(1..5)),
            rat(rng.gen_range(-8..8), rng.gen_range(1..5)),
        ));
        for _ in 0..3 {
            let (x, y) = dirs[rng.gen_range(0..dirs.len())];
            let k = rng.gen_range(-3i64..=3);
            m = IntegralAffineMap::linear_shear(&Vec2Z::new(x, y), k).unwrap().compose(&m);
        }
        // Mix in an orientation flip half of the time.
        if rng.gen_bool(0.5) {
            let flip = IntegralAffineMap::from_parts(
                [[Int::zero(), Int::one()], [Int::one(), Int::zero()]],
                Vec2Q::zero(),
            )
            .unwrap();
            m = flip.compose(&m);
        }
        m
    }

    #[test]
    fn compose_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let a = random_map(&mut rng);
            let b = random_map(&mut rng);
            let c = random_map(&mut rng);
            assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
        }
    }

    #[test]
    fn inverse_is_two_sided() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let a = random_map(&mut rng);
            let inv = a.inverse();
            assert!(a.compose(&inv).is_identity());
            assert!(inv.compose(&a).is_identity());
        }
    }

    #[test]
    fn from_parts_requires_unimodular() {
        let bad = [[Int::from(2), Int::zero()], [Int::zero(), Int::one()]];
        assert!(IntegralAffineMap::from_parts(bad, Vec2Q::zero()).is_err());
    }

    #[test]
    fn pl_global_extends_the_half_plane_formula() {
        let s = PLShear::new(q(1, 0), Vec2Z::new(1, 0), 2).unwrap();
        let g = s.global(1);
        // On the sheared side the two agree.
        assert_eq!(g.apply(&q(0, 1)), s.apply(&q(0, 1)));
        // On the fixed side the global map keeps shearing.
        assert_eq!(g.apply(&q(0, -1)), q(-2, -1));
        assert_eq!(s.apply(&q(0, -1)), q(0, -1));
    }
}
