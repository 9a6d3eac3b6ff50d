//! Finite formal sums `Σ c_i T^{e_i}` with rational exponents and rational
//! coefficients — the computational carrier for both the effective series
//! ring (exponents ≥ 0) and its Laurent relatives.
//!
//! Elements are kept canonical: exponents strictly increasing, coefficients
//! nonzero, the empty sum is zero with valuation +∞.  Effectiveness
//! (all exponents ≥ 0) is a queryable property rather than an invariant so
//! the same type can serve valuation-algebra coefficients.

use crate::exact::{fmt_rat, parse_rat, Rat};
use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// A finite formal sum of monomials `c T^e`, canonically normalized.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NovikovElement {
    terms: Vec<(Rat, Rat)>,
}

impl NovikovElement {
    pub fn zero() -> Self {
        NovikovElement { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rat::from_integer(1.into()))
    }

    /// The constant `c` (a valuation-0 monomial unless `c = 0`).
    pub fn constant(c: Rat) -> Self {
        Self::monomial(Rat::zero(), c)
    }

    /// `c T^e`; the zero coefficient collapses to 0.
    pub fn monomial(exp: Rat, coeff: Rat) -> Self {
        if coeff.is_zero() {
            Self::zero()
        } else {
            NovikovElement { terms: vec![(exp, coeff)] }
        }
    }

    /// Normalizing constructor: sorts, merges equal exponents, drops zeros.
    pub fn from_terms(terms: impl IntoIterator<Item = (Rat, Rat)>) -> Self {
        let mut v: Vec<(Rat, Rat)> = terms.into_iter().collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Rat, Rat)> = Vec::with_capacity(v.len());
        for (e, c) in v {
            match out.last_mut() {
                Some((le, lc)) if *le == e => *lc += c,
                _ => out.push((e, c)),
            }
            if let Some((_, lc)) = out.last() {
                if lc.is_zero() {
                    out.pop();
                }
            }
        }
        NovikovElement { terms: out }
    }

    pub fn terms(&self) -> &[(Rat, Rat)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Least exponent; `None` encodes +∞ (the zero element).
    pub fn valuation(&self) -> Option<Rat> {
        self.terms.first().map(|(e, _)| e.clone())
    }

    /// All exponents nonnegative (membership in the effective subring).
    pub fn is_effective(&self) -> bool {
        self.terms.iter().all(|(e, _)| !e.is_negative())
    }

    /// Valuation zero and effective: invertible in the completed effective
    /// ring (the inverse is an infinite series and is never materialized).
    pub fn is_unit(&self) -> bool {
        match self.valuation() {
            Some(v) => v.is_zero() && self.is_effective(),
            None => false,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.terms.iter().chain(other.terms.iter()).cloned())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        NovikovElement {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut prods = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                prods.push((e1 + e2, c1 * c2));
            }
        }
        Self::from_terms(prods)
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        NovikovElement {
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    /// Multiplication by `T^delta` (negative `delta` shifts down).
    pub fn shift(&self, delta: &Rat) -> Self {
        NovikovElement {
            terms: self.terms.iter().map(|(e, c)| (e + delta, c.clone())).collect(),
        }
    }

    /// `self / T^{val(self)}`: the valuation-0 unit factor; 0 stays 0.
    pub fn unit_part(&self) -> Self {
        match self.valuation() {
            Some(v) => self.shift(&-v),
            None => Self::zero(),
        }
    }

    /// Drops every term with exponent ≥ `lambda` (reduction mod `T^lambda`).
    pub fn truncate(&self, lambda: &Rat) -> Self {
        NovikovElement {
            terms: self.terms.iter().filter(|(e, _)| e < lambda).cloned().collect(),
        }
    }

    /// Leading (least-exponent) coefficient, if any.
    pub fn leading_coeff(&self) -> Option<&Rat> {
        self.terms.first().map(|(_, c)| c)
    }
}

impl fmt::Display for NovikovElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}*T^{}", fmt_rat(c), fmt_rat(e))?;
        }
        Ok(())
    }
}

impl Serialize for NovikovElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let wire: Vec<[String; 2]> =
            self.terms.iter().map(|(e, c)| [fmt_rat(e), fmt_rat(c)]).collect();
        wire.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NovikovElement {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire: Vec<[String; 2]> = Vec::deserialize(deserializer)?;
        let mut terms = Vec::with_capacity(wire.len());
        for [e, c] in wire {
            let exp = parse_rat(&e).map_err(D::Error::custom)?;
            let coeff = parse_rat(&c).map_err(D::Error::custom)?;
            terms.push((exp, coeff));
        }
        Ok(NovikovElement::from_terms(terms))
    }
}
