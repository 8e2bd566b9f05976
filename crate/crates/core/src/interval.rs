//! Certified enclosures with rational endpoints, and exact values of the
//! form `q + sqrt(s)`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rat::Rat;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertInterval {
    pub lo: Rat,
    pub hi: Rat,
}

impl CertInterval {
    pub fn new(lo: Rat, hi: Rat) -> Result<CertInterval> {
        if lo > hi {
            return Err(Error::InvalidArgument(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(CertInterval { lo, hi })
    }

    pub fn point(x: Rat) -> CertInterval {
        CertInterval { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rat) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.lo.to_f64() <= x && x <= self.hi.to_f64()
    }

    pub fn intersects(&self, other: &CertInterval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn midpoint(&self) -> Rat {
        (&self.lo + &self.hi) * Rat::new(1, 2)
    }

    pub fn add(&self, other: &CertInterval) -> CertInterval {
        CertInterval { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn sub(&self, other: &CertInterval) -> CertInterval {
        CertInterval { lo: &self.lo - &other.hi, hi: &self.hi - &other.lo }
    }

    pub fn add_rat(&self, c: &Rat) -> CertInterval {
        CertInterval { lo: &self.lo + c, hi: &self.hi + c }
    }

    /// Multiplication by a rational scalar of either sign.
    pub fn scale(&self, c: &Rat) -> CertInterval {
        let a = &self.lo * c;
        let b = &self.hi * c;
        if a <= b {
            CertInterval { lo: a, hi: b }
        } else {
            CertInterval { lo: b, hi: a }
        }
    }

    /// Square of an interval of nonnegative numbers.
    pub fn square_nonneg(&self) -> CertInterval {
        debug_assert!(!self.lo.is_negative());
        CertInterval { lo: self.lo.square(), hi: self.hi.square() }
    }

    /// Enclosure of the square root; `eps` bounds the added rounding width.
    pub fn sqrt(&self, eps: &Rat) -> CertInterval {
        let lo = self.lo.clone().max(Rat::zero());
        let (l, _) = lo.sqrt_bounds(eps);
        let (_, h) = self.hi.clone().max(Rat::zero()).sqrt_bounds(eps);
        CertInterval { lo: l, hi: h }
    }

    /// `Some(ordering)` when the comparison with `other` is decided.
    pub fn certain_cmp(&self, other: &CertInterval) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else if self.is_point() && other.is_point() && self.lo == other.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }
}

/// Exact real `q + sqrt(s)` with `s >= 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadSurd {
    pub q: Rat,
    pub s: Rat,
}

/// Sign of `p + q * sqrt(c)` for `c >= 0`.
pub fn sign_lin(p: &Rat, q: &Rat, c: &Rat) -> Ordering {
    let sp = p.signum();
    let sq = if c.is_zero() { 0 } else { q.signum() };
    if sq == 0 {
        return sp.cmp(&0);
    }
    if sp == 0 || sp == sq {
        return sq.cmp(&0);
    }
    // Opposite signs: compare p^2 with q^2 c.
    let lhs = p.square();
    let rhs = q.square() * c;
    match lhs.cmp(&rhs) {
        Ordering::Equal => Ordering::Equal,
        Ordering::Greater => sp.cmp(&0),
        Ordering::Less => sq.cmp(&0),
    }
}

impl QuadSurd {
    pub fn rat(q: Rat) -> QuadSurd {
        QuadSurd { q, s: Rat::zero() }
    }

    pub fn sqrt(s: Rat) -> QuadSurd {
        QuadSurd { q: Rat::zero(), s }
    }

    pub fn new(q: Rat, s: Rat) -> QuadSurd {
        assert!(!s.is_negative(), "negative radicand");
        QuadSurd { q, s }
    }

    /// `c * self` for `c >= 0`.
    pub fn scale(&self, c: &Rat) -> QuadSurd {
        assert!(!c.is_negative());
        QuadSurd { q: &self.q * c, s: c.square() * &self.s }
    }

    pub fn add_rat(&self, c: &Rat) -> QuadSurd {
        QuadSurd { q: &self.q + c, s: self.s.clone() }
    }

    pub fn as_rat(&self) -> Option<Rat> {
        self.s.exact_sqrt().map(|r| &self.q + &r)
    }

    pub fn enclose(&self, eps: &Rat) -> CertInterval {
        let (lo, hi) = self.s.sqrt_bounds(eps);
        CertInterval { lo: &self.q + &lo, hi: &self.q + &hi }
    }

    pub fn to_f64(&self) -> f64 {
        self.q.to_f64() + self.s.to_f64().sqrt()
    }

    /// Exact comparison of two surds.
    pub fn cmp_exact(&self, other: &QuadSurd) -> Ordering {
        // sign of e + sqrt(a) - sqrt(b)
        let e = &self.q - &other.q;
        let a = &self.s;
        let b = &other.s;
        let left = sign_lin(&e, &Rat::one(), a);
        if left == Ordering::Less {
            return Ordering::Less;
        }
        if b.is_zero() {
            return left;
        }
        if left == Ordering::Equal {
            return Ordering::Less;
        }
        // both sides positive: compare (e + sqrt a)^2 with b
        let p = e.square() + a - b;
        let q = &e * Rat::int(2);
        sign_lin(&p, &q, a)
    }

    /// Exact comparison with a rational.
    pub fn cmp_rat(&self, r: &Rat) -> Ordering {
        self.cmp_exact(&QuadSurd::rat(r.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qs(q: (i64, i64), s: (i64, i64)) -> QuadSurd {
        QuadSurd::new(Rat::new(q.0, q.1), Rat::new(s.0, s.1))
    }

    #[test]
    fn surd_order_matches_floats() {
        let vals = [
            qs((0, 1), (2, 1)),
            qs((1, 2), (1, 2)),
            qs((1, 1), (0, 1)),
            qs((-1, 1), (5, 1)),
            qs((2, 3), (1, 9)),
            qs((1, 10), (169, 100)),
        ];
        for a in &vals {
            for b in &vals {
                let fa = a.to_f64();
                let fb = b.to_f64();
                let got = a.cmp_exact(b);
                if (fa - fb).abs() > 1e-12 {
                    assert_eq!(got, fa.partial_cmp(&fb).unwrap(), "{a:?} vs {b:?}");
                }
            }
        }
        // 1 = 2/3 + sqrt(1/9)
        assert_eq!(qs((2, 3), (1, 9)).cmp_rat(&Rat::one()), Ordering::Equal);
        assert_eq!(qs((1, 10), (81, 100)).cmp_rat(&Rat::one()), Ordering::Equal);
    }

    #[test]
    fn sign_lin_cases() {
        let two = Rat::int(2);
        assert_eq!(sign_lin(&Rat::int(-1), &Rat::one(), &two), Ordering::Greater);
        assert_eq!(sign_lin(&Rat::int(-2), &Rat::one(), &two), Ordering::Less);
        assert_eq!(sign_lin(&Rat::int(-2), &Rat::one(), &Rat::int(4)), Ordering::Equal);
    }

    #[test]
    fn enclosure_width() {
        let eps = Rat::new(1, 1_000_000);
        let iv = qs((1, 2), (1, 2)).enclose(&eps);
        assert!(iv.width() <= eps);
        assert!(iv.contains_f64(0.5 + 0.5f64.sqrt()));
    }
}
