//! Exact coefficient arithmetic: the scalar type shared by all modules,
//! ring tags, and Laurent polynomials in one or two gradings.
//!
//! Everything is exact; no floating point appears anywhere in this crate.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

/// Which coefficient ring a computation is running over.
///
/// `IntegersWithHalf` adjoins 1/2 to the integers; it is the natural home of
/// the deformed theory, where idempotents (1 ± dot)/2 appear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoefficientRing {
    Integers,
    Rationals,
    IntegersWithHalf,
}

impl CoefficientRing {
    /// Is `c` an element of this ring?
    pub fn contains(&self, c: &Coeff) -> bool {
        match self {
            CoefficientRing::Integers => c.0.is_integer(),
            CoefficientRing::Rationals => true,
            CoefficientRing::IntegersWithHalf => {
                // reduced denominator must be a power of two
                let mut d = c.0.denom().clone();
                let two = BigInt::from(2);
                while (&d % &two).is_zero() {
                    d /= &two;
                }
                d == BigInt::one()
            }
        }
    }
}

/// Exact scalar: an arbitrary-precision rational, always stored reduced.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coeff(pub BigRational);

impl Coeff {
    pub fn zero() -> Self {
        Coeff(BigRational::zero())
    }
    pub fn one() -> Self {
        Coeff(BigRational::one())
    }
    pub fn from_int(n: i64) -> Self {
        Coeff(BigRational::from_integer(BigInt::from(n)))
    }
    pub fn from_frac(n: i64, d: i64) -> Self {
        Coeff(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }
    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }
    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }
    /// Units of the three supported rings: ±1 over Z and Z[1/2]-as-graded
    /// pivots, any nonzero rational over Q.
    pub fn is_unit(&self, ring: CoefficientRing) -> bool {
        match ring {
            CoefficientRing::Integers => {
                self.0.is_integer() && self.0.numer().abs() == BigInt::one()
            }
            CoefficientRing::Rationals => !self.is_zero(),
            CoefficientRing::IntegersWithHalf => {
                // units are ±2^k
                if self.is_zero() {
                    return false;
                }
                let mut n = self.0.numer().abs();
                let two = BigInt::from(2);
                while (&n % &two).is_zero() {
                    n /= &two;
                }
                n == BigInt::one()
            }
        }
    }
    pub fn as_bigint(&self) -> Option<BigInt> {
        if self.0.is_integer() {
            Some(self.0.to_integer())
        } else {
            None
        }
    }
    pub fn inv(&self) -> Coeff {
        Coeff(self.0.recip())
    }
}

impl fmt::Debug for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<i64> for Coeff {
    fn from(n: i64) -> Self {
        Coeff::from_int(n)
    }
}

macro_rules! coeff_binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr for Coeff {
            type Output = Coeff;
            fn $m(self, rhs: Coeff) -> Coeff {
                Coeff(self.0 $op rhs.0)
            }
        }
        impl<'a> $tr<&'a Coeff> for &'a Coeff {
            type Output = Coeff;
            fn $m(self, rhs: &'a Coeff) -> Coeff {
                Coeff(&self.0 $op &rhs.0)
            }
        }
    };
}
coeff_binop!(Add, add, +);
coeff_binop!(Sub, sub, -);
coeff_binop!(Mul, mul, *);

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff(-self.0)
    }
}
impl AddAssign for Coeff {
    fn add_assign(&mut self, rhs: Coeff) {
        self.0 += rhs.0;
    }
}
impl SubAssign for Coeff {
    fn sub_assign(&mut self, rhs: Coeff) {
        self.0 -= rhs.0;
    }
}
impl MulAssign for Coeff {
    fn mul_assign(&mut self, rhs: Coeff) {
        self.0 *= rhs.0;
    }
}

/// Laurent polynomial in one variable `q` with `Coeff` coefficients.
/// Canonical: zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<i64, Coeff>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly::default()
    }
    pub fn one() -> Self {
        LaurentPoly::mono(0, Coeff::one())
    }
    pub fn q() -> Self {
        LaurentPoly::mono(1, Coeff::one())
    }
    pub fn mono(exp: i64, c: Coeff) -> Self {
        let mut t = BTreeMap::new();
        if !c.is_zero() {
            t.insert(exp, c);
        }
        LaurentPoly { terms: t }
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn coeff(&self, exp: i64) -> Coeff {
        self.terms.get(&exp).cloned().unwrap_or_else(Coeff::zero)
    }
    pub fn terms(&self) -> impl Iterator<Item = (&i64, &Coeff)> {
        self.terms.iter()
    }
    pub fn add_term(&mut self, exp: i64, c: Coeff) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(exp).or_insert_with(Coeff::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&exp);
        }
    }
    /// The quantum integer [n] = q^{n-1} + q^{n-3} + ... + q^{1-n}.
    pub fn quantum_int(n: u32) -> Self {
        let mut p = LaurentPoly::zero();
        let n = n as i64;
        let mut e = n - 1;
        while e >= 1 - n {
            p.add_term(e, Coeff::one());
            e -= 2;
        }
        p
    }
    /// Substitute q -> value, exactly.
    pub fn eval(&self, value: &Coeff) -> Coeff {
        let mut acc = Coeff::zero();
        for (e, c) in &self.terms {
            let mut pw = Coeff::one();
            let base = if *e >= 0 { value.clone() } else { value.inv() };
            for _ in 0..e.unsigned_abs() {
                pw *= base.clone();
            }
            acc += c.clone() * pw;
        }
        acc
    }
    /// All coefficients nonnegative after substituting q -> -q.
    pub fn positive_in_minus_q(&self) -> bool {
        self.terms.iter().all(|(e, c)| {
            let s = if e.rem_euclid(2) == 1 { -c.clone() } else { c.clone() };
            !s.0.is_negative()
        })
    }
    pub fn substitute_minus_q(&self) -> LaurentPoly {
        let mut p = LaurentPoly::zero();
        for (e, c) in &self.terms {
            let s = if e.rem_euclid(2) == 1 { -c.clone() } else { c.clone() };
            p.add_term(*e, s);
        }
        p
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            let neg = c.0.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = Coeff(c.0.abs());
            match (*e, a.is_one()) {
                (0, _) => write!(f, "{}", a)?,
                (1, true) => write!(f, "q")?,
                (1, false) => write!(f, "{}*q", a)?,
                (e, true) => write!(f, "q^{}", e)?,
                (e, false) => write!(f, "{}*q^{}", a, e)?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl Add for LaurentPoly {
    type Output = LaurentPoly;
    fn add(mut self, rhs: LaurentPoly) -> LaurentPoly {
        for (e, c) in rhs.terms {
            self.add_term(e, c);
        }
        self
    }
}
impl Sub for LaurentPoly {
    type Output = LaurentPoly;
    fn sub(mut self, rhs: LaurentPoly) -> LaurentPoly {
        for (e, c) in rhs.terms {
            self.add_term(e, -c);
        }
        self
    }
}
impl Mul for LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: LaurentPoly) -> LaurentPoly {
        let mut p = LaurentPoly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                p.add_term(e1 + e2, c1.clone() * c2.clone());
            }
        }
        p
    }
}
impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly::zero() - self
    }
}

/// Laurent polynomial in `q` and `t`, used for Poincaré polynomials.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Poincare {
    terms: BTreeMap<(i64, i64), Coeff>, // (tdeg, qdeg) -> coeff
}

impl Poincare {
    pub fn zero() -> Self {
        Poincare::default()
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn add_term(&mut self, tdeg: i64, qdeg: i64, c: Coeff) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry((tdeg, qdeg)).or_insert_with(Coeff::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&(tdeg, qdeg));
        }
    }
    pub fn terms(&self) -> impl Iterator<Item = (&(i64, i64), &Coeff)> {
        self.terms.iter()
    }
    /// Substitute t -> -1, collapsing to a Laurent polynomial in q.
    pub fn euler(&self) -> LaurentPoly {
        let mut p = LaurentPoly::zero();
        for ((t, q), c) in &self.terms {
            let s = if t.rem_euclid(2) == 1 { -c.clone() } else { c.clone() };
            p.add_term(*q, s);
        }
        p
    }
}

impl fmt::Display for Poincare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((t, q), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if !c.is_one() {
                write!(f, "{}*", c)?;
            }
            write!(f, "t^{}q^{}", t, q)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Poincare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_membership() {
        assert!(CoefficientRing::Integers.contains(&Coeff::from_int(-3)));
        assert!(!CoefficientRing::Integers.contains(&Coeff::from_frac(1, 2)));
        assert!(CoefficientRing::IntegersWithHalf.contains(&Coeff::from_frac(3, 8)));
        assert!(!CoefficientRing::IntegersWithHalf.contains(&Coeff::from_frac(1, 3)));
    }

    #[test]
    fn laurent_basics() {
        let q = LaurentPoly::q();
        let two_bracket = LaurentPoly::quantum_int(2);
        assert_eq!(two_bracket, q.clone() + LaurentPoly::mono(-1, Coeff::one()));
        let sq = two_bracket.clone() * two_bracket.clone();
        assert_eq!(sq.coeff(0), Coeff::from_int(2));
        assert_eq!(sq.coeff(2), Coeff::one());
        assert_eq!(format!("{}", two_bracket), "q^-1 + q");
    }

    #[test]
    fn positivity_in_minus_q() {
        // -q is positive in (-q); q + q^{-1} is not.
        assert!(LaurentPoly::mono(1, Coeff::from_int(-1)).positive_in_minus_q());
        let p = LaurentPoly::quantum_int(2);
        assert!(!p.positive_in_minus_q());
        assert!((p.clone() * p).positive_in_minus_q());
    }
}
