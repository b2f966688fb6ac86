//! Rational functions in `z`, kept in lowest terms with a monic denominator.

use std::fmt;

use crate::error::{KnError, Result};
use crate::exact::poly::Polynomial;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalFunction<T> {
    num: Polynomial<T>,
    den: Polynomial<T>,
}

impl<T: Scalar> RationalFunction<T> {
    pub fn new(num: Polynomial<T>, den: Polynomial<T>) -> Result<Self> {
        if den.is_zero() {
            return Err(KnError::DivisionByZero);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: Polynomial<T>, den: Polynomial<T>) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() { (num, den) } else { (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap()) };
        Self::normalize_leading(num, den)
    }

    fn normalize_leading(num: Polynomial<T>, den: Polynomial<T>) -> Self {
        match den.leading() {
            Some(lc) if !lc.is_one() => {
                let inv = T::one().div_ref(lc);
                RationalFunction { num: num.scale(&inv), den: den.scale(&inv) }
            }
            _ => RationalFunction { num, den },
        }
    }

    /// Builds from parts already known to be coprime.
    pub(crate) fn from_coprime(num: Polynomial<T>, den: Polynomial<T>) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        Self::normalize_leading(num, den)
    }

    pub fn zero() -> Self {
        RationalFunction { num: Polynomial::zero(), den: Polynomial::one() }
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Self::from_poly(Polynomial::constant(c))
    }

    pub fn z() -> Self {
        Self::from_poly(Polynomial::z())
    }

    pub fn from_poly(p: Polynomial<T>) -> Self {
        RationalFunction { num: p, den: Polynomial::one() }
    }

    pub fn num(&self) -> &Polynomial<T> {
        &self.num
    }

    pub fn den(&self) -> &Polynomial<T> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        RationalFunction { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn neg(&self) -> Self {
        RationalFunction { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, true)
    }

    fn combine(&self, other: &Self, subtract: bool) -> Self {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return if subtract { other.neg() } else { other.clone() };
        }
        let rhs = if subtract { other.num.neg() } else { other.num.clone() };
        if self.den == other.den {
            let num = self.num.add(&rhs);
            return Self::reduce(num, self.den.clone());
        }
        let g = self.den.gcd(&other.den);
        if g.is_one() {
            let num = self.num.mul(&other.den).add(&rhs.mul(&self.den));
            // coprime denominators: any common factor of num and the product
            // would have to divide one numerator, which is excluded
            return Self::from_coprime(num, self.den.mul(&other.den));
        }
        let a = self.den.div_exact(&g).unwrap();
        let b = other.den.div_exact(&g).unwrap();
        let num = self.num.mul(&b).add(&rhs.mul(&a));
        Self::reduce(num, a.mul(&other.den))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let g1 = self.num.gcd(&other.den);
        let g2 = other.num.gcd(&self.den);
        let (n1, d2) = cancel(&self.num, &other.den, &g1);
        let (n2, d1) = cancel(&other.num, &self.den, &g2);
        Self::normalize_leading(n1.mul(&n2), d1.mul(&d2))
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(KnError::DivisionByZero);
        }
        Ok(Self::normalize_leading(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.recip()? } else { self.clone() };
        let k = e.unsigned_abs() as u32;
        Ok(RationalFunction { num: base.num.pow(k), den: base.den.pow(k) })
    }

    /// `d/dz`.
    pub fn derivative(&self) -> Self {
        if self.den.is_one() {
            return Self::from_poly(self.num.derivative());
        }
        // (n/d)' = (n' d - n d') / d^2; with g = gcd(d, d') this reduces to
        // (n' (d/g) - n (d'/g)) / (d * d/g), which is already in lowest terms:
        // every pole gains exactly one order.
        let dd = self.den.derivative();
        let g = self.den.gcd(&dd);
        let dg = self.den.div_exact(&g).unwrap();
        let ddg = dd.div_exact(&g).unwrap();
        let num = self.num.derivative().mul(&dg).sub(&self.num.mul(&ddg));
        Self::from_coprime(num, self.den.mul(&dg))
    }

    pub fn eval(&self, x: &T) -> Option<T> {
        let d = self.den.eval(x);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(x).div_ref(&d))
        }
    }

    /// Order of vanishing at a finite point (negative for poles).
    pub fn order_at(&self, a: &T) -> Option<i64> {
        let n = self.num.root_multiplicity(a)? as i64;
        let d = self.den.root_multiplicity(a).expect("nonzero denominator") as i64;
        Some(n - d)
    }

    /// Order at infinity in the coordinate `w = 1/z`: `deg den - deg num`.
    pub fn order_at_infinity(&self) -> Option<i64> {
        let n = self.num.degree()? as i64;
        Some(self.den.degree().unwrap() as i64 - n)
    }
}

fn cancel<T: Scalar>(a: &Polynomial<T>, b: &Polynomial<T>, g: &Polynomial<T>) -> (Polynomial<T>, Polynomial<T>) {
    if g.is_one() {
        (a.clone(), b.clone())
    } else {
        (a.div_exact(g).unwrap(), b.div_exact(g).unwrap())
    }
}

impl<T: Scalar> fmt::Display for RationalFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse::parse_ratfunc;
    use num_rational::BigRational;

    type R = RationalFunction<BigRational>;

    fn rf(s: &str) -> R {
        parse_ratfunc(s).unwrap()
    }

    #[test]
    fn normalization_cancels_gcd() {
        // (2z^2 - 2)/(2z - 2) = 2(z-1)(z+1) / 2(z-1)
        let f = rf("(2z^2 - 2)/(2z - 2)");
        assert_eq!(f, rf("1 + z"));
        assert!(f.is_polynomial());
    }

    #[test]
    fn denominator_is_monic() {
        let f = rf("(1)/(3z + 6)");
        assert!(f.den().is_monic());
        assert_eq!(f.num().to_string(), "1/3");
    }

    #[test]
    fn zero_denominator_rejected() {
        assert_eq!(R::new(Polynomial::one(), Polynomial::zero()), Err(KnError::DivisionByZero));
    }

    #[test]
    fn arithmetic() {
        let a = rf("1/z");
        let b = rf("1/(z - 1)");
        // 1/(z-1) - 1/z = 1/(z(z-1))
        assert_eq!(b.sub(&a), rf("1/(z^2 - z)"));
        assert_eq!(a.mul(&rf("z^2")), rf("z"));
        assert_eq!(a.add(&a.neg()), R::zero());
        assert_eq!(b.div(&b).unwrap(), R::one());
    }

    #[test]
    fn derivative_of_quotient() {
        // d/dz 1/(z(z-1)) = -(2z - 1)/(z^2 (z-1)^2)
        let f = rf("1/(z^2 - z)");
        let expected = rf("(1 - 2z)/(z^4 - 2z^3 + z^2)");
        assert_eq!(f.derivative(), expected);
    }

    #[test]
    fn orders() {
        let f = rf("(z^3 - z^2)/(z - 2)");
        assert_eq!(f.order_at(&BigRational::from_int(0)), Some(2));
        assert_eq!(f.order_at(&BigRational::from_int(2)), Some(-1));
        assert_eq!(f.order_at_infinity(), Some(-2));
        assert_eq!(R::zero().order_at_infinity(), None);
    }
}
