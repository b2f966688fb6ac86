//! Dense univariate polynomials in the global coordinate `z`.

use std::fmt;

use crate::error::{KnError, Result};
use crate::scalar::Scalar;

/// A polynomial stored as ascending coefficients with no trailing zeros.
///
/// The zero polynomial has an empty coefficient vector and degree `None`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The monomial `z`.
    pub fn z() -> Self {
        Self::from_coeffs(vec![T::zero(), T::one()])
    }

    /// `c * z^k`
    pub fn monomial(c: T, k: usize) -> Self {
        let mut coeffs = vec![T::zero(); k];
        coeffs.push(c);
        Self::from_coeffs(coeffs)
    }

    /// The linear factor `z - a`.
    pub fn linear_factor(a: &T) -> Self {
        Self::from_coeffs(vec![-a.clone(), T::one()])
    }

    pub fn from_coeffs(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coefficient of `z^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&T> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(|c| c.is_one())
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Polynomial { coeffs: self.coeffs.iter().map(|a| a.mul_ref(c)).collect() }
    }

    /// Divides by the leading coefficient. The zero polynomial is returned unchanged.
    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(lc) if !lc.is_one() => {
                let inv = T::one().div_ref(lc);
                self.scale(&inv)
            }
            _ => self.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (long, short) = if self.coeffs.len() >= other.coeffs.len() { (self, other) } else { (other, self) };
        let mut coeffs = long.coeffs.clone();
        for (c, s) in coeffs.iter_mut().zip(&short.coeffs) {
            *c = c.add_ref(s);
        }
        Self::from_coeffs(coeffs)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            let c = match (self.coeffs.get(k), other.coeffs.get(k)) {
                (Some(a), Some(b)) => a.sub_ref(b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => -b.clone(),
                (None, None) => unreachable!(),
            };
            coeffs.push(c);
        }
        Self::from_coeffs(coeffs)
    }

    pub fn neg(&self) -> Self {
        Polynomial { coeffs: self.coeffs.iter().map(|c| -c.clone()).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j].add_product(a, b);
            }
        }
        Self::from_coeffs(coeffs)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Euclidean division: `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn divmod(&self, divisor: &Self) -> Result<(Self, Self)> {
        let dlen = divisor.coeffs.len();
        if dlen == 0 {
            return Err(KnError::DivisionByZero);
        }
        if self.coeffs.len() < dlen {
            return Ok((Self::zero(), self.clone()));
        }
        let lc_inv = T::one().div_ref(divisor.leading().unwrap());
        let mut rem = self.coeffs.clone();
        let mut quot = vec![T::zero(); rem.len() - dlen + 1];
        for k in (0..quot.len()).rev() {
            let c = rem[k + dlen - 1].mul_ref(&lc_inv);
            if c.is_zero() {
                continue;
            }
            for (j, d) in divisor.coeffs.iter().enumerate() {
                let t = c.mul_ref(d);
                rem[k + j] = rem[k + j].sub_ref(&t);
            }
            quot[k] = c;
        }
        rem.truncate(dlen - 1);
        Ok((Self::from_coeffs(quot), Self::from_coeffs(rem)))
    }

    /// Exact quotient; the caller guarantees the division leaves no remainder.
    pub fn div_exact(&self, divisor: &Self) -> Result<Self> {
        let (q, r) = self.divmod(divisor)?;
        debug_assert!(r.is_zero(), "inexact polynomial division");
        Ok(q)
    }

    /// Monic greatest common divisor. `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.monic();
        let mut b = other.monic();
        if a.coeffs.len() < b.coeffs.len() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            if b.degree() == Some(0) {
                return Self::one();
            }
            let (_, r) = a.divmod(&b).expect("nonzero divisor");
            a = b;
            b = r.monic();
        }
        a
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c.mul_ref(&T::from_int(k as i64))).collect();
        Self::from_coeffs(coeffs)
    }

    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_ref(x).add_ref(c);
        }
        acc
    }

    /// The coefficients of `p(u + a)` as a polynomial in `u`.
    pub fn taylor_shift(&self, a: &T) -> Self {
        if a.is_zero() || self.coeffs.len() <= 1 {
            return self.clone();
        }
        let mut c = self.coeffs.clone();
        let n = c.len();
        // Repeated synthetic division by (u - a), Horner style.
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let t = c[j + 1].mul_ref(a);
                c[j] = c[j].add_ref(&t);
            }
        }
        Self::from_coeffs(c)
    }

    /// Coefficients in reverse order: `z^d p(1/z)` for `d = deg p`.
    pub fn reversed(&self) -> Self {
        let mut c = self.coeffs.clone();
        c.reverse();
        Self::from_coeffs(c)
    }

    /// Number of leading zero coefficients (the order of vanishing at `z = 0`).
    pub fn low_order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    /// Drops the first `k` coefficients, i.e. divides by `z^k` exactly.
    pub fn shift_down(&self, k: usize) -> Self {
        Self::from_coeffs(self.coeffs.iter().skip(k).cloned().collect())
    }

    /// Multiplicity of `a` as a root. `None` for the zero polynomial.
    pub fn root_multiplicity(&self, a: &T) -> Option<usize> {
        self.taylor_shift(a).low_order()
    }

    /// Exact division by `(z - a)^k`, assuming `a` is a root of multiplicity at least `k`.
    pub fn deflate(&self, a: &T, k: usize) -> Self {
        let mut c = self.coeffs.clone();
        for _ in 0..k {
            // synthetic division by (z - a)
            let n = c.len();
            if n == 0 {
                break;
            }
            let mut q = vec![T::zero(); n - 1];
            let mut carry = T::zero();
            for j in (1..n).rev() {
                carry = c[j].add_ref(&carry.mul_ref(a));
                q[j - 1] = carry.clone();
            }
            debug_assert!(c[0].add_ref(&carry.mul_ref(a)).is_zero());
            c = q;
        }
        Self::from_coeffs(c)
    }
}

impl<T: Scalar> fmt::Display for Polynomial<T> {
    /// Canonical ascending-power form, e.g. `1 - z + 3/2*z^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            match k {
                0 => write!(f, "{abs}")?,
                _ => {
                    if !abs.is_one() {
                        write!(f, "{abs}*")?;
                    }
                    if k == 1 {
                        write!(f, "z")?;
                    } else {
                        write!(f, "z^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::Zero;

    type P = Polynomial<BigRational>;

    fn p(c: &[i64]) -> P {
        P::from_coeffs(c.iter().map(|&x| BigRational::from_int(x)).collect())
    }

    #[test]
    fn divmod_factorization() {
        let (q, r) = p(&[-1, 0, 1]).divmod(&p(&[-1, 1])).unwrap();
        assert_eq!(q, p(&[1, 1]));
        assert!(r.is_zero());
    }

    #[test]
    fn divmod_by_zero_fails() {
        assert_eq!(p(&[1, 2]).divmod(&P::zero()), Err(KnError::DivisionByZero));
    }

    #[test]
    fn remainder_degree_is_smaller() {
        let (q, r) = p(&[3, 0, 2, 5]).divmod(&p(&[1, 1, 1])).unwrap();
        assert!(r.degree() < Some(2));
        assert_eq!(q.mul(&p(&[1, 1, 1])).add(&r), p(&[3, 0, 2, 5]));
    }

    #[test]
    fn annihilator() {
        assert!(P::z().mul(&P::zero()).is_zero());
        assert_eq!(P::zero().degree(), None);
    }

    #[test]
    fn gcd_is_monic() {
        // (2z - 2)(z + 3) and 4(z - 1)
        let a = p(&[-2, 2]).mul(&p(&[3, 1]));
        let b = p(&[-4, 4]);
        assert_eq!(a.gcd(&b), p(&[-1, 1]));
        assert_eq!(P::zero().gcd(&P::zero()), P::zero());
        assert_eq!(p(&[5]).gcd(&P::zero()), P::one());
    }

    #[test]
    fn taylor_shift_matches_eval() {
        let f = p(&[2, -3, 0, 1]);
        let a = BigRational::new(3.into(), 2.into());
        let g = f.taylor_shift(&a);
        let u = BigRational::from_int(5);
        assert_eq!(g.eval(&u), f.eval(&(u.clone() + a)));
    }

    #[test]
    fn multiplicity_and_deflate() {
        let one = BigRational::from_int(1);
        let f = p(&[-1, 1]).pow(3).mul(&p(&[2, 1]));
        assert_eq!(f.root_multiplicity(&one), Some(3));
        assert_eq!(f.deflate(&one, 3), p(&[2, 1]));
    }

    #[test]
    fn display_canonical() {
        assert_eq!(p(&[1, -1]).to_string(), "1 - z");
        assert_eq!(p(&[0, 0, 1]).to_string(), "z^2");
        assert_eq!(P::zero().to_string(), "0");
        let f =
            P::from_coeffs(vec![BigRational::from_int(-2), BigRational::zero(), BigRational::new(3.into(), 2.into())]);
        assert_eq!(f.to_string(), "-2 + 3/2*z^2");
        assert_eq!(p(&[0, -1]).to_string(), "-z");
    }
}
