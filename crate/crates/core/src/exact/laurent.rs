//! Truncated Laurent expansions and residues of rational functions.
//!
//! At a finite point `P` the local coordinate is `u = z - P`; at infinity it
//! is `w = 1/z`. Residues treat the function as the coefficient of the
//! 1-form `f dz`, so at infinity `dz = -w^{-2} dw` contributes a sign.

use std::fmt;

use crate::exact::poly::Polynomial;
use crate::exact::ratfunc::RationalFunction;
use crate::scalar::Scalar;

/// A point of the Riemann sphere with rational affine coordinate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Point<T> {
    Finite(T),
    Infinity,
}

impl<T: Scalar> Point<T> {
    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    /// `"inf"` or the rational in `p/q` form.
    pub fn parse(s: &str) -> Option<Self> {
        let t = s.trim();
        if t == "inf" {
            Some(Point::Infinity)
        } else {
            T::parse_rational(t).map(Point::Finite)
        }
    }
}

impl<T: Scalar> fmt::Display for Point<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Finite(x) => write!(f, "{x}"),
            Point::Infinity => write!(f, "inf"),
        }
    }
}

/// `Σ coeffs[k] t^(lead_order + k)` known up to (excluding) `t^(lead_order + len)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentJet<T> {
    center: Point<T>,
    lead_order: i64,
    coeffs: Vec<T>,
}

impl<T: Scalar> LaurentJet<T> {
    pub fn zero(center: Point<T>, length: usize) -> Self {
        LaurentJet { center, lead_order: 0, coeffs: vec![T::zero(); length] }
    }

    pub fn center(&self) -> &Point<T> {
        &self.center
    }

    pub fn lead_order(&self) -> i64 {
        self.lead_order
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Truncation length: the number of known coefficients.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.first().is_none_or(|c| c.is_zero())
    }

    /// First order that is no longer known.
    pub fn precision(&self) -> i64 {
        self.lead_order + self.coeffs.len() as i64
    }

    /// Coefficient of `t^order`; `None` when beyond the truncation.
    pub fn coeff_at(&self, order: i64) -> Option<T> {
        if order >= self.precision() {
            return None;
        }
        if order < self.lead_order {
            return Some(T::zero());
        }
        Some(self.coeffs[(order - self.lead_order) as usize].clone())
    }

    /// Reassembles the truncated jet as a rational function of `z`
    /// (for a finite center) or of `z` via `w = 1/z` (at infinity).
    pub fn to_ratfunc(&self) -> RationalFunction<T> {
        let mut acc = RationalFunction::zero();
        let local = match &self.center {
            Point::Finite(p) => RationalFunction::from_poly(Polynomial::linear_factor(p)),
            Point::Infinity => RationalFunction::z().recip().unwrap(),
        };
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let term = local.pow(self.lead_order + k as i64).unwrap().scale(c);
            acc = acc.add(&term);
        }
        acc
    }
}

/// Series quotient `num / den` in ascending powers, `den[0] != 0`.
fn series_div<T: Scalar>(num: &Polynomial<T>, den: &Polynomial<T>, length: usize) -> Vec<T> {
    let d0_inv = T::one().div_ref(&den.coeffs()[0]);
    let dc = den.coeffs();
    let mut out: Vec<T> = Vec::with_capacity(length);
    for k in 0..length {
        let mut acc = num.coeff(k);
        for j in 1..=k.min(dc.len().saturating_sub(1)) {
            let t = dc[j].mul_ref(&out[k - j]);
            acc = acc.sub_ref(&t);
        }
        out.push(acc.mul_ref(&d0_inv));
    }
    out
}

/// Local expansion of `f` at `point` with `length` known coefficients.
pub fn laurent_at<T: Scalar>(f: &RationalFunction<T>, point: &Point<T>, length: usize) -> LaurentJet<T> {
    if f.is_zero() {
        return LaurentJet::zero(point.clone(), length);
    }
    let (num, den, lead) = match point {
        Point::Finite(p) => {
            let n = f.num().taylor_shift(p);
            let d = f.den().taylor_shift(p);
            let a = n.low_order().unwrap();
            let b = d.low_order().unwrap();
            (n.shift_down(a), d.shift_down(b), a as i64 - b as i64)
        }
        Point::Infinity => {
            let dn = f.num().degree().unwrap() as i64;
            let dd = f.den().degree().unwrap() as i64;
            (f.num().reversed(), f.den().reversed(), dd - dn)
        }
    };
    LaurentJet { center: point.clone(), lead_order: lead, coeffs: series_div(&num, &den, length) }
}

/// Exact order of `f` at `point` (`None` for the zero function).
pub fn order_at<T: Scalar>(f: &RationalFunction<T>, point: &Point<T>) -> Option<i64> {
    match point {
        Point::Finite(p) => f.order_at(p),
        Point::Infinity => f.order_at_infinity(),
    }
}

/// Residue of the 1-form `f dz` at `point`.
pub fn residue<T: Scalar>(f: &RationalFunction<T>, point: &Point<T>) -> T {
    let Some(lead) = order_at(f, point) else {
        return T::zero();
    };
    match point {
        Point::Finite(_) => {
            if lead >= 0 {
                return T::zero();
            }
            let jet = laurent_at(f, point, (-lead) as usize);
            jet.coeff_at(-1).unwrap()
        }
        Point::Infinity => {
            // f(z) dz = -f(1/w) w^{-2} dw, so res = -[w^1] f(1/w)
            if lead > 1 {
                return T::zero();
            }
            let jet = laurent_at(f, point, (2 - lead) as usize);
            -jet.coeff_at(1).unwrap()
        }
    }
}

/// Sum of the residues of `f dz` over `points`.
pub fn residue_sum<T: Scalar>(f: &RationalFunction<T>, points: &[Point<T>]) -> T {
    points.iter().fold(T::zero(), |acc, p| acc.add_ref(&residue(f, p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse::parse_ratfunc;
    use num_rational::BigRational;

    type Q = BigRational;

    fn rf(s: &str) -> RationalFunction<Q> {
        parse_ratfunc(s).unwrap()
    }

    fn q(n: i64) -> Q {
        Q::from_int(n)
    }

    #[test]
    fn geometric_series_at_zero() {
        // 1/(z(z-1)) = -(1/z)(1 + z + z^2 + ...)
        let jet = laurent_at(&rf("1/(z^2 - z)"), &Point::Finite(q(0)), 3);
        assert_eq!(jet.lead_order(), -1);
        assert_eq!(jet.coeffs(), &[q(-1), q(-1), q(-1)]);
        assert_eq!(jet.len(), 3);
    }

    #[test]
    fn order_at_infinity_of_square() {
        let jet = laurent_at(&rf("z^2"), &Point::Infinity, 2);
        assert_eq!(jet.lead_order(), -2);
        assert_eq!(jet.coeffs(), &[q(1), q(0)]);
    }

    #[test]
    fn constant_jet() {
        let jet = laurent_at(&rf("1"), &Point::Finite(q(0)), 1);
        assert_eq!(jet.lead_order(), 0);
        assert_eq!(jet.coeffs(), &[q(1)]);
    }

    #[test]
    fn zero_jet() {
        let jet = laurent_at(&RationalFunction::<Q>::zero(), &Point::Finite(q(3)), 4);
        assert!(jet.is_zero());
        assert_eq!(jet.len(), 4);
    }

    #[test]
    fn residues() {
        assert_eq!(residue(&rf("1/z"), &Point::Finite(q(0))), q(1));
        let f = rf("1/(z^2 - z)");
        assert_eq!(residue(&f, &Point::Finite(q(0))), q(-1));
        assert_eq!(residue(&f, &Point::Finite(q(1))), q(1));
        assert_eq!(residue(&rf("1/(z - 5)"), &Point::Infinity), q(-1));
        assert_eq!(residue(&rf("z^3"), &Point::Infinity), q(0));
        assert_eq!(residue(&rf("z^2"), &Point::Finite(q(0))), q(0));
    }

    #[test]
    fn jet_reconstruction_agrees_modulo_truncation() {
        let f = rf("(z + 2)/(z^3 - z)");
        let p = Point::Finite(q(1));
        let jet = laurent_at(&f, &p, 4);
        // f - jet vanishes to order >= precision at P
        let diff = f.sub(&jet.to_ratfunc());
        assert!(order_at(&diff, &p).unwrap() >= jet.precision());
    }
}
