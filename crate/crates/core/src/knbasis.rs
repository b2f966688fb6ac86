//! Meromorphic forms, the homogeneous basis `f^λ_{n,p}`, the residue pairing
//! between weights `λ` and `1 - λ`, and expansion of forms in the basis.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::error::{KnError, Result};
use crate::exact::{laurent_at, residue, LaurentJet, Point, Polynomial, RationalFunction};
use crate::scalar::Scalar;
use crate::surface::{degree_set, prescribed_orders, BasisIndex, HalfInt, SurfaceConfig, Window};

/// The form `f(z) (dz)^λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeroForm<T> {
    weight: HalfInt,
    func: RationalFunction<T>,
}

impl<T: Scalar> MeroForm<T> {
    pub fn new(weight: HalfInt, func: RationalFunction<T>) -> Self {
        MeroForm { weight, func }
    }

    /// Like [`MeroForm::new`] but rejects poles away from the marked points.
    pub fn a_holomorphic(cfg: &SurfaceConfig<T>, weight: HalfInt, func: RationalFunction<T>) -> Result<Self> {
        let form = MeroForm { weight, func };
        if form.is_a_holomorphic(cfg) {
            Ok(form)
        } else {
            Err(KnError::NotAHolomorphic)
        }
    }

    pub fn zero(weight: HalfInt) -> Self {
        MeroForm { weight, func: RationalFunction::zero() }
    }

    pub fn weight(&self) -> HalfInt {
        self.weight
    }

    pub fn func(&self) -> &RationalFunction<T> {
        &self.func
    }

    pub fn is_zero(&self) -> bool {
        self.func.is_zero()
    }

    pub fn scale(&self, c: &T) -> Self {
        MeroForm { weight: self.weight, func: self.func.scale(c) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_weight(self.weight, other.weight)?;
        Ok(MeroForm { weight: self.weight, func: self.func.add(&other.func) })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_weight(self.weight, other.weight)?;
        Ok(MeroForm { weight: self.weight, func: self.func.sub(&other.func) })
    }

    /// Holomorphic away from the in-points and infinity (the out-point in
    /// working coordinates).
    pub fn is_a_holomorphic(&self, cfg: &SurfaceConfig<T>) -> bool {
        let mut den = self.func.den().clone();
        for p in cfg.working_points() {
            if let Point::Finite(a) = p {
                if let Some(m) = den.root_multiplicity(a) {
                    den = den.deflate(a, m);
                }
            }
        }
        den.is_one()
    }

    /// Order at the in-point `P_i` (0-based), `None` for the zero form.
    pub fn order_at_in_point(&self, cfg: &SurfaceConfig<T>, i: usize) -> Option<i64> {
        match &cfg.working_points()[i] {
            Point::Finite(a) => self.func.order_at(a),
            Point::Infinity => unreachable!("in-points are finite in working coordinates"),
        }
    }

    /// Order of the form at the out-point, including the `(dz)^λ` twist.
    pub fn order_at_out_point(&self) -> Option<i64> {
        Some(self.func.order_at_infinity()? - self.weight.twice())
    }
}

impl<T: Scalar> fmt::Display for MeroForm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})(dz)^({})", self.func, self.weight)
    }
}

pub(crate) fn check_weight(expected: HalfInt, found: HalfInt) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(KnError::WeightMismatch { expected: expected.to_string(), found: found.to_string() })
    }
}

/// A finite combination `Σ c_{n,p} f^λ_{n,p}` with no zero coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct FormExpansion<T> {
    weight: HalfInt,
    terms: BTreeMap<BasisIndex, T>,
}

impl<T: Scalar> FormExpansion<T> {
    pub fn zero(weight: HalfInt) -> Self {
        FormExpansion { weight, terms: BTreeMap::new() }
    }

    pub fn basis(weight: HalfInt, idx: BasisIndex) -> Result<Self> {
        let mut e = Self::zero(weight);
        e.add_term(idx, T::one())?;
        Ok(e)
    }

    pub fn from_terms(weight: HalfInt, terms: impl IntoIterator<Item = (BasisIndex, T)>) -> Result<Self> {
        let mut e = Self::zero(weight);
        for (idx, c) in terms {
            e.add_term(idx, c)?;
        }
        Ok(e)
    }

    pub fn weight(&self) -> HalfInt {
        self.weight
    }

    pub fn terms(&self) -> &BTreeMap<BasisIndex, T> {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisIndex, &T)> {
        self.terms.iter()
    }

    pub fn coeff(&self, idx: &BasisIndex) -> T {
        self.terms.get(idx).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_degree(&self) -> Option<HalfInt> {
        self.terms.keys().next().map(|i| i.degree)
    }

    pub fn max_degree(&self) -> Option<HalfInt> {
        self.terms.keys().next_back().map(|i| i.degree)
    }

    /// Adds `c` to the coefficient at `idx`, removing it if it cancels.
    pub fn add_term(&mut self, idx: BasisIndex, c: T) -> Result<()> {
        if !degree_set(self.weight).contains(idx.degree) {
            return Err(KnError::DegreeMismatch { weight: self.weight.to_string(), degree: idx.degree.to_string() });
        }
        self.add_term_unchecked(idx, c);
        Ok(())
    }

    pub(crate) fn add_term_unchecked(&mut self, idx: BasisIndex, c: T) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&idx) {
            Some(v) => {
                *v = v.add_ref(&c);
                if v.is_zero() {
                    self.terms.remove(&idx);
                }
            }
            None => {
                self.terms.insert(idx, c);
            }
        }
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: &T, other: &Self) -> Result<()> {
        check_weight(self.weight, other.weight)?;
        if c.is_zero() {
            return Ok(());
        }
        for (idx, v) in &other.terms {
            self.add_term_unchecked(*idx, v.mul_ref(c));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.add_scaled(&T::one(), other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.add_scaled(&-T::one(), other)?;
        Ok(out)
    }

    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return Self::zero(self.weight);
        }
        FormExpansion { weight: self.weight, terms: self.terms.iter().map(|(i, v)| (*i, v.mul_ref(c))).collect() }
    }

    /// The part supported on degrees satisfying `keep`.
    pub fn filter_degrees(&self, keep: impl Fn(HalfInt) -> bool) -> Self {
        FormExpansion {
            weight: self.weight,
            terms: self.terms.iter().filter(|(i, _)| keep(i.degree)).map(|(i, v)| (*i, v.clone())).collect(),
        }
    }
}

impl<T: Scalar> fmt::Display for FormExpansion<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (idx, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}*f{idx}")?;
        }
        Ok(())
    }
}

/// Coefficient of `t^{-1}` in the product of two jets at the same point.
///
/// Panics if either jet is too short to determine it.
pub(crate) fn jet_residue<T: Scalar>(f: &LaurentJet<T>, g: &LaurentJet<T>) -> T {
    let lo = f.lead_order();
    let hi = -1 - g.lead_order();
    let mut acc = T::zero();
    for a in lo..=hi {
        let fa = f.coeff_at(a).expect("jet too short for residue");
        if fa.is_zero() {
            continue;
        }
        let gb = g.coeff_at(-1 - a).expect("jet too short for residue");
        acc.add_product(&fa, &gb);
    }
    acc
}

/// The basis of a fixed configuration, with memoized elements and jets.
///
/// Caches sit behind `RwLock`s so one `Basis` can be shared across threads;
/// they never change observable results.
pub struct Basis<T> {
    cfg: SurfaceConfig<T>,
    elements: RwLock<ElementCache<T>>,
    jets: RwLock<JetCache<T>>,
}

type ElementCache<T> = HashMap<(HalfInt, BasisIndex), Arc<MeroForm<T>>>;

/// Jets keyed by weight, index and 0-based in-point.
type JetCache<T> = HashMap<(HalfInt, BasisIndex, usize), Arc<LaurentJet<T>>>;

impl<T: Scalar> Basis<T> {
    pub fn new(cfg: SurfaceConfig<T>) -> Self {
        Basis { cfg, elements: RwLock::default(), jets: RwLock::default() }
    }

    pub fn config(&self) -> &SurfaceConfig<T> {
        &self.cfg
    }

    pub fn k(&self) -> usize {
        self.cfg.k()
    }

    /// `f^λ_{n,p} = α ∏_i (z - P_i)^{e_i}` with `e_i = n + 1 - λ - δ_i^p`,
    /// normalized so the expansion at `P_p` starts with `(z - P_p)^{n-λ}`.
    pub fn element(&self, lambda: HalfInt, idx: BasisIndex) -> Result<Arc<MeroForm<T>>> {
        if let Some(f) = self.elements.read().unwrap().get(&(lambda, idx)) {
            return Ok(f.clone());
        }
        let f = Arc::new(self.build_element(lambda, idx)?);
        self.elements.write().unwrap().insert((lambda, idx), f.clone());
        Ok(f)
    }

    fn build_element(&self, lambda: HalfInt, idx: BasisIndex) -> Result<MeroForm<T>> {
        let (orders, _) = prescribed_orders(&self.cfg, lambda, idx)?;
        let pp = self.cfg.working_point(idx.point)?;
        let mut num = Polynomial::one();
        let mut den = Polynomial::one();
        let mut alpha_inv = T::one();
        for (i, &e) in orders.iter().enumerate() {
            let a = self.cfg.working_point(i + 1)?;
            let factor = Polynomial::linear_factor(a).pow(e.unsigned_abs() as u32);
            if e >= 0 {
                num = num.mul(&factor);
            } else {
                den = den.mul(&factor);
            }
            if i + 1 != idx.point {
                let d = pp.sub_ref(a);
                let dp = pow_int(&d, e);
                alpha_inv = alpha_inv.mul_ref(&dp);
            }
        }
        let alpha = T::one().div_ref(&alpha_inv);
        // distinct linear factors: numerator and denominator are coprime
        let func = RationalFunction::from_coprime(num.scale(&alpha), den);
        Ok(MeroForm::new(lambda, func))
    }

    /// Jet of `f^λ_{idx}` at the in-point `P_{i+1}` with at least `length` terms.
    pub fn jet(&self, lambda: HalfInt, idx: BasisIndex, i: usize, length: usize) -> Result<Arc<LaurentJet<T>>> {
        let key = (lambda, idx, i);
        if let Some(j) = self.jets.read().unwrap().get(&key) {
            if j.len() >= length {
                return Ok(j.clone());
            }
        }
        let f = self.element(lambda, idx)?;
        let point = self.cfg.working_points()[i].clone();
        let length = length.max(4);
        let jet = Arc::new(laurent_at(f.func(), &point, length));
        self.jets.write().unwrap().insert(key, jet.clone());
        Ok(jet)
    }

    /// `f^λ_{n,p}` for every index of the window, sorted by `(n, p)`.
    pub fn elements_in(&self, lambda: HalfInt, window: &Window) -> Result<Vec<(BasisIndex, Arc<MeroForm<T>>)>> {
        window.indices(lambda, self.k()).into_iter().map(|idx| Ok((idx, self.element(lambda, idx)?))).collect()
    }

    /// The pairing of two basis elements computed from their jets.
    pub fn basis_pairing(&self, lambda: HalfInt, a: BasisIndex, b: BasisIndex) -> Result<T> {
        let mu = HalfInt::ONE - lambda;
        let mut acc = T::zero();
        for i in 0..self.k() {
            let fa = self.jet(lambda, a, i, 1)?;
            let fb = self.jet(mu, b, i, 1)?;
            let need = -1 - fa.lead_order() - fb.lead_order();
            if need < 0 {
                continue;
            }
            let fa = self.jet(lambda, a, i, need as usize + 1)?;
            let fb = self.jet(mu, b, i, need as usize + 1)?;
            acc = acc.add_ref(&jet_residue(&fa, &fb));
        }
        Ok(acc)
    }

    /// Coordinates of an A-holomorphic form in the basis, via the pairing
    /// with the dual basis `f^{1-λ}_{-n,p}`.
    pub fn expand(&self, f: &MeroForm<T>) -> Result<FormExpansion<T>> {
        let lambda = f.weight();
        let mut out = FormExpansion::zero(lambda);
        if f.is_zero() {
            return Ok(out);
        }
        if !f.is_a_holomorphic(&self.cfg) {
            return Err(KnError::NotAHolomorphic);
        }
        let k = self.k();
        let orders: Vec<i64> = (0..k).map(|i| f.order_at_in_point(&self.cfg, i).unwrap()).collect();
        let o_inf = f.func().order_at_infinity().unwrap();
        // n - λ ranges over [min ord_{P_i}, floor(-ord_∞ / K)]
        let lo = *orders.iter().min().unwrap();
        let hi = (-o_inf).div_euclid(k as i64);
        if hi < lo {
            return Ok(out);
        }
        let mu = HalfInt::ONE - lambda;
        // a point where f vanishes beyond degree hi contributes no residue
        let jets: Vec<Option<LaurentJet<T>>> = (0..k)
            .map(|i| {
                let len = hi - orders[i] + 1;
                (len > 0).then(|| laurent_at(f.func(), &self.cfg.working_points()[i], len as usize))
            })
            .collect();
        for s in lo..=hi {
            let n = lambda + HalfInt::from_int(s);
            for p in 1..=k {
                let dual = BasisIndex::new(-n, p);
                let mut c = T::zero();
                for (i, jet) in jets.iter().enumerate() {
                    let Some(jet) = jet else { continue };
                    // dual element has order λ - n - δ at P_i
                    let lead = -s - i64::from(i + 1 == p);
                    let len = -orders[i] - lead;
                    if len <= 0 {
                        continue;
                    }
                    let dj = self.jet(mu, dual, i, len as usize)?;
                    c = c.add_ref(&jet_residue(jet, &dj));
                }
                out.add_term_unchecked(BasisIndex::new(n, p), c);
            }
        }
        Ok(out)
    }

    /// `Σ c_{n,p} f^λ_{n,p}` as an explicit form.
    pub fn reconstruct(&self, e: &FormExpansion<T>) -> Result<MeroForm<T>> {
        let mut func = RationalFunction::zero();
        for (idx, c) in e.iter() {
            let b = self.element(e.weight(), *idx)?;
            func = func.add(&b.func().scale(c));
        }
        Ok(MeroForm::new(e.weight(), func))
    }

    /// Basis elements of the window in the dump format, sorted by `(n, p)`.
    pub fn dump(&self, lambda: HalfInt, window: &Window) -> Result<Vec<BasisEntry>> {
        Ok(self
            .elements_in(lambda, window)?
            .into_iter()
            .map(|(idx, f)| BasisEntry {
                lambda: lambda.to_string(),
                n: idx.degree.to_string(),
                p: idx.point,
                num: f.func().num().to_string(),
                den: f.func().den().to_string(),
            })
            .collect())
    }
}

fn pow_int<T: Scalar>(x: &T, e: i64) -> T {
    let mut acc = T::one();
    for _ in 0..e.unsigned_abs() {
        acc = acc.mul_ref(x);
    }
    if e < 0 {
        T::one().div_ref(&acc)
    } else {
        acc
    }
}

/// One line of a basis dump.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasisEntry {
    pub lambda: String,
    pub n: String,
    pub p: usize,
    pub num: String,
    pub den: String,
}

fn check_pairing_args<T: Scalar>(cfg: &SurfaceConfig<T>, f: &MeroForm<T>, g: &MeroForm<T>) -> Result<()> {
    check_weight(HalfInt::ONE - f.weight(), g.weight())?;
    if !f.is_a_holomorphic(cfg) || !g.is_a_holomorphic(cfg) {
        return Err(KnError::NotAHolomorphic);
    }
    Ok(())
}

/// `⟨f, g⟩ = Σ_i res_{P_i}(f g)` for forms of weights `λ` and `1 - λ`.
pub fn kn_pairing<T: Scalar>(cfg: &SurfaceConfig<T>, f: &MeroForm<T>, g: &MeroForm<T>) -> Result<T> {
    check_pairing_args(cfg, f, g)?;
    let prod = f.func().mul(g.func());
    Ok(cfg.working_points().iter().fold(T::zero(), |acc, p| acc.add_ref(&residue(&prod, p))))
}

/// The same pairing evaluated at the out-point: `-res_Q(f g)`.
pub fn kn_pairing_out<T: Scalar>(cfg: &SurfaceConfig<T>, f: &MeroForm<T>, g: &MeroForm<T>) -> Result<T> {
    check_pairing_args(cfg, f, g)?;
    let prod = f.func().mul(g.func());
    Ok(-residue(&prod, &Point::Infinity))
}

/// Largest `n` with `ord_{P_i}(f) ≥ n - λ` at every in-point.
pub fn filtration_degree<T: Scalar>(cfg: &SurfaceConfig<T>, f: &MeroForm<T>) -> Result<HalfInt> {
    if f.is_zero() {
        return Err(KnError::ZeroForm);
    }
    if !f.is_a_holomorphic(cfg) {
        return Err(KnError::NotAHolomorphic);
    }
    let m = (0..cfg.k()).map(|i| f.order_at_in_point(cfg, i).unwrap()).min().unwrap();
    Ok(f.weight() + HalfInt::from_int(m))
}
