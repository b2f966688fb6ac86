//! Products on forms: the associative product, the weight-shifting bracket
//! and the algebras built from them (vector fields, differential operators
//! of order ≤ 1, the Lie superalgebra and the Jordan superalgebra), plus
//! structure-constant tables and their almost-grading bounds.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::error::{KnError, Result};
use crate::knbasis::{check_weight, Basis, FormExpansion, MeroForm};
use crate::scalar::Scalar;
use crate::surface::{BasisIndex, HalfInt, SurfaceConfig, Window};

/// Weight of vector fields, the even part of the superalgebra.
pub const EVEN_WEIGHT: HalfInt = HalfInt::from_twice(-2);
/// Weight of half-forms, the odd part of the superalgebra.
pub const ODD_WEIGHT: HalfInt = HalfInt::from_twice(-1);

/// `f · g`, of weight `λ + ν`.
pub fn mult<T: Scalar>(f: &MeroForm<T>, g: &MeroForm<T>) -> MeroForm<T> {
    MeroForm::new(f.weight() + g.weight(), f.func().mul(g.func()))
}

/// `[s dz^λ, t dz^ν] = ((-λ) s t' + ν t s') dz^{λ+ν+1}`.
pub fn bracket<T: Scalar>(f: &MeroForm<T>, g: &MeroForm<T>) -> MeroForm<T> {
    let (s, t) = (f.func(), g.func());
    let lambda: T = f.weight().to_scalar();
    let nu: T = g.weight().to_scalar();
    let a = s.mul(&t.derivative()).scale(&-lambda);
    let b = t.mul(&s.derivative()).scale(&nu);
    MeroForm::new(f.weight() + g.weight() + HalfInt::ONE, a.add(&b))
}

/// Lie derivative `e . f` of a form by a vector field.
pub fn lie_derivative<T: Scalar>(e: &MeroForm<T>, f: &MeroForm<T>) -> Result<MeroForm<T>> {
    check_weight(EVEN_WEIGHT, e.weight())?;
    Ok(bracket(e, f))
}

/// The two bilinear kernels every product reduces to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kernel {
    Mult,
    Bracket,
}

impl Kernel {
    pub fn apply<T: Scalar>(self, f: &MeroForm<T>, g: &MeroForm<T>) -> MeroForm<T> {
        match self {
            Kernel::Mult => mult(f, g),
            Kernel::Bracket => bracket(f, g),
        }
    }

    pub fn result_weight(self, lambda: HalfInt, nu: HalfInt) -> HalfInt {
        match self {
            Kernel::Mult => lambda + nu,
            Kernel::Bracket => lambda + nu + HalfInt::ONE,
        }
    }

    /// Coefficient of `f_{n+m,p}` in the product of `f^λ_{n,p}` and `f^ν_{m,p}`.
    pub fn leading_coefficient<T: Scalar>(self, lambda: HalfInt, n: HalfInt, nu: HalfInt, m: HalfInt) -> T {
        match self {
            Kernel::Mult => T::one(),
            Kernel::Bracket => {
                // (-λ m + ν n), computed on twice-values: (-2λ·2m + 2ν·2n) / 4
                let four = -lambda.twice() * m.twice() + nu.twice() * n.twice();
                T::from_int(four).div_ref(&T::from_int(4))
            }
        }
    }
}

/// Named products for tables and the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    Mult,
    Bracket,
    Super,
    Jordan,
    D1,
}

impl Op {
    pub const ALL: [Op; 5] = [Op::Mult, Op::Bracket, Op::Super, Op::Jordan, Op::D1];

    /// The kernel this product uses on the weight pair, if admissible.
    pub fn kernel(self, lambda: HalfInt, nu: HalfInt) -> Result<Kernel> {
        let in_set = |allowed: &[HalfInt]| allowed.contains(&lambda) && allowed.contains(&nu);
        let invalid = || KnError::InvalidOp { op: self.to_string(), lambda: lambda.to_string(), nu: nu.to_string() };
        match self {
            Op::Mult => Ok(Kernel::Mult),
            Op::Bracket => Ok(Kernel::Bracket),
            Op::Super if in_set(&[EVEN_WEIGHT, ODD_WEIGHT]) => {
                Ok(if lambda == ODD_WEIGHT && nu == ODD_WEIGHT { Kernel::Mult } else { Kernel::Bracket })
            }
            Op::Jordan if in_set(&[HalfInt::ZERO, ODD_WEIGHT]) => {
                Ok(if lambda == ODD_WEIGHT && nu == ODD_WEIGHT { Kernel::Bracket } else { Kernel::Mult })
            }
            Op::D1 if in_set(&[HalfInt::ZERO, EVEN_WEIGHT]) => Ok(Kernel::Bracket),
            _ => Err(invalid()),
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Op::Mult => "mult",
            Op::Bracket => "bracket",
            Op::Super => "super",
            Op::Jordan => "jordan",
            Op::D1 => "d1",
        };
        f.write_str(s)
    }
}

impl FromStr for Op {
    type Err = KnError;

    fn from_str(s: &str) -> Result<Self> {
        Op::ALL
            .into_iter()
            .find(|op| op.to_string() == s)
            .ok_or_else(|| KnError::Parse(format!("unknown operation `{s}`")))
    }
}

/// `x = (e, φ)` with `e` a vector field and `φ` a half-form.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperElement<T> {
    even: FormExpansion<T>,
    odd: FormExpansion<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn weight(self) -> HalfInt {
        match self {
            Parity::Even => EVEN_WEIGHT,
            Parity::Odd => ODD_WEIGHT,
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    /// Parity of a product or bracket of homogeneous elements.
    pub fn combine(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn letter(self) -> char {
        match self {
            Parity::Even => 'e',
            Parity::Odd => 'o',
        }
    }
}

/// A homogeneous basis element of the superalgebra: `e_{n,p}` or `φ_{n,p}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SuperIndex {
    pub parity: Parity,
    pub index: BasisIndex,
}

impl SuperIndex {
    pub fn even(index: BasisIndex) -> Self {
        SuperIndex { parity: Parity::Even, index }
    }

    pub fn odd(index: BasisIndex) -> Self {
        SuperIndex { parity: Parity::Odd, index }
    }

    pub fn weight(&self) -> HalfInt {
        self.parity.weight()
    }

    /// All basis elements of both parities in the window, evens first.
    pub fn window(window: &Window, k: usize) -> Vec<SuperIndex> {
        let mut out: Vec<SuperIndex> = window.indices(EVEN_WEIGHT, k).into_iter().map(SuperIndex::even).collect();
        out.extend(window.indices(ODD_WEIGHT, k).into_iter().map(SuperIndex::odd));
        out
    }
}

impl fmt::Display for SuperIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = if self.parity.is_odd() { "phi" } else { "e" };
        write!(f, "{name}{}", self.index)
    }
}

impl<T: Scalar> SuperElement<T> {
    pub fn new(even: FormExpansion<T>, odd: FormExpansion<T>) -> Result<Self> {
        check_weight(EVEN_WEIGHT, even.weight())?;
        check_weight(ODD_WEIGHT, odd.weight())?;
        Ok(SuperElement { even, odd })
    }

    pub fn zero() -> Self {
        SuperElement { even: FormExpansion::zero(EVEN_WEIGHT), odd: FormExpansion::zero(ODD_WEIGHT) }
    }

    pub fn basis(idx: SuperIndex) -> Result<Self> {
        let mut x = Self::zero();
        match idx.parity {
            Parity::Even => x.even.add_term(idx.index, T::one())?,
            Parity::Odd => x.odd.add_term(idx.index, T::one())?,
        }
        Ok(x)
    }

    pub fn even_part(e: FormExpansion<T>) -> Result<Self> {
        Self::new(e, FormExpansion::zero(ODD_WEIGHT))
    }

    pub fn odd_part(phi: FormExpansion<T>) -> Result<Self> {
        Self::new(FormExpansion::zero(EVEN_WEIGHT), phi)
    }

    pub fn even(&self) -> &FormExpansion<T> {
        &self.even
    }

    pub fn odd(&self) -> &FormExpansion<T> {
        &self.odd
    }

    pub fn part(&self, parity: Parity) -> &FormExpansion<T> {
        match parity {
            Parity::Even => &self.even,
            Parity::Odd => &self.odd,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.even.is_zero() && self.odd.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        SuperElement {
            even: self.even.add(&other.even).expect("same weight"),
            odd: self.odd.add(&other.odd).expect("same weight"),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        SuperElement {
            even: self.even.sub(&other.even).expect("same weight"),
            odd: self.odd.sub(&other.odd).expect("same weight"),
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        SuperElement { even: self.even.scale(c), odd: self.odd.scale(c) }
    }

    /// The nonzero homogeneous components.
    pub fn homogeneous_parts(&self) -> Vec<(Parity, SuperElement<T>)> {
        let mut out = Vec::with_capacity(2);
        if !self.even.is_zero() {
            out.push((Parity::Even, SuperElement { even: self.even.clone(), odd: FormExpansion::zero(ODD_WEIGHT) }));
        }
        if !self.odd.is_zero() {
            out.push((Parity::Odd, SuperElement { even: FormExpansion::zero(EVEN_WEIGHT), odd: self.odd.clone() }));
        }
        out
    }

    /// Nonzero coefficients over both parities.
    pub fn terms(&self) -> impl Iterator<Item = (SuperIndex, &T)> {
        let e = self.even.iter().map(|(i, c)| (SuperIndex::even(*i), c));
        let o = self.odd.iter().map(|(i, c)| (SuperIndex::odd(*i), c));
        e.chain(o)
    }
}

impl<T: Scalar> fmt::Display for SuperElement<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) + ({})", self.even, self.odd)
    }
}

/// `-1` when both parities are odd, `+1` otherwise.
pub fn sign(a: Parity, b: Parity) -> i32 {
    if a.is_odd() && b.is_odd() {
        -1
    } else {
        1
    }
}

/// `(g, e)`: a function plus a vector field, acting as `g + e d/dz`.
#[derive(Clone, Debug, PartialEq)]
pub struct D1Element<T> {
    fun: FormExpansion<T>,
    vec: FormExpansion<T>,
}

impl<T: Scalar> D1Element<T> {
    pub fn new(fun: FormExpansion<T>, vec: FormExpansion<T>) -> Result<Self> {
        check_weight(HalfInt::ZERO, fun.weight())?;
        check_weight(EVEN_WEIGHT, vec.weight())?;
        Ok(D1Element { fun, vec })
    }

    pub fn fun(&self) -> &FormExpansion<T> {
        &self.fun
    }

    pub fn vec(&self) -> &FormExpansion<T> {
        &self.vec
    }
}

/// `(f, φ)` in functions ⊕ half-forms.
#[derive(Clone, Debug, PartialEq)]
pub struct JordanElement<T> {
    even: FormExpansion<T>,
    odd: FormExpansion<T>,
}

impl<T: Scalar> JordanElement<T> {
    pub fn new(even: FormExpansion<T>, odd: FormExpansion<T>) -> Result<Self> {
        check_weight(HalfInt::ZERO, even.weight())?;
        check_weight(ODD_WEIGHT, odd.weight())?;
        Ok(JordanElement { even, odd })
    }

    pub fn even(&self) -> &FormExpansion<T> {
        &self.even
    }

    pub fn odd(&self) -> &FormExpansion<T> {
        &self.odd
    }
}

type ProductKey = (Kernel, HalfInt, BasisIndex, HalfInt, BasisIndex);

/// A basis together with memoized expansions of basis-pair products.
///
/// Products of expansions are assembled from these structure constants, so
/// repeated sweeps over a window never redo rational-function arithmetic.
pub struct Algebra<T> {
    basis: Basis<T>,
    products: RwLock<HashMap<ProductKey, Arc<FormExpansion<T>>>>,
}

impl<T: Scalar> Algebra<T> {
    pub fn new(cfg: SurfaceConfig<T>) -> Self {
        Algebra { basis: Basis::new(cfg), products: RwLock::default() }
    }

    pub fn basis(&self) -> &Basis<T> {
        &self.basis
    }

    pub fn config(&self) -> &SurfaceConfig<T> {
        self.basis.config()
    }

    pub fn k(&self) -> usize {
        self.basis.k()
    }

    /// Expansion of the product of two basis elements.
    pub fn basis_product(
        &self,
        kernel: Kernel,
        lambda: HalfInt,
        a: BasisIndex,
        nu: HalfInt,
        b: BasisIndex,
    ) -> Result<Arc<FormExpansion<T>>> {
        let key = (kernel, lambda, a, nu, b);
        if let Some(v) = self.products.read().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let f = self.basis.element(lambda, a)?;
        let g = self.basis.element(nu, b)?;
        let v = Arc::new(self.basis.expand(&kernel.apply(&f, &g))?);
        self.products.write().unwrap().insert(key, v.clone());
        Ok(v)
    }

    /// Bilinear extension of a kernel to expansions.
    pub fn product(&self, kernel: Kernel, x: &FormExpansion<T>, y: &FormExpansion<T>) -> Result<FormExpansion<T>> {
        let mut out = FormExpansion::zero(kernel.result_weight(x.weight(), y.weight()));
        for (a, ca) in x.iter() {
            for (b, cb) in y.iter() {
                let p = self.basis_product(kernel, x.weight(), *a, y.weight(), *b)?;
                out.add_scaled(&ca.mul_ref(cb), &p)?;
            }
        }
        Ok(out)
    }

    /// The super-bracket: vector-field bracket on evens, Lie derivative on
    /// mixed pairs, product on odd pairs.
    pub fn super_bracket(&self, x: &SuperElement<T>, y: &SuperElement<T>) -> Result<SuperElement<T>> {
        let mut even = self.product(Kernel::Bracket, &x.even, &y.even)?;
        even.add_scaled(&T::one(), &self.product(Kernel::Mult, &x.odd, &y.odd)?)?;
        let mut odd = self.product(Kernel::Bracket, &x.even, &y.odd)?;
        odd.add_scaled(&-T::one(), &self.product(Kernel::Bracket, &y.even, &x.odd)?)?;
        SuperElement::new(even, odd)
    }

    /// Super-bracket of two basis elements.
    pub fn super_bracket_basis(&self, a: SuperIndex, b: SuperIndex) -> Result<SuperElement<T>> {
        let kernel = Op::Super.kernel(a.weight(), b.weight())?;
        let p = self.basis_product(kernel, a.weight(), a.index, b.weight(), b.index)?;
        match a.parity.combine(b.parity) {
            Parity::Even => SuperElement::even_part((*p).clone()),
            Parity::Odd => SuperElement::odd_part((*p).clone()),
        }
    }

    /// Graded Jacobi sum
    /// `(-1)^{x̄z̄}[x,[y,z]] + (-1)^{ȳx̄}[y,[z,x]] + (-1)^{z̄ȳ}[z,[x,y]]`,
    /// extended trilinearly to inhomogeneous arguments.
    pub fn super_jacobi(
        &self,
        x: &SuperElement<T>,
        y: &SuperElement<T>,
        z: &SuperElement<T>,
    ) -> Result<SuperElement<T>> {
        let mut acc = SuperElement::zero();
        for (px, xh) in x.homogeneous_parts() {
            for (py, yh) in y.homogeneous_parts() {
                for (pz, zh) in z.homogeneous_parts() {
                    let terms = [
                        (sign(px, pz), &xh, self.super_bracket(&yh, &zh)?),
                        (sign(py, px), &yh, self.super_bracket(&zh, &xh)?),
                        (sign(pz, py), &zh, self.super_bracket(&xh, &yh)?),
                    ];
                    for (s, a, bc) in terms {
                        let t = self.super_bracket(a, &bc)?;
                        acc = if s > 0 { acc.add(&t) } else { acc.sub(&t) };
                    }
                }
            }
        }
        Ok(acc)
    }

    /// `[(g, e), (h, f)] = (e.h - f.g, [e, f])`.
    pub fn d1_bracket(&self, a: &D1Element<T>, b: &D1Element<T>) -> Result<D1Element<T>> {
        let mut fun = self.product(Kernel::Bracket, &a.vec, &b.fun)?;
        fun.add_scaled(&-T::one(), &self.product(Kernel::Bracket, &b.vec, &a.fun)?)?;
        let vec = self.product(Kernel::Bracket, &a.vec, &b.vec)?;
        D1Element::new(fun, vec)
    }

    /// `(f, φ) ∘ (g, ψ) = (f g + [φ, ψ], f ψ + g φ)`.
    pub fn jordan_product(&self, x: &JordanElement<T>, y: &JordanElement<T>) -> Result<JordanElement<T>> {
        let mut even = self.product(Kernel::Mult, &x.even, &y.even)?;
        even.add_scaled(&T::one(), &self.product(Kernel::Bracket, &x.odd, &y.odd)?)?;
        let mut odd = self.product(Kernel::Mult, &x.even, &y.odd)?;
        odd.add_scaled(&T::one(), &self.product(Kernel::Mult, &y.even, &x.odd)?)?;
        JordanElement::new(even, odd)
    }

    /// Expansions of all basis-pair products of the window.
    pub fn struct_table(&self, op: Op, lambda: HalfInt, nu: HalfInt, window: &Window) -> Result<StructTable<T>> {
        let kernel = op.kernel(lambda, nu)?;
        let k = self.k();
        let mut rows = BTreeMap::new();
        for a in window.indices(lambda, k) {
            for b in window.indices(nu, k) {
                let p = self.basis_product(kernel, lambda, a, nu, b)?;
                rows.insert((a, b), (*p).clone());
            }
        }
        Ok(StructTable { op, lambda, nu, window: *window, rows })
    }

    /// Bounds measured on `inner` and on `outer`, with a stability flag.
    pub fn grading_report(
        &self,
        op: Op,
        lambda: HalfInt,
        nu: HalfInt,
        inner: &Window,
        outer: &Window,
    ) -> Result<GradingReport> {
        let a = self.struct_table(op, lambda, nu, inner)?.grading_bounds()?;
        let b = self.struct_table(op, lambda, nu, outer)?.grading_bounds()?;
        Ok(GradingReport { inner: *inner, outer: *outer, inner_bounds: a, outer_bounds: b, stable: a == b })
    }
}

/// Structure constants of one product on one window.
#[derive(Clone, Debug, PartialEq)]
pub struct StructTable<T> {
    pub op: Op,
    pub lambda: HalfInt,
    pub nu: HalfInt,
    pub window: Window,
    pub rows: BTreeMap<(BasisIndex, BasisIndex), FormExpansion<T>>,
}

/// One nonzero structure constant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub n: String,
    pub p: usize,
    pub m: String,
    pub r: usize,
    pub h: String,
    pub s: usize,
    pub coeff: String,
}

impl<T: Scalar> StructTable<T> {
    /// Nonzero entries in `(n, p, m, r, h, s)` order, each coefficient
    /// multiplied by `scale`.
    pub fn rows(&self, scale: &T) -> Vec<TableRow> {
        let mut out = Vec::new();
        for ((a, b), e) in &self.rows {
            for (c, v) in e.iter() {
                out.push(TableRow {
                    n: a.degree.to_string(),
                    p: a.point,
                    m: b.degree.to_string(),
                    r: b.point,
                    h: c.degree.to_string(),
                    s: c.point,
                    coeff: v.mul_ref(scale).to_string(),
                });
            }
        }
        out
    }

    /// `(min, max)` of `h - (n + m)` over all nonzero entries.
    pub fn grading_bounds(&self) -> Result<(i64, i64)> {
        let mut bounds: Option<(i64, i64)> = None;
        for ((a, b), e) in &self.rows {
            let level = a.degree + b.degree;
            for c in e.terms().keys() {
                let d = (c.degree - level).as_int().expect("products land in the matching class");
                bounds = Some(match bounds {
                    None => (d, d),
                    Some((lo, hi)) => (lo.min(d), hi.max(d)),
                });
            }
        }
        bounds.ok_or(KnError::EmptyTable)
    }

    /// Entries whose degree-`(n+m)` part differs from the leading-term formula.
    pub fn leading_term_violations(&self) -> Vec<(BasisIndex, BasisIndex)> {
        let kernel = self.op.kernel(self.lambda, self.nu).expect("table built from a valid op");
        let k_points: Vec<usize> =
            self.rows.keys().map(|(a, _)| a.point).chain(self.rows.keys().map(|(_, b)| b.point)).collect();
        let k = k_points.into_iter().max().unwrap_or(0);
        let mut bad = Vec::new();
        for ((a, b), e) in &self.rows {
            let h = a.degree + b.degree;
            let lead: T = kernel.leading_coefficient(self.lambda, a.degree, self.nu, b.degree);
            let ok = (1..=k).all(|s| {
                let expect = if a.point == b.point && s == a.point { lead.clone() } else { T::zero() };
                e.coeff(&BasisIndex::new(h, s)) == expect
            });
            let below = e.min_degree().is_some_and(|d| d < h);
            if !ok || below {
                bad.push((*a, *b));
            }
        }
        bad
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GradingReport {
    pub inner: Window,
    pub outer: Window,
    pub inner_bounds: (i64, i64),
    pub outer_bounds: (i64, i64),
    pub stable: bool,
}

/// Components of an expansion split at degree 0 and `-R`.
#[derive(Clone, Debug, PartialEq)]
pub struct Triangular<T> {
    /// degrees `m > 0`
    pub plus: FormExpansion<T>,
    /// degrees `-R ≤ m ≤ 0`
    pub zero: FormExpansion<T>,
    /// degrees `m < -R`
    pub minus: FormExpansion<T>,
}

pub fn triangular_part<T: Scalar>(x: &FormExpansion<T>, r: i64) -> Triangular<T> {
    let zero = HalfInt::ZERO;
    let cut = HalfInt::from_int(-r);
    Triangular {
        plus: x.filter_degrees(|m| m > zero),
        zero: x.filter_degrees(|m| cut <= m && m <= zero),
        minus: x.filter_degrees(|m| m < cut),
    }
}
