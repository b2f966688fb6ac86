//! Geometric 2-cocycles of the vector-field algebra and of the Lie
//! superalgebra, coboundaries, and the checks built on them.
//!
//! Cocycle values are integrals over a cycle `C = Σ c_i C_i` where `C_i` is
//! a small circle around `P_i`, so they reduce to weighted residue sums. The
//! projective connection is `R = 0 + Ω` for a quadratic differential `Ω`.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::error::{KnError, Result};
use crate::exact::{laurent_at, residue, LaurentJet, Point, RationalFunction};
use crate::knalgebra::{sign, Algebra, Parity, SuperElement, SuperIndex, EVEN_WEIGHT, ODD_WEIGHT};
use crate::knbasis::{check_weight, MeroForm};
use crate::scalar::Scalar;
use crate::surface::{degree_set, BasisIndex, HalfInt, SurfaceConfig, Window};

pub const QUADRATIC_WEIGHT: HalfInt = HalfInt::from_twice(4);

/// `S(h) = h'''/h' - (3/2)(h''/h')²`.
pub fn schwarzian<T: Scalar>(h: &RationalFunction<T>) -> Result<RationalFunction<T>> {
    let d1 = h.derivative();
    if d1.is_zero() {
        return Err(KnError::ConstantFunction);
    }
    let d2 = d1.derivative();
    let d3 = d2.derivative();
    let a = d3.div(&d1)?;
    let b = d2.div(&d1)?;
    let three_halves = T::from_int(3).div_ref(&T::from_int(2));
    Ok(a.sub(&b.mul(&b).scale(&three_halves)))
}

/// `R = 0 + Ω` on the affine chart.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveConnection<T> {
    omega: MeroForm<T>,
}

impl<T: Scalar> ProjectiveConnection<T> {
    pub fn zero() -> Self {
        ProjectiveConnection { omega: MeroForm::zero(QUADRATIC_WEIGHT) }
    }

    pub fn new(omega: MeroForm<T>) -> Result<Self> {
        check_weight(QUADRATIC_WEIGHT, omega.weight())?;
        Ok(ProjectiveConnection { omega })
    }

    pub fn from_func(func: RationalFunction<T>) -> Self {
        ProjectiveConnection { omega: MeroForm::new(QUADRATIC_WEIGHT, func) }
    }

    pub fn omega(&self) -> &MeroForm<T> {
        &self.omega
    }

    /// Coefficient function of the connection.
    pub fn r(&self) -> &RationalFunction<T> {
        self.omega.func()
    }

    pub fn is_zero(&self) -> bool {
        self.omega.is_zero()
    }
}

/// Integer combination `Σ c_i [C_i]` of the circles around the in-points.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CycleClass {
    coeffs: Vec<i64>,
}

impl CycleClass {
    pub fn new(coeffs: Vec<i64>) -> Self {
        CycleClass { coeffs }
    }

    /// The separating cycle `C_S = Σ C_i`.
    pub fn separating(k: usize) -> Self {
        CycleClass { coeffs: vec![1; k] }
    }

    /// The circle `C_i` alone (1-based).
    pub fn single(k: usize, i: usize) -> Self {
        let mut coeffs = vec![0; k];
        coeffs[i - 1] = 1;
        CycleClass { coeffs }
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn is_separating(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 1)
    }

    pub fn check_len(&self, k: usize) -> Result<()> {
        if self.coeffs.len() == k {
            Ok(())
        } else {
            Err(KnError::CycleLength { expected: k, found: self.coeffs.len() })
        }
    }
}

/// Data fixing one geometric cocycle `Φ_{C,R}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CocycleSpec<T> {
    pub cycle: CycleClass,
    pub connection: ProjectiveConnection<T>,
}

impl<T: Scalar> CocycleSpec<T> {
    pub fn new(cycle: CycleClass, connection: ProjectiveConnection<T>) -> Self {
        CocycleSpec { cycle, connection }
    }

    pub fn with_cycle(cycle: CycleClass) -> Self {
        CocycleSpec { cycle, connection: ProjectiveConnection::zero() }
    }

    fn validate(&self, cfg: &SurfaceConfig<T>) -> Result<()> {
        self.cycle.check_len(cfg.k())?;
        if !self.connection.omega().is_a_holomorphic(cfg) {
            return Err(KnError::NotAHolomorphic);
        }
        Ok(())
    }
}

/// A linear form on one parity of the superalgebra, zero on the other.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearForm<T> {
    parity: Parity,
    values: BTreeMap<BasisIndex, T>,
}

impl<T: Scalar> LinearForm<T> {
    pub fn zero(parity: Parity) -> Self {
        LinearForm { parity, values: BTreeMap::new() }
    }

    pub fn new(parity: Parity, values: impl IntoIterator<Item = (BasisIndex, T)>) -> Result<Self> {
        let mut k = Self::zero(parity);
        for (idx, v) in values {
            k.set(idx, v)?;
        }
        Ok(k)
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn values(&self) -> &BTreeMap<BasisIndex, T> {
        &self.values
    }

    pub fn get(&self, idx: &BasisIndex) -> T {
        self.values.get(idx).cloned().unwrap_or_else(T::zero)
    }

    pub fn set(&mut self, idx: BasisIndex, v: T) -> Result<()> {
        if !degree_set(self.parity.weight()).contains(idx.degree) {
            return Err(KnError::Parity(format!(
                "degree {} does not belong to the {:?} part",
                idx.degree, self.parity
            )));
        }
        if v.is_zero() {
            self.values.remove(&idx);
        } else {
            self.values.insert(idx, v);
        }
        Ok(())
    }

    pub fn eval(&self, x: &SuperElement<T>) -> T {
        let mut acc = T::zero();
        for (idx, c) in x.part(self.parity).iter() {
            if let Some(v) = self.values.get(idx) {
                acc.add_product(c, v);
            }
        }
        acc
    }
}

/// A bilinear form on the superalgebra given by its values on basis pairs.
pub trait SuperBilinear<T: Scalar> {
    fn basis_value(&self, a: SuperIndex, b: SuperIndex) -> Result<T>;

    fn value(&self, x: &SuperElement<T>, y: &SuperElement<T>) -> Result<T> {
        let mut acc = T::zero();
        for (a, ca) in x.terms() {
            for (b, cb) in y.terms() {
                let v = self.basis_value(a, b)?;
                if !v.is_zero() {
                    acc = acc.add_ref(&ca.mul_ref(cb).mul_ref(&v));
                }
            }
        }
        Ok(acc)
    }
}

fn ff2<T: Scalar>(x: i64) -> T {
    T::from_int(x * (x - 1))
}

fn ff3<T: Scalar>(x: i64) -> T {
    T::from_int(x * (x - 1) * (x - 2))
}

fn half<T: Scalar>() -> T {
    T::one().div_ref(&T::from_int(2))
}

/// `½(e'''f - ef''') - R(e'f - ef')`.
pub fn vector_integrand<T: Scalar>(
    e: &RationalFunction<T>,
    f: &RationalFunction<T>,
    r: &RationalFunction<T>,
) -> RationalFunction<T> {
    let (e1, f1) = (e.derivative(), f.derivative());
    let e3 = e1.derivative().derivative();
    let f3 = f1.derivative().derivative();
    let base = e3.mul(f).sub(&e.mul(&f3)).scale(&half());
    let conn = r.mul(&e1.mul(f).sub(&e.mul(&f1)));
    base.sub(&conn)
}

/// `-(φ''ψ + φψ'' - Rφψ)`.
pub fn half_integrand<T: Scalar>(
    phi: &RationalFunction<T>,
    psi: &RationalFunction<T>,
    r: &RationalFunction<T>,
) -> RationalFunction<T> {
    let phi2 = phi.derivative().derivative();
    let psi2 = psi.derivative().derivative();
    let pp = phi.mul(psi);
    phi2.mul(psi).add(&phi.mul(&psi2)).sub(&r.mul(&pp)).neg()
}

fn cycle_integral<T: Scalar>(cfg: &SurfaceConfig<T>, cycle: &CycleClass, g: &RationalFunction<T>) -> T {
    let mut acc = T::zero();
    for (c, p) in cycle.coeffs().iter().zip(cfg.working_points()) {
        if *c != 0 {
            acc = acc.add_ref(&residue(g, p).mul_ref(&T::from_int(*c)));
        }
    }
    acc
}

fn check_forms<T: Scalar>(cfg: &SurfaceConfig<T>, w: HalfInt, f: &MeroForm<T>, g: &MeroForm<T>) -> Result<()> {
    check_weight(w, f.weight())?;
    check_weight(w, g.weight())?;
    if !f.is_a_holomorphic(cfg) || !g.is_a_holomorphic(cfg) {
        return Err(KnError::NotAHolomorphic);
    }
    Ok(())
}

/// `Φ_{C,R}(e, f)` for vector fields, by residues at the in-points.
pub fn cocycle_vector<T: Scalar>(
    cfg: &SurfaceConfig<T>,
    spec: &CocycleSpec<T>,
    e: &MeroForm<T>,
    f: &MeroForm<T>,
) -> Result<T> {
    spec.validate(cfg)?;
    check_forms(cfg, EVEN_WEIGHT, e, f)?;
    let g = vector_integrand(e.func(), f.func(), spec.connection.r());
    Ok(cycle_integral(cfg, &spec.cycle, &g))
}

/// `Φ_{C,R}(φ, ψ)` for half-forms, by residues at the in-points.
pub fn cocycle_half<T: Scalar>(
    cfg: &SurfaceConfig<T>,
    spec: &CocycleSpec<T>,
    phi: &MeroForm<T>,
    psi: &MeroForm<T>,
) -> Result<T> {
    spec.validate(cfg)?;
    check_forms(cfg, ODD_WEIGHT, phi, psi)?;
    let g = half_integrand(phi.func(), psi.func(), spec.connection.r());
    Ok(cycle_integral(cfg, &spec.cycle, &g))
}

/// The separating-cycle cocycle evaluated at the out-point instead:
/// `-res_Q` of the integrand. Only `Φ_{C_S}` admits this form.
pub fn cocycle_out<T: Scalar>(
    cfg: &SurfaceConfig<T>,
    connection: &ProjectiveConnection<T>,
    f: &MeroForm<T>,
    g: &MeroForm<T>,
) -> Result<T> {
    let spec = CocycleSpec::new(CycleClass::separating(cfg.k()), connection.clone());
    spec.validate(cfg)?;
    let integrand = if f.weight() == EVEN_WEIGHT {
        check_forms(cfg, EVEN_WEIGHT, f, g)?;
        vector_integrand(f.func(), g.func(), connection.r())
    } else {
        check_forms(cfg, ODD_WEIGHT, f, g)?;
        half_integrand(f.func(), g.func(), connection.r())
    };
    Ok(-residue(&integrand, &Point::Infinity))
}

/// `Φ_{C,R}` on the superalgebra, memoized on basis pairs and evaluated
/// from local jets.
pub struct GeometricCocycle<'a, T> {
    alg: &'a Algebra<T>,
    spec: CocycleSpec<T>,
    r_jets: RwLock<HashMap<usize, Arc<LaurentJet<T>>>>,
    cache: RwLock<HashMap<(SuperIndex, SuperIndex), T>>,
}

impl<'a, T: Scalar> GeometricCocycle<'a, T> {
    pub fn new(alg: &'a Algebra<T>, spec: CocycleSpec<T>) -> Result<Self> {
        spec.validate(alg.config())?;
        Ok(GeometricCocycle { alg, spec, r_jets: RwLock::default(), cache: RwLock::default() })
    }

    pub fn spec(&self) -> &CocycleSpec<T> {
        &self.spec
    }

    fn r_jet(&self, i: usize, length: usize) -> Arc<LaurentJet<T>> {
        if let Some(j) = self.r_jets.read().unwrap().get(&i) {
            if j.len() >= length {
                return j.clone();
            }
        }
        let point = &self.alg.config().working_points()[i];
        let j = Arc::new(laurent_at(self.spec.connection.r(), point, length.max(8)));
        self.r_jets.write().unwrap().insert(i, j.clone());
        j
    }

    /// Residue at `P_{i+1}` of the integrand for a homogeneous basis pair.
    fn local_value(&self, a: SuperIndex, b: SuperIndex, i: usize) -> Result<T> {
        let basis = self.alg.basis();
        let (wa, wb) = (a.weight(), b.weight());
        let lead_a = basis.jet(wa, a.index, i, 1)?.lead_order();
        let lead_b = basis.jet(wb, b.index, i, 1)?.lead_order();
        let vector = a.parity == Parity::Even;
        // base term collects exponents x + y = top
        let top = if vector { 2 } else { 1 };
        let r = &self.spec.connection;
        let r_lead = if r.is_zero() { None } else { self.r_jet(i, 1).lead_order().into() };
        // connection term collects w + x + y = r_top
        let r_top = if vector { 0 } else { -1 };
        let mut reach = top - lead_a - lead_b;
        if let Some(rl) = r_lead {
            reach = reach.max(r_top - rl - lead_a - lead_b);
        }
        if reach < 0 {
            return Ok(T::zero());
        }
        let len = reach as usize + 1;
        let ja = basis.jet(wa, a.index, i, len)?;
        let jb = basis.jet(wb, b.index, i, len)?;
        let ca = |x: i64| ja.coeff_at(x).expect("jet long enough");
        let cb = |y: i64| jb.coeff_at(y).expect("jet long enough");
        let mut acc = T::zero();
        for x in lead_a..=top - lead_b {
            let y = top - x;
            let (ex, fy) = (ca(x), cb(y));
            if ex.is_zero() || fy.is_zero() {
                continue;
            }
            let w: T =
                if vector { ff3::<T>(x).sub_ref(&ff3(y)).mul_ref(&half()) } else { -ff2::<T>(x).add_ref(&ff2(y)) };
            acc = acc.add_ref(&ex.mul_ref(&fy).mul_ref(&w));
        }
        if let Some(rl) = r_lead {
            let span = r_top - rl - lead_a - lead_b;
            if span >= 0 {
                let jr = self.r_jet(i, span as usize + 1);
                for x in lead_a..=r_top - rl - lead_b {
                    for y in lead_b..=r_top - rl - x {
                        let wexp = r_top - x - y;
                        let rw = jr.coeff_at(wexp).expect("jet long enough");
                        let (ex, fy) = (ca(x), cb(y));
                        if rw.is_zero() || ex.is_zero() || fy.is_zero() {
                            continue;
                        }
                        let t = rw.mul_ref(&ex).mul_ref(&fy);
                        acc = if vector { acc.sub_ref(&t.mul_ref(&T::from_int(x - y))) } else { acc.add_ref(&t) };
                    }
                }
            }
        }
        Ok(acc)
    }
}

impl<T: Scalar> SuperBilinear<T> for GeometricCocycle<'_, T> {
    fn basis_value(&self, a: SuperIndex, b: SuperIndex) -> Result<T> {
        if a.parity != b.parity {
            return Ok(T::zero());
        }
        if let Some(v) = self.cache.read().unwrap().get(&(a, b)) {
            return Ok(v.clone());
        }
        let mut acc = T::zero();
        for (i, c) in self.spec.cycle.coeffs().iter().enumerate() {
            if *c != 0 {
                acc = acc.add_ref(&self.local_value(a, b, i)?.mul_ref(&T::from_int(*c)));
            }
        }
        self.cache.write().unwrap().insert((a, b), acc.clone());
        Ok(acc)
    }
}

/// The coboundary `δ₁k(x, y) = k([x, y])`.
pub struct Coboundary<'a, T> {
    alg: &'a Algebra<T>,
    k: LinearForm<T>,
}

impl<'a, T: Scalar> Coboundary<'a, T> {
    pub fn new(alg: &'a Algebra<T>, k: LinearForm<T>) -> Self {
        Coboundary { alg, k }
    }

    pub fn form(&self) -> &LinearForm<T> {
        &self.k
    }
}

impl<T: Scalar> SuperBilinear<T> for Coboundary<'_, T> {
    fn basis_value(&self, a: SuperIndex, b: SuperIndex) -> Result<T> {
        if a.parity.combine(b.parity) != self.k.parity {
            return Ok(T::zero());
        }
        Ok(self.k.eval(&self.alg.super_bracket_basis(a, b)?))
    }
}

/// `δ₁k(x, y)` for arbitrary elements.
pub fn coboundary<T: Scalar>(
    alg: &Algebra<T>,
    k: &LinearForm<T>,
    x: &SuperElement<T>,
    y: &SuperElement<T>,
) -> Result<T> {
    Ok(k.eval(&alg.super_bracket(x, y)?))
}

/// `c₁ + s·c₂` on basis pairs.
pub struct Combination<'a, T> {
    first: &'a dyn SuperBilinear<T>,
    second: &'a dyn SuperBilinear<T>,
    scale: T,
}

impl<'a, T: Scalar> Combination<'a, T> {
    pub fn new(first: &'a dyn SuperBilinear<T>, second: &'a dyn SuperBilinear<T>, scale: T) -> Self {
        Combination { first, second, scale }
    }
}

impl<T: Scalar> SuperBilinear<T> for Combination<'_, T> {
    fn basis_value(&self, a: SuperIndex, b: SuperIndex) -> Result<T> {
        let v = self.second.basis_value(a, b)?;
        Ok(self.first.basis_value(a, b)?.add_ref(&v.mul_ref(&self.scale)))
    }
}

/// Graded cocycle sum
/// `(-1)^{x̄z̄}c(x,[y,z]) + (-1)^{ȳx̄}c(y,[z,x]) + (-1)^{z̄ȳ}c(z,[x,y])`,
/// extended trilinearly.
pub fn super_cocycle_check<T: Scalar>(
    alg: &Algebra<T>,
    c: &dyn SuperBilinear<T>,
    x: &SuperElement<T>,
    y: &SuperElement<T>,
    z: &SuperElement<T>,
) -> Result<T> {
    let mut acc = T::zero();
    for (px, xh) in x.homogeneous_parts() {
        for (py, yh) in y.homogeneous_parts() {
            for (pz, zh) in z.homogeneous_parts() {
                let terms = [
                    (sign(px, pz), &xh, alg.super_bracket(&yh, &zh)?),
                    (sign(py, px), &yh, alg.super_bracket(&zh, &xh)?),
                    (sign(pz, py), &zh, alg.super_bracket(&xh, &yh)?),
                ];
                for (s, a, bc) in terms {
                    let v = c.value(a, &bc)?;
                    acc = if s > 0 { acc.add_ref(&v) } else { acc.sub_ref(&v) };
                }
            }
        }
    }
    Ok(acc)
}

/// The defect of the graded cocycle identity on a basis triple.
pub fn super_cocycle_defect_basis<T: Scalar>(
    alg: &Algebra<T>,
    c: &dyn SuperBilinear<T>,
    a: SuperIndex,
    b: SuperIndex,
    d: SuperIndex,
) -> Result<T> {
    let mut acc = T::zero();
    let terms =
        [(sign(a.parity, d.parity), a, b, d), (sign(b.parity, a.parity), b, d, a), (sign(d.parity, b.parity), d, a, b)];
    for (s, x, y, z) in terms {
        let yz = alg.super_bracket_basis(y, z)?;
        let mut v = T::zero();
        for (h, coeff) in yz.terms() {
            let cv = c.basis_value(x, h)?;
            if !cv.is_zero() {
                v.add_product(coeff, &cv);
            }
        }
        acc = if s > 0 { acc.add_ref(&v) } else { acc.sub_ref(&v) };
    }
    Ok(acc)
}

/// `κ_C(e) = Σ c_i res_{P_i}(Ω e)` on vector fields, zero on half-forms.
pub struct ConnectionForm<'a, T> {
    alg: &'a Algebra<T>,
    cycle: CycleClass,
    omega: ProjectiveConnection<T>,
    cache: RwLock<BTreeMap<BasisIndex, T>>,
}

impl<'a, T: Scalar> ConnectionForm<'a, T> {
    pub fn new(alg: &'a Algebra<T>, cycle: CycleClass, omega: ProjectiveConnection<T>) -> Result<Self> {
        CocycleSpec::new(cycle.clone(), omega.clone()).validate(alg.config())?;
        Ok(ConnectionForm { alg, cycle, omega, cache: RwLock::default() })
    }

    pub fn value(&self, idx: BasisIndex) -> Result<T> {
        if let Some(v) = self.cache.read().unwrap().get(&idx) {
            return Ok(v.clone());
        }
        let e = self.alg.basis().element(EVEN_WEIGHT, idx)?;
        let g = self.omega.r().mul(e.func());
        let v = cycle_integral(self.alg.config(), &self.cycle, &g);
        self.cache.write().unwrap().insert(idx, v.clone());
        Ok(v)
    }

    pub fn eval(&self, x: &SuperElement<T>) -> Result<T> {
        let mut acc = T::zero();
        for (idx, c) in x.even().iter() {
            acc.add_product(c, &self.value(*idx)?);
        }
        Ok(acc)
    }

    /// Every value computed so far, as a linear form.
    pub fn to_linear_form(&self) -> LinearForm<T> {
        let values = self.cache.read().unwrap().clone();
        LinearForm::new(Parity::Even, values).expect("even indices")
    }
}

impl<T: Scalar> SuperBilinear<T> for ConnectionForm<'_, T> {
    /// `δ₁κ` on basis pairs.
    fn basis_value(&self, a: SuperIndex, b: SuperIndex) -> Result<T> {
        if a.parity != b.parity {
            return Ok(T::zero());
        }
        self.eval(&self.alg.super_bracket_basis(a, b)?)
    }
}

/// A pair where two bilinear forms disagree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairMismatch {
    pub x: String,
    pub y: String,
    pub left: String,
    pub right: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionChangeReport<T> {
    pub kappa: LinearForm<T>,
    pub pairs_checked: usize,
    pub mismatches: Vec<PairMismatch>,
}

impl<T> ConnectionChangeReport<T> {
    pub fn exact(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares `Φ_{C,Ω} - Φ_{C,0}` with `δ₁κ_C` on every basis pair of the window.
pub fn connection_change_check<T: Scalar>(
    alg: &Algebra<T>,
    cycle: &CycleClass,
    omega: &ProjectiveConnection<T>,
    window: &Window,
) -> Result<ConnectionChangeReport<T>> {
    let with = GeometricCocycle::new(alg, CocycleSpec::new(cycle.clone(), omega.clone()))?;
    let without = GeometricCocycle::new(alg, CocycleSpec::with_cycle(cycle.clone()))?;
    let kappa = ConnectionForm::new(alg, cycle.clone(), omega.clone())?;
    let idx = SuperIndex::window(window, alg.k());
    let mut mismatches = Vec::new();
    let mut pairs = 0;
    for &a in &idx {
        for &b in &idx {
            pairs += 1;
            let lhs = with.basis_value(a, b)?.sub_ref(&without.basis_value(a, b)?);
            let rhs = kappa.basis_value(a, b)?;
            if lhs != rhs {
                mismatches.push(PairMismatch {
                    x: a.to_string(),
                    y: b.to_string(),
                    left: lhs.to_string(),
                    right: rhs.to_string(),
                });
            }
        }
    }
    Ok(ConnectionChangeReport { kappa: kappa.to_linear_form(), pairs_checked: pairs, mismatches })
}

/// Extreme levels `n + m` at which a bilinear form is nonzero on a window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundednessReport {
    pub window: Window,
    pub max_level_nonzero: Option<HalfInt>,
    pub min_level_nonzero: Option<HalfInt>,
}

pub fn boundedness_report<T: Scalar>(c: &dyn SuperBilinear<T>, k: usize, window: &Window) -> Result<BoundednessReport> {
    let idx = SuperIndex::window(window, k);
    let mut lo: Option<HalfInt> = None;
    let mut hi: Option<HalfInt> = None;
    for &a in &idx {
        for &b in &idx {
            if c.basis_value(a, b)?.is_zero() {
                continue;
            }
            let level = a.index.degree + b.index.degree;
            lo = Some(lo.map_or(level, |l| l.min(level)));
            hi = Some(hi.map_or(level, |h| h.max(level)));
        }
    }
    Ok(BoundednessReport { window: *window, max_level_nonzero: hi, min_level_nonzero: lo })
}

/// Reports on two nested windows with stability flags for both bounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NestedBoundedness {
    pub inner: BoundednessReport,
    pub outer: BoundednessReport,
    pub upper_stable: bool,
    pub lower_stable: bool,
}

pub fn boundedness_nested<T: Scalar>(
    c: &dyn SuperBilinear<T>,
    k: usize,
    inner: &Window,
    outer: &Window,
) -> Result<NestedBoundedness> {
    let a = boundedness_report(c, k, inner)?;
    let b = boundedness_report(c, k, outer)?;
    Ok(NestedBoundedness {
        upper_stable: a.max_level_nonzero == b.max_level_nonzero,
        lower_stable: a.min_level_nonzero == b.min_level_nonzero,
        inner: a,
        outer: b,
    })
}

/// Exact rank of a dense matrix over the scalar field.
pub fn rank<T: Scalar>(mut rows: Vec<Vec<T>>) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = T::one().div_ref(&rows[rank][col]);
        for r in rank + 1..rows.len() {
            if rows[r][col].is_zero() {
                continue;
            }
            let f = rows[r][col].mul_ref(&inv);
            let (top, rest) = rows.split_at_mut(r);
            for (x, p) in rest[0][col..].iter_mut().zip(&top[rank][col..]) {
                *x = x.sub_ref(&p.mul_ref(&f));
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of the evaluation matrix of the forms on all basis pairs of the window.
pub fn independence_rank<T: Scalar>(cocycles: &[&dyn SuperBilinear<T>], k: usize, window: &Window) -> Result<usize> {
    let idx = SuperIndex::window(window, k);
    let mut rows = Vec::with_capacity(cocycles.len());
    for c in cocycles {
        let mut row = Vec::with_capacity(idx.len() * idx.len());
        for &a in &idx {
            for &b in &idx {
                row.push(c.basis_value(a, b)?);
            }
        }
        rows.push(row);
    }
    Ok(rank(rows))
}

/// Outcome of the odd trivialization recursion.
#[derive(Clone, Debug, PartialEq)]
pub struct Trivialization<T> {
    pub phi: LinearForm<T>,
    /// Some recursion step referred to an index above the window.
    pub boundary_touched: bool,
    pub pairs_checked: usize,
    pub residual: Vec<PairMismatch>,
}

impl<T> Trivialization<T> {
    pub fn is_exact(&self) -> bool {
        self.residual.is_empty()
    }
}

/// Builds an odd linear form `Φ` with `c = δ₁Φ` on the window by the
/// descending recursion `Φ(φ_{k,p}) = (c(e_{0,p}, φ_{k,p}) - Φ(y_{k,p})) / k`,
/// where `e_{0,p}.φ_{k,p} = k φ_{k,p} + y_{k,p}`. Values above the window are
/// taken to be zero. The residual `c - δ₁Φ` is then checked on all window pairs.
pub fn trivialize_odd_cocycle<T: Scalar>(
    alg: &Algebra<T>,
    c: &dyn SuperBilinear<T>,
    window: &Window,
) -> Result<Trivialization<T>> {
    let k = alg.k();
    let mut phi = LinearForm::zero(Parity::Odd);
    let mut boundary = false;
    let mut degrees = window.degrees(ODD_WEIGHT);
    degrees.reverse();
    for &kd in &degrees {
        for p in 1..=k {
            let target = BasisIndex::new(kd, p);
            let e0 = SuperIndex::even(BasisIndex::new(HalfInt::ZERO, p));
            let act = alg.super_bracket_basis(e0, SuperIndex::odd(target))?;
            let kk: T = kd.to_scalar();
            let mut rhs = c.basis_value(e0, SuperIndex::odd(target))?;
            for (idx, coeff) in act.odd().iter() {
                if *idx == target {
                    if *coeff != kk {
                        return Err(KnError::Parity(format!("unexpected leading coefficient at {target}")));
                    }
                    continue;
                }
                if idx.degree <= kd {
                    return Err(KnError::Parity(format!("term {idx} below the leading degree of {target}")));
                }
                if !window.contains(idx.degree) {
                    boundary = true;
                    continue;
                }
                rhs = rhs.sub_ref(&coeff.mul_ref(&phi.get(idx)));
            }
            phi.set(target, rhs.div_ref(&kk))?;
        }
    }
    let delta = Coboundary::new(alg, phi.clone());
    let idx = SuperIndex::window(window, k);
    let mut residual = Vec::new();
    let mut pairs = 0;
    for &a in &idx {
        for &b in &idx {
            if a.parity == b.parity {
                continue;
            }
            pairs += 1;
            let lhs = c.basis_value(a, b)?;
            let rhs = delta.basis_value(a, b)?;
            if lhs != rhs {
                residual.push(PairMismatch {
                    x: a.to_string(),
                    y: b.to_string(),
                    left: lhs.to_string(),
                    right: rhs.to_string(),
                });
            }
        }
    }
    Ok(Trivialization { phi, boundary_touched: boundary, pairs_checked: pairs, residual })
}

/// `[x̂, ŷ] = [x, y]^ + Φ(x, y) t`: the bracket and the central coordinate.
pub fn extended_bracket<T: Scalar>(
    alg: &Algebra<T>,
    c: &dyn SuperBilinear<T>,
    x: &SuperElement<T>,
    y: &SuperElement<T>,
) -> Result<(SuperElement<T>, T)> {
    Ok((alg.super_bracket(x, y)?, c.value(x, y)?))
}

/// One nonzero cocycle value on a basis pair.
#[derive(Clone, Debug, PartialEq)]
pub struct CocycleEntry<T> {
    pub x: SuperIndex,
    pub y: SuperIndex,
    pub value: T,
}

impl<T> CocycleEntry<T> {
    /// `ee`, `eo`, `oe` or `oo`.
    pub fn parity_pattern(&self) -> String {
        format!("{}{}", self.x.parity.letter(), self.y.parity.letter())
    }
}

/// All nonzero values on ordered basis pairs of the window, sorted by
/// parity pattern and then by `(n, p, m, r)`.
pub fn cocycle_entries<T: Scalar>(c: &dyn SuperBilinear<T>, k: usize, window: &Window) -> Result<Vec<CocycleEntry<T>>> {
    let idx = SuperIndex::window(window, k);
    let mut out = Vec::new();
    for &a in &idx {
        for &b in &idx {
            let v = c.basis_value(a, b)?;
            if !v.is_zero() {
                out.push(CocycleEntry { x: a, y: b, value: v });
            }
        }
    }
    out.sort_by_key(|e| (e.x.parity, e.y.parity, e.x.index, e.y.index));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse_ratfunc;
    use num_rational::BigRational;
    use num_traits::Zero;

    type Q = BigRational;

    fn rf(s: &str) -> RationalFunction<Q> {
        parse_ratfunc(s).unwrap()
    }

    fn h(s: &str) -> HalfInt {
        s.parse().unwrap()
    }

    fn e(n: i64, p: usize) -> SuperIndex {
        SuperIndex::even(BasisIndex::new(HalfInt::from_int(n), p))
    }

    fn o(n: &str, p: usize) -> SuperIndex {
        SuperIndex::odd(BasisIndex::new(h(n), p))
    }

    fn q(s: &str) -> Q {
        Q::parse_rational(s).unwrap()
    }

    #[test]
    fn schwarzian_examples() {
        assert!(schwarzian(&rf("(2z + 1)/(z - 3)")).unwrap().is_zero());
        assert_eq!(schwarzian(&rf("z^2")).unwrap(), rf("-3/2").mul(&rf("1/z^2")));
        assert!(schwarzian(&rf("z")).unwrap().is_zero());
        assert_eq!(schwarzian(&rf("5")), Err(KnError::ConstantFunction));
    }

    #[test]
    fn classical_values() {
        let cfg = SurfaceConfig::<Q>::classical();
        let spec = CocycleSpec::with_cycle(CycleClass::single(1, 1));
        let vf = |n: i64| MeroForm::new(EVEN_WEIGHT, RationalFunction::z().pow(n + 1).unwrap());
        let hf = |n: &str| {
            let k = (h(n) + HalfInt::HALF).as_int().unwrap();
            MeroForm::new(ODD_WEIGHT, RationalFunction::z().pow(k).unwrap())
        };
        assert_eq!(cocycle_vector(&cfg, &spec, &vf(2), &vf(-2)).unwrap(), q("6"));
        assert_eq!(cocycle_vector(&cfg, &spec, &vf(2), &vf(-1)).unwrap(), q("0"));
        assert_eq!(cocycle_vector(&cfg, &spec, &vf(-1), &vf(0)).unwrap(), q("0"));
        assert_eq!(cocycle_vector(&cfg, &spec, &vf(0), &vf(1)).unwrap(), q("0"));
        assert_eq!(cocycle_half(&cfg, &spec, &hf("3/2"), &hf("-3/2")).unwrap(), q("-4"));
        assert_eq!(cocycle_half(&cfg, &spec, &hf("1/2"), &hf("-1/2")).unwrap(), q("0"));
        assert_eq!(cocycle_half(&cfg, &spec, &hf("1/2"), &hf("3/2")).unwrap(), q("0"));
        let alg = Algebra::new(cfg);
        let c = GeometricCocycle::new(&alg, spec).unwrap();
        for n in -4..=4 {
            let raw = Q::from_int(n * n * n - n);
            assert_eq!(c.basis_value(e(n, 1), e(-n, 1)).unwrap(), raw);
        }
        assert_eq!(c.basis_value(o("3/2", 1), o("-3/2", 1)).unwrap(), q("-4"));
        assert_eq!(c.basis_value(e(1, 1), o("-1/2", 1)).unwrap(), q("0"));
    }

    #[test]
    fn jets_agree_with_direct_integrands() {
        let cfg = SurfaceConfig::<Q>::new(vec![q("0"), q("1"), q("-2")], Point::Infinity).unwrap();
        let alg = Algebra::new(cfg.clone());
        let omegas = [ProjectiveConnection::zero(), ProjectiveConnection::from_func(rf("z^2 - 1/(z - 1)"))];
        for omega in omegas {
            for cycle in [CycleClass::new(vec![1, -2, 3]), CycleClass::separating(3)] {
                let spec = CocycleSpec::new(cycle, omega.clone());
                let c = GeometricCocycle::new(&alg, spec.clone()).unwrap();
                let w = Window::ints(-2, 2);
                for a in SuperIndex::window(&w, 3) {
                    for b in SuperIndex::window(&w, 3) {
                        if a.parity != b.parity {
                            continue;
                        }
                        let fa = alg.basis().element(a.weight(), a.index).unwrap();
                        let fb = alg.basis().element(b.weight(), b.index).unwrap();
                        let direct = if a.parity == Parity::Even {
                            cocycle_vector(&cfg, &spec, &fa, &fb).unwrap()
                        } else {
                            cocycle_half(&cfg, &spec, &fa, &fb).unwrap()
                        };
                        assert_eq!(c.basis_value(a, b).unwrap(), direct, "{a} {b}");
                        if spec.cycle.is_separating() {
                            assert_eq!(cocycle_out(&cfg, &omega, &fa, &fb).unwrap(), direct);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn super_cocycle_condition_classical_example() {
        let alg = Algebra::new(SurfaceConfig::<Q>::classical());
        let c = GeometricCocycle::new(&alg, CocycleSpec::with_cycle(CycleClass::single(1, 1))).unwrap();
        let d = super_cocycle_defect_basis(&alg, &c, e(1, 1), o("1/2", 1), o("-3/2", 1)).unwrap();
        assert_eq!(d, q("0"));
        let x = SuperElement::basis(e(2, 1)).unwrap();
        let y = SuperElement::basis(e(-1, 1)).unwrap().add(&SuperElement::basis(o("-1/2", 1)).unwrap());
        let z = SuperElement::basis(o("-3/2", 1)).unwrap().add(&SuperElement::basis(e(-1, 1)).unwrap());
        assert_eq!(super_cocycle_check(&alg, &c, &x, &y, &z).unwrap(), q("0"));
    }

    #[test]
    fn coboundary_examples() {
        let alg = Algebra::new(SurfaceConfig::<Q>::classical());
        let zero = LinearForm::zero(Parity::Even);
        let x = SuperElement::basis(e(2, 1)).unwrap();
        let y = SuperElement::basis(e(-2, 1)).unwrap();
        assert_eq!(coboundary(&alg, &zero, &x, &y).unwrap(), q("0"));
        let k = LinearForm::new(Parity::Even, [(BasisIndex::new(h("0"), 1), q("1"))]).unwrap();
        for n in 1..=3 {
            let x = SuperElement::basis(e(n, 1)).unwrap();
            let y = SuperElement::basis(e(-n, 1)).unwrap();
            assert_eq!(coboundary(&alg, &k, &x, &y).unwrap(), Q::from_int(-2 * n));
        }
        let k = LinearForm::new(Parity::Odd, [(BasisIndex::new(h("1/2"), 1), q("1"))]).unwrap();
        let x = SuperElement::basis(e(1, 1)).unwrap();
        let y = SuperElement::basis(o("-1/2", 1)).unwrap();
        assert_eq!(coboundary(&alg, &k, &x, &y).unwrap(), q("-1"));
        assert!(LinearForm::new(Parity::Odd, [(BasisIndex::new(h("0"), 1), q("1"))]).is_err());
    }

    #[test]
    fn connection_change_is_a_coboundary() {
        let alg = Algebra::new(SurfaceConfig::<Q>::consecutive(2));
        let w = Window::ints(-2, 2);
        for omega in ["1", "z", "1/z + z^2"] {
            let omega = ProjectiveConnection::from_func(rf(omega));
            let rep = connection_change_check(&alg, &CycleClass::new(vec![1, 0]), &omega, &w).unwrap();
            assert!(rep.exact(), "{:?}", rep.mismatches.first());
        }
        let rep = connection_change_check(&alg, &CycleClass::separating(2), &ProjectiveConnection::zero(), &w).unwrap();
        assert!(rep.kappa.values().is_empty());
        assert!(!ProjectiveConnection::from_func(rf("1/(z - 7)")).omega().is_a_holomorphic(alg.config()));
    }

    #[test]
    fn classical_bounds_and_rank() {
        let alg = Algebra::new(SurfaceConfig::<Q>::classical());
        let c = GeometricCocycle::new(&alg, CocycleSpec::with_cycle(CycleClass::single(1, 1))).unwrap();
        let rep = boundedness_report(&c, 1, &Window::ints(-4, 4)).unwrap();
        assert_eq!(rep.max_level_nonzero, Some(HalfInt::ZERO));
        assert_eq!(rep.min_level_nonzero, Some(HalfInt::ZERO));
        assert_eq!(independence_rank(&[&c], 1, &Window::ints(-3, 3)).unwrap(), 1);
        assert_eq!(independence_rank(&[&c, &c], 1, &Window::ints(-3, 3)).unwrap(), 1);
    }

    #[test]
    fn rank_of_small_matrices() {
        let m = |rows: &[&[i64]]| rows.iter().map(|r| r.iter().map(|&x| Q::from_int(x)).collect()).collect::<Vec<_>>();
        assert_eq!(rank(m(&[&[1, 2], &[2, 4]])), 1);
        assert_eq!(rank(m(&[&[0, 1], &[1, 0], &[1, 1]])), 2);
        assert_eq!(rank::<Q>(vec![]), 0);
    }

    #[test]
    fn trivialization_recovers_single_odd_form() {
        let alg = Algebra::new(SurfaceConfig::<Q>::consecutive(2));
        let w = Window::ints(-3, 3);
        let k = LinearForm::new(Parity::Odd, [(BasisIndex::new(h("1/2"), 2), q("3"))]).unwrap();
        let c = Coboundary::new(&alg, k.clone());
        let t = trivialize_odd_cocycle(&alg, &c, &w).unwrap();
        assert!(t.is_exact());
        assert_eq!(t.phi, k);
        let z = Coboundary::new(&alg, LinearForm::zero(Parity::Odd));
        let t = trivialize_odd_cocycle(&alg, &z, &w).unwrap();
        assert!(t.phi.values().is_empty() && t.is_exact());
    }

    #[test]
    fn extended_bracket_examples() {
        let alg = Algebra::new(SurfaceConfig::<Q>::classical());
        let c = GeometricCocycle::new(&alg, CocycleSpec::with_cycle(CycleClass::single(1, 1))).unwrap();
        let (b, t) =
            extended_bracket(&alg, &c, &SuperElement::basis(e(2, 1)).unwrap(), &SuperElement::basis(e(-2, 1)).unwrap())
                .unwrap();
        assert_eq!(b, SuperElement::basis(e(0, 1)).unwrap().scale(&q("-4")));
        assert_eq!(t, q("6"));
        let (b, t) = extended_bracket(
            &alg,
            &c,
            &SuperElement::basis(e(0, 1)).unwrap(),
            &SuperElement::basis(o("5/2", 1)).unwrap(),
        )
        .unwrap();
        assert_eq!(b, SuperElement::basis(o("5/2", 1)).unwrap().scale(&q("5/2")));
        assert_eq!(t, q("0"));
    }

    #[test]
    fn entries_are_sorted_and_nonzero() {
        let alg = Algebra::new(SurfaceConfig::<Q>::classical());
        let c = GeometricCocycle::new(&alg, CocycleSpec::with_cycle(CycleClass::single(1, 1))).unwrap();
        let rows = cocycle_entries(&c, 1, &Window::ints(-2, 2)).unwrap();
        assert!(rows.iter().all(|r| !r.value.is_zero()));
        assert_eq!(rows[0].parity_pattern(), "ee");
        assert_eq!(rows.last().unwrap().parity_pattern(), "oo");
    }

    #[test]
    fn spec_validation() {
        let alg = Algebra::new(SurfaceConfig::<Q>::consecutive(2));
        assert!(GeometricCocycle::new(&alg, CocycleSpec::with_cycle(CycleClass::new(vec![1]))).is_err());
        let bad = CocycleSpec::new(CycleClass::separating(2), ProjectiveConnection::from_func(rf("1/(z - 3)")));
        assert!(GeometricCocycle::new(&alg, bad).is_err());
        assert!(ProjectiveConnection::new(MeroForm::<Q>::new(EVEN_WEIGHT, rf("1"))).is_err());
    }

    fn cocycle_with<'a>(alg: &'a Algebra<Q>, cycle: Vec<i64>, omega: &str) -> GeometricCocycle<'a, Q> {
        let omega =
            if omega == "0" { ProjectiveConnection::zero() } else { ProjectiveConnection::from_func(rf(omega)) };
        GeometricCocycle::new(alg, CocycleSpec::new(CycleClass::new(cycle), omega)).unwrap()
    }

    #[test]
    fn cycle_linearity_and_graded_symmetry() {
        let alg =
            Algebra::new(SurfaceConfig::<Q>::new(vec![q("0"), q("1"), q("-1/2")], Point::Finite(q("3"))).unwrap());
        let full = cocycle_with(&alg, vec![2, -1, 3], "z");
        let parts: Vec<_> = (0..3)
            .map(|i| {
                let mut v = vec![0; 3];
                v[i] = 1;
                cocycle_with(&alg, v, "z")
            })
            .collect();
        let idx = SuperIndex::window(&Window::ints(-2, 2), 3);
        for &a in &idx {
            for &b in &idx {
                let mut sum = Q::zero();
                for (c, part) in [2, -1, 3].iter().zip(&parts) {
                    sum += Q::from_int(*c) * part.basis_value(a, b).unwrap();
                }
                let v = full.basis_value(a, b).unwrap();
                assert_eq!(v, sum);
                let w = full.basis_value(b, a).unwrap();
                if a.parity == Parity::Odd && b.parity == Parity::Odd {
                    assert_eq!(v, w);
                } else {
                    assert_eq!(v, -w);
                }
            }
        }
    }

    #[test]
    fn level_zero_witness_and_bounds() {
        let alg = Algebra::new(SurfaceConfig::<Q>::consecutive(2));
        let w = Window::ints(-3, 3);
        for i in 1..=2 {
            let c = GeometricCocycle::new(&alg, CocycleSpec::with_cycle(CycleClass::single(2, i))).unwrap();
            let witness = w.indices(EVEN_WEIGHT, 2).into_iter().any(|a| {
                a.point == i
                    && w.indices(EVEN_WEIGHT, 2).into_iter().any(|b| {
                        a.degree + b.degree == HalfInt::ZERO
                            && !c.basis_value(SuperIndex::even(a), SuperIndex::even(b)).unwrap().is_zero()
                    })
            });
            assert!(witness);
            let rep = boundedness_report(&c, 2, &w).unwrap();
            assert!(rep.max_level_nonzero.unwrap() <= HalfInt::ZERO);
        }
        let cs = GeometricCocycle::new(&alg, CocycleSpec::with_cycle(CycleClass::separating(2))).unwrap();
        let nested = boundedness_nested(&cs, 2, &Window::ints(-3, 3), &Window::ints(-4, 4)).unwrap();
        assert!(nested.lower_stable && nested.upper_stable);
    }

    #[test]
    fn restriction_after_connection_correction() {
        let alg = Algebra::new(SurfaceConfig::<Q>::consecutive(2));
        let omega = ProjectiveConnection::from_func(rf("1/z + z^2"));
        let with = GeometricCocycle::new(&alg, CocycleSpec::new(CycleClass::separating(2), omega.clone())).unwrap();
        let without = GeometricCocycle::new(&alg, CocycleSpec::with_cycle(CycleClass::separating(2))).unwrap();
        let kappa = ConnectionForm::new(&alg, CycleClass::separating(2), omega).unwrap();
        let corrected = Combination::new(&with, &kappa, q("-1"));
        let idx = SuperIndex::window(&Window::ints(-2, 2), 2);
        for &a in &idx {
            for &b in &idx {
                assert_eq!(corrected.basis_value(a, b).unwrap(), without.basis_value(a, b).unwrap());
            }
        }
    }

    #[test]
    fn three_point_rank() {
        let alg = Algebra::new(SurfaceConfig::<Q>::consecutive(3));
        let cs: Vec<_> = (1..=3)
            .map(|i| GeometricCocycle::new(&alg, CocycleSpec::with_cycle(CycleClass::single(3, i))).unwrap())
            .collect();
        let refs: Vec<&dyn SuperBilinear<Q>> = cs.iter().map(|c| c as &dyn SuperBilinear<Q>).collect();
        assert_eq!(independence_rank(&refs, 3, &Window::ints(-2, 2)).unwrap(), 3);
    }
}
