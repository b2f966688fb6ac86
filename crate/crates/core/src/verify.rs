//! Invariant suites over a degree window, with a machine-readable report.
//!
//! Every check is exact. A failing check carries the first counterexample
//! found; the remaining cases are still counted.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{KnError, Result};
use crate::knalgebra::{bracket, mult, sign, Algebra, Op, Parity, SuperElement, SuperIndex, EVEN_WEIGHT, ODD_WEIGHT};
use crate::knbasis::{kn_pairing, kn_pairing_out};
use crate::kncohomology::{
    boundedness_nested, boundedness_report, cocycle_half, cocycle_out, cocycle_vector, connection_change_check,
    independence_rank, super_cocycle_defect_basis, trivialize_odd_cocycle, Coboundary, CocycleSpec, CycleClass,
    GeometricCocycle, LinearForm, ProjectiveConnection, SuperBilinear,
};
use crate::scalar::Scalar;
use crate::surface::{BasisIndex, HalfInt, Window};

/// Weights covered by the duality suite.
pub fn duality_weights() -> Vec<HalfInt> {
    (-4..=4).map(HalfInt::from_twice).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Duality,
    Jacobi,
    Poisson,
    Cocycle,
    Boundedness,
    Rank,
    OddTrivial,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Duality,
        Suite::Jacobi,
        Suite::Poisson,
        Suite::Cocycle,
        Suite::Boundedness,
        Suite::Rank,
        Suite::OddTrivial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Duality => "duality",
            Suite::Jacobi => "jacobi",
            Suite::Poisson => "poisson",
            Suite::Cocycle => "cocycle",
            Suite::Boundedness => "boundedness",
            Suite::Rank => "rank",
            Suite::OddTrivial => "oddtrivial",
        }
    }

    /// A suite name, or `all`.
    pub fn parse_selection(s: &str) -> Result<Vec<Suite>> {
        if s == "all" {
            Ok(Suite::ALL.to_vec())
        } else {
            Ok(vec![s.parse()?])
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = KnError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| KnError::Parse(format!("unknown suite `{s}`")))
    }
}

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub measured: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
}

impl Check {
    fn new(suite: Suite, name: impl Into<String>) -> Self {
        Check { suite, name: name.into(), passed: true, checked: 0, measured: Value::Null, counterexample: None }
    }

    fn tick(&mut self) {
        self.checked += 1;
    }

    fn fail(&mut self, witness: Value) {
        if self.passed {
            self.counterexample = Some(witness);
        }
        self.passed = false;
    }

    fn require(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.tick();
        if !ok {
            self.fail(witness());
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub window: Window,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions<T> {
    pub window: Window,
    pub seed: u64,
    /// Number of random cases for the sampled suites.
    pub samples: usize,
    /// Nonzero quadratic differential used next to `Ω = 0`.
    pub omega: ProjectiveConnection<T>,
}

impl<T: Scalar> VerifyOptions<T> {
    pub fn new(window: Window) -> Self {
        VerifyOptions {
            window,
            seed: 0x4b4e,
            samples: 20,
            omega: ProjectiveConnection::from_func(crate::exact::RationalFunction::z()),
        }
    }
}

pub fn run<T: Scalar>(alg: &Algebra<T>, suites: &[Suite], opts: &VerifyOptions<T>) -> Result<Report> {
    let mut checks = Vec::new();
    for &suite in suites {
        let found = match suite {
            Suite::Duality => duality_suite(alg, &opts.window)?,
            Suite::Jacobi => jacobi_suite(alg, &opts.window)?,
            Suite::Poisson => poisson_suite(alg, opts)?,
            Suite::Cocycle => cocycle_suite(alg, opts)?,
            Suite::Boundedness => boundedness_suite(alg, &opts.window)?,
            Suite::Rank => rank_suite(alg, &opts.window)?,
            Suite::OddTrivial => oddtrivial_suite(alg, opts)?,
        };
        checks.extend(found);
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(Report { window: opts.window, seed: opts.seed, passed, checks })
}

fn idx_str(i: &BasisIndex) -> String {
    i.to_string()
}

/// `⟨f^λ_{n,p}, f^{1-λ}_{-m,r}⟩ = δ_{nm} δ_{pr}` and in/out agreement of the pairing.
pub fn duality_suite<T: Scalar>(alg: &Algebra<T>, window: &Window) -> Result<Vec<Check>> {
    let basis = alg.basis();
    let cfg = alg.config();
    let k = alg.k();
    let mut dual = Check::new(Suite::Duality, "kn_duality");
    let mut theorem = Check::new(Suite::Duality, "residue_theorem_pairing");
    for lambda in duality_weights() {
        let mu = HalfInt::ONE - lambda;
        let idx = window.indices(lambda, k);
        for a in &idx {
            for b in &idx {
                let dual_b = BasisIndex::new(-b.degree, b.point);
                let v = basis.basis_pairing(lambda, *a, dual_b)?;
                let expect = if a == b { T::one() } else { T::zero() };
                dual.require(
                    v == expect,
                    || json!({"lambda": lambda, "left": idx_str(a), "right": idx_str(&dual_b), "value": v.to_string()}),
                );
            }
        }
        for a in &idx {
            let f = basis.element(lambda, *a)?;
            for b in window.indices(mu, k) {
                let g = basis.element(mu, b)?;
                let inside = kn_pairing(cfg, &f, &g)?;
                let outside = kn_pairing_out(cfg, &f, &g)?;
                theorem.require(inside == outside, || {
                    json!({"lambda": lambda, "left": idx_str(a), "right": idx_str(&b),
                           "in": inside.to_string(), "out": outside.to_string()})
                });
            }
        }
    }
    Ok(vec![dual, theorem])
}

/// `[a, x]` for a basis element and an arbitrary element.
fn bracket_left<T: Scalar>(alg: &Algebra<T>, a: SuperIndex, x: &SuperElement<T>) -> Result<SuperElement<T>> {
    let mut acc = SuperElement::zero();
    for (h, c) in x.terms() {
        acc = acc.add(&alg.super_bracket_basis(a, h)?.scale(c));
    }
    Ok(acc)
}

/// Graded Jacobi sum on a basis triple.
pub fn super_jacobi_basis<T: Scalar>(
    alg: &Algebra<T>,
    a: SuperIndex,
    b: SuperIndex,
    c: SuperIndex,
) -> Result<SuperElement<T>> {
    let terms =
        [(sign(a.parity, c.parity), a, b, c), (sign(b.parity, a.parity), b, c, a), (sign(c.parity, b.parity), c, a, b)];
    let mut acc = SuperElement::zero();
    for (s, x, y, z) in terms {
        let t = bracket_left(alg, x, &alg.super_bracket_basis(y, z)?)?;
        acc = if s > 0 { acc.add(&t) } else { acc.sub(&t) };
    }
    Ok(acc)
}

/// Super-Jacobi on all basis triples, leading terms and lower grading bound
/// of every product table.
pub fn jacobi_suite<T: Scalar>(alg: &Algebra<T>, window: &Window) -> Result<Vec<Check>> {
    let idx = SuperIndex::window(window, alg.k());
    let mut jac = Check::new(Suite::Jacobi, "super_jacobi");
    for &a in &idx {
        for &b in &idx {
            for &c in &idx {
                let d = super_jacobi_basis(alg, a, b, c)?;
                jac.require(
                    d.is_zero(),
                    || json!({"x": a.to_string(), "y": b.to_string(), "z": c.to_string(), "defect": d.to_string()}),
                );
            }
        }
    }
    let mut lead = Check::new(Suite::Jacobi, "leading_terms");
    let mut bounds = Vec::new();
    let (e, o, f) = (EVEN_WEIGHT, ODD_WEIGHT, HalfInt::ZERO);
    let tables = [
        (Op::Bracket, e, e),
        (Op::Super, e, o),
        (Op::Super, o, o),
        (Op::Mult, f, f),
        (Op::Jordan, f, o),
        (Op::Jordan, o, o),
        (Op::D1, e, f),
    ];
    for (op, lambda, nu) in tables {
        let table = alg.struct_table(op, lambda, nu, window)?;
        let bad = table.leading_term_violations();
        lead.checked += table.rows.len();
        if let Some((a, b)) = bad.first() {
            lead.fail(json!({"op": op.to_string(), "lambda": lambda, "nu": nu, "x": idx_str(a), "y": idx_str(b)}));
        }
        if let Ok((lo, hi)) = table.grading_bounds() {
            bounds.push(json!({"op": op.to_string(), "lambda": lambda, "nu": nu, "r_low": lo, "r_high": hi}));
            if lo != 0 {
                lead.fail(json!({"op": op.to_string(), "lambda": lambda, "nu": nu, "r_low": lo}));
            }
        }
    }
    lead.measured = Value::Array(bounds);
    Ok(vec![jac, lead])
}

fn random_basis_index<R: Rng>(rng: &mut R, window: &Window, lambda: HalfInt, k: usize) -> Option<BasisIndex> {
    let idx = window.indices(lambda, k);
    if idx.is_empty() {
        None
    } else {
        Some(idx[rng.gen_range(0..idx.len())])
    }
}

type Sampled<T> = (HalfInt, BasisIndex, std::sync::Arc<crate::knbasis::MeroForm<T>>);

/// Leibniz rule and Jacobi identity of the Poisson bracket across weights,
/// on random basis triples.
pub fn poisson_suite<T: Scalar>(alg: &Algebra<T>, opts: &VerifyOptions<T>) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let weights = duality_weights();
    let mut leibniz = Check::new(Suite::Poisson, "leibniz");
    let mut jac = Check::new(Suite::Poisson, "bracket_jacobi");
    let k = alg.k();
    for _ in 0..opts.samples {
        let mut pick = || -> Result<Option<Sampled<T>>> {
            let w = weights[rng.gen_range(0..weights.len())];
            match random_basis_index(&mut rng, &opts.window, w, k) {
                Some(i) => Ok(Some((w, i, alg.basis().element(w, i)?))),
                None => Ok(None),
            }
        };
        let (Some(x), Some(y), Some(z)) = (pick()?, pick()?, pick()?) else { continue };
        let (f, g, h) = (&*x.2, &*y.2, &*z.2);
        let lhs = bracket(f, &mult(g, h));
        let rhs = mult(&bracket(f, g), h).add(&mult(g, &bracket(f, h)))?;
        let witness = || json!({"f": format!("f^{}_{}", x.0, x.1), "g": format!("f^{}_{}", y.0, y.1), "h": format!("f^{}_{}", z.0, z.1)});
        leibniz.require(lhs == rhs, witness);
        let sum = bracket(f, &bracket(g, h)).add(&bracket(g, &bracket(h, f)))?.add(&bracket(h, &bracket(f, g)))?;
        jac.require(sum.is_zero(), witness);
    }
    Ok(vec![leibniz, jac])
}

/// The cycles used by the cocycle suites: each `C_i`, then `C_S`.
pub fn standard_cycles(k: usize) -> Vec<CycleClass> {
    let mut out: Vec<CycleClass> = (1..=k).map(|i| CycleClass::single(k, i)).collect();
    if k > 1 {
        out.push(CycleClass::separating(k));
    }
    out
}

fn cycle_label(c: &CycleClass) -> String {
    let parts: Vec<String> = c.coeffs().iter().map(|x| x.to_string()).collect();
    parts.join(",")
}

/// Graded cocycle condition on all basis triples and graded antisymmetry on
/// all basis pairs, for each named bilinear form.
pub fn cocycle_checks<T: Scalar>(
    alg: &Algebra<T>,
    forms: &[(String, &dyn SuperBilinear<T>)],
    window: &Window,
) -> Result<Vec<Check>> {
    let idx = SuperIndex::window(window, alg.k());
    let mut out = Vec::new();
    for (label, c) in forms {
        let mut cond = Check::new(Suite::Cocycle, format!("cocycle_condition[{label}]"));
        for &a in &idx {
            for &b in &idx {
                for &d in &idx {
                    if a.parity.combine(b.parity).combine(d.parity) == Parity::Odd {
                        continue;
                    }
                    let v = super_cocycle_defect_basis(alg, *c, a, b, d)?;
                    cond.require(
                        v.is_zero(),
                        || json!({"x": a.to_string(), "y": b.to_string(), "z": d.to_string(), "defect": v.to_string()}),
                    );
                }
            }
        }
        let mut anti = Check::new(Suite::Cocycle, format!("graded_antisymmetry[{label}]"));
        for &a in &idx {
            for &b in &idx {
                let (u, v) = (c.basis_value(a, b)?, c.basis_value(b, a)?);
                let ok = if sign(a.parity, b.parity) < 0 { u == v } else { u == -v.clone() };
                anti.require(
                    ok,
                    || json!({"x": a.to_string(), "y": b.to_string(), "xy": u.to_string(), "yx": v.to_string()}),
                );
            }
        }
        out.push(cond);
        out.push(anti);
    }
    Ok(out)
}

pub fn cocycle_suite<T: Scalar>(alg: &Algebra<T>, opts: &VerifyOptions<T>) -> Result<Vec<Check>> {
    let k = alg.k();
    let window = &opts.window;
    let omegas = [("0".to_string(), ProjectiveConnection::zero()), (opts.omega.r().to_string(), opts.omega.clone())];
    let cycles = standard_cycles(k);
    let mut cocycles = Vec::new();
    for cycle in &cycles {
        for (olabel, omega) in &omegas {
            let c = GeometricCocycle::new(alg, CocycleSpec::new(cycle.clone(), omega.clone()))?;
            cocycles.push((format!("C=({}),Omega={}", cycle_label(cycle), olabel), c));
        }
    }
    let forms: Vec<(String, &dyn SuperBilinear<T>)> =
        cocycles.iter().map(|(l, c)| (l.clone(), c as &dyn SuperBilinear<T>)).collect();
    let mut out = cocycle_checks(alg, &forms, window)?;

    let idx = SuperIndex::window(window, k);
    let mut linear = Check::new(Suite::Cocycle, "cycle_linearity");
    let mut theorem = Check::new(Suite::Cocycle, "residue_theorem_cocycle");
    let mut direct = Check::new(Suite::Cocycle, "jet_route_matches_residues");
    for (olabel, omega) in &omegas {
        let singles: Vec<_> = (1..=k)
            .map(|i| GeometricCocycle::new(alg, CocycleSpec::new(CycleClass::single(k, i), omega.clone())))
            .collect::<Result<_>>()?;
        let sep_spec = CocycleSpec::new(CycleClass::separating(k), omega.clone());
        let sep = GeometricCocycle::new(alg, sep_spec.clone())?;
        for &a in &idx {
            for &b in &idx {
                let total = sep.basis_value(a, b)?;
                let mut sum = T::zero();
                for s in &singles {
                    sum = sum.add_ref(&s.basis_value(a, b)?);
                }
                linear.require(total == sum, || {
                    json!({"omega": olabel, "x": a.to_string(), "y": b.to_string(),
                           "separating": total.to_string(), "sum": sum.to_string()})
                });
                if a.parity != b.parity {
                    continue;
                }
                let fa = alg.basis().element(a.weight(), a.index)?;
                let fb = alg.basis().element(b.weight(), b.index)?;
                let inside = match a.parity {
                    Parity::Even => cocycle_vector(alg.config(), &sep_spec, &fa, &fb)?,
                    Parity::Odd => cocycle_half(alg.config(), &sep_spec, &fa, &fb)?,
                };
                let outside = cocycle_out(alg.config(), omega, &fa, &fb)?;
                theorem.require(inside == outside, || {
                    json!({"omega": olabel, "x": a.to_string(), "y": b.to_string(),
                           "in": inside.to_string(), "out": outside.to_string()})
                });
                direct.require(inside == total, || {
                    json!({"omega": olabel, "x": a.to_string(), "y": b.to_string(),
                           "residues": inside.to_string(), "jets": total.to_string()})
                });
            }
        }
    }
    out.extend([linear, theorem, direct]);

    for cycle in &cycles {
        let mut change = Check::new(Suite::Cocycle, format!("connection_change[C=({})]", cycle_label(cycle)));
        let rep = connection_change_check(alg, cycle, &opts.omega, window)?;
        change.checked = rep.pairs_checked;
        if let Some(m) = rep.mismatches.first() {
            change.fail(serde_json::to_value(m).expect("serializable"));
        }
        change.measured = json!({
            "kappa": rep.kappa.values().iter().map(|(i, v)| (i.to_string(), v.to_string())).collect::<Vec<_>>()
        });
        out.push(change);
    }
    Ok(out)
}

/// Upper level bound of each `Φ_{C_i}`, nonvanishing at level zero, and a
/// stable lower bound for `Φ_{C_S}` between the window and its widening by 2.
pub fn boundedness_suite<T: Scalar>(alg: &Algebra<T>, window: &Window) -> Result<Vec<Check>> {
    let k = alg.k();
    let mut upper = Check::new(Suite::Boundedness, "bounded_above_by_zero");
    let mut witness = Check::new(Suite::Boundedness, "level_zero_witness");
    let mut measured = Vec::new();
    for i in 1..=k {
        let c = GeometricCocycle::new(alg, CocycleSpec::with_cycle(CycleClass::single(k, i)))?;
        let rep = boundedness_report(&c, k, window)?;
        upper.require(
            rep.max_level_nonzero.is_none_or(|l| l <= HalfInt::ZERO),
            || json!({"cycle": i, "max_level_nonzero": rep.max_level_nonzero}),
        );
        measured.push(
            json!({"cycle": i, "max_level_nonzero": rep.max_level_nonzero, "min_level_nonzero": rep.min_level_nonzero}),
        );
        let evens = window.indices(EVEN_WEIGHT, k);
        let mut found = false;
        'outer: for a in evens.iter().filter(|a| a.point == i) {
            for b in &evens {
                if a.degree + b.degree == HalfInt::ZERO
                    && !c.basis_value(SuperIndex::even(*a), SuperIndex::even(*b))?.is_zero()
                {
                    found = true;
                    break 'outer;
                }
            }
        }
        witness.require(found, || json!({"cycle": i}));
    }
    upper.measured = Value::Array(measured);
    let mut lower = Check::new(Suite::Boundedness, "separating_lower_bound_stable");
    let sep = GeometricCocycle::new(alg, CocycleSpec::with_cycle(CycleClass::separating(k)))?;
    let outer = window.widen(2);
    let nested = boundedness_nested(&sep, k, window, &outer)?;
    lower.require(nested.lower_stable && nested.inner.min_level_nonzero.is_some(), || {
        serde_json::to_value(&nested).expect("serializable")
    });
    lower.measured = serde_json::to_value(&nested).expect("serializable");
    Ok(vec![upper, witness, lower])
}

/// `rank {Φ_{C_1}, ..., Φ_{C_K}} = K`.
pub fn rank_suite<T: Scalar>(alg: &Algebra<T>, window: &Window) -> Result<Vec<Check>> {
    let k = alg.k();
    let cs: Vec<_> = (1..=k)
        .map(|i| GeometricCocycle::new(alg, CocycleSpec::with_cycle(CycleClass::single(k, i))))
        .collect::<Result<_>>()?;
    let refs: Vec<&dyn SuperBilinear<T>> = cs.iter().map(|c| c as &dyn SuperBilinear<T>).collect();
    let r = independence_rank(&refs, k, window)?;
    let mut check = Check::new(Suite::Rank, "cycle_cocycles_independent");
    check.require(r == k, || json!({"rank": r, "expected": k}));
    check.measured = json!({"rank": r, "k": k});
    Ok(vec![check])
}

/// A random odd linear form with one to four nonzero values in the window.
pub fn random_odd_form<T: Scalar, R: Rng>(rng: &mut R, window: &Window, k: usize) -> LinearForm<T> {
    let idx = window.indices(ODD_WEIGHT, k);
    let mut form = LinearForm::zero(Parity::Odd);
    if idx.is_empty() {
        return form;
    }
    for _ in 0..rng.gen_range(1..=4) {
        let i = idx[rng.gen_range(0..idx.len())];
        let mut num = rng.gen_range(-9..=9);
        if num == 0 {
            num = 1;
        }
        let v = T::from_int(num).div_ref(&T::from_int(rng.gen_range(1..=5)));
        form.set(i, v).expect("odd index");
    }
    form
}

/// Round trip `k ↦ δ₁k ↦ Φ` for random odd forms `k`.
pub fn oddtrivial_suite<T: Scalar>(alg: &Algebra<T>, opts: &VerifyOptions<T>) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x6f6464);
    let mut check = Check::new(Suite::OddTrivial, "odd_trivialization");
    let mut recovered = 0;
    for trial in 0..opts.samples {
        let k = random_odd_form::<T, _>(&mut rng, &opts.window, alg.k());
        let c = Coboundary::new(alg, k.clone());
        let t = trivialize_odd_cocycle(alg, &c, &opts.window)?;
        if t.phi == k {
            recovered += 1;
        }
        check.require(
            t.is_exact(),
            || json!({"trial": trial, "residual": serde_json::to_value(&t.residual[0]).expect("serializable")}),
        );
    }
    check.measured = json!({"trials": opts.samples, "recovered_exactly": recovered});
    Ok(vec![check])
}

/// A bilinear form that agrees with `inner` except on one basis pair, used
/// as a negative control for the cocycle checks.
pub struct Corrupted<'a, T> {
    pub inner: &'a dyn SuperBilinear<T>,
    pub at: (SuperIndex, SuperIndex),
    pub shift: T,
}

impl<T: Scalar> SuperBilinear<T> for Corrupted<'_, T> {
    fn basis_value(&self, a: SuperIndex, b: SuperIndex) -> Result<T> {
        let v = self.inner.basis_value(a, b)?;
        Ok(if (a, b) == self.at { v.add_ref(&self.shift) } else { v })
    }
}
