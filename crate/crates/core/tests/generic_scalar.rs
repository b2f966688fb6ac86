//! The library is generic over the scalar field; machine-width rationals
//! must give the same answers as big rationals on small windows.

use kn_core::knalgebra::{Algebra, Op, SuperIndex, EVEN_WEIGHT};
use kn_core::kncohomology::{CocycleSpec, CycleClass, GeometricCocycle, SuperBilinear};
use kn_core::surface::SurfaceConfig;
use kn_core::{BasisIndex, HalfInt, Rat, Window};
use num_rational::Rational64;

#[test]
fn small_rationals_agree_with_big_rationals() {
    let small = Algebra::new(SurfaceConfig::<Rational64>::consecutive(2));
    let big = Algebra::new(SurfaceConfig::<Rat>::consecutive(2));
    let w = Window::ints(-2, 2);
    let ts = small.struct_table(Op::Bracket, EVEN_WEIGHT, EVEN_WEIGHT, &w).unwrap();
    let tb = big.struct_table(Op::Bracket, EVEN_WEIGHT, EVEN_WEIGHT, &w).unwrap();
    assert_eq!(ts.rows(&Rational64::from_integer(1)), tb.rows(&Rat::from_integer(1.into())));

    let cs = GeometricCocycle::new(&small, CocycleSpec::with_cycle(CycleClass::separating(2))).unwrap();
    let cb = GeometricCocycle::new(&big, CocycleSpec::with_cycle(CycleClass::separating(2))).unwrap();
    for a in SuperIndex::window(&w, 2) {
        for b in SuperIndex::window(&w, 2) {
            let (x, y) = (cs.basis_value(a, b).unwrap(), cb.basis_value(a, b).unwrap());
            assert_eq!(x.to_string(), y.to_string());
        }
    }
}

#[test]
fn classical_cocycle_with_small_rationals() {
    let alg = Algebra::new(SurfaceConfig::<Rational64>::classical());
    let c = GeometricCocycle::new(&alg, CocycleSpec::with_cycle(CycleClass::single(1, 1))).unwrap();
    let e = |n| SuperIndex::even(BasisIndex::new(HalfInt::from_int(n), 1));
    assert_eq!(c.basis_value(e(3), e(-3)).unwrap(), Rational64::from_integer(24));
}
