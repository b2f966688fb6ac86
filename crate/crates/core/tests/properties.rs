use kn_core::exact::{laurent_at, order_at, parse_ratfunc, residue_sum, Point, Polynomial, RationalFunction};
use kn_core::knbasis::FormExpansion;
use kn_core::{Basis, BasisIndex, HalfInt, Rat, Scalar, SurfaceConfig, Window};
use num_bigint::BigInt;
use proptest::prelude::*;

fn rat() -> impl Strategy<Value = Rat> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| Rat::new(BigInt::from(n), BigInt::from(d)))
}

fn poly(max_len: usize) -> impl Strategy<Value = Polynomial<Rat>> {
    prop::collection::vec(rat(), 0..=max_len).prop_map(Polynomial::from_coeffs)
}

/// A rational function together with the distinct roots of its denominator.
fn ratfunc_with_poles() -> impl Strategy<Value = (RationalFunction<Rat>, Vec<Rat>)> {
    (poly(5), prop::collection::btree_set(-6i64..=6, 0..=3), prop::collection::vec(1u32..=3, 3)).prop_map(
        |(num, roots, mults)| {
            let roots: Vec<Rat> = roots.into_iter().map(Rat::from_int).collect();
            let mut den = Polynomial::one();
            for (r, m) in roots.iter().zip(mults) {
                den = den.mul(&Polynomial::linear_factor(r).pow(m));
            }
            (RationalFunction::new(num, den).unwrap(), roots)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn polynomial_ring_axioms(a in poly(5), b in poly(5), c in poly(4)) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.add(&b).mul(&c), a.mul(&c).add(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.sub(&a), Polynomial::zero());
    }

    #[test]
    fn division_with_remainder(a in poly(6), b in poly(4)) {
        prop_assume!(!b.is_zero());
        let (quot, rem) = a.divmod(&b).unwrap();
        prop_assert_eq!(quot.mul(&b).add(&rem), a);
        prop_assert!(rem.is_zero() || rem.degree() < b.degree());
    }

    #[test]
    fn field_operations((f, _) in ratfunc_with_poles(), (g, _) in ratfunc_with_poles()) {
        prop_assume!(!g.is_zero());
        prop_assert_eq!(f.mul(&g).div(&g).unwrap(), f.clone());
        prop_assert_eq!(f.mul(&g).derivative(), f.derivative().mul(&g).add(&f.mul(&g.derivative())));
    }

    #[test]
    fn residues_sum_to_zero((f, poles) in ratfunc_with_poles()) {
        let mut points: Vec<Point<Rat>> = poles.into_iter().map(Point::Finite).collect();
        points.push(Point::Infinity);
        prop_assert_eq!(residue_sum(&f, &points), Rat::from_int(0));
    }

    #[test]
    fn jets_reconstruct_locally((f, poles) in ratfunc_with_poles(), at in -6i64..=6, len in 1usize..8) {
        prop_assume!(!f.is_zero());
        let mut centers: Vec<Point<Rat>> = poles.into_iter().map(Point::Finite).collect();
        centers.push(Point::Finite(Rat::from_int(at)));
        centers.push(Point::Infinity);
        for p in centers {
            let jet = laurent_at(&f, &p, len);
            let rest = f.sub(&jet.to_ratfunc());
            if let Some(o) = order_at(&rest, &p) {
                prop_assert!(o >= jet.precision(), "order {} below precision {} at {}", o, jet.precision(), p);
            }
        }
    }

    #[test]
    fn display_parses_back((f, _) in ratfunc_with_poles()) {
        prop_assert_eq!(parse_ratfunc::<Rat>(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn half_integers_round_trip(t in -40i64..=40) {
        let h = HalfInt::from_twice(t);
        prop_assert_eq!(h.to_string().parse::<HalfInt>().unwrap(), h);
    }

    #[test]
    fn expansion_recovers_coefficients(
        lambda_twice in -4i64..=4,
        coeffs in prop::collection::vec((-3i64..=3, 1usize..=2, rat()), 1..5),
    ) {
        let lambda = HalfInt::from_twice(lambda_twice);
        let basis = Basis::new(SurfaceConfig::consecutive(2));
        let degrees = Window::ints(-3, 3).degrees(lambda);
        let mut x = FormExpansion::zero(lambda);
        for (d, p, c) in coeffs {
            let n = degrees[(d + 3) as usize % degrees.len()];
            x.add_term(BasisIndex::new(n, p), c).unwrap();
        }
        let form = basis.reconstruct(&x).unwrap();
        prop_assert_eq!(basis.expand(&form).unwrap(), x);
    }
}
