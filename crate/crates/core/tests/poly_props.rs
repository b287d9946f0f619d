use intcheb_core::kb::{FactorId, FactoredPoly};
use intcheb_core::norm::PolyProduct;
use intcheb_core::{BigInt, BigRational, FactorKB, IntPoly};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn poly(max_deg: usize, max_coef: i64) -> impl Strategy<Value = IntPoly> {
    prop::collection::vec(-max_coef..=max_coef, 0..=max_deg + 1).prop_map(|c| IntPoly::from_i64(&c))
}

fn nonzero_poly(max_deg: usize, max_coef: i64) -> impl Strategy<Value = IntPoly> {
    poly(max_deg, max_coef).prop_filter("nonzero", |p| !p.is_zero())
}

fn unit_rational() -> impl Strategy<Value = BigRational> {
    (1i64..200).prop_flat_map(|d| (0..=d, Just(d))).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
}

fn factored() -> impl Strategy<Value = Vec<(u32, u32)>> {
    prop::collection::btree_map(1u32..=23, 1u32..=3, 0..4).prop_map(|m| m.into_iter().collect())
}

fn to_factored(v: &[(u32, u32)]) -> FactoredPoly {
    FactoredPoly::new(v.iter().map(|&(i, e)| (FactorId(i), e)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn concatenated_factor_lists_expand_to_products(a in factored(), b in factored()) {
        let kb = FactorKB::builtin_factors_only();
        let fa = to_factored(&a);
        let fb = to_factored(&b);
        let joint = fa.times(&fb).expand(&kb).unwrap();
        prop_assert_eq!(joint, &fa.expand(&kb).unwrap() * &fb.expand(&kb).unwrap());
        let expected: usize = fa.degree(&kb).unwrap() + fb.degree(&kb).unwrap();
        prop_assert_eq!(fa.times(&fb).degree(&kb).unwrap(), expected);
    }

    #[test]
    fn product_form_expands_like_multiplication(ps in prop::collection::vec((nonzero_poly(4, 6), 1u32..3), 1..4)) {
        let prod = PolyProduct::new(ps.clone());
        let direct = ps.iter().fold(IntPoly::one(), |acc, (p, e)| &acc * &p.pow(*e));
        prop_assert_eq!(prod.expand(), direct);
    }

    #[test]
    fn linear_resultant_is_scaled_value(g in nonzero_poly(7, 20), a in 1i64..30, b in -40i64..40) {
        let n = g.degree().unwrap() as u32;
        let r = g.resultant_linear(&BigInt::from(a), &BigInt::from(b));
        let exact = g.eval(&BigRational::new(b.into(), a.into())) * BigRational::from_integer(BigInt::from(a).pow(n));
        prop_assert!(exact.is_integer());
        prop_assert_eq!(BigRational::from_integer(r), exact);
    }

    #[test]
    fn symmetrize_degrees(q in nonzero_poly(10, 9)) {
        let d = q.degree().unwrap();
        prop_assert_eq!(q.symmetrize(false).degree(), Some(2 * d));
        prop_assert_eq!(q.symmetrize(true).degree(), Some(2 * d + 1));
    }

    #[test]
    fn symmetrize_is_substitution(q in poly(8, 9), x in unit_rational()) {
        let y = &x * (BigRational::one() - &x);
        prop_assert_eq!(q.symmetrize(false).eval(&x), q.eval(&y));
        let two_x_minus_one = &x * BigRational::from_integer(2.into()) - BigRational::one();
        prop_assert_eq!(q.symmetrize(true).eval(&x), two_x_minus_one * q.eval(&y));
    }

    #[test]
    fn desymmetrize_round_trips(q in nonzero_poly(8, 9), odd in any::<bool>()) {
        let p = q.symmetrize(odd);
        prop_assert_eq!(p.desymmetrize(), Some((q, odd)));
    }

    #[test]
    fn derivative_of_product_rule(p in poly(6, 9), q in poly(6, 9)) {
        let lhs = (&p * &q).derivative();
        let rhs = &(&p.derivative() * &q) + &(&p * &q.derivative());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn eval_at_zero_is_constant_term(p in poly(9, 50)) {
        prop_assert_eq!(p.eval(&BigRational::zero()), BigRational::from_integer(p.coeff(0)));
    }
}

#[test]
fn every_table_row_expands_to_its_degree() {
    let kb = FactorKB::builtin();
    for icp in kb.known_icps() {
        assert_eq!(icp.poly.expand(&kb).unwrap().degree(), Some(icp.degree));
    }
}
