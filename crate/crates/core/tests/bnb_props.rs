mod common;

use intcheb_core::bnb::{branch, BnbConfig, BnbEvent, BranchAndBound};
use intcheb_core::lsip::{BoundKind, CoefConstraint, ConstraintSet};
use intcheb_core::norm::Interval;
use intcheb_core::rational::rat;
use intcheb_core::{BigInt, BigRational, Embedding, IntPoly, SearchProblem};
use proptest::prelude::*;

fn cases() -> Vec<SearchProblem> {
    let fs = [vec![1], vec![0, 1], vec![1, -4], vec![1, -5], vec![0, 1, -4]];
    let mut out = Vec::new();
    for f in &fs {
        for emb in [Embedding::Direct(Interval::unit()), Embedding::EvenSymmetric, Embedding::OddSymmetric] {
            for g in 0..=3 {
                out.push(SearchProblem::from_poly(IntPoly::from_i64(f), g, emb.clone()).unwrap());
            }
        }
    }
    out
}

/// Norm of `G = y^g`, a valid starting bound.
fn monomial_c0(p: &SearchProblem) -> BigRational {
    let mut c = vec![0i64; p.g() + 1];
    c[p.g()] = 1;
    p.norm(&IntPoly::from_i64(&c), &rat(1, 1_000_000)).unwrap().hi
}

/// Runs every instance once, checking the event stream (incumbents strictly
/// improve, nodes leave the queue in bound order and never above the
/// incumbent) and comparing the optimum with a brute-force search.
#[test]
fn agrees_with_brute_force_and_keeps_discipline() {
    let mut checked = 0;
    for p in cases() {
        let c0 = monomial_c0(&p);
        let mut bb = BranchAndBound::new(&p, &c0, BnbConfig::default()).unwrap();
        let mut incumbents: Vec<BigRational> = Vec::new();
        let mut dequeued: Vec<BigRational> = Vec::new();
        let mut ok = true;
        let mut obs = |e: &BnbEvent<'_>| match e {
            BnbEvent::Incumbent(inc) => incumbents.push(inc.c_star().clone()),
            BnbEvent::Dequeued { bound, .. } => {
                if let Some(c) = incumbents.last() {
                    ok &= *bound <= c;
                }
                dequeued.push((*bound).clone());
            }
            _ => {}
        };
        let inc = bb.run(&mut obs).unwrap();
        assert!(ok, "dequeued a node above the incumbent");
        assert!(incumbents.windows(2).all(|w| w[1] < w[0]), "{incumbents:?}");
        let slack = rat(1, 1_000_000_000);
        assert!(dequeued.windows(2).all(|w| w[1] >= &w[0] - &slack), "{dequeued:?}");

        let limit = &inc.norm.hi * rat(1_000_001, 1_000_000);
        let bx = common::coefficient_box(&p, &limit);
        if common::box_volume(&bx) > 2e5 {
            continue;
        }
        let (gb, nb) = common::brute_force_min(&p, &bx, &limit).expect("incumbent lies in the box");
        assert!(nb.overlaps(&inc.norm), "{p:?}: bnb {:?} vs brute {:?}", inc.g_star, gb);
        checked += 1;
    }
    assert!(checked >= 40, "only {checked} instances had small boxes");
}

fn constraint_set(g: usize) -> impl Strategy<Value = ConstraintSet> {
    (0..=g).prop_flat_map(move |prefix| {
        (prop::collection::vec(-3i64..=3, prefix), prop::collection::vec((-4i64..=4, 0i64..=4), g + 1 - prefix))
    })
    .prop_map(|(fixed, ranges)| {
        let mut cs = ConstraintSet::new();
        for (i, v) in fixed.iter().enumerate() {
            cs = cs.with(&CoefConstraint { index: i, kind: BoundKind::Fixed((*v).into()) }).unwrap();
        }
        for (k, (lo, w)) in ranges.iter().enumerate() {
            let i = fixed.len() + k;
            cs = cs.with(&CoefConstraint { index: i, kind: BoundKind::Lower((*lo).into()) }).unwrap();
            cs = cs.with(&CoefConstraint { index: i, kind: BoundKind::Upper((lo + w).into()) }).unwrap();
        }
        cs
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn children_partition_the_parent(
        g in 0usize..3,
        cs in (0usize..3).prop_flat_map(constraint_set),
        a_bar in prop::collection::vec((-30i64..=30, 1i64..=4), 3),
    ) {
        let cs = ConstraintSet::from_constraints(&cs.constraints().into_iter().filter(|c| c.index <= g).collect::<Vec<_>>()).unwrap();
        let a_bar: Vec<BigRational> = a_bar.iter().map(|&(n, d)| rat(n, d)).collect();
        let children = branch(&cs, &a_bar[..=g], g);
        let i = cs.fixed_prefix();
        prop_assert!(children.len() <= 4);
        let range: Vec<i64> = (-6..=6).collect();
        let mut pts: Vec<Vec<BigInt>> = vec![Vec::new()];
        for _ in 0..=g {
            pts = pts.into_iter().flat_map(|v| range.iter().map(move |&a| { let mut w = v.clone(); w.push(BigInt::from(a)); w })).collect();
        }
        for a in pts {
            if !cs.admits(&a) {
                prop_assert!(children.iter().all(|c| !c.admits(&a)));
                continue;
            }
            let hits = children.iter().filter(|c| c.admits(&a)).count();
            let expected = if i > g || (i == g && a[g] < BigInt::from(1)) { 0 } else { 1 };
            prop_assert_eq!(hits, expected, "{:?} in {:?}", a, cs);
        }
        for c in &children {
            prop_assert!(c.fixed_prefix() >= i);
        }
    }
}
