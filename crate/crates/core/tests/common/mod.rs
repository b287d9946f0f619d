#![allow(dead_code)]

use intcheb_core::norm::default_rel_tol;
use intcheb_core::rational::{ceil, floor, rat};
use intcheb_core::{BigInt, BigRational, IntPoly, NormEnclosure, SearchProblem};
use num_traits::{One, Signed, Zero};

/// Box of integer coefficient vectors containing every `G` with
/// `‖F·G‖ ≤ c`: values at `g + 1` interior points are bounded and mapped to
/// coefficients through the Lagrange basis.
pub fn coefficient_box(problem: &SearchProblem, c: &BigRational) -> Vec<(BigInt, BigInt)> {
    let g = problem.g();
    let iv = problem.eval_interval();
    let (ys, bounds) = (2 * g + 3..)
        .find_map(|m| {
            let n = BigRational::from_integer(BigInt::from(m));
            let ys: Vec<BigRational> = (0..=g)
                .map(|j| &iv.lo + iv.width() * BigRational::from_integer(BigInt::from(2 * j + 1)) / &n)
                .collect();
            let bounds: Option<Vec<BigRational>> = ys.iter().map(|y| problem.direct_bound(y, c)).collect();
            bounds.map(|b| (ys, b))
        })
        .unwrap();
    let mut total = vec![BigRational::zero(); g + 1];
    for (j, yj) in ys.iter().enumerate() {
        let mut basis = vec![BigRational::one()];
        for (k, yk) in ys.iter().enumerate() {
            if k == j {
                continue;
            }
            let d = yj - yk;
            let mut next = vec![BigRational::zero(); basis.len() + 1];
            for (i, b) in basis.iter().enumerate() {
                next[i + 1] += b / &d;
                next[i] -= b * yk / &d;
            }
            basis = next;
        }
        for (i, b) in basis.iter().enumerate() {
            total[i] += b.abs() * &bounds[j];
        }
    }
    total
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let lo = if i == g { BigInt::one() } else { ceil(&-t) };
            (lo, floor(t))
        })
        .collect()
}

pub fn box_volume(b: &[(BigInt, BigInt)]) -> f64 {
    b.iter().map(|(l, h)| if h < l { 0.0 } else { intcheb_core::rational::approx_f64(&BigRational::from_integer(h - l + 1)) }).product()
}

/// Brute-force minimum of `‖F·G‖` over a coefficient box; candidates are
/// prefiltered at sample points against `limit`.
pub fn brute_force_min(
    problem: &SearchProblem,
    bx: &[(BigInt, BigInt)],
    limit: &BigRational,
) -> Option<(IntPoly, NormEnclosure)> {
    let dom = problem.domain();
    let samples: Vec<BigRational> =
        (0..=16).map(|k| &dom.lo + dom.width() * rat(k, 16)).collect();
    let tol = default_rel_tol();
    let mut best: Option<(IntPoly, NormEnclosure)> = None;
    let mut a: Vec<BigInt> = bx.iter().map(|(l, _)| l.clone()).collect();
    if bx.iter().any(|(l, h)| h < l) {
        return None;
    }
    loop {
        let ar: Vec<BigRational> = a.iter().map(|v| BigRational::from_integer(v.clone())).collect();
        let cap = best.as_ref().map_or(limit.clone(), |b| b.1.hi.clone());
        if samples.iter().all(|x| problem.value(&ar, x).abs() <= cap) {
            let gp = IntPoly::new(a.clone());
            let n = problem.norm(&gp, &tol).unwrap();
            if n.lo <= cap && best.as_ref().map_or(true, |b| n.hi < b.1.lo || (n.lo <= b.1.hi && n.hi < b.1.hi)) {
                best = Some((gp, n));
            }
        }
        let mut i = 0;
        loop {
            if i == a.len() {
                return best;
            }
            if a[i] < bx[i].1 {
                a[i] += 1;
                break;
            }
            a[i] = bx[i].0.clone();
            i += 1;
        }
    }
}
