//! The continuous relaxation at a search node, solved by discretization and
//! cutting planes: an exact LP in `(a_0, …, a_g, c)` minimizing `c` subject
//! to `−c ≤ (F·G)(x) ≤ c` on a finite point set, refined with the local
//! maximizers of `|F·Ḡ|` that violate the current bound.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::norm::{critical_points_above_product, Interval, PolyProduct};
use crate::problem::SearchProblem;
use crate::rational::dyadic;
use crate::simplex::{LinearProgram, LpResult};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoundKind {
    Fixed(BigInt),
    Lower(BigInt),
    Upper(BigInt),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefConstraint {
    pub index: usize,
    pub kind: BoundKind,
}

/// Per-coefficient integer bounds; `lo == hi` means fixed.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash, PartialOrd, Ord)]
pub struct ConstraintSet {
    lo: BTreeMap<usize, BigInt>,
    hi: BTreeMap<usize, BigInt>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_constraints(cs: &[CoefConstraint]) -> Result<Self> {
        let mut out = ConstraintSet::new();
        for c in cs {
            out = out.with(c).ok_or(Error::Infeasible)?;
        }
        Ok(out)
    }

    /// The intersection with one more constraint, or `None` if empty.
    pub fn with(&self, c: &CoefConstraint) -> Option<Self> {
        let mut out = self.clone();
        let i = c.index;
        match &c.kind {
            BoundKind::Fixed(v) => {
                out.tighten_lo(i, v.clone());
                out.tighten_hi(i, v.clone());
            }
            BoundKind::Lower(v) => out.tighten_lo(i, v.clone()),
            BoundKind::Upper(v) => out.tighten_hi(i, v.clone()),
        }
        match (out.lo.get(&i), out.hi.get(&i)) {
            (Some(l), Some(h)) if l > h => None,
            _ => Some(out),
        }
    }

    fn tighten_lo(&mut self, i: usize, v: BigInt) {
        let e = self.lo.entry(i).or_insert_with(|| v.clone());
        if v > *e {
            *e = v;
        }
    }

    fn tighten_hi(&mut self, i: usize, v: BigInt) {
        let e = self.hi.entry(i).or_insert_with(|| v.clone());
        if v < *e {
            *e = v;
        }
    }

    pub fn lower(&self, i: usize) -> Option<&BigInt> {
        self.lo.get(&i)
    }

    pub fn upper(&self, i: usize) -> Option<&BigInt> {
        self.hi.get(&i)
    }

    pub fn fixed(&self, i: usize) -> Option<&BigInt> {
        match (self.lo.get(&i), self.hi.get(&i)) {
            (Some(l), Some(h)) if l == h => Some(l),
            _ => None,
        }
    }

    /// Number of leading coefficients `a_0, a_1, …` that are fixed.
    pub fn fixed_prefix(&self) -> usize {
        (0..).take_while(|&i| self.fixed(i).is_some()).count()
    }

    /// The set as a list: one `Fixed` or up to one `Lower` and one `Upper`
    /// per index.
    pub fn constraints(&self) -> Vec<CoefConstraint> {
        let mut idx: Vec<usize> = self.lo.keys().chain(self.hi.keys()).copied().collect();
        idx.sort_unstable();
        idx.dedup();
        let mut out = Vec::new();
        for i in idx {
            if let Some(v) = self.fixed(i) {
                out.push(CoefConstraint { index: i, kind: BoundKind::Fixed(v.clone()) });
                continue;
            }
            if let Some(v) = self.lo.get(&i) {
                out.push(CoefConstraint { index: i, kind: BoundKind::Lower(v.clone()) });
            }
            if let Some(v) = self.hi.get(&i) {
                out.push(CoefConstraint { index: i, kind: BoundKind::Upper(v.clone()) });
            }
        }
        out
    }

    /// Whether an integer coefficient vector satisfies every bound.
    pub fn admits(&self, a: &[BigInt]) -> bool {
        self.lo.iter().all(|(i, l)| a.get(*i).is_some_and(|v| v >= l))
            && self.hi.iter().all(|(i, h)| a.get(*i).is_some_and(|v| v <= h))
    }
}

impl fmt::Display for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, c) in self.constraints().iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            match &c.kind {
                BoundKind::Fixed(v) => write!(f, "a_{} = {v}", c.index)?,
                BoundKind::Lower(v) => write!(f, "a_{} >= {v}", c.index)?,
                BoundKind::Upper(v) => write!(f, "a_{} <= {v}", c.index)?,
            }
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub a_bar: Vec<BigRational>,
    pub c_bar: BigRational,
    /// Points where `|F·Ḡ| = c̄`.
    pub active_points: Vec<BigRational>,
}

/// Exact optimum of the discretized problem with `a_g ≥ 1` and `cs`.
pub fn solve_discretized_lp(problem: &SearchProblem, points: &[BigRational], cs: &ConstraintSet) -> Result<LpSolution> {
    let rows: Vec<(BigRational, IntRow)> = points.iter().map(|x| (x.clone(), IntRow::new(problem, x))).collect();
    solve_rows(problem, &rows, cs)
}

/// A constraint row `num / den` at one point.
#[derive(Debug, Clone)]
struct IntRow {
    num: Vec<BigInt>,
    den: BigInt,
}

impl IntRow {
    fn new(problem: &SearchProblem, x: &BigRational) -> Self {
        let (num, den) = problem.int_row(x);
        IntRow { num, den }
    }
}

fn solve_rows(problem: &SearchProblem, rows: &[(BigRational, IntRow)], cs: &ConstraintSet) -> Result<LpSolution> {
    if rows.is_empty() {
        return Err(Error::InvalidInput("empty point set".into()));
    }
    let g = problem.g();
    let mut lo: Vec<Option<BigInt>> = (0..=g).map(|i| cs.lower(i).cloned()).collect();
    let hi: Vec<Option<BigInt>> = (0..=g).map(|i| cs.upper(i).cloned()).collect();
    if lo[g].as_ref().map_or(true, |v| *v < BigInt::one()) {
        lo[g] = Some(BigInt::one());
    }
    for i in 0..=g {
        if let (Some(l), Some(h)) = (&lo[i], &hi[i]) {
            if l > h {
                return Err(Error::Infeasible);
            }
        }
    }
    let fixed: Vec<Option<BigInt>> = (0..=g)
        .map(|i| match (&lo[i], &hi[i]) {
            (Some(l), Some(h)) if l == h => Some(l.clone()),
            _ => None,
        })
        .collect();
    let free: Vec<usize> = (0..=g).filter(|&i| fixed[i].is_none()).collect();
    let nv = free.len() + 1;

    let a_bar: Vec<BigRational>;
    if free.is_empty() {
        a_bar = fixed.iter().map(|v| BigRational::from_integer(v.clone().unwrap())).collect();
    } else {
        let mut obj = vec![BigRational::zero(); nv];
        obj[nv - 1] = BigRational::one();
        let mut lp = LinearProgram::new(obj);
        // |num·a − den·c| form: num_free·a_free − den·c ≤ −num_fixed·a_fixed
        for (_, r) in rows {
            let off: BigInt = (0..=g).filter_map(|i| fixed[i].as_ref().map(|v| &r.num[i] * v)).sum();
            let mut up: Vec<BigInt> = free.iter().map(|&i| r.num[i].clone()).collect();
            let mut down: Vec<BigInt> = up.iter().map(|v| -v).collect();
            up.push(-&r.den);
            down.push(-&r.den);
            lp.add_le_int(up, -&off);
            lp.add_le_int(down, off);
        }
        for (k, &i) in free.iter().enumerate() {
            let unit = |s: i64| {
                let mut v = vec![BigInt::zero(); nv];
                v[k] = BigInt::from(s);
                v
            };
            if let Some(l) = &lo[i] {
                lp.add_le_int(unit(-1), -l);
            }
            if let Some(h) = &hi[i] {
                lp.add_le_int(unit(1), h.clone());
            }
        }
        let x = match lp.solve() {
            LpResult::Optimal { x, .. } => x,
            _ => return Err(Error::Infeasible),
        };
        let mut full = Vec::with_capacity(g + 1);
        let mut k = 0;
        for f in fixed.iter() {
            match f {
                Some(v) => full.push(BigRational::from_integer(v.clone())),
                None => {
                    full.push(x[k].clone());
                    k += 1;
                }
            }
        }
        a_bar = full;
    }
    let ad = a_bar.iter().fold(BigInt::one(), |l, q| l.lcm(q.denom()));
    let an: Vec<BigInt> = a_bar.iter().map(|q| q.numer() * (&ad / q.denom())).collect();
    let values: Vec<BigRational> = rows
        .iter()
        .map(|(_, r)| {
            let v: BigInt = r.num.iter().zip(&an).map(|(p, q)| p * q).sum();
            BigRational::new(v.abs(), &r.den * &ad)
        })
        .collect();
    let c_bar = values.iter().max().cloned().unwrap_or_default();
    let active_points = rows.iter().zip(&values).filter(|(_, v)| **v == c_bar).map(|((x, _), _)| x.clone()).collect();
    Ok(LpSolution { a_bar, c_bar, active_points })
}

/// Chebyshev-node discretization: `count` interior nodes on `I` rounded
/// to dyadic rationals, plus both endpoints, sorted and deduplicated.
pub fn chebyshev_points(interval: &Interval, count: usize) -> Vec<BigRational> {
    chebyshev_points_dyadic(interval, count, NODE_BITS)
}

pub const NODE_BITS: u32 = 16;

/// [`chebyshev_points`] with nodes rounded to multiples of `2^-bits`.
pub fn chebyshev_points_dyadic(interval: &Interval, count: usize, bits: u32) -> Vec<BigRational> {
    let lo = interval.lo.to_f64().unwrap_or(0.0);
    let hi = interval.hi.to_f64().unwrap_or(0.0);
    let mut out = vec![interval.lo.clone(), interval.hi.clone()];
    let scale = (1u64 << bits) as f64;
    for j in 1..=count {
        let theta = core::f64::consts::PI * (2 * j - 1) as f64 / (2 * count) as f64;
        let x = 0.5 * (lo + hi) + 0.5 * (hi - lo) * libm::cos(theta);
        let q = BigRational::new(BigInt::from(libm::round(x * scale) as i64), BigInt::from(1u64 << bits));
        if interval.contains(&q) {
            out.push(q);
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Default initial discretization: `4(g + deg F)` Chebyshev nodes on the
/// domain plus its endpoints.
pub fn initial_points(problem: &SearchProblem) -> Vec<BigRational> {
    let n = 4 * (problem.g() + problem.f().degree().unwrap_or(0)).max(1);
    chebyshev_points(&problem.domain(), n)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuttingPlaneResult {
    pub solution: LpSolution,
    /// No violating point remained.
    pub converged: bool,
    /// `c̄` after every LP solve.
    pub history: Vec<BigRational>,
    pub points: Vec<BigRational>,
}

pub const MAX_CUT_ROUNDS: usize = 200;

/// Alternates LP solves and cut generation. Every `c̄` in the history is a
/// valid lower bound for integer points satisfying `cs`, since each LP
/// relaxes the semi-infinite problem.
/// New cutting points are rounded to the coarsest grid `2^-k`,
/// `k ∈ SNAP_BITS`, that keeps at least half of the violation found at the
/// bracket midpoint. Any point of the domain yields a valid constraint, and
/// short dyadics keep the LP entries small.
pub const SNAP_BITS: [u64; 7] = [8, 12, 16, 20, 24, 28, 32];

fn snap_to(x: &BigRational, bits: u64, domain: &Interval) -> BigRational {
    let scaled = x * BigRational::from_integer(BigInt::one() << bits);
    let q = dyadic(scaled.round().to_integer(), bits);
    if q < domain.lo {
        domain.lo.clone()
    } else if q > domain.hi {
        domain.hi.clone()
    } else {
        q
    }
}

fn snap_point(x: &BigRational, prod: &PolyProduct, threshold: &BigRational, domain: &Interval) -> BigRational {
    let excess = prod.eval(x).abs() - threshold;
    let need = &excess / BigRational::from_integer(2.into());
    for bits in SNAP_BITS {
        let q = snap_to(x, bits, domain);
        if prod.eval(&q).abs() - threshold >= need {
            return q;
        }
    }
    x.clone()
}

pub fn cutting_plane_solve(
    problem: &SearchProblem,
    cs: &ConstraintSet,
    eps: &BigRational,
    t0: &[BigRational],
) -> Result<CuttingPlaneResult> {
    if !eps.is_positive() {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    let domain = problem.domain();
    let mut sorted: Vec<BigRational> = t0.to_vec();
    sorted.sort();
    sorted.dedup();
    let mut rows: Vec<(BigRational, IntRow)> = sorted.into_iter().map(|x| { let r = IntRow::new(problem, &x); (x, r) }).collect();
    let points_of = |rows: &[(BigRational, IntRow)]| rows.iter().map(|(x, _)| x.clone()).collect::<Vec<_>>();
    let mut history = Vec::new();
    let mut prev: Option<BigRational> = None;
    for _ in 0..MAX_CUT_ROUNDS {
        let sol = solve_rows(problem, &rows, cs)?;
        history.push(sol.c_bar.clone());
        if let Some(p) = &prev {
            if &sol.c_bar - p < *eps {
                return Ok(CuttingPlaneResult { solution: sol, converged: false, history, points: points_of(&rows) });
            }
        }
        let (prod, d) = problem.scaled_objective(&sol.a_bar);
        let threshold = &sol.c_bar * BigRational::from_integer(d);
        let brackets = critical_points_above_product(&prod, &domain, &threshold)?;
        if brackets.is_empty() {
            return Ok(CuttingPlaneResult { solution: sol, converged: true, history, points: points_of(&rows) });
        }
        for b in &brackets {
            let x = snap_point(&b.midpoint(), &prod, &threshold, &domain);
            if let Err(at) = rows.binary_search_by(|(p, _)| p.cmp(&x)) {
                let r = IntRow::new(problem, &x);
                rows.insert(at, (x, r));
            }
        }
        prev = Some(sol.c_bar);
    }
    let sol = solve_rows(problem, &rows, cs)?;
    history.push(sol.c_bar.clone());
    Ok(CuttingPlaneResult { solution: sol, converged: false, history, points: points_of(&rows) })
}
