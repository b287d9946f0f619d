//! Exhaustive search over resultant vectors.
//!
//! For points `y_i = w_i/v_i` the integers `r_i = v_i^g G(y_i)` determine
//! `G` through `a_k = (1/m_k) Σ_i t_{k,i} r_i`. Integrality of the `a_k`
//! gives congruences `S·r ≡ 0 (mod M)`, `M = lcm m_k`, which are brought
//! to triangular form with unimodular row operations and used to step
//! through the admissible `r` level by level.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::bnb::{compare_norms, Incumbent};
use crate::error::{Error, Result};
use crate::lsip::{chebyshev_points, chebyshev_points_dyadic};
use crate::poly::IntPoly;
use crate::problem::SearchProblem;
use crate::rational::{ceil, floor};
use crate::simplex::{LinearProgram, LpResult};

/// Evaluation fractions `w_i/v_i`, reduced, with `v_i ≥ 1`, pairwise distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalPoints {
    points: Vec<(BigInt, BigInt)>,
}

impl EvalPoints {
    /// Takes `(v, w)` pairs.
    pub fn new(points: Vec<(BigInt, BigInt)>) -> Result<Self> {
        let mut out: Vec<(BigInt, BigInt)> = Vec::with_capacity(points.len());
        for (v, w) in points {
            if !v.is_positive() {
                return Err(Error::InvalidInput(alloc::format!("denominator {v} must be positive")));
            }
            let d = v.gcd(&w);
            let p = (&v / &d, &w / &d);
            if out.contains(&p) {
                return Err(Error::SingularPoints);
            }
            out.push(p);
        }
        Ok(EvalPoints { points: out })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn pairs(&self) -> &[(BigInt, BigInt)] {
        &self.points
    }

    pub fn fraction(&self, i: usize) -> BigRational {
        let (v, w) = &self.points[i];
        BigRational::new(w.clone(), v.clone())
    }
}

/// `w^k v^{g−k}`
fn monomial(v: &BigInt, w: &BigInt, k: usize, g: usize) -> BigInt {
    w.pow(k as u32) * v.pow((g - k) as u32)
}

/// `r = v^g G(w/v)` for every point.
pub fn resultants(points: &EvalPoints, gpoly: &IntPoly, g: usize) -> Vec<BigInt> {
    points
        .pairs()
        .iter()
        .map(|(v, w)| (0..=g).map(|k| gpoly.coeff(k) * monomial(v, w, k, g)).sum())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultantSystem {
    pub points: EvalPoints,
    /// Degree of `G`.
    pub g: usize,
    /// Unknowns are `a_first..a_g`; lower coefficients are fixed elsewhere.
    pub first: usize,
    /// `T`: `a_{first+k} = (1/m_k) Σ_i t[k][i] r_i`.
    pub t: Vec<Vec<BigInt>>,
    pub m: Vec<BigInt>,
    pub modulus: BigInt,
    /// `s[k][i] = (M/m_k) t[k][i] mod M`
    pub s: Vec<Vec<BigInt>>,
    /// Row-equivalent reduction of `s`: row `l` vanishes on columns
    /// `order[..l]`.
    pub s_tri: Vec<Vec<BigInt>>,
    /// Column elimination order; `order[l]` is assigned at level `l`, and
    /// back-substitution runs from the last level to the first.
    pub order: Vec<usize>,
}

fn mod_floor(a: &BigInt, m: &BigInt) -> BigInt {
    a.mod_floor(m)
}

/// Exact inverse of a square integer matrix.
fn invert(e: &[Vec<BigInt>]) -> Result<Vec<Vec<BigRational>>> {
    let n = e.len();
    let mut a: Vec<Vec<BigRational>> = e
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<BigRational> = row.iter().map(|x| BigRational::from_integer(x.clone())).collect();
            r.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero()).ok_or(Error::SingularPoints)?;
        a.swap(c, p);
        let piv = a[c][c].clone();
        for x in a[c].iter_mut() {
            *x /= &piv;
        }
        let prow = a[c].clone();
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for (x, y) in a[r].iter_mut().zip(&prow) {
                    *x -= &f * y;
                }
            }
        }
    }
    Ok(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Unimodular row reduction of `s` modulo `m` following `order`.
pub fn triangularize(s: &[Vec<BigInt>], m: &BigInt, order: &[usize]) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = s.iter().map(|r| r.iter().map(|x| mod_floor(x, m)).collect()).collect();
    let n = rows.len();
    for (lvl, &col) in order.iter().enumerate() {
        if lvl >= n {
            break;
        }
        for r in lvl + 1..n {
            if rows[r][col].is_zero() {
                continue;
            }
            if rows[lvl][col].is_zero() {
                rows.swap(lvl, r);
                continue;
            }
            let a = rows[lvl][col].clone();
            let b = rows[r][col].clone();
            let eg = a.extended_gcd(&b);
            let (gd, x, y) = (eg.gcd, eg.x, eg.y);
            let (ag, bg) = (&a / &gd, &b / &gd);
            let top: Vec<BigInt> =
                rows[lvl].iter().zip(&rows[r]).map(|(p, q)| mod_floor(&(&x * p + &y * q), m)).collect();
            let bottom: Vec<BigInt> =
                rows[lvl].iter().zip(&rows[r]).map(|(p, q)| mod_floor(&(&bg * p - &ag * q), m)).collect();
            rows[lvl] = top;
            rows[r] = bottom;
        }
    }
    rows
}

/// Builds the congruence system for the unknowns `a_first..a_g` over the
/// given points, one point per unknown.
pub fn build_system(points: &EvalPoints, g: usize, first: usize) -> Result<ResultantSystem> {
    let order: Vec<usize> = (0..points.len()).collect();
    build_system_ordered(points, g, first, order)
}

pub fn build_system_ordered(
    points: &EvalPoints,
    g: usize,
    first: usize,
    order: Vec<usize>,
) -> Result<ResultantSystem> {
    if first > g + 1 || points.len() != g + 1 - first {
        return Err(Error::InvalidInput(alloc::format!(
            "need {} points for unknowns a_{first}..a_{g}, got {}",
            g + 1 - first,
            points.len()
        )));
    }
    let n = points.len();
    let e: Vec<Vec<BigInt>> = points
        .pairs()
        .iter()
        .map(|(v, w)| (first..=g).map(|k| monomial(v, w, k, g)).collect())
        .collect();
    let inv = invert(&e)?;
    let mut t = Vec::with_capacity(n);
    let mut m = Vec::with_capacity(n);
    for row in &inv {
        let mk = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        t.push(row.iter().map(|q| q.numer() * (&mk / q.denom())).collect::<Vec<BigInt>>());
        m.push(mk);
    }
    let modulus = m.iter().fold(BigInt::one(), |acc, x| acc.lcm(x));
    let s: Vec<Vec<BigInt>> = t
        .iter()
        .zip(&m)
        .map(|(row, mk)| {
            let f = &modulus / mk;
            row.iter().map(|x| mod_floor(&(&f * x), &modulus)).collect()
        })
        .collect();
    let s_tri = triangularize(&s, &modulus, &order);
    Ok(ResultantSystem { points: points.clone(), g, first, t, m, modulus, s, s_tri, order })
}

impl ResultantSystem {
    pub fn dim(&self) -> usize {
        self.points.len()
    }

    /// `S·r mod M` and `S_tri·r mod M`.
    pub fn residues(&self, r: &[BigInt]) -> (Vec<BigInt>, Vec<BigInt>) {
        let apply = |mat: &[Vec<BigInt>]| {
            mat.iter()
                .map(|row| mod_floor(&row.iter().zip(r).map(|(a, b)| a * b).sum::<BigInt>(), &self.modulus))
                .collect()
        };
        (apply(&self.s), apply(&self.s_tri))
    }

    /// Coefficients `a_first..a_g` from `r`, if they are integers.
    pub fn coefficients(&self, r: &[BigInt]) -> Option<Vec<BigInt>> {
        self.t
            .iter()
            .zip(&self.m)
            .map(|(row, mk)| {
                let s: BigInt = row.iter().zip(r).map(|(a, b)| a * b).sum();
                let (q, rem) = s.div_rem(mk);
                rem.is_zero().then_some(q)
            })
            .collect()
    }
}

/// Closed integer intervals for each `r_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultantBounds {
    pub lo: Vec<BigInt>,
    pub hi: Vec<BigInt>,
}

impl ResultantBounds {
    pub fn width(&self, i: usize) -> BigInt {
        (&self.hi[i] - &self.lo[i] + 1u32).max(BigInt::zero())
    }

    pub fn contains(&self, r: &[BigInt]) -> bool {
        r.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (l, h))| l <= x && x <= h)
    }

    /// Bounds on `r_i − shift_i`.
    pub fn shifted(&self, shift: &[BigInt]) -> ResultantBounds {
        ResultantBounds {
            lo: self.lo.iter().zip(shift).map(|(l, s)| l - s).collect(),
            hi: self.hi.iter().zip(shift).map(|(h, s)| h - s).collect(),
        }
    }

    pub fn intersect(&self, other: &ResultantBounds) -> ResultantBounds {
        ResultantBounds {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(b).clone()).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(b).clone()).collect(),
        }
    }

    /// `log₂ Π width_i`, a proxy for the enumeration size.
    pub fn log2_volume(&self) -> f64 {
        (0..self.lo.len()).map(|i| libm::log2(self.width(i).to_f64().unwrap_or(f64::MAX).max(1.0))).sum()
    }
}

/// `⌊v^g · B⌋` with `|G(w/v)| ≤ B` from the direct bound.
fn direct_radius(problem: &SearchProblem, v: &BigInt, w: &BigInt, c: &BigRational) -> Option<BigInt> {
    let y = BigRational::new(w.clone(), v.clone());
    let b = problem.direct_bound(&y, c)?;
    Some(floor(&(b * BigRational::from_integer(v.pow(problem.g() as u32)))))
}

/// Candidate pool: reduced `w/v` with `1 ≤ v ≤ max_den` in the evaluation
/// interval. Zero is left out when `skip_zero` is set.
pub fn candidate_pool(problem: &SearchProblem, max_den: i64, skip_zero: bool) -> Vec<(BigInt, BigInt)> {
    let iv = problem.eval_interval();
    let mut out = Vec::new();
    for v in 1..=max_den {
        let vb = BigInt::from(v);
        let lo = ceil(&(&iv.lo * BigRational::from_integer(vb.clone())));
        let hi = floor(&(&iv.hi * BigRational::from_integer(vb.clone())));
        let mut w = lo;
        while w <= hi {
            if w.gcd(&vb).is_one() && !(skip_zero && w.is_zero()) {
                out.push((vb.clone(), w.clone()));
            }
            w += 1;
        }
    }
    out
}

pub const DEFAULT_POOL_DENOMINATOR: i64 = 12;

/// Greedy choice of `count` points by smallest direct-bound width; points
/// without a direct bound come last.
pub fn choose_points(problem: &SearchProblem, c: &BigRational, count: usize, skip_zero: bool) -> Result<EvalPoints> {
    let pool = candidate_pool(problem, DEFAULT_POOL_DENOMINATOR, skip_zero);
    if pool.len() < count {
        return Err(Error::PoolExhausted { needed: count, available: pool.len() });
    }
    let mut scored: Vec<(Option<BigInt>, (BigInt, BigInt))> =
        pool.into_iter().map(|(v, w)| (direct_radius(problem, &v, &w, c), (v, w))).collect();
    scored.sort_by(|a, b| match (&a.0, &b.0) {
        (Some(x), Some(y)) => x.cmp(y).then_with(|| a.1.cmp(&b.1)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.1.cmp(&b.1),
    });
    EvalPoints::new(scored.into_iter().take(count).map(|(_, p)| p).collect())
}

/// Number of discretization points of the LP bound.
/// Nodes of the bound grid are rounded to multiples of `2^-BOUND_GRID_BITS`.
pub const BOUND_GRID_BITS: u32 = 16;
pub const LP_BOUND_POINTS: usize = 200;

/// Per-point bounds on `r_i = v_i^g G(w_i/v_i)` for every integer `G` of
/// degree `g` with `a_g ≥ 1` and `‖F·G‖ ≤ c`: the tighter of the direct
/// bound and the LP over a 200-point discretization.
pub fn bound_resultants(problem: &SearchProblem, points: &EvalPoints, c: &BigRational) -> Result<ResultantBounds> {
    let g = problem.g();
    let grid = chebyshev_points_dyadic(&problem.domain(), LP_BOUND_POINTS - 2, BOUND_GRID_BITS);
    let rows: Vec<Vec<BigRational>> = grid.iter().map(|x| problem.row(x)).collect();
    let int_rows: Vec<IntRow> = rows.iter().map(|r| int_row(r)).collect();
    let mut lo = Vec::with_capacity(points.len());
    let mut hi = Vec::with_capacity(points.len());
    for (v, w) in points.pairs() {
        let direct = direct_radius(problem, v, w, c);
        let target: Vec<BigRational> =
            (0..=g).map(|k| BigRational::from_integer(monomial(v, w, k, g))).collect();
        let lp_min = lp_extreme(&rows, &int_rows, &target, c, g, false);
        let lp_max = lp_extreme(&rows, &int_rows, &target, c, g, true);
        let (mut l, mut h) = match &direct {
            Some(rad) => (-rad.clone(), rad.clone()),
            None => (BigInt::zero(), BigInt::zero()),
        };
        match (lp_min, lp_max, &direct) {
            (Some(a), Some(b), Some(_)) => {
                l = l.max(ceil(&a));
                h = h.min(floor(&b));
            }
            (Some(a), Some(b), None) => {
                l = ceil(&a);
                h = floor(&b);
            }
            (_, _, Some(_)) => {}
            _ => {
                return Err(Error::BoundsUnavailable(alloc::format!("{w}/{v}")));
            }
        }
        lo.push(l);
        hi.push(h);
    }
    Ok(ResultantBounds { lo, hi })
}

/// Direct bounds only.
pub fn direct_bounds(problem: &SearchProblem, points: &EvalPoints, c: &BigRational) -> Option<ResultantBounds> {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for (v, w) in points.pairs() {
        let r = direct_radius(problem, v, w, c)?;
        lo.push(-r.clone());
        hi.push(r);
    }
    Some(ResultantBounds { lo, hi })
}

/// Optimum of `±target·a` subject to `|row·a| ≤ c` for every row and
/// `a_g ≥ 1`. Solved on a growing subset of rows until no row is violated,
/// which gives the same optimum as the full program.
struct IntRow {
    num: Vec<BigInt>,
    den: BigInt,
}

fn int_row(r: &[BigRational]) -> IntRow {
    let den = r.iter().fold(BigInt::one(), |l, q| l.lcm(q.denom()));
    IntRow { num: r.iter().map(|q| q.numer() * (&den / q.denom())).collect(), den }
}

fn lp_extreme(
    rows: &[Vec<BigRational>],
    int_rows: &[IntRow],
    target: &[BigRational],
    c: &BigRational,
    g: usize,
    maximize: bool,
) -> Option<BigRational> {
    let start = (3 * (g + 1) + 2).min(rows.len());
    let mut active: Vec<bool> = vec![false; rows.len()];
    for k in 0..start {
        active[k * (rows.len() - 1) / (start - 1).max(1)] = true;
    }
    loop {
        let subset: Vec<&Vec<BigRational>> = rows.iter().zip(&active).filter(|(_, a)| **a).map(|(r, _)| r).collect();
        let full = subset.len() == rows.len();
        match lp_extreme_on(&subset, target, c, g, maximize) {
            Some((x, value)) => {
                // |row·x| ≤ c checked over common denominators
                let xd = x.iter().fold(BigInt::one(), |l, q| l.lcm(q.denom()));
                let xn: Vec<BigInt> = x.iter().map(|q| q.numer() * (&xd / q.denom())).collect();
                let mut added = false;
                for (a, ir) in active.iter_mut().zip(int_rows) {
                    if *a {
                        continue;
                    }
                    let v = ir.num.iter().zip(&xn).fold(BigInt::zero(), |acc, (p, q)| acc + p * q);
                    if v.abs() * c.denom() > c.numer() * &ir.den * &xd {
                        *a = true;
                        added = true;
                    }
                }
                if !added {
                    return Some(value);
                }
            }
            None if full => return None,
            None => active.iter_mut().for_each(|a| *a = true),
        }
    }
}

fn lp_extreme_on(
    rows: &[&Vec<BigRational>],
    target: &[BigRational],
    c: &BigRational,
    g: usize,
    maximize: bool,
) -> Option<(Vec<BigRational>, BigRational)> {
    let obj: Vec<BigRational> = target.iter().map(|x| if maximize { -x } else { x.clone() }).collect();
    let mut lp = LinearProgram::new(obj);
    for r in rows {
        lp.add_le((*r).clone(), c.clone());
        lp.add_ge((*r).clone(), -c);
    }
    let mut lead = vec![BigRational::zero(); g + 1];
    lead[g] = BigRational::one();
    lp.add_ge(lead, BigRational::one());
    match lp.solve() {
        LpResult::Optimal { x, value } => Some((x, if maximize { -value } else { value })),
        _ => None,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EnumStats {
    /// Complete `r` vectors reached.
    pub leaves: u64,
    /// Candidates that passed the sample prefilter and got a certified norm.
    pub norm_evals: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumOutcome {
    /// Best polynomial with norm at most `c` (the passed incumbent if none
    /// improves on it).
    pub best: Option<Incumbent>,
    pub stats: EnumStats,
}

/// Congruence `a·x ≡ −b (mod m)`: first solution and step, if solvable.
pub fn solve_linear_congruence(a: &BigInt, b: &BigInt, m: &BigInt) -> Option<(BigInt, BigInt)> {
    let a = mod_floor(a, m);
    let rhs = mod_floor(&-b, m);
    let d = a.gcd(m);
    if d.is_zero() {
        return rhs.is_zero().then(|| (BigInt::zero(), BigInt::one()));
    }
    if !(&rhs % &d).is_zero() {
        return None;
    }
    let step = m / &d;
    if step.is_one() {
        return Some((BigInt::zero(), BigInt::one()));
    }
    let a1 = &a / &d;
    let inv = mod_floor(&a1.extended_gcd(&step).x, &step);
    let x0 = mod_floor(&((&rhs / &d) * inv), &step);
    Some((x0, step))
}

struct Enumerator<'a> {
    system: &'a ResultantSystem,
    bounds: &'a ResultantBounds,
    problem: &'a SearchProblem,
    /// Fixed low coefficients.
    prefix: &'a [BigInt],
    sample_rows: Vec<Vec<BigRational>>,
    limit: BigRational,
    best: Option<Incumbent>,
    rel_tol: BigRational,
    stats: EnumStats,
    r: Vec<BigInt>,
}

impl Enumerator<'_> {
    fn run(&mut self) -> Result<()> {
        let n = self.system.dim();
        if n == 0 {
            return self.leaf();
        }
        self.level(n - 1)
    }

    fn level(&mut self, lvl: usize) -> Result<()> {
        let sys = self.system;
        let col = sys.order[lvl];
        let row = &sys.s_tri[lvl];
        let b: BigInt = sys.order[lvl + 1..].iter().map(|&i| &row[i] * &self.r[i]).sum();
        let Some((x0, step)) = solve_linear_congruence(&row[col], &b, &sys.modulus) else {
            return Ok(());
        };
        let lo = &self.bounds.lo[col];
        let hi = &self.bounds.hi[col];
        // smallest x ≥ lo with x ≡ x0 (mod step)
        let mut x = lo + mod_floor(&(&x0 - lo), &step);
        while &x <= hi {
            self.r[col] = x.clone();
            if lvl == 0 {
                self.leaf()?;
            } else {
                self.level(lvl - 1)?;
            }
            x += &step;
        }
        Ok(())
    }

    fn leaf(&mut self) -> Result<()> {
        self.stats.leaves += 1;
        let Some(tail) = self.system.coefficients(&self.r) else {
            return Ok(());
        };
        let mut coeffs: Vec<BigInt> = self.prefix.to_vec();
        coeffs.extend(tail);
        if coeffs.len() != self.problem.g() + 1 || coeffs[self.problem.g()] < BigInt::one() {
            return Ok(());
        }
        self.consider(coeffs)
    }

    fn consider(&mut self, coeffs: Vec<BigInt>) -> Result<()> {
        let limit = match &self.best {
            Some(b) => b.norm.hi.clone(),
            None => self.limit.clone(),
        };
        for row in &self.sample_rows {
            let v: BigRational = row.iter().zip(&coeffs).map(|(p, a)| p * a).sum();
            if v.abs() > limit {
                return Ok(());
            }
        }
        let g = IntPoly::new(coeffs);
        self.stats.norm_evals += 1;
        let norm = self.problem.norm(&g, &self.rel_tol)?;
        let better = match &self.best {
            None => norm.hi <= self.limit,
            Some(inc) => compare_norms(self.problem, (&g, &norm), (&inc.g_star, &inc.norm))? == Ordering::Less,
        };
        if better {
            self.best = Some(Incumbent { g_star: g, norm });
        }
        Ok(())
    }
}

fn sample_rows(problem: &SearchProblem) -> Vec<Vec<BigRational>> {
    let n = 2 * (problem.g() + problem.f().degree().unwrap_or(0)) + 2;
    chebyshev_points(&problem.domain(), n).iter().map(|x| problem.row(x)).collect()
}

/// Visits every `r` in the bounds satisfying the triangular congruences and
/// keeps the best polynomial with `‖F·G‖ ≤ c`. `bounds` refer to the
/// system's unknown resultants (shifted ones for a partial system).
pub fn enumerate(
    system: &ResultantSystem,
    bounds: &ResultantBounds,
    problem: &SearchProblem,
    c: &BigRational,
    incumbent: Option<Incumbent>,
    rel_tol: &BigRational,
) -> Result<EnumOutcome> {
    enumerate_with_prefix(system, bounds, problem, &[], c, incumbent, rel_tol)
}

fn enumerate_with_prefix(
    system: &ResultantSystem,
    bounds: &ResultantBounds,
    problem: &SearchProblem,
    prefix: &[BigInt],
    c: &BigRational,
    incumbent: Option<Incumbent>,
    rel_tol: &BigRational,
) -> Result<EnumOutcome> {
    if prefix.len() != system.first {
        return Err(Error::InvalidInput("fixed prefix does not match the system".into()));
    }
    let mut e = Enumerator {
        system,
        bounds,
        problem,
        prefix,
        sample_rows: sample_rows(problem),
        limit: c.clone(),
        best: incumbent,
        rel_tol: rel_tol.clone(),
        stats: EnumStats::default(),
        r: vec![BigInt::zero(); system.dim()],
    };
    e.run()?;
    Ok(EnumOutcome { best: e.best, stats: e.stats })
}

/// `v_i^g Σ_{k<first} a_k (w_i/v_i)^k` for the fixed low coefficients.
pub fn shift_values(points: &EvalPoints, g: usize, fixed: &[BigInt]) -> Vec<BigInt> {
    points
        .pairs()
        .iter()
        .map(|(v, w)| fixed.iter().enumerate().map(|(k, a)| a * monomial(v, w, k, g)).sum())
        .collect()
}

/// Enumeration over the shifted resultants `r̄_i = r_i − v_i^g Σ_{k≤j} ā_k (w_i/v_i)^k`
/// with `a_0..a_j` fixed. `full_bounds` bound the unshifted `r_i` at the
/// system's points and are translated here.
#[allow(clippy::too_many_arguments)]
pub fn shifted_search(
    system: &ResultantSystem,
    full_bounds: &ResultantBounds,
    fixed: &[BigInt],
    problem: &SearchProblem,
    c: &BigRational,
    incumbent: Option<Incumbent>,
    rel_tol: &BigRational,
) -> Result<EnumOutcome> {
    let shift = shift_values(&system.points, system.g, fixed);
    let bounds = full_bounds.shifted(&shift);
    enumerate_with_prefix(system, &bounds, problem, fixed, c, incumbent, rel_tol)
}

/// Column order putting the widest bound last in back-substitution.
pub fn widest_last_order(bounds: &ResultantBounds) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..bounds.lo.len()).collect();
    idx.sort_by(|&a, &b| bounds.width(b).cmp(&bounds.width(a)).then(a.cmp(&b)));
    idx
}

/// A ready-to-run resultant search over the unknowns `a_first..a_g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparedSearch {
    pub system: ResultantSystem,
    /// Bounds on the unshifted `r_i`.
    pub bounds: ResultantBounds,
}

/// Chooses points, bounds them and builds the system.
pub fn prepare(problem: &SearchProblem, c: &BigRational, first: usize) -> Result<PreparedSearch> {
    let g = problem.g();
    if first > g + 1 {
        return Err(Error::InvalidInput("more fixed coefficients than the degree allows".into()));
    }
    let count = g + 1 - first;
    let points = choose_points(problem, c, count, first > 0)?;
    let bounds = bound_resultants(problem, &points, c)?;
    let order = widest_last_order(&bounds);
    let system = build_system_ordered(&points, g, first, order)?;
    Ok(PreparedSearch { system, bounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::Interval;
    use crate::problem::Embedding;
    use crate::rational::rat;

    fn pts(p: &[(i64, i64)]) -> EvalPoints {
        EvalPoints::new(p.iter().map(|&(v, w)| (v.into(), w.into())).collect()).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| x.into()).collect()
    }

    #[test]
    fn trivial_modulus() {
        let sys = build_system(&pts(&[(1, 0), (2, 1)]), 1, 0).unwrap();
        assert_eq!(sys.modulus, BigInt::one());
        assert_eq!(sys.m, ints(&[1, 1]));
        // a_0 = r_1, a_1 = r_2 − 2 r_1
        assert_eq!(sys.coefficients(&ints(&[3, 5])), Some(ints(&[3, -1])));
    }

    #[test]
    fn parity_modulus() {
        let sys = build_system(&pts(&[(1, 0), (3, 2)]), 1, 0).unwrap();
        assert_eq!(sys.modulus, BigInt::from(2));
        let (s, st) = sys.residues(&ints(&[1, 1]));
        assert!(s.iter().chain(&st).all(Zero::is_zero));
        let (s, _) = sys.residues(&ints(&[1, 2]));
        assert!(!s.iter().all(Zero::is_zero));
        assert_eq!(sys.coefficients(&ints(&[1, 5])), Some(ints(&[1, 1])));
        assert_eq!(sys.coefficients(&ints(&[1, 4])), None);
    }

    #[test]
    fn duplicate_points_rejected() {
        assert!(EvalPoints::new(vec![(1.into(), 0.into()), (2.into(), 0.into())]).is_err());
        assert!(EvalPoints::new(vec![(2.into(), 1.into()), (4.into(), 2.into())]).is_err());
    }

    #[test]
    fn congruence_solver() {
        // 4x ≡ −2 (mod 6): x ≡ 1 (mod 3)
        assert_eq!(solve_linear_congruence(&4.into(), &2.into(), &6.into()), Some((1.into(), 3.into())));
        assert_eq!(solve_linear_congruence(&4.into(), &1.into(), &6.into()), None);
        assert_eq!(solve_linear_congruence(&0.into(), &0.into(), &5.into()), Some((0.into(), 1.into())));
        assert_eq!(solve_linear_congruence(&0.into(), &1.into(), &5.into()), None);
    }

    #[test]
    fn parity_enumeration_visits_even_sums() {
        let sp = SearchProblem::from_poly(IntPoly::one(), 1, Embedding::Direct(Interval::unit())).unwrap();
        let sys = build_system(&pts(&[(1, 0), (3, 2)]), 1, 0).unwrap();
        let bounds = ResultantBounds { lo: ints(&[-1, -2]), hi: ints(&[1, 2]) };
        let out = enumerate(&sys, &bounds, &sp, &rat(100, 1), None, &rat(1, 1_000_000)).unwrap();
        // r_1 ∈ {−1,0,1}, r_2 ∈ [−2,2] with r_1 + r_2 even: 2 + 3 + 2
        assert_eq!(out.stats.leaves, 7);
    }

    #[test]
    fn direct_bound_example() {
        let sp = SearchProblem::from_poly(IntPoly::one(), 0, Embedding::Direct(Interval::quarter())).unwrap();
        let b = bound_resultants(&sp, &pts(&[(1, 0)]), &rat(1, 1)).unwrap();
        assert_eq!(b.lo, ints(&[1]));
        assert_eq!(b.hi, ints(&[1]));
        let d = direct_bounds(&sp, &pts(&[(1, 0)]), &rat(1, 1)).unwrap();
        assert_eq!((d.lo, d.hi), (ints(&[-1]), ints(&[1])));
    }

    #[test]
    fn point_at_root_of_f_uses_lp() {
        let sp = SearchProblem::from_poly(IntPoly::x(), 1, Embedding::Direct(Interval::quarter())).unwrap();
        assert_eq!(direct_bounds(&sp, &pts(&[(1, 0)]), &rat(1, 1)), None);
        let b = bound_resultants(&sp, &pts(&[(1, 0), (4, 1)]), &rat(1, 1)).unwrap();
        assert!(b.lo[0] <= b.hi[0]);
    }

    #[test]
    fn shifted_with_everything_fixed() {
        let sp = SearchProblem::from_poly(IntPoly::one(), 1, Embedding::Direct(Interval::quarter())).unwrap();
        let sys = build_system(&EvalPoints::new(Vec::new()).unwrap(), 1, 2).unwrap();
        let bounds = ResultantBounds { lo: Vec::new(), hi: Vec::new() };
        let out = shifted_search(&sys, &bounds, &ints(&[0, 1]), &sp, &rat(1, 1), None, &rat(1, 1_000_000)).unwrap();
        let best = out.best.unwrap();
        assert_eq!(best.g_star, IntPoly::x());
        assert_eq!(best.norm.hi, rat(1, 4));
    }

    #[test]
    fn shift_changes_parity() {
        // g = 1, points 0/1 and 2/3; with a_0 = 1 fixed, r̄_2 = 2 a_1 must be even
        let p = pts(&[(3, 2)]);
        let sys = build_system(&p, 1, 1).unwrap();
        assert_eq!(sys.modulus, BigInt::from(2));
        assert_eq!(shift_values(&p, 1, &ints(&[1])), ints(&[3]));
    }

    #[test]
    fn prepared_search_finds_degree_two_optimum() {
        let sp = SearchProblem::from_poly(IntPoly::one(), 2, Embedding::Direct(Interval::unit())).unwrap();
        let prep = prepare(&sp, &rat(1, 2), 0).unwrap();
        let out = enumerate(&prep.system, &prep.bounds, &sp, &rat(1, 2), None, &rat(1, 1_000_000)).unwrap();
        let best = out.best.unwrap();
        assert_eq!(best.norm.hi, rat(1, 4));
    }
}
