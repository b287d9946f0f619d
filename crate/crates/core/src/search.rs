//! End-to-end search for a degree-`n` polynomial on `[0,1]`: initial bound,
//! forced-factor deduction, reduction to `x(1−x)`, then branch and bound,
//! resultant enumeration, or branch and bound handing nodes to shifted
//! resultant searches.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::bnb::{BnbConfig, BnbEvent, BnbObserver, BnbSnapshot, BnbStats, BranchAndBound, Incumbent, Mode, Progress};
use crate::error::{Error, Result};
use crate::kb::{default_candidates, deduce_forced_factors, upper_bound_cn, FactorKB, FactorState};
use crate::norm::{nth_root_enclosure, sup_norm_product, Interval, NormEnclosure, PolyProduct};
use crate::poly::IntPoly;
use crate::problem::{Embedding, SearchProblem};
use crate::resultant::{enumerate, prepare, shifted_search, PreparedSearch};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Branch until `handoff_remaining` coefficients are free, then enumerate.
    Combined { handoff_remaining: usize },
    BranchAndBound,
    Resultant,
}

pub const DEFAULT_HANDOFF: usize = 11;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub n: usize,
    pub mode: SearchMode,
    pub c0: Option<BigRational>,
    pub rel_tol: BigRational,
    pub eps_factor: BigRational,
    /// Largest denominator `a` tried by the deduction.
    pub deduction_max_a: i64,
    /// Emit a checkpoint after this many dequeued nodes.
    pub checkpoint_every: Option<u64>,
}

impl SearchConfig {
    pub fn new(n: usize) -> Self {
        let bnb = BnbConfig::default();
        SearchConfig {
            n,
            mode: SearchMode::Combined { handoff_remaining: DEFAULT_HANDOFF },
            c0: None,
            rel_tol: bnb.rel_tol,
            eps_factor: bnb.eps_factor,
            deduction_max_a: 8,
            checkpoint_every: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum C0Source {
    Override,
    Split(usize, usize),
    /// `‖h_1^{⌊n/2⌋} h_2^{n mod 2}‖`, used when no split is available.
    Elementary,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub bnb: BnbStats,
    pub enum_leaves: u64,
    pub enum_norm_evals: u64,
    pub shifted_searches: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub c0: BigRational,
    pub c0_source: C0Source,
    /// State after deduction, on `[0,1]`.
    pub state: FactorState,
    pub problem: SearchProblem,
    pub g_star: IntPoly,
    /// Norm of the result on `[0,1]` (equal to the norm in the working domain).
    pub norm: NormEnclosure,
    pub poly: IntPoly,
    pub product: PolyProduct,
    /// Enclosure of `‖p‖^{1/n}`.
    pub t: (BigRational, BigRational),
    pub stats: SearchStats,
}

pub trait SearchObserver {
    fn bnb_event(&mut self, _e: &BnbEvent<'_>) {}
    fn checkpoint(&mut self, _snap: &BnbSnapshot) {}
    fn note(&mut self, _msg: &str) {}
}

impl SearchObserver for () {}

struct Forward<'a>(&'a mut dyn SearchObserver);

impl BnbObserver for Forward<'_> {
    fn event(&mut self, e: &BnbEvent<'_>) {
        self.0.bnb_event(e)
    }
}

fn h1() -> IntPoly {
    IntPoly::from_i64(&[0, 1, -1])
}

fn h2() -> IntPoly {
    IntPoly::from_i64(&[-1, 2])
}

/// `c_0` from the knowledge base, or the elementary product bound.
pub fn initial_bound(n: usize, kb: &FactorKB, rel_tol: &BigRational) -> Result<(BigRational, C0Source)> {
    match upper_bound_cn(n, kb, rel_tol) {
        Ok(b) => Ok((b.norm.hi.clone(), C0Source::Split(b.split.0, b.split.1))),
        Err(Error::NoSplit(_)) => {
            let mut p = PolyProduct::default();
            p.push(h1(), (n / 2) as u32);
            p.push(h2(), (n % 2) as u32);
            let e = sup_norm_product(&p, &Interval::unit(), rel_tol)?;
            Ok((e.hi, C0Source::Elementary))
        }
        Err(e) => Err(e),
    }
}

/// Reduces `F·G` of degree `n` on `[0,1]` to the working problem. Symmetric
/// or antisymmetric factor lists go to `y = x(1−x)`; anything else stays on
/// `[0,1]`.
pub fn embed(f01: &PolyProduct, n: usize) -> Result<SearchProblem> {
    let deg_f = f01.degree().ok_or(Error::ZeroPolynomial)?;
    if deg_f > n {
        return Err(Error::NegativeDegree);
    }
    let odd = n % 2 == 1;
    let mut reduced = PolyProduct::default();
    let mut twos = 0u32;
    let Some(groups) = pair_mirrors(f01) else {
        return SearchProblem::new(f01.clone(), n - deg_f, Embedding::Direct(Interval::unit()));
    };
    for (p, e) in groups {
        let (q, has_two) = p.desymmetrize().expect("paired factors are symmetric");
        if q != IntPoly::one() {
            reduced.push(q, e);
        }
        if has_two {
            twos += e;
        }
    }
    // (2x−1)² = 1 − 4y; one (2x−1) left over must match the parity of n,
    // otherwise G supplies it.
    let mut extra = 0;
    if (twos % 2 == 1) != odd {
        twos += 1;
        extra = 1;
    }
    if deg_f + extra > n {
        return Err(Error::NegativeDegree);
    }
    reduced.push(IntPoly::from_i64(&[1, -4]), twos / 2);
    let deg_red = reduced.degree().unwrap_or(0);
    let g = (n - deg_f - extra) / 2;
    debug_assert_eq!(2 * (deg_red + g) + usize::from(odd), n);
    let emb = if odd { Embedding::OddSymmetric } else { Embedding::EvenSymmetric };
    SearchProblem::new(reduced, g, emb)
}

/// Groups factors into symmetric or antisymmetric pieces: a factor on its
/// own, or `P·Q` with `Q = ±P(1−x)`. `None` when some factor is unmatched.
fn pair_mirrors(f: &PolyProduct) -> Option<Vec<(IntPoly, u32)>> {
    let mirror = IntPoly::from_i64(&[1, -1]);
    let mut rest: Vec<(IntPoly, u32)> = f.factors().to_vec();
    let mut out = Vec::new();
    while let Some((p, e)) = rest.pop() {
        if p.desymmetrize().is_some() {
            out.push((p, e));
            continue;
        }
        let m = p.compose(&mirror);
        let pos = rest.iter().position(|(q, _)| *q == m || *q == -&m)?;
        let common = e.min(rest[pos].1);
        out.push((&p * &rest[pos].0, common));
        rest[pos].1 -= common;
        if rest[pos].1 == 0 {
            rest.remove(pos);
        }
        if e > common {
            rest.push((p, e - common));
        }
    }
    Some(out)
}

/// Runs the configured pipeline for degree `n` given known factors `f01`
/// on `[0,1]`.
pub fn search(
    config: &SearchConfig,
    kb: &FactorKB,
    f01: &PolyProduct,
    resume: Option<BnbSnapshot>,
    obs: &mut dyn SearchObserver,
) -> Result<SearchOutcome> {
    let n = config.n;
    if n == 0 {
        return Err(Error::InvalidInput("degree must be at least 1".into()));
    }
    let (c0, c0_source) = match &config.c0 {
        Some(c) => (c.clone(), C0Source::Override),
        None => initial_bound(n, kb, &config.rel_tol)?,
    };
    if c0_source == C0Source::Elementary {
        obs.note("no usable split in the knowledge base; using the elementary product bound");
    }
    let deg_f = f01.degree().ok_or(Error::ZeroPolynomial)?;
    if deg_f > n {
        return Err(Error::NegativeDegree);
    }
    let state0 = FactorState::new(f01.expand(), n - deg_f, c0.clone(), Interval::unit())?;
    let cands = default_candidates(&Interval::unit(), config.deduction_max_a);
    let state = deduce_forced_factors(&state0, &cands)?;
    let mut f_all = f01.clone();
    for (a, b) in &state.forced {
        f_all.push(IntPoly::linear(a.clone(), b.clone()), 1);
    }
    let problem = embed(&f_all, n)?;
    obs.note(&alloc::format!(
        "working problem: g = {}, deg F = {}, {:?}",
        problem.g(),
        problem.f().degree().unwrap_or(0),
        problem.embedding()
    ));

    let (best, stats) = solve(&problem, &c0, config, resume, obs)?;
    let best = best.ok_or(Error::EmptySearch)?;
    let poly = problem.final_poly(&best.g_star);
    let product = problem.final_product(&best.g_star);
    let t = nth_root_enclosure(&best.norm, n as u32, &config.rel_tol);
    Ok(SearchOutcome {
        c0,
        c0_source,
        state,
        problem: problem.clone(),
        g_star: best.g_star,
        norm: best.norm,
        poly,
        product,
        t,
        stats,
    })
}

/// Runs the configured mode on a working problem; `None` when nothing lies
/// within `c0`.
pub fn solve(
    problem: &SearchProblem,
    c0: &BigRational,
    config: &SearchConfig,
    resume: Option<BnbSnapshot>,
    obs: &mut dyn SearchObserver,
) -> Result<(Option<Incumbent>, SearchStats)> {
    let bnb_config =
        BnbConfig { rel_tol: config.rel_tol.clone(), eps_factor: config.eps_factor.clone(), ..BnbConfig::default() };
    let mut stats = SearchStats::default();
    let enumerate_all = |stats: &mut SearchStats| -> Result<Option<Incumbent>> {
        let prep = prepare(problem, c0, 0)?;
        let out = enumerate(&prep.system, &prep.bounds, problem, c0, None, &config.rel_tol)?;
        stats.enum_leaves += out.stats.leaves;
        stats.enum_norm_evals += out.stats.norm_evals;
        Ok(out.best)
    };
    let best = match config.mode {
        SearchMode::BranchAndBound => {
            run_bnb(problem, c0, bnb_config, Mode::Full, resume, config, &mut stats, obs)?
        }
        SearchMode::Resultant => enumerate_all(&mut stats)?,
        SearchMode::Combined { handoff_remaining } => {
            let unknowns = problem.g() + 1;
            if handoff_remaining >= unknowns {
                enumerate_all(&mut stats)?
            } else {
                let j = unknowns - handoff_remaining - 1;
                run_bnb(problem, c0, bnb_config, Mode::Until(j), resume, config, &mut stats, obs)?
            }
        }
    };
    Ok((best, stats))
}

#[allow(clippy::too_many_arguments)]
fn run_bnb(
    problem: &SearchProblem,
    c0: &BigRational,
    bnb_config: BnbConfig,
    mode: Mode,
    resume: Option<BnbSnapshot>,
    config: &SearchConfig,
    stats: &mut SearchStats,
    obs: &mut dyn SearchObserver,
) -> Result<Option<Incumbent>> {
    let mut bb = match resume {
        Some(s) => BranchAndBound::restore(problem, s, bnb_config),
        None => BranchAndBound::new(problem, c0, bnb_config)?,
    };
    let mut prepared: BTreeMap<usize, PreparedSearch> = BTreeMap::new();
    loop {
        let progress = bb.step(mode, config.checkpoint_every, &mut Forward(obs))?;
        let node = match progress {
            Progress::Done => break,
            Progress::Budget => {
                obs.checkpoint(&bb.snapshot());
                continue;
            }
            Progress::Handoff(node) => node,
        };
        let first = node.depth;
        let fixed: Vec<BigInt> = (0..first)
            .map(|i| node.constraints.fixed(i).cloned().expect("fixed prefix"))
            .collect();
        if !prepared.contains_key(&first) {
            prepared.insert(first, prepare(problem, c0, first)?);
        }
        let prep = &prepared[&first];
        let out = shifted_search(
            &prep.system,
            &prep.bounds,
            &fixed,
            problem,
            bb.upper_bound(),
            bb.incumbent().cloned(),
            &config.rel_tol,
        )?;
        stats.shifted_searches += 1;
        stats.enum_leaves += out.stats.leaves;
        stats.enum_norm_evals += out.stats.norm_evals;
        if let Some(best) = out.best {
            if bb.incumbent() != Some(&best) {
                let mut fwd = Forward(obs);
                bb.offer(best.g_star, best.norm, &mut fwd)?;
            }
        }
    }
    stats.bnb = bb.stats().clone();
    Ok(bb.incumbent().cloned())
}

/// Human-readable one-line summary.
pub fn describe(out: &SearchOutcome) -> String {
    alloc::format!(
        "n = {}, t in [{}, {}], G = {}",
        out.poly.degree().unwrap_or(0),
        crate::rational::to_decimal(&out.t.0, 10, crate::rational::Rounding::Down),
        crate::rational::to_decimal(&out.t.1, 10, crate::rational::Rounding::Up),
        out.g_star
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn degree_two_from_scratch() {
        let kb = FactorKB::builtin();
        for mode in [
            SearchMode::BranchAndBound,
            SearchMode::Resultant,
            SearchMode::Combined { handoff_remaining: DEFAULT_HANDOFF },
        ] {
            let mut cfg = SearchConfig::new(2);
            cfg.mode = mode;
            let out = search(&cfg, &kb, &PolyProduct::default(), None, &mut ()).unwrap();
            let h = h1();
            assert!(out.poly == h || out.poly == h.scale(&BigInt::from(-1)));
            assert_eq!(out.t, (rat(1, 2), rat(1, 2)));
        }
    }

    #[test]
    fn embedding_parities() {
        let mut f = PolyProduct::default();
        f.push(h2(), 1);
        let p = embed(&f, 5).unwrap();
        assert_eq!(p.embedding(), &Embedding::OddSymmetric);
        assert_eq!(p.g(), 2);
        let p = embed(&f, 4).unwrap();
        assert_eq!(p.embedding(), &Embedding::EvenSymmetric);
        // F = 2x − 1 at even n forces a second 2x − 1: F̃ = 1 − 4y, g = 1
        assert_eq!(p.g(), 1);
        assert_eq!(p.f(), &IntPoly::from_i64(&[1, -4]));
        let mut f = PolyProduct::default();
        f.push(IntPoly::x(), 1);
        assert_eq!(embed(&f, 4).unwrap().embedding(), &Embedding::Direct(Interval::unit()));
        f.push(IntPoly::from_i64(&[-1, 1]), 1);
        let p = embed(&f, 4).unwrap();
        assert_eq!(p.embedding(), &Embedding::EvenSymmetric);
        assert_eq!(p.g(), 1);
        assert_eq!(p.f_product().expand().degree(), Some(1));
    }

    #[test]
    fn degree_three_modes_agree() {
        let kb = FactorKB::builtin();
        let mut norms = Vec::new();
        for mode in [SearchMode::BranchAndBound, SearchMode::Resultant, SearchMode::Combined { handoff_remaining: 1 }] {
            let mut cfg = SearchConfig::new(3);
            cfg.mode = mode;
            let out = search(&cfg, &kb, &PolyProduct::default(), None, &mut ()).unwrap();
            assert_eq!(out.poly.degree(), Some(3));
            norms.push(out.norm);
        }
        // (2x − 1)(x − x²) has norm √3/18
        assert!(norms.windows(2).all(|w| w[0].overlaps(&w[1])));
    }
}
