//! Best-first branch and bound over the coefficients of `G`.
//!
//! Each node is a [`ConstraintSet`] bounded below by the cutting-plane
//! relaxation. Nodes are expanded in order of ascending bound (deeper
//! first, then oldest first), the relaxation solution is rounded into an
//! incumbent candidate, and branching on the smallest unfixed index `i`
//! produces up to four children `a_i = ⌈ā_i⌉`, `a_i = ⌊ā_i⌋`,
//! `a_i ≥ ⌈ā_i⌉ + 1`, `a_i ≤ ⌊ā_i⌋ − 1`.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::lsip::{cutting_plane_solve, initial_points, BoundKind, CoefConstraint, ConstraintSet};
use crate::norm::NormEnclosure;
use crate::poly::IntPoly;
use crate::problem::SearchProblem;
use crate::rational::{ceil, floor, rat, round_half_toward_zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub constraints: ConstraintSet,
    /// Converged relaxation value `c̄`.
    pub bound: BigRational,
    pub a_bar: Vec<BigRational>,
    /// Number of leading fixed coefficients.
    pub depth: usize,
    pub seq: u64,
    /// Points active in the relaxation; reused by the children.
    pub active_points: Vec<BigRational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Incumbent {
    pub g_star: IntPoly,
    pub norm: NormEnclosure,
}

impl Incumbent {
    /// Certified upper bound `c*` on `‖F·G*‖`.
    pub fn c_star(&self) -> &BigRational {
        &self.norm.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Full,
    /// Hand off nodes once `a_0..a_j` are fixed.
    Until(usize),
}

#[derive(Debug)]
pub enum Progress {
    Handoff(Node),
    /// The dequeue budget ran out with work remaining.
    Budget,
    Done,
}

#[derive(Debug)]
pub enum BnbEvent<'a> {
    Dequeued { bound: &'a BigRational, depth: usize },
    Pruned { bound: &'a BigRational, depth: usize },
    Incumbent(&'a Incumbent),
    Handoff { bound: &'a BigRational, depth: usize },
}

pub trait BnbObserver {
    fn event(&mut self, e: &BnbEvent<'_>);
}

impl BnbObserver for () {
    fn event(&mut self, _: &BnbEvent<'_>) {}
}

impl<F: FnMut(&BnbEvent<'_>)> BnbObserver for F {
    fn event(&mut self, e: &BnbEvent<'_>) {
        self(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BnbConfig {
    /// Relative tolerance of candidate norm enclosures.
    pub rel_tol: BigRational,
    /// Cutting-plane termination threshold relative to the incumbent.
    pub eps_factor: BigRational,
    /// `c_0` is multiplied by `1 + c0_slack`.
    pub c0_slack: BigRational,
}

impl Default for BnbConfig {
    fn default() -> Self {
        BnbConfig {
            rel_tol: crate::norm::default_rel_tol(),
            eps_factor: rat(1, 10_000_000_000),
            c0_slack: rat(1, 1_000_000_000),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BnbStats {
    pub dequeued: u64,
    pub pruned: u64,
    pub infeasible: u64,
    pub lp_solves: u64,
    pub handoffs: u64,
    pub incumbent_updates: u64,
}

/// Serializable state of an interrupted run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BnbSnapshot {
    pub nodes: Vec<Node>,
    pub incumbent: Option<Incumbent>,
    pub upper: BigRational,
    pub next_seq: u64,
    pub stats: BnbStats,
}

struct Queued(Node);

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    /// Greater means dequeued first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .bound
            .cmp(&self.0.bound)
            .then(self.0.depth.cmp(&other.0.depth))
            .then(other.0.seq.cmp(&self.0.seq))
    }
}

/// Children constraint sets on the smallest unfixed index, intersected with
/// the existing bounds (and `a_g ≥ 1`); empty children are dropped.
pub fn branch(cs: &ConstraintSet, a_bar: &[BigRational], g: usize) -> Vec<ConstraintSet> {
    let i = cs.fixed_prefix();
    if i > g {
        return Vec::new();
    }
    let base = if i == g {
        match cs.with(&CoefConstraint { index: g, kind: BoundKind::Lower(BigInt::one()) }) {
            Some(b) => b,
            None => return Vec::new(),
        }
    } else {
        cs.clone()
    };
    let hi = ceil(&a_bar[i]);
    let lo = floor(&a_bar[i]);
    let mut kinds = alloc::vec![BoundKind::Fixed(hi.clone())];
    if lo != hi {
        kinds.push(BoundKind::Fixed(lo.clone()));
    }
    kinds.push(BoundKind::Lower(hi + 1));
    kinds.push(BoundKind::Upper(lo - 1));
    let mut out: Vec<ConstraintSet> = Vec::new();
    for kind in kinds {
        if let Some(c) = base.with(&CoefConstraint { index: i, kind }) {
            if !out.contains(&c) {
                out.push(c);
            }
        }
    }
    out
}

/// Rounds `ā` to the nearest integers (ties toward zero) and certifies the
/// norm of the result, unless the leading coefficient drops below one.
pub fn round_candidate(
    problem: &SearchProblem,
    a_bar: &[BigRational],
    rel_tol: &BigRational,
) -> Result<Option<(IntPoly, NormEnclosure)>> {
    let coeffs: Vec<BigInt> = a_bar.iter().map(round_half_toward_zero).collect();
    if coeffs.last().map_or(true, |c| *c < BigInt::one()) {
        return Ok(None);
    }
    let g = IntPoly::new(coeffs);
    let norm = problem.norm(&g, rel_tol)?;
    Ok(Some((g, norm)))
}

/// Compares two certified norms, refining overlapping enclosures. Values
/// still overlapping at 10⁻⁸⁰ relative width count as equal.
pub fn compare_norms(
    problem: &SearchProblem,
    a: (&IntPoly, &NormEnclosure),
    b: (&IntPoly, &NormEnclosure),
) -> Result<Ordering> {
    let decide = |x: &NormEnclosure, y: &NormEnclosure| {
        if x.hi < y.lo {
            Some(Ordering::Less)
        } else if x.lo > y.hi {
            Some(Ordering::Greater)
        } else if x.lo == x.hi && y.lo == y.hi && x.lo == y.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    };
    if let Some(o) = decide(a.1, b.1) {
        return Ok(o);
    }
    if a.0 == b.0 {
        return Ok(Ordering::Equal);
    }
    for digits in [40u32, 80] {
        let tol = BigRational::new(BigInt::one(), BigInt::from(10u32).pow(digits));
        let x = problem.norm(a.0, &tol)?;
        let y = problem.norm(b.0, &tol)?;
        if let Some(o) = decide(&x, &y) {
            return Ok(o);
        }
    }
    Ok(Ordering::Equal)
}

pub struct BranchAndBound<'p> {
    problem: &'p SearchProblem,
    config: BnbConfig,
    queue: BinaryHeap<Queued>,
    incumbent: Option<Incumbent>,
    upper: BigRational,
    seq: u64,
    t0: Vec<BigRational>,
    stats: BnbStats,
}

impl<'p> BranchAndBound<'p> {
    /// Sets up the search with `UpperBound = c_0·(1 + slack)` and solves the
    /// root relaxation.
    pub fn new(problem: &'p SearchProblem, c0: &BigRational, config: BnbConfig) -> Result<Self> {
        let upper = c0 * (BigRational::one() + &config.c0_slack);
        let mut bb = BranchAndBound {
            problem,
            config,
            queue: BinaryHeap::new(),
            incumbent: None,
            upper,
            seq: 0,
            t0: initial_points(problem),
            stats: BnbStats::default(),
        };
        if let Some(root) = bb.solve_child(ConstraintSet::new(), &[]) {
            bb.queue.push(Queued(root));
        }
        Ok(bb)
    }

    pub fn restore(problem: &'p SearchProblem, snap: BnbSnapshot, config: BnbConfig) -> Self {
        BranchAndBound {
            problem,
            config,
            queue: snap.nodes.into_iter().map(Queued).collect(),
            incumbent: snap.incumbent,
            upper: snap.upper,
            seq: snap.next_seq,
            t0: initial_points(problem),
            stats: snap.stats,
        }
    }

    pub fn snapshot(&self) -> BnbSnapshot {
        let mut nodes: Vec<Node> = self.queue.iter().map(|q| q.0.clone()).collect();
        nodes.sort_by_key(|n| n.seq);
        BnbSnapshot {
            nodes,
            incumbent: self.incumbent.clone(),
            upper: self.upper.clone(),
            next_seq: self.seq,
            stats: self.stats.clone(),
        }
    }

    pub fn problem(&self) -> &SearchProblem {
        self.problem
    }

    pub fn incumbent(&self) -> Option<&Incumbent> {
        self.incumbent.as_ref()
    }

    pub fn upper_bound(&self) -> &BigRational {
        &self.upper
    }

    pub fn stats(&self) -> &BnbStats {
        &self.stats
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    /// Smallest bound among queued nodes.
    pub fn peek_bound(&self) -> Option<&BigRational> {
        self.queue.peek().map(|q| &q.0.bound)
    }

    fn eps(&self) -> BigRational {
        &self.upper * &self.config.eps_factor
    }

    fn prunable(&self, bound: &BigRational) -> bool {
        bound - self.eps() >= self.upper
    }

    /// Offers a candidate; it replaces the incumbent when its norm is
    /// certified strictly smaller (or, without an incumbent, at most the
    /// upper bound). Returns whether it was accepted.
    pub fn offer(&mut self, g: IntPoly, norm: NormEnclosure, obs: &mut dyn BnbObserver) -> Result<bool> {
        let accept = match &self.incumbent {
            None => norm.hi <= self.upper,
            Some(inc) => compare_norms(self.problem, (&g, &norm), (&inc.g_star, &inc.norm))? == Ordering::Less,
        };
        if accept {
            if norm.hi < self.upper {
                self.upper = norm.hi.clone();
            }
            let inc = Incumbent { g_star: g, norm };
            obs.event(&BnbEvent::Incumbent(&inc));
            self.incumbent = Some(inc);
            self.stats.incumbent_updates += 1;
        }
        Ok(accept)
    }

    fn solve_child(&mut self, cs: ConstraintSet, inherited: &[BigRational]) -> Option<Node> {
        let mut pts = self.t0.clone();
        pts.extend(inherited.iter().cloned());
        let eps = self.eps();
        let res = match cutting_plane_solve(self.problem, &cs, &eps, &pts) {
            Ok(r) => r,
            Err(_) => {
                self.stats.infeasible += 1;
                return None;
            }
        };
        self.stats.lp_solves += res.history.len() as u64;
        let sol = res.solution;
        let depth = cs.fixed_prefix().min(self.problem.g() + 1);
        let node = Node {
            constraints: cs,
            bound: sol.c_bar,
            a_bar: sol.a_bar,
            depth,
            seq: self.seq,
            active_points: sol.active_points,
        };
        self.seq += 1;
        Some(node)
    }

    /// Processes queued nodes until one is ready for hand-off (only in
    /// [`Mode::Until`]) or the queue is empty.
    pub fn next_handoff(&mut self, mode: Mode, obs: &mut dyn BnbObserver) -> Result<Option<Node>> {
        match self.step(mode, None, obs)? {
            Progress::Handoff(n) => Ok(Some(n)),
            _ => Ok(None),
        }
    }

    /// Like [`next_handoff`](Self::next_handoff) but also stops after
    /// `budget` dequeued nodes.
    pub fn step(&mut self, mode: Mode, budget: Option<u64>, obs: &mut dyn BnbObserver) -> Result<Progress> {
        let g = self.problem.g();
        let start = self.stats.dequeued;
        loop {
            if budget.is_some_and(|b| self.stats.dequeued >= start + b) {
                return Ok(Progress::Budget);
            }
            let Some(Queued(node)) = self.queue.pop() else {
                break;
            };
            if self.prunable(&node.bound) {
                self.stats.pruned += 1;
                obs.event(&BnbEvent::Pruned { bound: &node.bound, depth: node.depth });
                continue;
            }
            self.stats.dequeued += 1;
            obs.event(&BnbEvent::Dequeued { bound: &node.bound, depth: node.depth });
            if let Some((cand, norm)) = round_candidate(self.problem, &node.a_bar, &self.config.rel_tol)? {
                self.offer(cand, norm, obs)?;
            }
            if let Mode::Until(j) = mode {
                if node.depth > j.min(g) {
                    self.stats.handoffs += 1;
                    obs.event(&BnbEvent::Handoff { bound: &node.bound, depth: node.depth });
                    return Ok(Progress::Handoff(node));
                }
            }
            for child in branch(&node.constraints, &node.a_bar, g) {
                let Some(c) = self.solve_child(child, &node.active_points) else {
                    continue;
                };
                if self.prunable(&c.bound) {
                    self.stats.pruned += 1;
                    obs.event(&BnbEvent::Pruned { bound: &c.bound, depth: c.depth });
                } else {
                    self.queue.push(Queued(c));
                }
            }
        }
        Ok(Progress::Done)
    }

    /// Runs to completion and returns the optimum.
    pub fn run(&mut self, obs: &mut dyn BnbObserver) -> Result<Incumbent> {
        self.next_handoff(Mode::Full, obs)?;
        self.incumbent.clone().ok_or(Error::EmptySearch)
    }
}

/// Full-mode branch and bound from `c_0`.
pub fn branch_and_bound(problem: &SearchProblem, c0: &BigRational, config: BnbConfig) -> Result<Incumbent> {
    BranchAndBound::new(problem, c0, config)?.run(&mut ())
}
