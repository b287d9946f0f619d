//! Dense exact-rational linear programming.
//!
//! Problems have the form `minimize cᵀx` subject to `A x ≤ b` with all
//! variables free. They are solved through the dual
//! `minimize bᵀy` s.t. `Aᵀy = −c`, `y ≥ 0`, which is in standard form with
//! one equality row per primal variable. The primal optimum is read off the
//! simplex multipliers of the dual.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<BigRational>,
    /// Constraints cleared of denominators.
    rows: Vec<Vec<BigInt>>,
    rhs: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpResult {
    Optimal { x: Vec<BigRational>, value: BigRational },
    Infeasible,
    /// The dual has no feasible point: the primal is infeasible or unbounded.
    InfeasibleOrUnbounded,
}

impl LpResult {
    pub fn optimal(self) -> Option<(Vec<BigRational>, BigRational)> {
        match self {
            LpResult::Optimal { x, value } => Some((x, value)),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn new(objective: Vec<BigRational>) -> Self {
        LinearProgram { num_vars: objective.len(), objective, rows: Vec::new(), rhs: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// `row · x ≤ rhs`
    pub fn add_le(&mut self, row: Vec<BigRational>, rhs: BigRational) {
        assert_eq!(row.len(), self.num_vars);
        let den = row.iter().chain(core::iter::once(&rhs)).fold(BigInt::one(), |l, q| l.lcm(q.denom()));
        let scale = |q: &BigRational| q.numer() * (&den / q.denom());
        self.rows.push(row.iter().map(scale).collect());
        self.rhs.push(scale(&rhs));
    }

    /// `row · x ≤ rhs` with integer data.
    pub fn add_le_int(&mut self, row: Vec<BigInt>, rhs: BigInt) {
        assert_eq!(row.len(), self.num_vars);
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    /// `row · x ≥ rhs`
    pub fn add_ge(&mut self, row: Vec<BigRational>, rhs: BigRational) {
        self.add_le(row.into_iter().map(|v| -v).collect(), -rhs);
    }

    pub fn solve(&self) -> LpResult {
        let n = self.num_vars;
        let m = self.rows.len();
        if n == 0 {
            return if self.rhs.iter().all(|b| !b.is_negative()) {
                LpResult::Optimal { x: Vec::new(), value: BigRational::zero() }
            } else {
                LpResult::Infeasible
            };
        }
        // Dual tableau: n equality rows, m structural columns, n artificials.
        // Primal rows are stored without denominators; each dual row i is
        // scaled by the denominator of c_i so that all data is integral.
        let cols = m + n;
        let mut sigma = vec![false; n];
        let mut row_scale = Vec::with_capacity(n);
        let mut t: Vec<Vec<BigInt>> = Vec::with_capacity(n);
        for i in 0..n {
            let rhs = -&self.objective[i];
            let flip = rhs.is_negative();
            sigma[i] = flip;
            let si = rhs.denom().clone();
            let mut row = Vec::with_capacity(cols + 1);
            for j in 0..m {
                let v = &self.rows[j][i] * &si;
                row.push(if flip { -v } else { v });
            }
            for k in 0..n {
                row.push(if k == i { BigInt::one() } else { BigInt::zero() });
            }
            row.push(rhs.numer().abs());
            t.push(row);
            row_scale.push(si);
        }
        let mut tab = Tableau { t, det: BigInt::one(), basis: (m..m + n).collect(), cols, structural: m };

        // Phase 1: minimize the sum of artificials.
        let mut cost1 = vec![BigInt::zero(); cols];
        for c in cost1.iter_mut().skip(m) {
            *c = BigInt::one();
        }
        let mut d = tab.reduced_costs(&cost1);
        if !tab.run(&mut d, cols) {
            // Phase 1 is bounded below by zero.
            unreachable!("phase 1 unbounded");
        }
        if d[cols].is_negative() {
            // optimum value −d[cols] > 0
            return LpResult::InfeasibleOrUnbounded;
        }
        tab.drive_out_artificials();

        // Phase 2 on the dual objective, artificials barred from entering.
        let mut cost2 = vec![BigInt::zero(); cols];
        for (j, b) in self.rhs.iter().enumerate() {
            cost2[j] = b.clone();
        }
        let mut d = tab.reduced_costs(&cost2);
        if !tab.run(&mut d, m) {
            return LpResult::Infeasible;
        }
        let x: Vec<BigRational> = (0..n)
            .map(|i| {
                let pi = BigRational::new(-&d[m + i] * &row_scale[i], tab.det.clone());
                if sigma[i] {
                    -pi
                } else {
                    pi
                }
            })
            .collect();
        let value = x.iter().zip(&self.objective).fold(BigRational::zero(), |acc, (a, c)| acc + a * c);
        LpResult::Optimal { x, value }
    }
}

/// Integer-preserving tableau: the entry values are `t[i][j] / det`, where
/// `det > 0` is the determinant of the current basis. Pivots divide
/// exactly, so no fraction is ever reduced.
struct Tableau {
    t: Vec<Vec<BigInt>>,
    det: BigInt,
    basis: Vec<usize>,
    cols: usize,
    structural: usize,
}

const DEGENERATE_LIMIT: usize = 50;

impl Tableau {
    /// Reduced-cost row `d_j = cost_j − c_Bᵀ B⁻¹ a_j` scaled by `det`, with
    /// `d[cols]` the negated objective value.
    fn reduced_costs(&self, cost: &[BigInt]) -> Vec<BigInt> {
        let mut d: Vec<BigInt> = cost.iter().map(|c| c * &self.det).collect();
        d.push(BigInt::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for j in 0..=self.cols {
                if !self.t[i][j].is_zero() {
                    d[j] -= cb * &self.t[i][j];
                }
            }
        }
        d
    }

    /// Simplex iterations allowing entering columns `< enter_limit`.
    /// Returns `false` if unbounded.
    fn run(&mut self, d: &mut [BigInt], enter_limit: usize) -> bool {
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate >= DEGENERATE_LIMIT;
            let mut enter: Option<usize> = None;
            for j in 0..enter_limit {
                if d[j].is_negative() {
                    match enter {
                        None => enter = Some(j),
                        Some(e) if !bland && d[j] < d[e] => enter = Some(j),
                        _ => {}
                    }
                    if bland {
                        break;
                    }
                }
            }
            let Some(s) = enter else {
                return true;
            };
            // ratio t[i][rhs] / t[i][s] over positive t[i][s]
            let mut leave: Option<usize> = None;
            for i in 0..self.t.len() {
                let a = &self.t[i][s];
                if !a.is_positive() {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some(r) => {
                        let lhs = &self.t[i][self.cols] * &self.t[r][s];
                        let rhs = &self.t[r][self.cols] * a;
                        lhs < rhs || (lhs == rhs && self.basis[i] < self.basis[r])
                    }
                };
                if better {
                    leave = Some(i);
                }
            }
            let Some(r) = leave else {
                return false;
            };
            if self.t[r][self.cols].is_zero() {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, s, d);
        }
    }

    fn pivot(&mut self, r: usize, s: usize, d: &mut [BigInt]) {
        let p = self.t[r][s].clone();
        let prow = self.t[r].clone();
        let update = |row: &mut Vec<BigInt>, det: &BigInt| {
            let f = row[s].clone();
            for (j, v) in row.iter_mut().enumerate() {
                if v.is_zero() && prow[j].is_zero() {
                    continue;
                }
                let mut w = &*v * &p;
                if !f.is_zero() && !prow[j].is_zero() {
                    w -= &f * &prow[j];
                }
                *v = w / det;
            }
        };
        for i in 0..self.t.len() {
            if i != r {
                update(&mut self.t[i], &self.det);
            }
        }
        let mut drow = d.to_vec();
        update(&mut drow, &self.det);
        d.clone_from_slice(&drow);
        self.det = p;
        if self.det.is_negative() {
            self.det = -&self.det;
            for row in self.t.iter_mut() {
                for v in row.iter_mut() {
                    *v = -&*v;
                }
            }
            for v in d.iter_mut() {
                *v = -&*v;
            }
        }
        self.basis[r] = s;
    }

    /// Pivots basic artificials (at level zero after phase 1) out of the
    /// basis where possible; rows where that fails are redundant.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.t.len() {
            if self.basis[r] < self.structural {
                continue;
            }
            if let Some(s) = (0..self.structural).find(|&j| !self.t[r][j].is_zero()) {
                let mut dummy = vec![BigInt::zero(); self.cols + 1];
                self.pivot(r, s, &mut dummy);
            }
        }
    }
}
