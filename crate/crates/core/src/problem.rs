//! The reduced search problem `min ‖F·G‖` over integer `G` of degree `g`
//! with leading coefficient at least one, on a working domain.
//!
//! Symmetric targets on `[0,1]` are searched in the variable
//! `y = x(1−x) ∈ [0,1/4]`. Even degree: `p(x) = (F·G)(y)` and the norms on
//! `[0,1/4]` and `[0,1]` agree. Odd degree: `p(x) = (2x−1)(F·G)(y)`, whose
//! norm is not that of `F·G` on `[0,1/4]`; such problems are posed on
//! `t ∈ [0,1/2]` with every constraint row `(2t−1)F(y)y^k`, which keeps all
//! data rational.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::norm::{sup_norm_product, Interval, NormEnclosure, PolyProduct};
use crate::poly::IntPoly;
use crate::rational::nth_root_bounds;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Embedding {
    /// `F·G` on the given interval, reported as is.
    Direct(Interval),
    /// `F·G` on `[0,1/4]`, reported as `(F·G)(x(1−x))` on `[0,1]`.
    EvenSymmetric,
    /// `(2t−1)(F·G)(t(1−t))` on `t ∈ [0,1/2]`, reported on `[0,1]`.
    OddSymmetric,
}

impl Embedding {
    /// The interval the norm is taken over.
    pub fn domain(&self) -> Interval {
        match self {
            Embedding::Direct(i) => i.clone(),
            Embedding::EvenSymmetric => Interval::quarter(),
            Embedding::OddSymmetric => Interval::half(),
        }
    }

    /// The interval in which `G` is evaluated.
    pub fn eval_interval(&self) -> Interval {
        match self {
            Embedding::Direct(i) => i.clone(),
            _ => Interval::quarter(),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        !matches!(self, Embedding::Direct(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchProblem {
    f: PolyProduct,
    f_expanded: IntPoly,
    g: usize,
    embedding: Embedding,
}

fn h1() -> IntPoly {
    IntPoly::from_i64(&[0, 1, -1])
}

fn h2() -> IntPoly {
    IntPoly::from_i64(&[-1, 2])
}

impl SearchProblem {
    pub fn new(f: PolyProduct, g: usize, embedding: Embedding) -> Result<Self> {
        if f.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let f_expanded = f.expand();
        Ok(SearchProblem { f, f_expanded, g, embedding })
    }

    pub fn from_poly(f: IntPoly, g: usize, embedding: Embedding) -> Result<Self> {
        Self::new(PolyProduct::from_poly(f), g, embedding)
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn f(&self) -> &IntPoly {
        &self.f_expanded
    }

    pub fn f_product(&self) -> &PolyProduct {
        &self.f
    }

    pub fn embedding(&self) -> &Embedding {
        &self.embedding
    }

    pub fn domain(&self) -> Interval {
        self.embedding.domain()
    }

    pub fn eval_interval(&self) -> Interval {
        self.embedding.eval_interval()
    }

    /// Degree of the reported polynomial.
    pub fn final_degree(&self) -> usize {
        let d = self.f_expanded.degree().unwrap_or(0) + self.g;
        match self.embedding {
            Embedding::Direct(_) => d,
            Embedding::EvenSymmetric => 2 * d,
            Embedding::OddSymmetric => 2 * d + 1,
        }
    }

    /// Maps a domain point to the evaluation variable and the weight.
    fn split_point(&self, x: &BigRational) -> (BigRational, BigRational) {
        match self.embedding {
            Embedding::OddSymmetric => {
                let y = x * (BigRational::one() - x);
                let w = x * BigRational::from_integer(2.into()) - BigRational::one();
                (y, w)
            }
            _ => (x.clone(), BigRational::one()),
        }
    }

    /// Constraint row `(φ_0(x), …, φ_g(x))` with `(F·G)(x) = Σ a_k φ_k(x)`
    /// in the embedded sense.
    pub fn row(&self, x: &BigRational) -> Vec<BigRational> {
        let (y, w) = self.split_point(x);
        let mut v = w * self.f_expanded.eval(&y);
        let mut out = Vec::with_capacity(self.g + 1);
        for _ in 0..=self.g {
            out.push(v.clone());
            v *= &y;
        }
        out
    }

    /// [`row`](Self::row) as integer numerators over one positive,
    /// possibly unreduced, denominator.
    pub fn int_row(&self, x: &BigRational) -> (Vec<BigInt>, BigInt) {
        let (p, q) = (x.numer(), x.denom());
        // y = yn/yd, weight = wn/wd
        let (yn, yd, wn, wd) = match self.embedding {
            Embedding::OddSymmetric => (p * (q - p), q * q, p * 2 - q, q.clone()),
            _ => (p.clone(), q.clone(), BigInt::one(), BigInt::one()),
        };
        let f = self.f_expanded.coeffs();
        let d = f.len().saturating_sub(1);
        let mut fh = f.last().cloned().unwrap_or_default();
        let mut qpow = BigInt::one();
        for c in f.iter().rev().skip(1) {
            qpow *= &yd;
            fh = fh * &yn + c * &qpow;
        }
        let mut lead = wn * fh;
        let mut tail = vec![BigInt::one(); self.g + 1];
        for k in (0..self.g).rev() {
            tail[k] = &tail[k + 1] * &yd;
        }
        let mut out = Vec::with_capacity(self.g + 1);
        for t in &tail {
            out.push(&lead * t);
            lead *= &yn;
        }
        (out, wd * yd.pow((d + self.g) as u32))
    }

    pub fn value(&self, a: &[BigRational], x: &BigRational) -> BigRational {
        self.row(x).iter().zip(a).fold(BigRational::zero(), |acc, (p, q)| acc + p * q)
    }

    /// The objective polynomial in the domain variable, in product form.
    pub fn objective_product(&self, gpoly: &IntPoly) -> PolyProduct {
        match self.embedding {
            Embedding::OddSymmetric => {
                let h = h1();
                let mut out = PolyProduct::from_poly(h2());
                for (p, e) in self.f.factors() {
                    out.push(p.compose(&h), *e);
                }
                out.push(gpoly.compose(&h), 1);
                out
            }
            _ => {
                let mut out = self.f.clone();
                out.push(gpoly.clone(), 1);
                out
            }
        }
    }

    /// Product for a rational coefficient vector, scaled by the common
    /// denominator `D` so that it has integer coefficients.
    pub fn scaled_objective(&self, a: &[BigRational]) -> (PolyProduct, BigInt) {
        let d = a.iter().fold(BigInt::one(), |acc, q| num_integer::Integer::lcm(&acc, q.denom()));
        let coeffs: Vec<BigInt> = a.iter().map(|q| q.numer() * (&d / q.denom())).collect();
        (self.objective_product(&IntPoly::new(coeffs)), d)
    }

    /// Certified `‖F·G‖` on the domain.
    pub fn norm(&self, gpoly: &IntPoly, rel_tol: &BigRational) -> Result<NormEnclosure> {
        sup_norm_product(&self.objective_product(gpoly), &self.domain(), rel_tol)
    }

    /// Rational upper bound on `|G(y)|` implied by `‖F·G‖ ≤ c`, when the
    /// embedded weight does not vanish at `y`.
    pub fn direct_bound(&self, y: &BigRational, c: &BigRational) -> Option<BigRational> {
        let fy = self.f_expanded.eval(y).abs();
        if fy.is_zero() {
            return None;
        }
        match self.embedding {
            Embedding::OddSymmetric => {
                // |2t − 1| = √(1 − 4y)
                let s = BigRational::one() - y * BigRational::from_integer(4.into());
                if !s.is_positive() {
                    return None;
                }
                let (lo, _) = nth_root_bounds(&s, 2, 64);
                if lo.is_zero() {
                    return None;
                }
                Some(c / (fy * lo))
            }
            _ => Some(c / fy),
        }
    }

    /// The polynomial on `[0,1]` (or the direct interval) represented by `G`.
    pub fn final_poly(&self, gpoly: &IntPoly) -> IntPoly {
        let fg = &self.f_expanded * gpoly;
        match self.embedding {
            Embedding::Direct(_) => fg,
            Embedding::EvenSymmetric => fg.symmetrize(false),
            Embedding::OddSymmetric => fg.symmetrize(true),
        }
    }

    /// The final polynomial in product form.
    pub fn final_product(&self, gpoly: &IntPoly) -> PolyProduct {
        match self.embedding {
            Embedding::Direct(_) => {
                let mut out = self.f.clone();
                out.push(gpoly.clone(), 1);
                out
            }
            Embedding::EvenSymmetric => {
                let h = h1();
                let mut out = PolyProduct::default();
                for (p, e) in self.f.factors() {
                    out.push(p.compose(&h), *e);
                }
                out.push(gpoly.compose(&h), 1);
                out
            }
            Embedding::OddSymmetric => self.objective_product(gpoly),
        }
    }
}
