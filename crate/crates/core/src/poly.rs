//! Dense univariate polynomials with arbitrary-precision integer coefficients.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A rational evaluation point `num/den`, always stored reduced with `den ≥ 1`.
pub type RatPoint = BigRational;

/// Integer polynomial; `coeffs[k]` is the coefficient of `x^k`.
///
/// The highest stored coefficient is nonzero; the zero polynomial has no
/// coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    pub fn x() -> Self {
        Self::from_i64(&[0, 1])
    }

    /// The linear polynomial `a·x − b`.
    pub fn linear(a: BigInt, b: BigInt) -> Self {
        Self::new(vec![-b, a])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    /// Exact value at a rational point, by Horner's rule on the numerator
    /// `Σ c_k num^k den^{d−k}`.
    pub fn eval(&self, x: &RatPoint) -> BigRational {
        let Some(d) = self.degree() else {
            return BigRational::zero();
        };
        let num = x.numer();
        let den = x.denom();
        let mut acc = BigInt::zero();
        let mut den_pow = BigInt::one();
        for c in self.coeffs.iter().rev() {
            acc = acc * num + c * &den_pow;
            den_pow *= den;
        }
        // den_pow has been multiplied d+1 times; undo one.
        BigRational::new(acc, den.pow(d as u32))
    }

    pub fn eval_int(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigInt::from(k))
                .collect(),
        )
    }

    pub fn scale(&self, s: &BigInt) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn pow(&self, e: u32) -> IntPoly {
        let mut result = IntPoly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Composition `self(q(x))`.
    pub fn compose(&self, q: &IntPoly) -> IntPoly {
        let mut acc = IntPoly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * q) + &IntPoly::constant(c.clone());
        }
        acc
    }

    /// The exact integer `a^g · G(b/a)` with `g = deg G`; up to sign this is
    /// the resultant of `G` and `a·x − b`.
    pub fn resultant_linear(&self, a: &BigInt, b: &BigInt) -> BigInt {
        let Some(g) = self.degree() else {
            return BigInt::zero();
        };
        let mut acc = BigInt::zero();
        let mut a_pow = BigInt::one();
        for c in self.coeffs.iter().rev() {
            acc = acc * b + c * &a_pow;
            a_pow *= a;
        }
        let _ = g;
        acc
    }

    /// `q(x(1−x))`, or `(2x−1)·q(x(1−x))` when `odd` is set.
    pub fn symmetrize(&self, odd: bool) -> IntPoly {
        let h1 = IntPoly::from_i64(&[0, 1, -1]);
        let sym = self.compose(&h1);
        if odd {
            &sym * &IntPoly::from_i64(&[-1, 2])
        } else {
            sym
        }
    }

    /// Inverse of [`IntPoly::symmetrize`]: writes `self = (2x−1)^odd · q(x(1−x))`
    /// and returns `(q, odd)`, or `None` if `self(1−x) ≠ ±self(x)`.
    pub fn desymmetrize(&self) -> Option<(IntPoly, bool)> {
        if self.is_zero() {
            return Some((IntPoly::zero(), false));
        }
        let reflected = self.compose(&IntPoly::from_i64(&[1, -1]));
        let (mut rest, odd) = if reflected == *self {
            (self.clone(), false)
        } else if reflected == -self {
            (self.div_exact(&IntPoly::from_i64(&[-1, 2]))?, true)
        } else {
            return None;
        };
        let h1 = IntPoly::from_i64(&[0, 1, -1]);
        let d = rest.degree()?;
        if d % 2 != 0 {
            return None;
        }
        let half = d / 2;
        let mut q = vec![BigInt::zero(); half + 1];
        for k in (0..=half).rev() {
            // leading coefficient of (x − x²)^k is (−1)^k
            let lead = rest.coeff(2 * k);
            let qk = if k % 2 == 0 { lead } else { -lead };
            if !qk.is_zero() {
                rest = &rest - &h1.pow(k as u32).scale(&qk);
            }
            q[k] = qk;
            if rest.degree().is_some_and(|rd| rd >= 2 * k) {
                return None;
            }
        }
        rest.is_zero().then(|| (IntPoly::new(q), odd))
    }

    /// Exact quotient over `Z`, or `None` if `d` does not divide `self` in `Z[x]`.
    pub fn div_exact(&self, d: &IntPoly) -> Option<IntPoly> {
        let dd = d.degree()?;
        if self.is_zero() {
            return Some(IntPoly::zero());
        }
        let n = self.degree()?;
        if n < dd {
            return None;
        }
        let lead = d.leading()?;
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigInt::zero(); n - dd + 1];
        for k in (0..=n - dd).rev() {
            let top = &rem[k + dd];
            if top.is_zero() {
                continue;
            }
            if !(top % lead).is_zero() {
                return None;
            }
            let q = top / lead;
            for (j, c) in d.coeffs.iter().enumerate() {
                rem[k + j] -= &q * c;
            }
            quot[k] = q;
        }
        rem.iter().all(Zero::is_zero).then(|| IntPoly::new(quot))
    }

    /// `self(x + m)`, by the classical in-place shift.
    pub(crate) fn taylor_shift_coeffs(coeffs: &mut [BigInt], m: &BigInt) {
        let n = coeffs.len();
        if n < 2 || m.is_zero() {
            return;
        }
        for i in 0..n - 1 {
            for j in (i..n - 1).rev() {
                let t = &coeffs[j + 1] * m;
                coeffs[j] += t;
            }
        }
    }

    /// Rescales to `[0,1]`: returns `(P, s)` with `P(y) = s · self(lo + (hi−lo)·y)`
    /// for an integer polynomial `P` and positive integer `s`.
    pub(crate) fn to_unit_interval(&self, lo: &BigRational, hi: &BigRational) -> (IntPoly, BigInt) {
        let Some(d) = self.degree() else {
            return (IntPoly::zero(), BigInt::one());
        };
        let w = hi - lo;
        // x = (a·e + c·b·y) / (b·e) with lo = a/b and w = c/e
        let be = lo.denom() * w.denom();
        let lin = IntPoly::new(vec![lo.numer() * w.denom(), w.numer() * lo.denom()]);
        let mut acc = IntPoly::zero();
        let mut be_pow = BigInt::one();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &lin) + &IntPoly::constant(c * &be_pow);
            be_pow *= &be;
        }
        (acc, be.pow(d as u32))
    }

    pub fn is_symmetric_or_antisymmetric(&self) -> bool {
        self.desymmetrize().is_some()
    }

    /// Sign of the value at a rational point: `-1`, `0` or `1`.
    pub fn sign_at(&self, x: &RatPoint) -> i32 {
        let v = self.eval(x);
        if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        }
    }
}

impl fmt::Debug for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntPoly({})", self)
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let unit = mag.is_one();
            match k {
                0 => write!(f, "{}", mag)?,
                1 if unit => write!(f, "x")?,
                1 => write!(f, "{}x", mag)?,
                _ if unit => write!(f, "x^{}", k)?,
                _ => write!(f, "{}x^{}", mag, k)?,
            }
        }
        Ok(())
    }
}

impl<'a> Add<&'a IntPoly> for &'a IntPoly {
    type Output = IntPoly;
    fn add(self, rhs: &'a IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<'a> Sub<&'a IntPoly> for &'a IntPoly {
    type Output = IntPoly;
    fn sub(self, rhs: &'a IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        IntPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<'a> Mul<&'a IntPoly> for &'a IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: &'a IntPoly) -> IntPoly {
        if self.is_zero() || rhs.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }
}

impl Mul for IntPoly {
    type Output = IntPoly;
    fn mul(self, rhs: IntPoly) -> IntPoly {
        &self * &rhs
    }
}

impl Neg for &IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Neg for IntPoly {
    type Output = IntPoly;
    fn neg(self) -> IntPoly {
        -&self
    }
}
