//! Certified supremum-norm enclosures over rational intervals.
//!
//! For `p = Π P_i^{e_i}` every interior local maximizer of `|p|` with
//! `p ≠ 0` is a root of
//!
//! ```text
//! L = Σ e_i · P_i' · Π_{j≠i} P_j          (p' = Π P_i^{e_i−1} · L)
//! ```
//!
//! The interval is rescaled to `[0,1]` and subdivided dyadically. On each
//! piece the Taylor expansion of `L` around the midpoint (computed exactly
//! with an integer shift) either excludes a root, proves a unique simple
//! root, or forces a split. Unique roots are then bracketed by bisection on
//! the sign of `L`, and the value of `|p|` at the root is enclosed using
//! `|p(x*) − p(a)| ≤ ½·max|Π P_i^{e_i−1}|·max|L'|·(b − a)²`.
//! Everything is exact rational arithmetic, so the enclosures are
//! certified.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::IntPoly;
use crate::rational::{dyadic, nth_root_bounds, rat};

/// Library-wide default relative tolerance for norm enclosures.
pub fn default_rel_tol() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(10u64).pow(12))
}

const MAX_SPLIT_DEPTH: u32 = 160;
const MAX_REFINE_STEPS: usize = 600;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn new(lo: BigRational, hi: BigRational) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidInput(alloc::format!("interval [{lo}, {hi}] is empty")));
        }
        Ok(Interval { lo, hi })
    }

    /// `[0,1]`
    pub fn unit() -> Self {
        Interval { lo: rat(0, 1), hi: rat(1, 1) }
    }

    /// `[0,1/4]`, the image of `[0,1]` under `x ↦ x(1−x)`.
    pub fn quarter() -> Self {
        Interval { lo: rat(0, 1), hi: rat(1, 4) }
    }

    /// `[0,1/2]`
    pub fn half() -> Self {
        Interval { lo: rat(0, 1), hi: rat(1, 2) }
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }
}

/// A closed subinterval `[lo, hi]`, possibly a single point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bracket {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Bracket {
    pub fn point(x: BigRational) -> Self {
        Bracket { lo: x.clone(), hi: x }
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

/// Certified enclosure `lo ≤ ‖p‖_I ≤ hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormEnclosure {
    pub lo: BigRational,
    pub hi: BigRational,
    /// Brackets (and endpoint singletons) where `|p|` comes within the
    /// requested tolerance of the maximum.
    pub witnesses: Vec<Bracket>,
}

impl NormEnclosure {
    pub fn exact(v: BigRational) -> Self {
        NormEnclosure { lo: v.clone(), hi: v, witnesses: Vec::new() }
    }

    pub fn contains(&self, v: &BigRational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn overlaps(&self, other: &NormEnclosure) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Enclosure of `s·‖p‖` for a positive scalar.
    pub fn scaled(&self, s: &BigRational) -> NormEnclosure {
        NormEnclosure { lo: &self.lo * s, hi: &self.hi * s, witnesses: self.witnesses.clone() }
    }

    pub fn relative_width(&self) -> BigRational {
        if self.hi.is_zero() {
            BigRational::zero()
        } else {
            (&self.hi - &self.lo) / &self.hi
        }
    }
}

/// A polynomial kept as a product `Π P_i^{e_i}` of integer polynomials.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PolyProduct {
    factors: Vec<(IntPoly, u32)>,
}

impl PolyProduct {
    pub fn new(factors: Vec<(IntPoly, u32)>) -> Self {
        PolyProduct { factors: factors.into_iter().filter(|(_, e)| *e > 0).collect() }
    }

    pub fn from_poly(p: IntPoly) -> Self {
        Self::new(vec![(p, 1)])
    }

    pub fn push(&mut self, p: IntPoly, e: u32) {
        if e > 0 {
            self.factors.push((p, e));
        }
    }

    pub fn factors(&self) -> &[(IntPoly, u32)] {
        &self.factors
    }

    /// Concatenation of the two factor lists.
    pub fn times(&self, other: &PolyProduct) -> PolyProduct {
        let mut f = self.factors.clone();
        f.extend(other.factors.iter().cloned());
        PolyProduct { factors: f }
    }

    pub fn is_zero(&self) -> bool {
        self.factors.iter().any(|(p, _)| p.is_zero())
    }

    pub fn degree(&self) -> Option<usize> {
        self.factors.iter().try_fold(0usize, |acc, (p, e)| Some(acc + p.degree()? * *e as usize))
    }

    pub fn expand(&self) -> IntPoly {
        self.factors.iter().fold(IntPoly::one(), |acc, (p, e)| &acc * &p.pow(*e))
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.factors.iter().fold(BigRational::one(), |acc, (p, e)| acc * pow_rat(&p.eval(x), *e))
    }
}

fn pow_rat(v: &BigRational, e: u32) -> BigRational {
    BigRational::new_raw(v.numer().pow(e), v.denom().pow(e))
}

fn two() -> BigRational {
    BigRational::from_integer(BigInt::from(2))
}

/// Certified enclosure of `‖p‖_I` with relative width at most `rel_tol`.
pub fn sup_norm(p: &IntPoly, interval: &Interval, rel_tol: &BigRational) -> Result<NormEnclosure> {
    sup_norm_product(&PolyProduct::from_poly(p.clone()), interval, rel_tol)
}

/// [`sup_norm`] for a polynomial given in product form; much cheaper when
/// the factors carry high multiplicities.
pub fn sup_norm_product(p: &PolyProduct, interval: &Interval, rel_tol: &BigRational) -> Result<NormEnclosure> {
    if p.factors.is_empty() {
        return Ok(NormEnclosure {
            lo: BigRational::one(),
            hi: BigRational::one(),
            witnesses: vec![Bracket { lo: interval.lo.clone(), hi: interval.hi.clone() }],
        });
    }
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !rel_tol.is_positive() {
        return Err(Error::InvalidInput("rel_tol must be positive".into()));
    }
    if interval.lo == interval.hi {
        let v = p.eval(&interval.lo).abs();
        return Ok(NormEnclosure { lo: v.clone(), hi: v, witnesses: vec![Bracket::point(interval.lo.clone())] });
    }
    let unit = UnitProduct::new(p, interval);
    Ok(unit.sup_norm(rel_tol))
}

/// Brackets isolating the interior critical points of `p` on `I` that are
/// local maximizers of `|p|` with `|p| > threshold`. Each bracket holds
/// exactly one root of `p'` and its midpoint already satisfies
/// `|p(mid)| > threshold`. Endpoints of `I` are not reported.
pub fn critical_points_above(p: &IntPoly, interval: &Interval, threshold: &BigRational) -> Result<Vec<Bracket>> {
    critical_points_above_product(&PolyProduct::from_poly(p.clone()), interval, threshold)
}

pub fn critical_points_above_product(
    p: &PolyProduct,
    interval: &Interval,
    threshold: &BigRational,
) -> Result<Vec<Bracket>> {
    if threshold.is_negative() {
        return Err(Error::InvalidInput("threshold must be nonnegative".into()));
    }
    if p.is_zero() {
        return Ok(Vec::new());
    }
    if interval.lo == interval.hi || p.factors.is_empty() {
        return Ok(Vec::new());
    }
    let unit = UnitProduct::new(p, interval);
    Ok(unit.above(threshold))
}

/// Enclosure of `‖p‖_I^{1/deg p}` with outward rounding.
pub fn normalized_t(p: &IntPoly, interval: &Interval, rel_tol: &BigRational) -> Result<(BigRational, BigRational)> {
    normalized_t_product(&PolyProduct::from_poly(p.clone()), interval, rel_tol)
}

pub fn normalized_t_product(
    p: &PolyProduct,
    interval: &Interval,
    rel_tol: &BigRational,
) -> Result<(BigRational, BigRational)> {
    let n = p.degree().ok_or(Error::ZeroPolynomial)?;
    if n == 0 {
        return Err(Error::ConstantPolynomial);
    }
    let enc = sup_norm_product(p, interval, rel_tol)?;
    Ok(nth_root_enclosure(&enc, n as u32, rel_tol))
}

pub fn nth_root_enclosure(enc: &NormEnclosure, n: u32, rel_tol: &BigRational) -> (BigRational, BigRational) {
    let bits = 64 + (rel_tol.denom().bits().saturating_sub(rel_tol.numer().bits()));
    let (lo, _) = nth_root_bounds(&enc.lo, n, bits);
    let (_, hi) = nth_root_bounds(&enc.hi, n, bits);
    (lo, hi)
}

/// Taylor coefficients `q_j / 2^den_bits` of a polynomial around the
/// midpoint of the dyadic piece `[k/2^s, (k+1)/2^s]`, in the local variable
/// `t ∈ [−1, 1]` (`y = c + ρ t`, `ρ = 2^{−(s+1)}`).
struct Local {
    q: Vec<BigInt>,
    den_bits: u64,
}

impl Local {
    fn new(p: &IntPoly, s: u32, k: &BigInt) -> Local {
        let Some(d) = p.degree() else {
            return Local { q: Vec::new(), den_bits: 0 };
        };
        let lvl = u64::from(s) + 1;
        let mut c: Vec<BigInt> =
            p.coeffs().iter().enumerate().map(|(i, a)| a << (lvl * (d - i) as u64)).collect();
        let m = (k << 1u32) + 1;
        IntPoly::taylor_shift_coeffs(&mut c, &m);
        Local { q: c, den_bits: lvl * d as u64 }
    }

    fn abs_sum_from(&self, from: usize) -> BigInt {
        self.q.iter().skip(from).map(|c| c.abs()).sum()
    }

    fn weighted_abs_sum_from(&self, from: usize) -> BigInt {
        self.q.iter().enumerate().skip(from).map(|(j, c)| c.abs() * BigInt::from(j)).sum()
    }

    fn scale(&self, v: BigInt) -> BigRational {
        dyadic(v, self.den_bits)
    }

    /// Upper bound of `|p|` on the piece.
    fn abs_bound(&self) -> BigRational {
        self.scale(self.abs_sum_from(0))
    }

    fn coeff(&self, j: usize) -> BigInt {
        self.q.get(j).cloned().unwrap_or_default()
    }

    /// No root on the closed piece.
    fn excludes_root(&self) -> bool {
        self.coeff(0).abs() > self.abs_sum_from(1)
    }

    /// The derivative does not vanish on the closed piece.
    fn monotone(&self) -> bool {
        self.coeff(1).abs() > self.weighted_abs_sum_from(2)
    }

    fn sign_left(&self) -> i32 {
        let v: BigInt = self.q.iter().enumerate().map(|(j, c)| if j % 2 == 0 { c.clone() } else { -c }).sum();
        sign(&v)
    }

    fn sign_right(&self) -> i32 {
        let v: BigInt = self.q.iter().sum();
        sign(&v)
    }
}

fn sign(v: &BigInt) -> i32 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

fn sign_rat(v: &BigRational) -> i32 {
    if v.is_positive() {
        1
    } else if v.is_negative() {
        -1
    } else {
        0
    }
}

/// The product rescaled to `y ∈ [0,1]`.
struct UnitProduct {
    factors: Vec<(IntPoly, u32)>,
    lderiv: IntPoly,
    /// `|p(x)| = |p̃(y)| · scale`
    scale: BigRational,
    x_lo: BigRational,
    x_width: BigRational,
    constant: bool,
}

enum Target<'a> {
    Sup { tol: &'a BigRational },
    Above { threshold: BigRational },
}

#[derive(Default)]
struct Walk {
    /// Largest attained value of `|p̃|` seen so far.
    best: BigRational,
    /// Largest certified upper bound on any resolved piece.
    resolved_hi: BigRational,
    /// `(bracket in y, upper bound of |p̃| on it)`
    found: Vec<(BracketY, BigRational)>,
}

#[derive(Clone)]
struct BracketY {
    lo: BigRational,
    hi: BigRational,
}

enum Refined {
    Dropped,
    Kept(BracketY, BigRational),
}

impl UnitProduct {
    fn new(p: &PolyProduct, interval: &Interval) -> UnitProduct {
        let mut factors = Vec::with_capacity(p.factors.len());
        let mut scale = BigRational::one();
        for (f, e) in &p.factors {
            if f.degree() == Some(0) {
                scale *= pow_rat(&BigRational::from_integer(f.coeff(0).abs()), *e);
                continue;
            }
            let (u, s) = f.to_unit_interval(&interval.lo, &interval.hi);
            scale /= BigRational::from_integer(s.pow(*e));
            factors.push((u, *e));
        }
        // Make every factor primitive in sign only; magnitudes stay.
        let mut lderiv = IntPoly::zero();
        for i in 0..factors.len() {
            let (fi, ei) = &factors[i];
            let mut term = fi.derivative().scale(&BigInt::from(*ei));
            if term.is_zero() {
                continue;
            }
            for (j, (fj, _)) in factors.iter().enumerate() {
                if j != i {
                    term = &term * fj;
                }
            }
            lderiv = &lderiv + &term;
        }
        let constant = factors.is_empty();
        UnitProduct {
            factors,
            lderiv,
            scale,
            x_lo: interval.lo.clone(),
            x_width: interval.width(),
            constant,
        }
    }

    fn to_x(&self, y: &BigRational) -> BigRational {
        &self.x_lo + &self.x_width * y
    }

    fn abs_at(&self, y: &BigRational) -> BigRational {
        self.factors.iter().fold(BigRational::one(), |acc, (f, e)| acc * pow_rat(&f.eval(y).abs(), *e))
    }

    /// Sign of `p̃ · p̃'` at a point where `p̃ ≠ 0` and `L ≠ 0`.
    fn growth_sign(&self, y: &BigRational, l_sign: i32) -> i32 {
        self.factors.iter().fold(l_sign, |acc, (f, _)| acc * f.sign_at(y))
    }

    fn sup_norm(&self, tol: &BigRational) -> NormEnclosure {
        let zero = BigRational::zero();
        let one = BigRational::one();
        let mut walk = Walk { best: zero.clone(), resolved_hi: zero.clone(), found: Vec::new() };
        let a0 = self.abs_at(&zero);
        let a1 = self.abs_at(&one);
        walk.observe(&a0);
        walk.observe(&a1);
        walk.resolved_hi = a0.clone().max(a1.clone());
        if self.constant {
            let v = &a0 * &self.scale;
            return NormEnclosure {
                lo: v.clone(),
                hi: v,
                witnesses: vec![Bracket { lo: self.to_x(&zero), hi: self.to_x(&one) }],
            };
        }
        // Coarse sampling gives a good early incumbent for pruning.
        let deg: usize = self.factors.iter().map(|(f, _)| f.degree().unwrap_or(0)).sum::<usize>()
            + self.lderiv.degree().unwrap_or(0);
        let bits = usize::BITS - deg.leading_zeros() + 2;
        let n = 1u64 << bits.min(12);
        for k in 1..n {
            let y = BigRational::new(BigInt::from(k), BigInt::from(n));
            walk.observe(&self.abs_at(&y));
        }
        let target = Target::Sup { tol };
        self.walk(&target, &mut walk);

        let lo = walk.best.clone();
        let hi = walk.resolved_hi.clone().max(lo.clone());
        let keep_level = &lo * (&one - tol);
        let mut witnesses = Vec::new();
        if a0 >= keep_level {
            witnesses.push(Bracket::point(self.to_x(&zero)));
        }
        for (b, upper) in &walk.found {
            if *upper >= keep_level {
                witnesses.push(Bracket { lo: self.to_x(&b.lo), hi: self.to_x(&b.hi) });
            }
        }
        if a1 >= keep_level {
            witnesses.push(Bracket::point(self.to_x(&one)));
        }
        witnesses.sort_by(|a, b| a.lo.cmp(&b.lo));
        witnesses.dedup();
        NormEnclosure { lo: lo * &self.scale, hi: hi * &self.scale, witnesses }
    }

    fn above(&self, threshold: &BigRational) -> Vec<Bracket> {
        if self.constant {
            return Vec::new();
        }
        let t = threshold / &self.scale;
        let mut walk = Walk::default();
        self.walk(&Target::Above { threshold: t }, &mut walk);
        let mut out: Vec<Bracket> =
            walk.found.iter().map(|(b, _)| Bracket { lo: self.to_x(&b.lo), hi: self.to_x(&b.hi) }).collect();
        out.sort_by(|a, b| a.lo.cmp(&b.lo));
        out.dedup();
        out
    }

    fn drop_level(&self, target: &Target<'_>, walk: &Walk) -> BigRational {
        match target {
            Target::Sup { tol } => &walk.best * (BigRational::one() - *tol),
            Target::Above { threshold } => threshold.clone(),
        }
    }

    fn below_drop(&self, target: &Target<'_>, walk: &Walk, upper: &BigRational) -> bool {
        let level = self.drop_level(target, walk);
        match target {
            Target::Sup { .. } => *upper < level,
            Target::Above { .. } => *upper <= level,
        }
    }

    fn walk(&self, target: &Target<'_>, walk: &mut Walk) {
        let mut stack: Vec<(u32, BigInt)> = vec![(0, BigInt::zero())];
        while let Some((s, k)) = stack.pop() {
            let width = dyadic(BigInt::one(), u64::from(s));
            let a = &width * BigRational::from_integer(k.clone());
            let b = &a + &width;
            let rho = &width / two();
            let c = &a + &rho;

            let local_l = Local::new(&self.lderiv, s, &k);
            let mut b1 = BigRational::one();
            for (f, e) in &self.factors {
                if *e >= 2 {
                    b1 *= pow_rat(&Local::new(f, s, &k).abs_bound(), e - 1);
                }
            }
            let max_l = local_l.abs_bound();
            let pc = self.abs_at(&c);
            walk.observe(&pc);
            let upper = &pc + &rho * &b1 * &max_l;
            if self.below_drop(target, walk, &upper) {
                walk.note_pruned(&upper, target);
                continue;
            }

            if local_l.q.is_empty() || local_l.excludes_root() {
                self.resolve_endpoints(&a, &b, walk);
                continue;
            }
            if local_l.monotone() {
                let sl = local_l.sign_left();
                let sr = local_l.sign_right();
                if sl * sr >= 0 {
                    self.resolve_endpoints(&a, &b, walk);
                    continue;
                }
                // unique simple root of L inside (a, b)
                let b2 = local_l.scale(local_l.weighted_abs_sum_from(1)) / &rho;
                let outcome = self.refine(a.clone(), b.clone(), sl, &b1 * &b2 / two(), target, walk);
                self.resolve_endpoints(&a, &b, walk);
                if let Refined::Kept(br, upper) = outcome {
                    walk.resolved_hi = walk.resolved_hi.clone().max(upper.clone());
                    walk.found.push((br, upper));
                }
                continue;
            }
            if s >= MAX_SPLIT_DEPTH {
                // Unresolved cluster (multiple root of L off the zero set of p).
                walk.resolved_hi = walk.resolved_hi.clone().max(upper.clone());
                walk.found.push((BracketY { lo: a, hi: b }, upper));
                continue;
            }
            let lc = self.lderiv.eval(&c);
            if lc.is_zero() {
                let v = self.abs_at(&c);
                walk.observe(&v);
                walk.resolved_hi = walk.resolved_hi.clone().max(v.clone());
                let keep = match target {
                    Target::Sup { .. } => !self.below_drop(target, walk, &v),
                    Target::Above { threshold } => v > *threshold && self.is_local_max_at_root(&a, &c, &b),
                };
                if keep {
                    walk.found.push((BracketY { lo: c.clone(), hi: c.clone() }, v));
                }
            }
            let k2: BigInt = &k << 1u32;
            stack.push((s + 1, &k2 + 1));
            stack.push((s + 1, k2));
        }
    }

    /// At an exact root `c` of `L`, decides whether `|p|` has a local max by
    /// looking for a strict increase toward `c` on both sides.
    fn is_local_max_at_root(&self, a: &BigRational, c: &BigRational, b: &BigRational) -> bool {
        let vc = self.abs_at(c);
        let mut left = a.clone();
        let mut right = b.clone();
        for _ in 0..64 {
            let vl = self.abs_at(&left);
            let vr = self.abs_at(&right);
            if vl < vc && vr < vc {
                return true;
            }
            if vl > vc || vr > vc {
                // not necessarily conclusive at this scale; tighten
            }
            left = (&left + c) / two();
            right = (&right + c) / two();
        }
        false
    }

    fn resolve_endpoints(&self, a: &BigRational, b: &BigRational, walk: &mut Walk) {
        let va = self.abs_at(a);
        let vb = self.abs_at(b);
        walk.observe(&va);
        walk.observe(&vb);
        let m = va.max(vb);
        if m > walk.resolved_hi {
            walk.resolved_hi = m;
        }
    }

    /// Bisection on the sign of `L` inside `[a, b]` holding one simple root.
    /// `half_b1b2` is `½·max|Π P^{e−1}|·max|L'|` over the initial piece.
    fn refine(
        &self,
        mut a: BigRational,
        mut b: BigRational,
        sign_a: i32,
        half_b1b2: BigRational,
        target: &Target<'_>,
        walk: &mut Walk,
    ) -> Refined {
        let mut pa = self.abs_at(&a);
        let mut pb = self.abs_at(&b);
        for _ in 0..MAX_REFINE_STEPS {
            walk.observe(&pa);
            walk.observe(&pb);
            let delta = &b - &a;
            let excess = &half_b1b2 * &delta * &delta;
            let low_end = pa.clone().min(pb.clone());
            let high_end = pa.clone().max(pb.clone());
            let upper = &low_end + &excess;
            if self.below_drop(target, walk, &upper) {
                return Refined::Dropped;
            }
            let kind_known = low_end > excess;
            let is_max = kind_known && self.growth_sign(&a, sign_a) > 0;
            if kind_known && !is_max {
                return Refined::Dropped;
            }
            match target {
                Target::Sup { tol } => {
                    if is_max && upper <= &walk.best * (BigRational::one() + *tol / two()) {
                        return Refined::Kept(BracketY { lo: a, hi: b }, upper);
                    }
                }
                Target::Above { threshold } => {
                    if is_max && high_end > *threshold {
                        // Tighten until the midpoint itself is a violator.
                        return self.tighten_midpoint(a, b, sign_a, threshold, upper);
                    }
                }
            }
            let mid = (&a + &b) / two();
            let lm = sign_rat(&self.lderiv.eval(&mid));
            let pm = self.abs_at(&mid);
            if lm == 0 {
                walk.observe(&pm);
                let keep = match target {
                    Target::Sup { .. } => !self.below_drop(target, walk, &pm),
                    Target::Above { threshold } => pm > *threshold,
                };
                return if keep { Refined::Kept(BracketY { lo: mid.clone(), hi: mid }, pm) } else { Refined::Dropped };
            }
            if lm == sign_a {
                a = mid;
                pa = pm;
            } else {
                b = mid;
                pb = pm;
            }
        }
        match target {
            Target::Sup { .. } => {
                let delta = &b - &a;
                let upper = pa.min(pb) + &half_b1b2 * &delta * &delta;
                Refined::Kept(BracketY { lo: a, hi: b }, upper)
            }
            Target::Above { .. } => Refined::Dropped,
        }
    }

    fn tighten_midpoint(
        &self,
        mut a: BigRational,
        mut b: BigRational,
        sign_a: i32,
        threshold: &BigRational,
        upper: BigRational,
    ) -> Refined {
        for _ in 0..MAX_REFINE_STEPS {
            let mid = (&a + &b) / two();
            if self.abs_at(&mid) > *threshold {
                return Refined::Kept(BracketY { lo: a, hi: b }, upper);
            }
            let lm = sign_rat(&self.lderiv.eval(&mid));
            if lm == 0 {
                return Refined::Kept(BracketY { lo: mid.clone(), hi: mid }, upper);
            }
            if lm == sign_a {
                a = mid;
            } else {
                b = mid;
            }
        }
        Refined::Dropped
    }
}

impl Walk {
    fn observe(&mut self, v: &BigRational) {
        if *v > self.best {
            self.best = v.clone();
        }
    }

    fn note_pruned(&mut self, upper: &BigRational, target: &Target<'_>) {
        // Pruned pieces lie strictly below the current drop level, which is
        // itself at most `best`; they never raise the final upper bound.
        let _ = (upper, target);
    }
}
