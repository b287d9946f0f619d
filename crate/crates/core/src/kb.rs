//! Known factors, known integer Chebyshev polynomials, the product upper
//! bound `c_n` and forced linear-factor deduction.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::norm::{normalized_t_product, sup_norm_product, Interval, NormEnclosure, PolyProduct};
use crate::poly::IntPoly;
use crate::rational::{parse_decimal, rat, to_decimal, Rounding};

/// Identifier `h_N` of a knowledge-base factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactorId(pub u32);

impl fmt::Display for FactorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h_{}", self.0)
    }
}

impl FromStr for FactorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let digits = t.strip_prefix("h_").or_else(|| t.strip_prefix('h')).unwrap_or(t);
        digits
            .parse::<u32>()
            .map(FactorId)
            .map_err(|_| Error::InvalidInput(alloc::format!("bad factor id {s:?}")))
    }
}

/// `Π h_id^e` over distinct ids with positive exponents.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FactoredPoly {
    factors: Vec<(FactorId, u32)>,
}

impl FactoredPoly {
    pub fn new(factors: Vec<(FactorId, u32)>) -> Result<Self> {
        for (i, (id, e)) in factors.iter().enumerate() {
            if *e == 0 {
                return Err(Error::InvalidInput(alloc::format!("exponent of {id} must be positive")));
            }
            if factors[..i].iter().any(|(o, _)| o == id) {
                return Err(Error::InvalidInput(alloc::format!("factor {id} listed twice")));
            }
        }
        Ok(FactoredPoly { factors })
    }

    pub fn factors(&self) -> &[(FactorId, u32)] {
        &self.factors
    }

    /// Product of two factored polynomials, merging repeated ids.
    pub fn times(&self, other: &FactoredPoly) -> FactoredPoly {
        let mut map: BTreeMap<FactorId, u32> = BTreeMap::new();
        for (id, e) in self.factors.iter().chain(other.factors.iter()) {
            *map.entry(*id).or_default() += e;
        }
        FactoredPoly { factors: map.into_iter().collect() }
    }

    pub fn degree(&self, kb: &FactorKB) -> Result<usize> {
        let mut d = 0;
        for (id, e) in &self.factors {
            d += kb.factor(*id)?.degree().unwrap_or(0) * *e as usize;
        }
        Ok(d)
    }

    pub fn to_product(&self, kb: &FactorKB) -> Result<PolyProduct> {
        let mut out = PolyProduct::default();
        for (id, e) in &self.factors {
            out.push(kb.factor(*id)?.clone(), *e);
        }
        Ok(out)
    }

    pub fn expand(&self, kb: &FactorKB) -> Result<IntPoly> {
        Ok(self.to_product(kb)?.expand())
    }
}

impl fmt::Display for FactoredPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (i, (id, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            if *e == 1 {
                write!(f, "{id}")?;
            } else {
                write!(f, "{id}^{e}")?;
            }
        }
        Ok(())
    }
}

/// A known integer Chebyshev polynomial with its printed normalized norm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnownIcp {
    pub degree: usize,
    pub poly: FactoredPoly,
    pub printed_t: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FactorKB {
    factors: BTreeMap<FactorId, IntPoly>,
    known: BTreeMap<usize, KnownIcp>,
}

const BUILTIN_FACTORS: &[&[i64]] = &[
    &[0, 1, -1],
    &[-1, 2],
    &[1, -5, 5],
    &[1, -6, 6],
    &[1, -11, 40, -58, 29],
    &[1, -12, 45, -66, 33],
    &[1, -12, 46, -68, 34],
    &[2, -20, 69, -98, 49],
    &[1, -17, 109, -345, 575, -483, 161],
    &[1, -17, 111, -357, 601, -507, 169],
    &[1, -18, 119, -383, 644, -543, 181],
    &[1, -18, 122, -401, 683, -579, 193],
    &[1, -22, 200, -985, 2886, -5171, 5555, -3284, 821],
    &[1, -23, 216, -1089, 3243, -5873, 6349, -3764, 941],
    &[1, -23, 217, -1100, 3291, -5980, 6478, -3844, 961],
    &[1, -28, 338, -2317, 9995, -28388, 53866, -67586, 53804, -24605, 4921],
    &[1, -35, 537, -4783, 27600, -108945, 302334, -595698, 828936, -796200, 502099, -187014, 31169],
    &[2, -65, 936, -7905, 43659, -166327, 448776, -865270, 1184854, -1125390, 704777, -261654, 43609],
    &[
        1, -40, 719, -7697, 54846, -275399, 1005970, -2718775, 5470288, -8165339, 8913112, -6908941, 3599830,
        -1130003, 161429,
    ],
    &[
        1, -40, 719, -7698, 54867, -275594, 1007031, -2722543, 5479474, -8181043, 8931952, -6924493, 3608246,
        -1132691, 161813,
    ],
    &[
        1, -40, 719, -7698, 54868, -275613, 1007185, -2723251, 5481532, -8185014, 8937122, -6928991, 3610755,
        -1133503, 161929,
    ],
    &[
        1, -46, 961, -12115, 103263, -631701, 2872148, -9911593, 26265936, -53688009, 84454852, -101276631,
        90856296, -59006633, 26189139, -7103848, 887981,
    ],
    &[
        1, -46, 962, -12149, 103781, -636399, 2900545, -10032840, 26643715, -54562008, 85965780, -103221560,
        92693614, -60243176, 26750188, -7257608, 907201,
    ],
];

type Row = (usize, &'static [(u32, u32)], &'static str);

const BUILTIN_ICPS: &[Row] = &[
    (147, &[(1, 48), (2, 17), (3, 6), (5, 2), (10, 1), (14, 1)], "0.42591455"),
    (149, &[(1, 47), (2, 17), (3, 6), (5, 3), (10, 1), (14, 1)], "0.42578804"),
    (152, &[(1, 47), (2, 16), (3, 6), (5, 2), (10, 1), (23, 1)], "0.42577465"),
    (153, &[(1, 48), (2, 19), (3, 5), (4, 1), (5, 2), (7, 1), (10, 1), (14, 1)], "0.42547485"),
    (154, &[(1, 49), (2, 18), (3, 6), (5, 3), (10, 1), (14, 1)], "0.42548736"),
    (158, &[(1, 51), (2, 18), (3, 6), (5, 3), (10, 1), (14, 1)], "0.42536299"),
    (175, &[(1, 56), (2, 23), (3, 6), (4, 1), (5, 2), (7, 1), (10, 1), (14, 1)], "0.42542222"),
    (191, &[(1, 60), (2, 21), (3, 8), (5, 3), (10, 1), (14, 1), (15, 1)], "0.42512849"),
    (194, &[(1, 61), (2, 22), (3, 8), (5, 3), (10, 1), (14, 1), (15, 1)], "0.42517829"),
    (198, &[(1, 63), (2, 22), (3, 8), (5, 3), (10, 1), (14, 1), (15, 1)], "0.42505003"),
    (202, &[(1, 64), (2, 24), (3, 9), (4, 1), (5, 3), (6, 1), (10, 1), (14, 1)], "0.42514131"),
    (236, &[(1, 75), (2, 28), (3, 9), (4, 1), (5, 4), (10, 1), (14, 1), (15, 1)], "0.42434377"),
    (238, &[(1, 76), (2, 28), (3, 9), (4, 1), (5, 4), (10, 1), (14, 1), (15, 1)], "0.42468031"),
    (239, &[(1, 76), (2, 27), (3, 10), (5, 3), (10, 1), (14, 1), (21, 1)], "0.42461390"),
    (241, &[(1, 77), (2, 27), (3, 10), (5, 3), (10, 1), (14, 1), (21, 1)], "0.42448242"),
    (244, &[(1, 78), (2, 30), (3, 11), (4, 1), (5, 4), (6, 1), (10, 1), (14, 1)], "0.42456112"),
];

impl FactorKB {
    pub fn empty() -> Self {
        FactorKB::default()
    }

    /// `h_1..h_23` and the sixteen known polynomials of degrees 147..244.
    pub fn builtin() -> Self {
        let mut kb = FactorKB::empty();
        for (i, c) in BUILTIN_FACTORS.iter().enumerate() {
            kb.factors.insert(FactorId(i as u32 + 1), IntPoly::from_i64(c));
        }
        for (n, fs, t) in BUILTIN_ICPS {
            let poly = FactoredPoly::new(fs.iter().map(|(id, e)| (FactorId(*id), *e)).collect())
                .expect("builtin rows are well formed");
            kb.known.insert(*n, KnownIcp { degree: *n, poly, printed_t: (*t).to_string() });
        }
        kb
    }

    pub fn builtin_factors_only() -> Self {
        let mut kb = FactorKB::builtin();
        kb.known.clear();
        kb
    }

    pub fn insert_factor(&mut self, id: FactorId, p: IntPoly) -> Result<()> {
        if p.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        self.factors.insert(id, p);
        Ok(())
    }

    /// Adds a known polynomial; its factors must already be present and its
    /// expanded degree must equal `icp.degree`.
    pub fn insert_icp(&mut self, icp: KnownIcp) -> Result<()> {
        let d = icp.poly.degree(self)?;
        if d != icp.degree {
            return Err(Error::InvalidInput(alloc::format!(
                "entry for degree {} expands to degree {d}",
                icp.degree
            )));
        }
        self.known.insert(icp.degree, icp);
        Ok(())
    }

    /// Like [`insert_icp`](Self::insert_icp) but without the degree check,
    /// so inconsistent databases can still be loaded and reported on.
    pub fn insert_icp_unchecked(&mut self, icp: KnownIcp) {
        self.known.insert(icp.degree, icp);
    }

    pub fn factor(&self, id: FactorId) -> Result<&IntPoly> {
        self.factors.get(&id).ok_or(Error::UnknownFactor(id))
    }

    pub fn factors(&self) -> impl Iterator<Item = (&FactorId, &IntPoly)> {
        self.factors.iter()
    }

    pub fn known_icps(&self) -> impl Iterator<Item = &KnownIcp> {
        self.known.values()
    }

    pub fn icp(&self, n: usize) -> Option<&KnownIcp> {
        self.known.get(&n)
    }

    /// `(n, weighted exponent sum)` for every known polynomial.
    pub fn degree_audit(&self) -> Result<Vec<(usize, usize)>> {
        self.known.values().map(|k| Ok((k.degree, k.poly.degree(self)?))).collect()
    }

    /// The known polynomial of degree `n` as a product of factors, including
    /// the elementary optima `2x − 1` (degree 1) and `x − x²` (degree 2).
    pub fn best_known(&self, n: usize) -> Option<FactoredPoly> {
        if let Some(k) = self.known.get(&n) {
            return Some(k.poly.clone());
        }
        let elementary = match n {
            1 => FactorId(2),
            2 => FactorId(1),
            _ => return None,
        };
        let want = if n == 1 { IntPoly::from_i64(&[-1, 2]) } else { IntPoly::from_i64(&[0, 1, -1]) };
        match self.factors.get(&elementary) {
            Some(p) if *p == want => FactoredPoly::new(alloc::vec![(elementary, 1)]).ok(),
            _ => None,
        }
    }

    /// Factors `p` over the knowledge base by repeated exact division.
    /// Returns the factored part and the cofactor left over.
    pub fn factor_over(&self, p: &IntPoly) -> (FactoredPoly, IntPoly) {
        let mut rest = p.clone();
        let mut out = Vec::new();
        for (id, h) in &self.factors {
            if h.degree().unwrap_or(0) == 0 {
                continue;
            }
            let mut e = 0u32;
            while let Some(q) = rest.div_exact(h) {
                rest = q;
                e += 1;
            }
            if e > 0 {
                out.push((*id, e));
            }
        }
        (FactoredPoly { factors: out }, rest)
    }
}

/// Best product bound `c_n = min_k ‖p_k p_{n−k}‖` over available splits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnBound {
    pub split: (usize, usize),
    pub poly: FactoredPoly,
    pub norm: NormEnclosure,
}

impl CnBound {
    /// Certified upper bound on the optimal norm at degree `n`.
    pub fn value(&self) -> &BigRational {
        &self.norm.hi
    }
}

pub fn upper_bound_cn(n: usize, kb: &FactorKB, rel_tol: &BigRational) -> Result<CnBound> {
    let mut best: Option<CnBound> = None;
    for k in 1..=n / 2 {
        let (Some(a), Some(b)) = (kb.best_known(k), kb.best_known(n - k)) else {
            continue;
        };
        let prod = a.times(&b);
        let norm = sup_norm_product(&prod.to_product(kb)?, &Interval::unit(), rel_tol)?;
        if best.as_ref().map_or(true, |c| norm.hi < c.norm.hi) {
            best = Some(CnBound { split: (k, n - k), poly: prod, norm });
        }
    }
    best.ok_or(Error::NoSplit(n))
}

/// The factorization state of a search: `p = F·G` with `deg G = g` and a
/// bound `‖F·G‖_I ≤ c_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorState {
    pub f: IntPoly,
    pub g: usize,
    pub c_n: BigRational,
    pub interval: Interval,
    /// Linear factors `(a, b)` meaning `ax − b`, in deduction order.
    pub forced: Vec<(BigInt, BigInt)>,
}

impl FactorState {
    pub fn new(f: IntPoly, g: usize, c_n: BigRational, interval: Interval) -> Result<Self> {
        if f.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if !c_n.is_positive() {
            return Err(Error::InvalidInput("c_n must be positive".into()));
        }
        Ok(FactorState { f, g, c_n, interval, forced: Vec::new() })
    }

    pub fn target_degree(&self) -> usize {
        self.f.degree().unwrap_or(0) + self.g
    }
}

/// All reduced `b/a` with `1 ≤ a ≤ max_a` lying in the interval.
pub fn default_candidates(interval: &Interval, max_a: i64) -> Vec<(BigInt, BigInt)> {
    let mut out = Vec::new();
    for a in 1..=max_a {
        let lo = crate::rational::ceil(&(&interval.lo * BigRational::from_integer(a.into())));
        let hi = crate::rational::floor(&(&interval.hi * BigRational::from_integer(a.into())));
        let mut b = lo;
        while b <= hi {
            if b.gcd(&BigInt::from(a)).is_one() {
                out.push((BigInt::from(a), b.clone()));
            }
            b += 1;
        }
    }
    out
}

/// Repeatedly applies the forced-factor test `c_n < |F(b/a)|/a^g`, which
/// makes the integer `a^g G(b/a)` smaller than one in absolute value and
/// hence zero.
pub fn deduce_forced_factors(state: &FactorState, candidates: &[(BigInt, BigInt)]) -> Result<FactorState> {
    let mut st = state.clone();
    loop {
        let mut fired = false;
        for (a, b) in candidates {
            if !a.is_positive() {
                return Err(Error::InvalidInput(alloc::format!("candidate denominator {a} must be positive")));
            }
            let x = BigRational::new(b.clone(), a.clone());
            if !st.interval.contains(&x) {
                continue;
            }
            let fx = st.f.eval(&x).abs();
            if fx.is_zero() {
                continue;
            }
            let ag = BigRational::from_integer(a.pow(st.g as u32));
            if st.c_n < fx / ag {
                if st.g == 0 {
                    return Err(Error::NegativeDegree);
                }
                st.f = &st.f * &IntPoly::linear(a.clone(), b.clone());
                st.g -= 1;
                st.forced.push((a.clone(), b.clone()));
                fired = true;
            }
        }
        if !fired {
            return Ok(st);
        }
    }
}

/// Verification outcome for one known polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowReport {
    pub degree: usize,
    pub poly: FactoredPoly,
    pub expanded_degree: Option<usize>,
    pub printed_t: String,
    /// Certified enclosure of `‖p‖^{1/n}` on `[0,1]`.
    pub t: Option<(BigRational, BigRational)>,
    /// The certified value rounded to 8 decimals, when both enclosure ends
    /// agree (nearest and upward rounding).
    pub rounded_nearest: Option<String>,
    pub rounded_up: Option<String>,
    /// `|t − printed| ≤ 5·10⁻⁹` holds over the whole enclosure.
    pub within_half_ulp: bool,
    /// The printed value equals the upward 8-decimal rounding of `t`.
    pub matches: bool,
    pub error: Option<String>,
}

/// Expands every known polynomial, checks its degree and compares the
/// certified normalized norm against the printed value.
pub fn verify_table(kb: &FactorKB, rel_tol: &BigRational) -> Vec<RowReport> {
    kb.known_icps().map(|icp| verify_row(kb, icp, rel_tol)).collect()
}

pub fn verify_row(kb: &FactorKB, icp: &KnownIcp, rel_tol: &BigRational) -> RowReport {
    let mut report = RowReport {
        degree: icp.degree,
        poly: icp.poly.clone(),
        expanded_degree: None,
        printed_t: icp.printed_t.clone(),
        t: None,
        rounded_nearest: None,
        rounded_up: None,
        within_half_ulp: false,
        matches: false,
        error: None,
    };
    let product = match icp.poly.to_product(kb) {
        Ok(p) => p,
        Err(e) => {
            report.error = Some(e.to_string());
            return report;
        }
    };
    report.expanded_degree = product.degree();
    if report.expanded_degree != Some(icp.degree) {
        report.error = Some(alloc::format!("expands to degree {:?}", report.expanded_degree));
        return report;
    }
    let (lo, hi) = match normalized_t_product(&product, &Interval::unit(), rel_tol) {
        Ok(t) => t,
        Err(e) => {
            report.error = Some(e.to_string());
            return report;
        }
    };
    let same = |mode| {
        let a = to_decimal(&lo, 8, mode);
        (a == to_decimal(&hi, 8, mode)).then_some(a)
    };
    report.rounded_nearest = same(Rounding::Nearest);
    report.rounded_up = same(Rounding::Up);
    if let Some(printed) = parse_decimal(&icp.printed_t) {
        let half = rat(5, 1_000_000_000);
        report.within_half_ulp = (&hi - &printed).abs() <= half && (&lo - &printed).abs() <= half;
        report.matches = report.rounded_up.as_deref() == Some(icp.printed_t.trim());
    } else {
        report.error = Some(alloc::format!("unparseable printed value {:?}", icp.printed_t));
    }
    report.t = Some((lo, hi));
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_i64(c)
    }

    fn tol() -> BigRational {
        rat(1, 1_000_000_000_000)
    }

    #[test]
    fn factor_ids() {
        assert_eq!(FactorId(14).to_string(), "h_14");
        assert_eq!("h_3".parse::<FactorId>().unwrap(), FactorId(3));
        assert_eq!("h7".parse::<FactorId>().unwrap(), FactorId(7));
        assert!("x".parse::<FactorId>().is_err());
    }

    #[test]
    fn expand_examples() {
        let kb = FactorKB::builtin();
        let f = FactoredPoly::new(vec![(FactorId(1), 1), (FactorId(2), 1)]).unwrap();
        assert_eq!(f.expand(&kb).unwrap(), p(&[0, -1, 3, -2]));
        let f = FactoredPoly::new(vec![(FactorId(1), 2)]).unwrap();
        assert_eq!(f.expand(&kb).unwrap(), p(&[0, 0, 1, -2, 1]));
        let row = kb.icp(147).unwrap();
        assert_eq!(row.poly.expand(&kb).unwrap().degree(), Some(147));
        let bad = FactoredPoly::new(vec![(FactorId(99), 1)]).unwrap();
        assert_eq!(bad.expand(&kb), Err(Error::UnknownFactor(FactorId(99))));
    }

    #[test]
    fn factored_poly_validation() {
        assert!(FactoredPoly::new(vec![(FactorId(1), 0)]).is_err());
        assert!(FactoredPoly::new(vec![(FactorId(1), 1), (FactorId(1), 2)]).is_err());
    }

    #[test]
    fn builtin_factors_are_symmetric_or_antisymmetric() {
        let kb = FactorKB::builtin();
        assert_eq!(kb.factors().count(), 23);
        for (_, h) in kb.factors() {
            assert!(h.is_symmetric_or_antisymmetric());
        }
    }

    #[test]
    fn degree_audit_holds() {
        let kb = FactorKB::builtin();
        let audit = kb.degree_audit().unwrap();
        assert_eq!(audit.len(), 16);
        for (n, d) in audit {
            assert_eq!(n, d);
        }
    }

    #[test]
    fn cn_small_degrees() {
        let kb = FactorKB::builtin_factors_only();
        let c2 = upper_bound_cn(2, &kb, &tol()).unwrap();
        assert_eq!(c2.split, (1, 1));
        assert_eq!(c2.value(), &rat(1, 1));
        let c4 = upper_bound_cn(4, &kb, &tol()).unwrap();
        assert_eq!(c4.value(), &rat(1, 16));
        assert_eq!(upper_bound_cn(7, &kb, &tol()), Err(Error::NoSplit(7)));
    }

    #[test]
    fn deduction_examples() {
        let st = FactorState::new(IntPoly::one(), 4, rat(1, 16), Interval::unit()).unwrap();
        let out = deduce_forced_factors(&st, &[(1.into(), 0.into())]).unwrap();
        assert_eq!(out.g, 3);
        assert_eq!(out.f, p(&[0, 1]));
        let out = deduce_forced_factors(&st, &[(2.into(), 1.into())]).unwrap();
        assert_eq!(out, st);
    }

    #[test]
    fn deduction_fixed_point_and_negative_degree() {
        // c = 1/4 at g = 2: x and x − 1 both fire, then 2x − 1 cannot
        let st = FactorState::new(IntPoly::one(), 2, rat(1, 4), Interval::unit()).unwrap();
        let cands = default_candidates(&Interval::unit(), 8);
        let out = deduce_forced_factors(&st, &cands).unwrap();
        assert_eq!(out.g, 0);
        assert_eq!(out.forced, vec![(1.into(), 0.into()), (1.into(), 1.into())]);
        let st = FactorState::new(IntPoly::one(), 1, rat(1, 16), Interval::unit()).unwrap();
        assert_eq!(deduce_forced_factors(&st, &cands), Err(Error::NegativeDegree));
    }

    #[test]
    fn candidates_are_reduced_and_inside() {
        let c = default_candidates(&Interval::quarter(), 8);
        assert!(c.contains(&(1.into(), 0.into())));
        assert!(c.contains(&(4.into(), 1.into())));
        assert!(!c.contains(&(8.into(), 2.into())));
        assert!(!c.contains(&(3.into(), 1.into())));
    }

    #[test]
    fn factor_over_recovers_row() {
        let kb = FactorKB::builtin();
        let row = kb.icp(152).unwrap();
        let (f, rest) = kb.factor_over(&row.poly.expand(&kb).unwrap());
        assert_eq!(rest, IntPoly::one());
        assert_eq!(f, row.poly.times(&FactoredPoly::default()));
    }
}
