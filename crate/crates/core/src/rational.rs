//! Small helpers on exact rationals: rounding, roots, decimal output.

use alloc::string::String;
use core::fmt::Write;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(v.into())
}

/// `2^-bits` as a rational.
pub fn dyadic(num: BigInt, bits: u64) -> BigRational {
    BigRational::new(num, BigInt::one() << bits)
}

pub fn floor(r: &BigRational) -> BigInt {
    r.floor().to_integer()
}

pub fn ceil(r: &BigRational) -> BigInt {
    r.ceil().to_integer()
}

/// Nearest integer, exact halves rounded toward zero.
pub fn round_half_toward_zero(r: &BigRational) -> BigInt {
    let fl = floor(r);
    let frac = r - BigRational::from_integer(fl.clone());
    let half = rat(1, 2);
    if frac > half || (frac == half && r.is_negative()) {
        fl + 1
    } else {
        fl
    }
}

/// Certified bounds `(lo, hi)` on `x^{1/n}` for `x ≥ 0`, both multiples of
/// `2^-bits` with `hi − lo ≤ 2^-bits`; `lo == hi` when the root is exact at
/// that resolution.
pub fn nth_root_bounds(x: &BigRational, n: u32, bits: u64) -> (BigRational, BigRational) {
    assert!(n >= 1);
    assert!(!x.is_negative());
    if x.is_zero() {
        return (BigRational::zero(), BigRational::zero());
    }
    // k = floor((x * 2^{bits n})^{1/n})
    let scaled = x.numer() << (bits * u64::from(n));
    let (q, r) = scaled.div_rem(x.denom());
    let q: BigUint = q.to_biguint().expect("nonnegative");
    let k = q.nth_root(n);
    let exact = r.is_zero() && k.pow(n) == q;
    let lo = dyadic(BigInt::from(k.clone()), bits);
    let hi = if exact { lo.clone() } else { dyadic(BigInt::from(k + 1u32), bits) };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Down,
    Up,
    Nearest,
}

/// Decimal string with exactly `digits` digits after the point.
pub fn to_decimal(r: &BigRational, digits: u32, mode: Rounding) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = r * BigRational::from_integer(scale.clone());
    let v = match mode {
        Rounding::Down => floor(&scaled),
        Rounding::Up => ceil(&scaled),
        Rounding::Nearest => (scaled + rat(1, 2)).floor().to_integer(),
    };
    let neg = v.sign() == Sign::Minus;
    let (ip, fp) = v.abs().div_rem(&scale);
    let mut s = String::new();
    if neg {
        s.push('-');
    }
    write!(s, "{}", ip).unwrap();
    if digits > 0 {
        let f = fp.to_string_padded(digits as usize);
        s.push('.');
        s.push_str(&f);
    }
    s
}

trait Padded {
    fn to_string_padded(&self, width: usize) -> String;
}

impl Padded for BigInt {
    fn to_string_padded(&self, width: usize) -> String {
        let mut s = String::new();
        write!(s, "{:0>width$}", self, width = width).unwrap();
        s
    }
}

/// Parse a decimal literal such as `0.42591455` or `-3` exactly.
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (ip, fp) = match body.split_once('.') {
        Some((a, b)) => (a, b),
        None => (body, ""),
    };
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mut digits = String::from(ip);
    digits.push_str(fp);
    let num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    let den = BigInt::from(10u32).pow(fp.len() as u32);
    let v = BigRational::new(num, den);
    Some(if neg { -v } else { v })
}

/// Parse `"num/den"` or a plain integer or a decimal literal.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    parse_decimal(s)
}

/// `"num/den"` form (denominator always present).
pub fn format_rational(r: &BigRational) -> String {
    let mut s = String::new();
    write!(s, "{}/{}", r.numer(), r.denom()).unwrap();
    s
}

/// Lossy conversion for logging only.
pub fn approx_f64(r: &BigRational) -> f64 {
    let n = r.numer();
    let d = r.denom();
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    let shift = nb - db - 60;
    let q = if shift > 0 {
        (n / (d << shift as u64)).to_f64().unwrap_or(f64::NAN) * libm::pow(2.0, shift as f64)
    } else {
        ((n << (-shift) as u64) / d).to_f64().unwrap_or(f64::NAN) * libm::pow(2.0, shift as f64)
    };
    q
}
