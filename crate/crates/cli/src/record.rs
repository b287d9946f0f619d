//! Run records and checkpoints.

use anyhow::{anyhow, bail, Result};
use intcheb_core::norm::{nth_root_enclosure, sup_norm_product};
use intcheb_core::rational::{to_decimal, Rounding};
use intcheb_core::search::{C0Source, SearchOutcome};
use intcheb_core::{BigRational, Embedding, FactorKB, FactoredPoly, Interval, IntPoly, NormEnclosure, PolyProduct};
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::format::{
    coeffs_in, coeffs_out, factored_in, factored_out, int_str, parse_rat, rat_str, EnclosureFile, FactorTerm,
    SnapshotFile, StatsFile,
};

/// Everything that determines a search result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub degree: usize,
    /// `"combined"`, `"bnb"` or `"resultant"`.
    pub mode: String,
    pub handoff: usize,
    pub c0: Option<String>,
    pub rel_tol: String,
    pub eps_factor: String,
    pub deduction_max_a: i64,
    pub workers: usize,
    /// Known factors on `[0,1]` supplied as input.
    pub f: Vec<FactorTerm>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkingProblem {
    /// `"direct"`, `"even"` (`[0,1/4]`) or `"odd"` (`(2t−1)·P(t(1−t))`).
    pub embedding: String,
    pub f: Vec<String>,
    pub g: usize,
    pub g_star: Vec<String>,
    pub norm: EnclosureFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TValue {
    pub lo: String,
    pub hi: String,
    /// Both ends rounded down and up to 8 decimals.
    pub decimal: (String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchStatsFile {
    pub bnb: StatsFile,
    pub enum_leaves: u64,
    pub enum_norm_evals: u64,
    pub shifted_searches: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub config: RunConfig,
    pub c0: String,
    /// `"override"`, `"split k+m"` or `"elementary"`.
    pub c0_source: String,
    pub forced: Vec<(String, String)>,
    pub working: WorkingProblem,
    /// The result on `[0,1]`, expanded, with positive leading coefficient.
    pub poly: Vec<String>,
    /// The result as knowledge-base factors times a cofactor.
    pub factored: Vec<(String, u32)>,
    pub cofactor: Vec<String>,
    /// Sup norm on `[0,1]` recomputed from `factored` and `cofactor`.
    pub norm: EnclosureFile,
    pub t: TValue,
    pub stats: SearchStatsFile,
    pub wall_seconds: f64,
}

fn embedding_name(e: &Embedding) -> &'static str {
    match e {
        Embedding::Direct(_) => "direct",
        Embedding::EvenSymmetric => "even",
        Embedding::OddSymmetric => "odd",
    }
}

fn bare(e: &NormEnclosure) -> EnclosureFile {
    EnclosureFile { lo: rat_str(&e.lo), hi: rat_str(&e.hi), witnesses: Vec::new() }
}

pub fn factored_product(kb: &FactorKB, factored: &FactoredPoly, cofactor: &IntPoly) -> Result<PolyProduct> {
    let mut p = factored.to_product(kb).map_err(|e| anyhow!("{e}"))?;
    if *cofactor != IntPoly::one() {
        p.push(cofactor.clone(), 1);
    }
    Ok(p)
}

/// Certified norm and `t` enclosure of a stored result.
pub fn certify(product: &PolyProduct, n: usize, rel_tol: &BigRational) -> Result<(NormEnclosure, TValue)> {
    let norm = sup_norm_product(product, &Interval::unit(), rel_tol).map_err(|e| anyhow!("{e}"))?;
    let (lo, hi) = nth_root_enclosure(&norm, n as u32, rel_tol);
    let t = TValue {
        decimal: (to_decimal(&lo, 8, Rounding::Down), to_decimal(&hi, 8, Rounding::Up)),
        lo: rat_str(&lo),
        hi: rat_str(&hi),
    };
    Ok((norm, t))
}

impl RunRecord {
    pub fn new(config: RunConfig, kb: &FactorKB, out: &SearchOutcome, rel_tol: &BigRational) -> Result<Self> {
        let poly = match out.poly.leading() {
            Some(l) if l.is_negative() => -&out.poly,
            _ => out.poly.clone(),
        };
        let (factored, cofactor) = kb.factor_over(&poly);
        let product = factored_product(kb, &factored, &cofactor)?;
        let (norm, t) = certify(&product, config.degree, rel_tol)?;
        if !norm.overlaps(&out.norm) {
            bail!("norm on [0,1] {} disagrees with the working norm {}", rat_str(&norm.hi), rat_str(&out.norm.hi));
        }
        let s = &out.stats;
        Ok(RunRecord {
            c0: rat_str(&out.c0),
            c0_source: match &out.c0_source {
                C0Source::Override => "override".into(),
                C0Source::Split(a, b) => format!("split {a}+{b}"),
                C0Source::Elementary => "elementary".into(),
            },
            forced: out.state.forced.iter().map(|(a, b)| (int_str(a), int_str(b))).collect(),
            working: WorkingProblem {
                embedding: embedding_name(out.problem.embedding()).into(),
                f: coeffs_out(out.problem.f()),
                g: out.problem.g(),
                g_star: coeffs_out(&out.g_star),
                norm: bare(&out.norm),
            },
            poly: coeffs_out(&poly),
            factored: factored_out(&factored),
            cofactor: coeffs_out(&cofactor),
            norm: bare(&norm),
            t,
            stats: SearchStatsFile {
                bnb: (&s.bnb).into(),
                enum_leaves: s.enum_leaves,
                enum_norm_evals: s.enum_norm_evals,
                shifted_searches: s.shifted_searches,
            },
            wall_seconds: 0.0,
            config,
        })
    }

    /// Recomputes the norm of the stored polynomial and compares it with the
    /// stored enclosure.
    pub fn reverify(&self, kb: &FactorKB) -> Result<bool> {
        let factored = factored_in(&self.factored)?;
        let cofactor = coeffs_in(&self.cofactor)?;
        let product = factored_product(kb, &factored, &cofactor)?;
        if product.expand() != coeffs_in(&self.poly)? {
            return Ok(false);
        }
        let (norm, t) = certify(&product, self.config.degree, &parse_rat(&self.config.rel_tol)?)?;
        Ok(bare(&norm) == self.norm && t == self.t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub config: RunConfig,
    pub snapshot: SnapshotFile,
}
