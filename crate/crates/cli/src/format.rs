//! JSON files: factor DB, known-polynomial DB, factor state, run records and
//! checkpoints. Integers are decimal strings and rationals are `"num/den"`
//! strings, so every value round-trips exactly.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use intcheb_core::bnb::{BnbSnapshot, BnbStats, Incumbent, Node};
use intcheb_core::lsip::{BoundKind, CoefConstraint, ConstraintSet};
use intcheb_core::rational::{format_rational, parse_rational};
use intcheb_core::{
    BigInt, BigRational, Bracket, FactorId, FactorKB, FactorState, FactoredPoly, Interval, IntPoly, KnownIcp,
    NormEnclosure, PolyProduct,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const SHIPPED_FACTORS: &str = include_str!("../data/factors.json");
pub const SHIPPED_ICPS: &str = include_str!("../data/icps.json");

pub fn int_str(v: &BigInt) -> String {
    v.to_string()
}

pub fn parse_int(s: &str) -> Result<BigInt> {
    s.trim().parse().map_err(|_| anyhow!("not an integer: {s:?}"))
}

pub fn rat_str(v: &BigRational) -> String {
    format_rational(v)
}

pub fn parse_rat(s: &str) -> Result<BigRational> {
    parse_rational(s).ok_or_else(|| anyhow!("not a rational: {s:?}"))
}

pub fn coeffs_out(p: &IntPoly) -> Vec<String> {
    p.coeffs().iter().map(int_str).collect()
}

pub fn coeffs_in(c: &[String]) -> Result<IntPoly> {
    Ok(IntPoly::new(c.iter().map(|s| parse_int(s)).collect::<Result<_>>()?))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// `{"factors": {"h_1": ["0", "1", "-1"], …}}`, coefficients low to high.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorDb {
    pub factors: BTreeMap<String, Vec<String>>,
}

/// `{"icps": [{"degree": 147, "factors": [["h_1", 48], …], "t": "0.42591455"}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcpDb {
    pub icps: Vec<IcpEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IcpEntry {
    pub degree: usize,
    pub factors: Vec<(String, u32)>,
    pub t: String,
}

impl FactorDb {
    pub fn from_kb(kb: &FactorKB) -> Self {
        FactorDb { factors: kb.factors().map(|(id, p)| (id.to_string(), coeffs_out(p))).collect() }
    }
}

impl IcpDb {
    pub fn from_kb(kb: &FactorKB) -> Self {
        IcpDb {
            icps: kb
                .known_icps()
                .map(|k| IcpEntry { degree: k.degree, factors: factored_out(&k.poly), t: k.printed_t.clone() })
                .collect(),
        }
    }
}

pub fn factored_out(p: &FactoredPoly) -> Vec<(String, u32)> {
    p.factors().iter().map(|(id, e)| (id.to_string(), *e)).collect()
}

pub fn factored_in(fs: &[(String, u32)]) -> Result<FactoredPoly> {
    let pairs = fs
        .iter()
        .map(|(id, e)| Ok((id.parse::<FactorId>().map_err(|e| anyhow!("{e}"))?, *e)))
        .collect::<Result<Vec<_>>>()?;
    FactoredPoly::new(pairs).map_err(|e| anyhow!("{e}"))
}

/// Builds a knowledge base. Known polynomials are loaded without the degree
/// check so a bad row shows up in the verification report.
pub fn load_kb(factors: &FactorDb, icps: &IcpDb) -> Result<FactorKB> {
    let mut kb = FactorKB::empty();
    for (id, c) in &factors.factors {
        let id: FactorId = id.parse().map_err(|e| anyhow!("{e}"))?;
        kb.insert_factor(id, coeffs_in(c)?).map_err(|e| anyhow!("factor {id}: {e}"))?;
    }
    for e in &icps.icps {
        let poly = factored_in(&e.factors).with_context(|| format!("entry for degree {}", e.degree))?;
        kb.insert_icp_unchecked(KnownIcp { degree: e.degree, poly, printed_t: e.t.clone() });
    }
    Ok(kb)
}

/// Loads the given files, falling back to the shipped data for either one.
pub fn kb_from_paths(factors: Option<&Path>, icps: Option<&Path>) -> Result<FactorKB> {
    let f: FactorDb = match factors {
        Some(p) => read_json(p)?,
        None => serde_json::from_str(SHIPPED_FACTORS)?,
    };
    let i: IcpDb = match icps {
        Some(p) => read_json(p)?,
        None => serde_json::from_str(SHIPPED_ICPS)?,
    };
    load_kb(&f, &i)
}

/// One factor of `F`: a knowledge-base id or explicit coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorTerm {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<String>>,
    pub exp: u32,
}

/// Known factors `F`, unknown degree `g` and the bound `c_n` on `[0,1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorStateFile {
    pub f: Vec<FactorTerm>,
    pub g: usize,
    pub c_n: String,
    pub interval: (String, String),
    /// Deduced linear factors `a x − b` as `(a, b)`; they also appear in `f`.
    #[serde(default)]
    pub forced: Vec<(String, String)>,
}

impl FactorStateFile {
    /// `base` holds the factors the deduction started from.
    pub fn from_state(base: &PolyProduct, st: &FactorState) -> Self {
        let mut f: Vec<FactorTerm> =
            base.factors().iter().map(|(p, e)| FactorTerm { id: None, coeffs: Some(coeffs_out(p)), exp: *e }).collect();
        for (a, b) in &st.forced {
            let lin = IntPoly::linear(a.clone(), b.clone());
            f.push(FactorTerm { id: None, coeffs: Some(coeffs_out(&lin)), exp: 1 });
        }
        FactorStateFile {
            f,
            g: st.g,
            c_n: rat_str(&st.c_n),
            interval: (rat_str(&st.interval.lo), rat_str(&st.interval.hi)),
            forced: st.forced.iter().map(|(a, b)| (int_str(a), int_str(b))).collect(),
        }
    }

    pub fn product(&self, kb: &FactorKB) -> Result<PolyProduct> {
        let mut out = PolyProduct::default();
        for t in &self.f {
            let p = match (&t.id, &t.coeffs) {
                (Some(id), None) => {
                    let id: FactorId = id.parse().map_err(|e| anyhow!("{e}"))?;
                    kb.factor(id).map_err(|e| anyhow!("{e}"))?.clone()
                }
                (None, Some(c)) => coeffs_in(c)?,
                _ => bail!("each factor needs exactly one of \"id\" and \"coeffs\""),
            };
            if p.is_zero() {
                bail!("zero factor in F");
            }
            out.push(p, t.exp);
        }
        Ok(out)
    }

    pub fn interval(&self) -> Result<Interval> {
        Interval::new(parse_rat(&self.interval.0)?, parse_rat(&self.interval.1)?).map_err(|e| anyhow!("{e}"))
    }

    pub fn c_n(&self) -> Result<BigRational> {
        parse_rat(&self.c_n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnclosureFile {
    pub lo: String,
    pub hi: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<(String, String)>,
}

impl EnclosureFile {
    pub fn from_enclosure(e: &NormEnclosure) -> Self {
        EnclosureFile {
            lo: rat_str(&e.lo),
            hi: rat_str(&e.hi),
            witnesses: e.witnesses.iter().map(|b| (rat_str(&b.lo), rat_str(&b.hi))).collect(),
        }
    }

    pub fn to_enclosure(&self) -> Result<NormEnclosure> {
        Ok(NormEnclosure {
            lo: parse_rat(&self.lo)?,
            hi: parse_rat(&self.hi)?,
            witnesses: self
                .witnesses
                .iter()
                .map(|(a, b)| Ok(Bracket { lo: parse_rat(a)?, hi: parse_rat(b)? }))
                .collect::<Result<_>>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsFile {
    pub dequeued: u64,
    pub pruned: u64,
    pub infeasible: u64,
    pub lp_solves: u64,
    pub handoffs: u64,
    pub incumbent_updates: u64,
}

impl From<&BnbStats> for StatsFile {
    fn from(s: &BnbStats) -> Self {
        StatsFile {
            dequeued: s.dequeued,
            pruned: s.pruned,
            infeasible: s.infeasible,
            lp_solves: s.lp_solves,
            handoffs: s.handoffs,
            incumbent_updates: s.incumbent_updates,
        }
    }
}

impl From<&StatsFile> for BnbStats {
    fn from(s: &StatsFile) -> Self {
        BnbStats {
            dequeued: s.dequeued,
            pruned: s.pruned,
            infeasible: s.infeasible,
            lp_solves: s.lp_solves,
            handoffs: s.handoffs,
            incumbent_updates: s.incumbent_updates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintFile {
    pub index: usize,
    /// `"fixed"`, `"lower"` or `"upper"`.
    pub kind: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeFile {
    pub constraints: Vec<ConstraintFile>,
    pub bound: String,
    pub a_bar: Vec<String>,
    pub depth: usize,
    pub seq: u64,
    pub active_points: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncumbentFile {
    pub g: Vec<String>,
    pub norm: EnclosureFile,
}

/// Queue and incumbent of an interrupted branch and bound.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotFile {
    pub nodes: Vec<NodeFile>,
    pub incumbent: Option<IncumbentFile>,
    pub upper: String,
    pub next_seq: u64,
    pub stats: StatsFile,
}

impl SnapshotFile {
    pub fn from_snapshot(s: &BnbSnapshot) -> Self {
        SnapshotFile {
            nodes: s.nodes.iter().map(node_out).collect(),
            incumbent: s
                .incumbent
                .as_ref()
                .map(|i| IncumbentFile { g: coeffs_out(&i.g_star), norm: EnclosureFile::from_enclosure(&i.norm) }),
            upper: rat_str(&s.upper),
            next_seq: s.next_seq,
            stats: (&s.stats).into(),
        }
    }

    pub fn to_snapshot(&self) -> Result<BnbSnapshot> {
        Ok(BnbSnapshot {
            nodes: self.nodes.iter().map(node_in).collect::<Result<_>>()?,
            incumbent: match &self.incumbent {
                Some(i) => Some(Incumbent { g_star: coeffs_in(&i.g)?, norm: i.norm.to_enclosure()? }),
                None => None,
            },
            upper: parse_rat(&self.upper)?,
            next_seq: self.next_seq,
            stats: (&self.stats).into(),
        })
    }
}

fn node_out(n: &Node) -> NodeFile {
    NodeFile {
        constraints: n
            .constraints
            .constraints()
            .iter()
            .map(|c| {
                let (kind, v) = match &c.kind {
                    BoundKind::Fixed(v) => ("fixed", v),
                    BoundKind::Lower(v) => ("lower", v),
                    BoundKind::Upper(v) => ("upper", v),
                };
                ConstraintFile { index: c.index, kind: kind.into(), value: int_str(v) }
            })
            .collect(),
        bound: rat_str(&n.bound),
        a_bar: n.a_bar.iter().map(rat_str).collect(),
        depth: n.depth,
        seq: n.seq,
        active_points: n.active_points.iter().map(rat_str).collect(),
    }
}

fn node_in(n: &NodeFile) -> Result<Node> {
    let cs = n
        .constraints
        .iter()
        .map(|c| {
            let v = parse_int(&c.value)?;
            let kind = match c.kind.as_str() {
                "fixed" => BoundKind::Fixed(v),
                "lower" => BoundKind::Lower(v),
                "upper" => BoundKind::Upper(v),
                k => bail!("unknown constraint kind {k:?}"),
            };
            Ok(CoefConstraint { index: c.index, kind })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Node {
        constraints: ConstraintSet::from_constraints(&cs).map_err(|e| anyhow!("{e}"))?,
        bound: parse_rat(&n.bound)?,
        a_bar: n.a_bar.iter().map(|s| parse_rat(s)).collect::<Result<_>>()?,
        depth: n.depth,
        seq: n.seq,
        active_points: n.active_points.iter().map(|s| parse_rat(s)).collect::<Result<_>>()?,
    })
}
