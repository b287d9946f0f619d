//! Acceptance criteria, one PASS/FAIL line each. The degree-120 smoke run is
//! skipped unless `--ignored` or `--include-ignored` is passed.

use std::cmp::Ordering;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use intcheb::format::{kb_from_paths, read_json};
use intcheb::record::RunRecord;
use intcheb_core::bnb::compare_norms;
use intcheb_core::kb::verify_table;
use intcheb_core::lsip::{cutting_plane_solve, initial_points, BoundKind, CoefConstraint, ConstraintSet};
use intcheb_core::norm::{default_rel_tol, sup_norm_product, Interval};
use intcheb_core::rational::{approx_f64, parse_decimal, rat};
use intcheb_core::resultant::{build_system, candidate_pool, prepare, resultants, EvalPoints, ResultantSystem};
use intcheb_core::search::{solve, SearchConfig, SearchMode};
use intcheb_core::{BigInt, BigRational, Embedding, FactorKB, IntPoly, NormEnclosure, PolyProduct, SearchProblem};
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = (bool, String);

fn main() {
    let smoke = std::env::args().any(|a| a == "--ignored" || a == "--include-ignored");
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("table reproduction within 5e-9", table_within_tolerance),
        ("degree audit", degree_audit),
        ("small-degree oracle equivalence", small_degree_oracle),
        ("degree-2 end to end", degree_two),
        ("cutting-plane properties", cutting_plane_properties),
        ("congruence soundness", congruence_soundness),
        ("submultiplicativity over table pairs", submultiplicativity),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(r) => r,
            Err(e) => (false, format!("panicked: {}", panic_text(&e))),
        };
        if !ok {
            failed += 1;
        }
        println!("{} {name} ({:.1}s): {detail}", if ok { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
    }
    if smoke {
        let start = Instant::now();
        let (ok, detail) = catch_unwind(degree_120_smoke).unwrap_or((false, "panicked".into()));
        failed += usize::from(!ok);
        println!("{} degree-120 smoke ({:.1}s): {detail}", if ok { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
    } else {
        println!("SKIP degree-120 smoke: pass --ignored to run");
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn panic_text(e: &Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
}

fn shipped() -> FactorKB {
    kb_from_paths(None, None).unwrap()
}

/// Every row's certified `t` lies within `5·10⁻⁹` of the printed value.
fn table_within_tolerance() -> Outcome {
    let kb = shipped();
    let reports = verify_table(&kb, &default_rel_tol());
    let mut off = Vec::new();
    for r in &reports {
        let Some((lo, hi)) = &r.t else {
            off.push(format!("{} ({})", r.degree, r.error.clone().unwrap_or_default()));
            continue;
        };
        let printed = parse_decimal(&r.printed_t).unwrap();
        let dev = (hi - &printed).abs().max((lo - &printed).abs());
        if !r.within_half_ulp {
            off.push(format!("{} ({:.2e})", r.degree, approx_f64(&dev)));
        }
    }
    let ok = reports.len() == 16 && off.is_empty();
    (ok, format!("{}/{} rows within; outside: {}", reports.len() - off.len(), reports.len(), off.join(", ")))
}

fn degree_audit() -> Outcome {
    let kb = shipped();
    let audit = kb.degree_audit().unwrap();
    let bad: Vec<String> = audit.iter().filter(|(n, d)| n != d).map(|(n, d)| format!("{n} sums to {d}")).collect();
    (audit.len() == 16 && bad.is_empty(), format!("{} rows, {} mismatched {}", audit.len(), bad.len(), bad.join(", ")))
}

/// Sweep of all resultant vectors `r` inside their bounds. Coefficients come
/// from `a = W⁻¹·r`, with `W[i][k] = w_i^k v_i^{g−k}` inverted here by exact
/// elimination. Integral `a` with `a_g ≥ 1` are screened at 33 sample points
/// in floating point (with slack) and then certified.
struct Sweep<'a> {
    p: &'a SearchProblem,
    /// `D·W⁻¹`, rows indexed by `k`.
    inv: Vec<Vec<i128>>,
    den: i128,
    lo: Vec<i128>,
    hi: Vec<i128>,
    samples: Vec<(f64, f64)>,
    cap: f64,
    leaves: u64,
    best: Vec<(IntPoly, NormEnclosure)>,
}

fn to_i128(v: &BigInt) -> i128 {
    i128::try_from(v).expect("small instance")
}

/// `(D·W⁻¹, D)` with `D` the least common denominator.
fn integer_inverse(w: &[Vec<BigInt>]) -> (Vec<Vec<i128>>, i128) {
    let n = w.len();
    let mut a: Vec<Vec<BigRational>> = w
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r: Vec<BigRational> = row.iter().map(|x| BigRational::from_integer(x.clone())).collect();
            r.extend((0..n).map(|j| BigRational::from_integer(BigInt::from(i64::from(i == j)))));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero()).expect("singular");
        a.swap(c, p);
        let pivot = a[c][c].clone();
        a[c].iter_mut().for_each(|x| *x /= &pivot);
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                let row_c = a[c].clone();
                a[r].iter_mut().zip(&row_c).for_each(|(x, y)| *x -= &f * y);
            }
        }
    }
    let inv: Vec<Vec<BigRational>> = a.into_iter().map(|r| r[n..].to_vec()).collect();
    let den = inv.iter().flatten().fold(BigInt::one(), |d, x| {
        let extra = BigRational::new(d.clone(), x.denom().clone()).denom().clone();
        d * extra
    });
    let scaled = inv.iter().map(|r| r.iter().map(|x| to_i128(&(x * &den).to_integer())).collect()).collect();
    (scaled, to_i128(&den))
}

impl Sweep<'_> {
    fn walk(&mut self, i: usize, r: &mut Vec<i128>, acc: Vec<i128>) {
        if i == r.len() {
            if acc.iter().all(|x| x % self.den == 0) {
                let a: Vec<i128> = acc.iter().map(|x| x / self.den).collect();
                if *a.last().unwrap() >= 1 {
                    self.leaf(&a);
                }
            }
            return;
        }
        for v in self.lo[i]..=self.hi[i] {
            r[i] = v;
            let next = acc.iter().zip(&self.inv).map(|(s, row)| s + v * row[i]).collect();
            self.walk(i + 1, r, next);
        }
    }

    fn leaf(&mut self, a: &[i128]) {
        self.leaves += 1;
        let cap = self.best.first().map_or(self.cap, |b| approx_f64(&b.1.hi));
        let slack = cap * 1e-6 + 1e-12;
        for (x, fx) in &self.samples {
            let gx = a.iter().rev().fold(0f64, |acc, c| acc * x + *c as f64);
            if (fx * gx).abs() > cap + slack {
                return;
            }
        }
        let gp = IntPoly::new(a.iter().map(|&c| BigInt::from(c)).collect());
        let n = self.p.norm(&gp, &default_rel_tol()).unwrap();
        if approx_f64(&n.lo) > cap + slack {
            return;
        }
        match self.best.first().map(|b| compare_norms(self.p, (&gp, &n), (&b.0, &b.1)).unwrap()) {
            None | Some(Ordering::Less) => self.best = vec![(gp, n)],
            Some(Ordering::Equal) => self.best.push((gp, n)),
            Some(Ordering::Greater) => {}
        }
    }
}

/// All minimizers of `‖F·G‖ ≤ limit` among polynomials whose resultants lie
/// within the bounds, and the number of such polynomials.
fn brute_force(
    p: &SearchProblem,
    sys: &ResultantSystem,
    bounds: (&[BigInt], &[BigInt]),
    limit: &BigRational,
) -> (Vec<(IntPoly, NormEnclosure)>, u64) {
    let g = p.g();
    let w: Vec<Vec<BigInt>> = sys
        .points
        .pairs()
        .iter()
        .map(|(v, w)| (0..=g).map(|k| w.pow(k as u32) * v.pow((g - k) as u32)).collect())
        .collect();
    let (inv, den) = integer_inverse(&w);
    let dom = p.domain();
    let samples = (0..=32)
        .map(|k| {
            let x = &dom.lo + dom.width() * rat(k, 32);
            (approx_f64(&x), approx_f64(&p.f().eval(&x)))
        })
        .collect();
    let mut sweep = Sweep {
        p,
        inv,
        den,
        lo: bounds.0.iter().map(to_i128).collect(),
        hi: bounds.1.iter().map(to_i128).collect(),
        samples,
        cap: approx_f64(limit),
        leaves: 0,
        best: Vec::new(),
    };
    let mut r = vec![0i128; g + 1];
    sweep.walk(0, &mut r, vec![0; g + 1]);
    (sweep.best, sweep.leaves)
}

/// Branch and bound, enumeration and the combined method against a
/// brute-force sweep, on `[0,1/4]` for `g ≤ 4`.
fn small_degree_oracle() -> Outcome {
    let fs: [&[i64]; 5] = [&[1], &[1, -4], &[0, 1], &[1, -5], &[0, 1, -4]];
    let mut checked = 0;
    let mut bad = Vec::new();
    let mut volume = 0f64;
    let mut leaves = 0u64;
    for f in fs {
        for g in 1..=4 {
            let p = SearchProblem::from_poly(IntPoly::from_i64(f), g, Embedding::EvenSymmetric).unwrap();
            let mut mono = vec![0i64; g + 1];
            mono[g] = 1;
            let c0 = p.norm(&IntPoly::from_i64(&mono), &rat(1, 1_000_000)).unwrap().hi;
            let prep = prepare(&p, &c0, 0).unwrap();
            volume += prep.bounds.lo.iter().zip(&prep.bounds.hi).map(|(l, h)| approx_f64(&BigRational::from_integer(h - l + 1))).product::<f64>();
            let (oracle, n) = brute_force(&p, &prep.system, (&prep.bounds.lo, &prep.bounds.hi), &c0);
            leaves += n;
            let Some((og, on)) = oracle.first().cloned() else {
                bad.push(format!("F={f:?} g={g}: brute force found nothing"));
                continue;
            };
            let handoff = g.saturating_sub(1).max(1);
            for (name, mode) in [
                ("bnb", SearchMode::BranchAndBound),
                ("enumerate", SearchMode::Resultant),
                ("combined", SearchMode::Combined { handoff_remaining: handoff }),
            ] {
                let mut cfg = SearchConfig::new(1);
                cfg.mode = mode;
                let (best, stats) = solve(&p, &c0, &cfg, None, &mut ()).unwrap();
                let Some(best) = best else {
                    bad.push(format!("F={f:?} g={g} {name}: no result"));
                    continue;
                };
                if name == "combined" && stats.shifted_searches == 0 {
                    bad.push(format!("F={f:?} g={g}: combined made no shifted searches"));
                }
                let same = oracle.iter().any(|(q, _)| *q == best.g_star)
                    || compare_norms(&p, (&best.g_star, &best.norm), (&og, &on)).unwrap() == Ordering::Equal;
                if !same {
                    bad.push(format!("F={f:?} g={g} {name}: {} vs brute force {og}", best.g_star));
                }
            }
            checked += 1;
        }
    }
    (
        bad.is_empty(),
        format!("{checked} instances x 3 methods, {volume:.2e} resultant vectors swept, {leaves} integral; {}", if bad.is_empty() { "all equal".into() } else { bad.join("; ") }),
    )
}

fn degree_two() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let out = dir.path().join("r.json");
    let o = Command::new(env!("CARGO_BIN_EXE_intcheb"))
        .args(["search", "--degree", "2", "--out", out.to_str().unwrap()])
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    if !o.status.success() {
        return (false, format!("exit {:?}", o.status.code()));
    }
    let rec: RunRecord = read_json(&out).unwrap();
    let ok = rec.poly == ["0", "-1", "1"] && rec.t.lo == "1/2" && rec.t.hi == "1/2";
    (ok, format!("p = {:?}, t in [{}, {}]", rec.poly, rec.t.lo, rec.t.hi))
}

fn random_constraints(rng: &mut ChaCha8Rng, g: usize) -> ConstraintSet {
    let mut set = ConstraintSet::new();
    for _ in 0..rng.gen_range(0..3) {
        let v = BigInt::from(rng.gen_range(-2i64..=2));
        let kind = match rng.gen_range(0..3) {
            0 => BoundKind::Fixed(v),
            1 => BoundKind::Lower(v),
            _ => BoundKind::Upper(v),
        };
        if let Some(s) = set.with(&CoefConstraint { index: rng.gen_range(0..=g), kind }) {
            set = s;
        }
    }
    set
}

/// Integer vectors in `[-r, r]^{g+1}` with `a_g ≥ 1` admitted by `cs`.
fn box_points(g: usize, r: i64, cs: &ConstraintSet) -> Vec<Vec<BigInt>> {
    let mut out = vec![Vec::new()];
    for i in 0..=g {
        let lo = if i == g { 1 } else { -r };
        out = out
            .into_iter()
            .flat_map(|v| {
                (lo..=r).map(move |a| {
                    let mut w = v.clone();
                    w.push(BigInt::from(a));
                    w
                })
            })
            .collect();
    }
    out.retain(|a| cs.admits(a));
    out
}

/// On 100 random nodes: `c̄` never decreases between rounds, and a converged
/// `c̄` is at most the norm of every admissible integer candidate.
fn cutting_plane_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let fs: [&[i64]; 5] = [&[1], &[0, 1], &[1, -4], &[1, -5], &[0, 1, -4]];
    let embs = [Embedding::Direct(Interval::unit()), Embedding::EvenSymmetric, Embedding::OddSymmetric];
    let eps = rat(1, 1_000_000_000);
    let tol = rat(1, 1_000_000);
    let (mut solved, mut converged, mut candidates) = (0, 0, 0usize);
    let mut bad = Vec::new();
    for _ in 0..100 {
        let f = IntPoly::from_i64(fs.choose(&mut rng).unwrap());
        let g = rng.gen_range(1..=3);
        let p = SearchProblem::from_poly(f.clone(), g, embs.choose(&mut rng).unwrap().clone()).unwrap();
        let cs = random_constraints(&mut rng, g);
        let Ok(r) = cutting_plane_solve(&p, &cs, &eps, &initial_points(&p)) else { continue };
        solved += 1;
        if r.history.windows(2).any(|w| w[0] > w[1]) {
            bad.push(format!("F={f} g={g}: history decreases"));
        }
        converged += usize::from(r.converged);
        for a in box_points(g, if g == 3 { 2 } else { 3 }, &cs) {
            candidates += 1;
            let n = p.norm(&IntPoly::new(a.clone()), &tol).unwrap();
            if n.hi < r.solution.c_bar {
                bad.push(format!("F={f} g={g}: {a:?} has norm below c = {}", r.solution.c_bar));
            }
        }
    }
    (
        bad.is_empty() && solved > 50 && converged > 0,
        format!(
            "{solved}/100 feasible, {converged} without violations at exit, {candidates} candidates checked against all; {}",
            if bad.is_empty() { "no violations".into() } else { bad.join("; ") }
        ),
    )
}

fn congruence_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let probe = SearchProblem::from_poly(IntPoly::one(), 1, Embedding::Direct(Interval::unit())).unwrap();
    let pool = candidate_pool(&probe, 12, false);
    let mut bad = Vec::new();
    for _ in 0..1000 {
        let g = rng.gen_range(0..=5);
        let pts: Vec<(BigInt, BigInt)> = pool.choose_multiple(&mut rng, g + 1).cloned().collect();
        let points = EvalPoints::new(pts).unwrap();
        let mut c: Vec<i64> = (0..=g).map(|_| rng.gen_range(-60..=60)).collect();
        c[g] = rng.gen_range(1..=60);
        let gp = IntPoly::from_i64(&c);
        let sys = build_system(&points, g, 0).unwrap();
        let r = resultants(&points, &gp, g);
        let (res, tri) = sys.residues(&r);
        if !res.iter().chain(&tri).all(Zero::is_zero) || sys.coefficients(&r) != Some(gp.coeffs().to_vec()) {
            bad.push(format!("{c:?} at {:?}", points.pairs()));
        }
    }
    // Exhaustive: S·r ≡ 0 and S_tri·r ≡ 0 have the same solutions mod M.
    let mut systems = 0;
    let mut vectors = 0u64;
    'outer: for g in 1..=2usize {
        for combo in combinations(pool.len(), g + 1) {
            let points = EvalPoints::new(combo.iter().map(|&i| pool[i].clone()).collect()).unwrap();
            let sys = build_system(&points, g, 0).unwrap();
            let m: u64 = match u64::try_from(&sys.modulus) {
                Ok(m) if m <= 64 && m > 1 => m,
                _ => continue,
            };
            systems += 1;
            let total = m.pow(g as u32 + 1);
            for code in 0..total {
                let r: Vec<BigInt> = (0..=g).map(|i| BigInt::from((code / m.pow(i as u32)) % m)).collect();
                let (res, tri) = sys.residues(&r);
                vectors += 1;
                if res.iter().all(Zero::is_zero) != tri.iter().all(Zero::is_zero) {
                    bad.push(format!("solution sets differ at {:?}, r = {r:?}", points.pairs()));
                    break 'outer;
                }
            }
        }
    }
    (
        bad.is_empty() && systems > 0,
        format!(
            "1000 random trials; {systems} systems with M <= 64, {vectors} residue vectors; {}",
            if bad.is_empty() { "all consistent".into() } else { bad.join("; ") }
        ),
    )
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else { return out };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// For every pair of table rows (a row may pair with itself), the certified
/// norm of the product never exceeds the product of the certified norms.
fn submultiplicativity() -> Outcome {
    let kb = shipped();
    let tol = default_rel_tol();
    let rows: Vec<_> = kb.known_icps().cloned().collect();
    let norms: Vec<NormEnclosure> = rows
        .iter()
        .map(|r| sup_norm_product(&r.poly.to_product(&kb).unwrap(), &Interval::unit(), &tol).unwrap())
        .collect();
    let mut pairs = 0;
    let mut bad = Vec::new();
    let mut worst = f64::MAX;
    for i in 0..rows.len() {
        for j in i..rows.len() {
            let prod: PolyProduct = rows[i].poly.times(&rows[j].poly).to_product(&kb).unwrap();
            let c = sup_norm_product(&prod, &Interval::unit(), &tol).unwrap();
            let rhs = &norms[i].hi * &norms[j].hi;
            if c.lo > rhs {
                bad.push(format!("{}+{}", rows[i].degree, rows[j].degree));
            }
            worst = worst.min(approx_f64(&(&norms[i].lo * &norms[j].lo / &c.hi)));
            pairs += 1;
        }
    }
    (
        pairs == 136 && bad.is_empty(),
        format!("{pairs} pairs, smallest ratio of norm product to product norm {worst:.6}; {}", if bad.is_empty() { "no violations".into() } else { bad.join(", ") }),
    )
}

/// Full degree-120 search from scratch (combined mode).
fn degree_120_smoke() -> Outcome {
    let o = Command::new(env!("CARGO_BIN_EXE_intcheb"))
        .args(["search", "--degree", "120"])
        .env("RUST_LOG", "info")
        .output()
        .unwrap();
    let s = String::from_utf8_lossy(&o.stdout).into_owned();
    (o.status.success(), s.lines().find(|l| l.starts_with("t = ")).unwrap_or("no result").to_owned())
}
