use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use intcheb_core::bnb::{BnbEvent, BnbSnapshot};
use intcheb_core::kb::{default_candidates, deduce_forced_factors, upper_bound_cn, verify_table};
use intcheb_core::norm::nth_root_enclosure;
use intcheb_core::rational::{approx_f64, to_decimal, Rounding};
use intcheb_core::search::{initial_bound, search, SearchConfig, SearchMode, SearchObserver, DEFAULT_HANDOFF};
use intcheb_core::{FactorKB, FactorState, Interval, IntPoly, PolyProduct};
use log::{debug, info, warn};

use crate::format::{
    kb_from_paths, parse_rat, rat_str, read_json, write_json, FactorStateFile, FactorTerm, SnapshotFile,
};
use crate::record::{Checkpoint, RunConfig, RunRecord};

#[derive(Debug, Parser)]
#[command(name = "intcheb", version, about = "Find and verify integer Chebyshev polynomials on [0,1]")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct DbArgs {
    /// Factor DB (JSON); defaults to the shipped h_1..h_23.
    #[arg(long, global = true)]
    pub factors: Option<PathBuf>,
    /// Known-polynomial DB (JSON); defaults to the shipped table.
    #[arg(long, global = true)]
    pub icps: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expand and certify every known polynomial against its printed value.
    Verify {
        #[command(flatten)]
        db: DbArgs,
        /// Re-verify a run record instead of the DB.
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Search for an optimal polynomial of the given degree.
    Search(SearchArgs),
    /// Best upper bound on the degree-n norm from products of known polynomials.
    Bound {
        #[arg(long)]
        degree: usize,
        /// Print the bound as an exact rational.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        db: DbArgs,
    },
    /// Run the forced-factor deduction only.
    Factors {
        #[arg(long)]
        degree: usize,
        /// Use this bound instead of the one from the DB.
        #[arg(long)]
        c0: Option<String>,
        /// Largest denominator of the candidate roots.
        #[arg(long, default_value_t = 8)]
        max_a: i64,
        /// Write the resulting factor state here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        db: DbArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Combined,
    Bnb,
    Resultant,
}

#[derive(Debug, Args, Clone)]
pub struct SearchArgs {
    #[arg(long)]
    pub degree: usize,
    /// Known factors, unknown degree and bound, as written by `factors`.
    #[arg(long)]
    pub factors_state: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Combined)]
    pub mode: ModeArg,
    /// Unknown coefficients left when branching hands off to enumeration.
    #[arg(long, default_value_t = DEFAULT_HANDOFF)]
    pub handoff: usize,
    /// Initial upper bound on the sup norm, `num/den` or decimal.
    #[arg(long)]
    pub c0: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Write the run record here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the queue here every `--checkpoint-every` nodes.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub checkpoint_every: u64,
    /// Continue from a checkpoint.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[command(flatten)]
    pub db: DbArgs,
}

/// Runs one command; the return value is the process exit code.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Verify { db, record } => match record {
            Some(path) => cmd_verify_record(&db, &path, out),
            None => cmd_verify(&db, out),
        },
        Command::Search(args) => {
            let (rec, _) = cmd_search(&args)?;
            writeln!(out, "n = {}", rec.config.degree)?;
            writeln!(out, "t = {} .. {}", rec.t.decimal.0, rec.t.decimal.1)?;
            writeln!(out, "norm ~= {:.12e}", approx_f64(&parse_rat(&rec.norm.hi)?))?;
            writeln!(out, "p = {}", IntPoly::new(coeffs(&rec.poly)?))?;
            writeln!(out, "factors = {}", factored_text(&rec))?;
            if let Some(path) = &args.out {
                write_json(path, &rec)?;
            }
            Ok(0)
        }
        Command::Bound { degree, exact, db } => cmd_bound(degree, exact, &db, out),
        Command::Factors { degree, c0, max_a, out: path, db } => {
            let kb = kb_from_paths(db.factors.as_deref(), db.icps.as_deref())?;
            let st = cmd_factors(degree, c0.as_deref(), max_a, &kb)?;
            writeln!(out, "c_n = {}", st.c_n)?;
            for (a, b) in &st.forced {
                writeln!(out, "forced {}", IntPoly::linear(parse_rat(a)?.to_integer(), parse_rat(b)?.to_integer()))?;
            }
            writeln!(out, "g = {}", st.g)?;
            if let Some(path) = path {
                write_json(&path, &st)?;
            }
            Ok(0)
        }
    }
}

fn coeffs(c: &[String]) -> Result<Vec<intcheb_core::BigInt>> {
    c.iter().map(|s| crate::format::parse_int(s)).collect()
}

fn factored_text(rec: &RunRecord) -> String {
    let mut parts: Vec<String> = rec.factored.iter().map(|(id, e)| if *e == 1 { id.clone() } else { format!("{id}^{e}") }).collect();
    if rec.cofactor != ["1"] {
        parts.push(format!("({})", IntPoly::new(coeffs(&rec.cofactor).unwrap_or_default())));
    }
    parts.join(" ")
}

pub fn cmd_verify(db: &DbArgs, out: &mut dyn Write) -> Result<i32> {
    let kb = kb_from_paths(db.factors.as_deref(), db.icps.as_deref())?;
    let tol = intcheb_core::norm::default_rel_tol();
    let reports = verify_table(&kb, &tol);
    writeln!(out, "{:>5}  {:>10}  {:>10}  {:>10}  {:>8}  status", "n", "printed", "nearest", "upward", "±5e-9")?;
    let mut ok = 0;
    for r in &reports {
        let status = match &r.error {
            Some(e) => format!("ERROR {e}"),
            None if r.matches => "ok".into(),
            None => "MISMATCH".into(),
        };
        if r.error.is_none() && r.matches {
            ok += 1;
        }
        writeln!(
            out,
            "{:>5}  {:>10}  {:>10}  {:>10}  {:>8}  {status}",
            r.degree,
            r.printed_t,
            r.rounded_nearest.as_deref().unwrap_or("-"),
            r.rounded_up.as_deref().unwrap_or("-"),
            if r.within_half_ulp { "yes" } else { "no" },
        )?;
    }
    writeln!(out, "{ok}/{} rows match", reports.len())?;
    Ok(if ok == reports.len() { 0 } else { 1 })
}

fn cmd_verify_record(db: &DbArgs, path: &Path, out: &mut dyn Write) -> Result<i32> {
    let kb = kb_from_paths(db.factors.as_deref(), db.icps.as_deref())?;
    let rec: RunRecord = read_json(path)?;
    let ok = rec.reverify(&kb)?;
    writeln!(out, "{}: {}", path.display(), if ok { "ok" } else { "MISMATCH" })?;
    Ok(if ok { 0 } else { 1 })
}

pub fn cmd_bound(n: usize, exact: bool, db: &DbArgs, out: &mut dyn Write) -> Result<i32> {
    let kb = kb_from_paths(db.factors.as_deref(), db.icps.as_deref())?;
    let tol = intcheb_core::norm::default_rel_tol();
    let b = upper_bound_cn(n, &kb, &tol).map_err(|e| anyhow!("{e}"))?;
    let (_, t) = nth_root_enclosure(&b.norm, n as u32, &tol);
    if exact {
        writeln!(out, "c_{n} <= {}", rat_str(&b.norm.hi))?;
    } else {
        writeln!(out, "c_{n} ~= {:.12e}", approx_f64(&b.norm.hi))?;
    }
    writeln!(out, "split = {} + {}", b.split.0, b.split.1)?;
    writeln!(out, "p = {}", b.poly)?;
    writeln!(out, "t <= {}", to_decimal(&t, 8, Rounding::Up))?;
    Ok(0)
}

pub fn cmd_factors(n: usize, c0: Option<&str>, max_a: i64, kb: &FactorKB) -> Result<FactorStateFile> {
    if n == 0 {
        bail!("degree must be at least 1");
    }
    let tol = intcheb_core::norm::default_rel_tol();
    let c = match c0 {
        Some(s) => parse_rat(s)?,
        None => initial_bound(n, kb, &tol).map_err(|e| anyhow!("{e}"))?.0,
    };
    let st = FactorState::new(IntPoly::one(), n, c, Interval::unit()).map_err(|e| anyhow!("{e}"))?;
    let st = deduce_forced_factors(&st, &default_candidates(&Interval::unit(), max_a)).map_err(|e| anyhow!("{e}"))?;
    Ok(FactorStateFile::from_state(&PolyProduct::default(), &st))
}

struct Observer<'a> {
    checkpoint: Option<(&'a Path, &'a RunConfig)>,
    error: Option<anyhow::Error>,
}

impl SearchObserver for Observer<'_> {
    fn bnb_event(&mut self, e: &BnbEvent<'_>) {
        match e {
            BnbEvent::Incumbent(i) => info!("incumbent {} with norm <= {:.12e}", i.g_star, approx_f64(&i.norm.hi)),
            BnbEvent::Dequeued { bound, depth } => log::trace!("node depth {depth} bound {:.12e}", approx_f64(bound)),
            BnbEvent::Pruned { bound, depth } => debug!("pruned depth {depth} bound {:.12e}", approx_f64(bound)),
            BnbEvent::Handoff { bound, depth } => debug!("handoff depth {depth} bound {:.12e}", approx_f64(bound)),
        }
    }

    fn checkpoint(&mut self, snap: &BnbSnapshot) {
        let Some((path, config)) = self.checkpoint else { return };
        let cp = Checkpoint { config: config.clone(), snapshot: SnapshotFile::from_snapshot(snap) };
        match write_json(path, &cp) {
            Ok(()) => info!("checkpoint: {} queued nodes written to {}", snap.nodes.len(), path.display()),
            Err(e) => self.error = Some(e),
        }
    }

    fn note(&mut self, msg: &str) {
        info!("{msg}");
    }
}

/// Runs a search and builds its record. Also returns the factors `F` used.
pub fn cmd_search(args: &SearchArgs) -> Result<(RunRecord, PolyProduct)> {
    let kb = kb_from_paths(args.db.factors.as_deref(), args.db.icps.as_deref())?;
    if args.workers != 1 {
        warn!("only single-worker execution is implemented; running with 1 worker");
    }
    let mut cfg = SearchConfig::new(args.degree);
    cfg.mode = match args.mode {
        ModeArg::Combined => SearchMode::Combined { handoff_remaining: args.handoff },
        ModeArg::Bnb => SearchMode::BranchAndBound,
        ModeArg::Resultant => SearchMode::Resultant,
    };
    let (f01, terms) = match &args.factors_state {
        Some(path) => {
            let st: FactorStateFile = read_json(path)?;
            if st.interval()? != Interval::unit() {
                bail!("factor state must be on [0,1]");
            }
            let f = st.product(&kb)?;
            let deg = f.degree().unwrap_or(0);
            if deg + st.g != args.degree {
                bail!("deg F + g = {} + {} does not equal the degree {}", deg, st.g, args.degree);
            }
            cfg.c0 = Some(st.c_n()?);
            (f, st.f)
        }
        None => (PolyProduct::default(), Vec::<FactorTerm>::new()),
    };
    if let Some(c) = &args.c0 {
        cfg.c0 = Some(parse_rat(c)?);
    }
    cfg.checkpoint_every = args.checkpoint.as_ref().map(|_| args.checkpoint_every.max(1));
    let run_config = RunConfig {
        degree: args.degree,
        mode: match args.mode {
            ModeArg::Combined => "combined",
            ModeArg::Bnb => "bnb",
            ModeArg::Resultant => "resultant",
        }
        .into(),
        handoff: args.handoff,
        c0: cfg.c0.as_ref().map(rat_str),
        rel_tol: rat_str(&cfg.rel_tol),
        eps_factor: rat_str(&cfg.eps_factor),
        deduction_max_a: cfg.deduction_max_a,
        workers: 1,
        f: terms,
    };
    let resume = match &args.resume {
        Some(path) => {
            let cp: Checkpoint = read_json(path)?;
            if cp.config != run_config {
                bail!("checkpoint {} was written for a different configuration", path.display());
            }
            if args.mode == ModeArg::Resultant {
                bail!("resultant mode has no checkpoints");
            }
            Some(cp.snapshot.to_snapshot().with_context(|| format!("reading {}", path.display()))?)
        }
        None => None,
    };
    let mut obs = Observer { checkpoint: args.checkpoint.as_deref().map(|p| (p, &run_config)), error: None };
    let start = Instant::now();
    let outcome = search(&cfg, &kb, &f01, resume, &mut obs).map_err(|e| anyhow!("search failed: {e}"))?;
    if let Some(e) = obs.error {
        return Err(e);
    }
    let mut rec = RunRecord::new(run_config.clone(), &kb, &outcome, &cfg.rel_tol)?;
    rec.wall_seconds = start.elapsed().as_secs_f64();
    Ok((rec, f01))
}
