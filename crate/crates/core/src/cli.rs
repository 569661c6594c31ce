//! Command-line front end.
//!
//! Exit codes: 0 on success (including diagnostics whose hypotheses fail),
//! 1 on runtime failure, 2 on usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::automata::{
    build_trie, exact_minimal_size, size_sandwich, verify, DfaJson, ExactGuard, ExactOutcome, LayeredDfa,
};
use crate::bounds::{self, BoundsConfig, Evaluated};
use crate::constructions::{build_primes_automaton_with, build_squares_automaton, subset_count_bound};
use crate::membership::{build_prime_oracle, is_prime_u64, MembershipOracle, OracleBudget, SetKind};
use crate::numeral::checked_pow;
use crate::residuals::{census, CensusParams, ResidualMode, WordFilter};
use crate::{Error, Rational, Result};

/// Version of the CSV and JSON layouts written by this tool.
pub const SCHEMA_VERSION: u32 = 1;

/// Columns of the sweep CSV.
pub const SWEEP_HEADER: &str = "q,n,m,N,sum_sizes,max_size,construction_size,lower,upper,error";

#[derive(Debug, Parser)]
#[command(name = "automaticity", version, about = "Residual censuses, automata and bounds for integer sets")]
pub struct Cli {
    /// Worker threads for parallel stages; results do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub jobs: Option<u32>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Residual-set census: per-word CSV and summary JSON.
    Census(CensusArgs),
    /// Build, bound, construct or verify automata.
    #[command(subcommand)]
    Automaton(AutomatonCommand),
    /// Evaluate the analytic bounds.
    #[command(subcommand)]
    Bounds(BoundsCommand),
    /// Census and automaton sizes over a range of lengths.
    Sweep(SweepArgs),
    /// Re-run a manifest and compare its outputs byte for byte.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    #[default]
    Paper,
    Full,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterArg {
    #[default]
    All,
    Coprime,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    Csv,
    #[default]
    Json,
}

impl From<ModeArg> for ResidualMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Paper => ResidualMode::Paper,
            ModeArg::Full => ResidualMode::Full,
        }
    }
}

impl From<FilterArg> for WordFilter {
    fn from(f: FilterArg) -> Self {
        match f {
            FilterArg::All => WordFilter::All,
            FilterArg::Coprime => WordFilter::Coprime,
        }
    }
}

fn parse_set(s: &str) -> std::result::Result<SetKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Accepts plain numbers, scientific notation and `a^b`.
fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let bad = || format!("{s:?} is not a number (use 1e6, 65536 or 2^64)");
    let v = match s.split_once('^') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            a.powf(b)
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct CensusArgs {
    #[arg(long = "base")]
    pub base: u64,
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub m: u32,
    /// primes, squares, class:r,mod or file:PATH
    #[arg(long, value_parser = parse_set)]
    pub set: SetKind,
    #[arg(long, value_enum, default_value_t)]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value_t)]
    pub filter: FilterArg,
    /// Multiplicity threshold; defaults to ceil(ln ln q^n), at least 2.
    #[arg(long = "K")]
    pub k: Option<u32>,
    /// What to print on stdout.
    #[arg(long, value_enum, default_value_t)]
    pub out: OutFormat,
    /// Writes census.csv, summary.json and manifest.json here.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct AutomatonArgs {
    #[arg(long = "base")]
    pub base: u64,
    /// Word-length budget.
    #[arg(long)]
    pub n: u32,
    #[arg(long, value_parser = parse_set, default_value = "primes")]
    pub set: SetKind,
    /// Writes automaton.json, report.json and manifest.json here.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct GuardArgs {
    #[arg(long, default_value_t = crate::automata::EXACT_MAX_STATES)]
    pub guard_max_states: u32,
    #[arg(long, default_value_t = ExactGuard::default().max_nodes)]
    pub guard_max_nodes: u64,
}

impl GuardArgs {
    fn guard(&self) -> ExactGuard {
        ExactGuard {
            max_states: self.guard_max_states,
            max_nodes: self.guard_max_nodes,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum AutomatonCommand {
    /// Prefix trie of all words up to the budget.
    Trie(AutomatonArgs),
    /// Lower bound, exact size when small enough, and greedy upper bound.
    Sandwich {
        #[command(flatten)]
        common: AutomatonArgs,
        #[command(flatten)]
        guard: GuardArgs,
    },
    /// Exact minimal size by search; refuses instances beyond the guard.
    Exact {
        #[command(flatten)]
        common: AutomatonArgs,
        #[command(flatten)]
        guard: GuardArgs,
    },
    /// Square automaton for an odd prime base and even length.
    ConstructSquares {
        #[arg(long = "base")]
        base: u64,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Prime automaton with shared residual acceptors.
    ConstructPrimes {
        #[arg(long = "base")]
        base: u64,
        #[arg(long)]
        n: u32,
        /// Split; defaults to n/2.
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Checks an automaton JSON file against a set.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_set, default_value = "primes")]
        set: SetKind,
        /// Budget; defaults to the file's N.
        #[arg(long)]
        n: Option<u32>,
    },
}

#[derive(Clone, Debug, Default, Args, Serialize)]
pub struct ConfigArgs {
    /// Flat key = value file; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long = "D1")]
    pub d1: Option<f64>,
    #[arg(long = "D2")]
    pub d2: Option<f64>,
    #[arg(long = "C0")]
    pub c0: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub product_tolerance: Option<f64>,
    #[arg(long)]
    pub prime_cutoff_cap: Option<u64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<BoundsConfig<f64>> {
        let mut cfg = match &self.config {
            Some(path) => BoundsConfig::load(path)?,
            None => BoundsConfig::default(),
        };
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut cfg.c, self.c);
        set(&mut cfg.d1, self.d1);
        set(&mut cfg.d2, self.d2);
        set(&mut cfg.c0, self.c0);
        set(&mut cfg.rho, self.rho);
        set(&mut cfg.product_tolerance, self.product_tolerance);
        if let Some(cap) = self.prime_cutoff_cap {
            cfg.prime_cutoff_cap = cap;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum BoundsCommand {
    /// Upper estimate for C_k.
    Ck {
        #[arg(long)]
        k: u32,
        #[arg(long = "base")]
        base: u64,
        #[arg(long, value_parser = parse_real)]
        x: f64,
        #[arg(long, value_parser = parse_real)]
        y: f64,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// K, y0, m and the side conditions for x.
    Select {
        #[arg(long, value_parser = parse_real)]
        x: f64,
        #[arg(long = "base")]
        base: u64,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// x exp(-c (ln ln x)^2 ln ln ln x).
    Theorem1 {
        #[arg(long, value_parser = parse_real)]
        x: f64,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Final explicit lower bound for N at x.
    Lasteq {
        #[arg(long, value_parser = parse_real)]
        x: f64,
        #[arg(long = "base")]
        base: u64,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Both sides of the census inequality for the primes.
    Eq1 {
        #[arg(long = "base")]
        base: u64,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u32,
        #[arg(long = "K")]
        k: Option<u32>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// prod_{p <= z} (1 - 1/p)^(-1).
    Mertens {
        #[arg(long)]
        z: u64,
    },
    /// Product Q of small primes and the count of candidate residual sets.
    Subsetbound {
        #[arg(long = "base")]
        base: u64,
        #[arg(long)]
        m: u32,
    },
    /// Upper bound for a residual shared by the given words.
    Lemma2 {
        /// Comma-separated word values.
        #[arg(long, value_delimiter = ',', required = true)]
        words: Vec<u64>,
        #[arg(long = "base")]
        base: u64,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u32,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long = "base")]
    pub base: u64,
    #[arg(long)]
    pub n_from: u32,
    #[arg(long)]
    pub n_to: u32,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub n_step: u32,
    /// Fixed split; defaults to m = floor(n/2).
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long, value_parser = parse_set, default_value = "primes")]
    pub set: SetKind,
    /// Writes sweep.csv and manifest.json here; otherwise CSV goes to stdout.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Args, Serialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Fresh directory for the re-run outputs.
    #[arg(long)]
    pub output_dir: PathBuf,
}

/// Record of one run; the only file that carries a timestamp.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub software_version: String,
    pub subcommand: String,
    /// Command line after the program name, as given.
    pub arguments: Vec<String>,
    pub parameters: Value,
    pub config: Option<Value>,
    pub timestamp: String,
    /// Files written, relative to the manifest's directory.
    pub outputs: Vec<String>,
}

const MANIFEST: &str = "manifest.json";

struct Outputs {
    dir: Option<PathBuf>,
    written: Vec<String>,
}

impl Outputs {
    fn new(dir: Option<&Path>) -> Result<Self> {
        if let Some(d) = dir {
            fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
        }
        Ok(Outputs {
            dir: dir.map(Path::to_path_buf),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        if let Some(dir) = &self.dir {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            self.written.push(name.to_string());
        }
        Ok(())
    }

    fn finish(self, subcommand: &str, args: &[String], parameters: Value, config: Option<Value>) -> Result<()> {
        let Some(dir) = self.dir else {
            return Ok(());
        };
        let manifest = RunManifest {
            schema_version: SCHEMA_VERSION,
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            arguments: args.to_vec(),
            parameters,
            config,
            timestamp: chrono::Utc::now().to_rfc3339(),
            outputs: self.written,
        };
        let path = dir.join(MANIFEST);
        fs::write(&path, pretty(&manifest)).map_err(|e| Error::io(&path, e))
    }
}

fn pretty<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s.into_bytes()
}

fn print(bytes: &[u8]) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(bytes)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(Path::new("<stdout>"), e))
}

fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report types serialize")
}

fn oracle_for(set: &SetKind, q: u64, n: u32) -> Result<MembershipOracle> {
    set.build(checked_pow(q, n)?, OracleBudget::default())
}

fn evaluated(e: Evaluated<f64>) -> Value {
    match e {
        Evaluated::Value(v) => json!({ "value": v }),
        Evaluated::OutOfDomain { domain } => json!({ "value": null, "domain": domain }),
    }
}

fn run_census(a: &CensusArgs, argv: &[String]) -> Result<i32> {
    let oracle = oracle_for(&a.set, a.base, a.n)?;
    let mut params = CensusParams::new(a.base, a.n, a.m).mode(a.mode.into()).filter(a.filter.into());
    if let Some(k) = a.k {
        params = params.threshold(k);
    }
    let c = census(params, &oracle)?;
    let mut csv = Vec::new();
    c.write_csv(&mut csv).map_err(|e| Error::io(Path::new("<csv>"), e))?;
    let summary = pretty(&c.summary());
    let mut out = Outputs::new(a.output_dir.as_deref())?;
    out.write("census.csv", &csv)?;
    out.write("summary.json", &summary)?;
    out.finish("census", argv, to_value(a), None)?;
    print(match a.out {
        OutFormat::Csv => &csv,
        OutFormat::Json => &summary,
    })?;
    Ok(0)
}

fn checked(dfa: &LayeredDfa, oracle: &MembershipOracle, n: u32, what: &str) -> Result<u64> {
    let report = verify(dfa, oracle, n)?;
    match report.mismatch {
        None => Ok(report.words_checked),
        Some(m) => Err(Error::ContractViolation(format!(
            "{what} misclassifies word {} (value {})",
            m.word, m.value
        ))),
    }
}

fn emit_automaton(
    dir: Option<&Path>,
    dfa: Option<&LayeredDfa>,
    report: Value,
    subcommand: &str,
    argv: &[String],
    parameters: Value,
) -> Result<()> {
    let report_bytes = pretty(&report);
    let mut out = Outputs::new(dir)?;
    if let Some(dfa) = dfa {
        out.write("automaton.json", &pretty(&dfa.to_json()))?;
    }
    out.write("report.json", &report_bytes)?;
    out.finish(subcommand, argv, parameters, None)?;
    print(&report_bytes)
}

fn run_automaton(cmd: &AutomatonCommand, argv: &[String]) -> Result<i32> {
    match cmd {
        AutomatonCommand::Trie(a) => {
            let oracle = oracle_for(&a.set, a.base, a.n)?;
            let dfa = build_trie(&oracle, a.base, a.n)?;
            let words = checked(&dfa, &oracle, a.n, "trie")?;
            let report = json!({
                "action": "trie", "q": a.base, "N": a.n, "set": a.set.to_string(),
                "state_count": dfa.state_count(), "verified": true, "words_checked": words,
            });
            emit_automaton(a.output_dir.as_deref(), Some(&dfa), report, "automaton trie", argv, to_value(a))?;
        }
        AutomatonCommand::Sandwich { common: a, guard } => {
            let oracle = oracle_for(&a.set, a.base, a.n)?;
            let (sandwich, greedy) = size_sandwich(&oracle, a.base, a.n, Some(guard.guard()))?;
            let words = checked(&greedy, &oracle, a.n, "greedy automaton")?;
            let mut report = to_value(&sandwich);
            report["action"] = json!("sandwich");
            report["set"] = json!(a.set.to_string());
            report["consistent"] = json!(sandwich.is_consistent());
            report["verified"] = json!(true);
            report["words_checked"] = json!(words);
            let params = json!({ "common": a, "guard": guard });
            emit_automaton(a.output_dir.as_deref(), Some(&greedy), report, "automaton sandwich", argv, params)?;
        }
        AutomatonCommand::Exact { common: a, guard } => {
            let oracle = oracle_for(&a.set, a.base, a.n)?;
            let outcome = exact_minimal_size(&oracle, a.base, a.n, guard.guard())?;
            let dfa = match &outcome {
                ExactOutcome::Solved { automaton, .. } => {
                    checked(automaton, &oracle, a.n, "exact automaton")?;
                    Some(automaton)
                }
                _ => None,
            };
            let report = json!({
                "action": "exact", "q": a.base, "N": a.n, "set": a.set.to_string(),
                "exact": outcome.size(), "status": outcome.status(), "verified": dfa.is_some(),
            });
            let params = json!({ "common": a, "guard": guard });
            emit_automaton(a.output_dir.as_deref(), dfa, report, "automaton exact", argv, params)?;
        }
        AutomatonCommand::ConstructSquares { base, n, output_dir } => {
            let (dfa, report) = build_squares_automaton(*base, *n)?;
            let params = json!({ "base": base, "n": n });
            emit_automaton(output_dir.as_deref(), Some(&dfa), to_value(&report), "automaton construct-squares", argv, params)?;
        }
        AutomatonCommand::ConstructPrimes { base, n, m, output_dir } => {
            let m = m.unwrap_or(n / 2);
            let oracle = build_prime_oracle(checked_pow(*base, *n)?)?;
            let (dfa, report) = build_primes_automaton_with(&oracle, *base, *n, m)?;
            let params = json!({ "base": base, "n": n, "m": m });
            emit_automaton(output_dir.as_deref(), Some(&dfa), to_value(&report), "automaton construct-primes", argv, params)?;
        }
        AutomatonCommand::Verify { input, set, n } => {
            let text = fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
            let json: DfaJson = serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: input.clone(),
                line: e.line(),
                message: e.to_string(),
            })?;
            let dfa = LayeredDfa::from_json(&json)?;
            let budget = n.unwrap_or(dfa.budget());
            let oracle = oracle_for(set, dfa.q() as u64, budget)?;
            let report = verify(&dfa, &oracle, budget)?;
            print(&pretty(&report))?;
            return Ok(if report.pass { 0 } else { 1 });
        }
    }
    Ok(0)
}

fn run_bounds(cmd: &BoundsCommand) -> Result<i32> {
    let value = match cmd {
        BoundsCommand::Ck { k, base, x, y, config } => {
            let cfg = config.resolve()?;
            let mut v = evaluated(bounds::ck_bound(*k, *base, *x, *y, &cfg));
            v["inputs"] = json!({ "k": k, "q": base, "x": x, "y": y });
            v["config"] = to_value(&cfg);
            v
        }
        BoundsCommand::Select { x, base, config } => {
            let cfg = config.resolve()?;
            json!({ "inputs": { "x": x, "q": base }, "config": cfg, "result": bounds::select_parameters(*x, *base, &cfg)? })
        }
        BoundsCommand::Theorem1 { x, config } => {
            let cfg = config.resolve()?;
            let mut v = evaluated(bounds::theorem1_lower(*x, &cfg));
            v["ln_value"] = evaluated(bounds::ln_theorem1_lower(x.ln(), &cfg))["value"].clone();
            v["inputs"] = json!({ "x": x, "c": cfg.c });
            v["log_base"] = json!(bounds::LOG_BASE);
            v
        }
        BoundsCommand::Lasteq { x, base, config } => {
            let cfg = config.resolve()?;
            json!({ "inputs": { "x": x, "q": base }, "config": cfg, "result": bounds::lasteq_lower(*x, *base, &cfg)? })
        }
        BoundsCommand::Eq1 { base, n, m, k, config } => {
            let cfg = config.resolve()?;
            let oracle = build_prime_oracle(checked_pow(*base, *n)?)?;
            let mut params = CensusParams::new(*base, *n, *m).filter(WordFilter::Coprime);
            if let Some(k) = k {
                params = params.threshold(*k);
            }
            let c = census(params, &oracle)?;
            json!({ "census": c.summary(), "config": cfg, "result": bounds::eq1_check(&c, &cfg)? })
        }
        BoundsCommand::Mertens { z } => {
            let value: f64 = bounds::mertens_product(*z)?;
            let mut v = json!({ "inputs": { "z": z }, "value": value, "ratio_to_ln_z": value / (*z as f64).ln() });
            if *z <= 1000 {
                v["rational"] = json!(bounds::mertens_product::<Rational>(*z)?.to_string());
            }
            v
        }
        BoundsCommand::Subsetbound { base, m } => {
            let r = subset_count_bound(*base, *m)?;
            json!({ "inputs": { "q": base, "m": m }, "result": r })
        }
        BoundsCommand::Lemma2 { words, base, n, m, config } => {
            let cfg = config.resolve()?;
            json!({ "inputs": { "words": words, "q": base, "n": n, "m": m }, "config": cfg,
                    "result": bounds::lemma2_rhs(words, *base, *n, *m, &cfg)? })
        }
    };
    print(&pretty(&value))?;
    Ok(0)
}

/// One sweep row; `Err` holds the message for the error column.
fn sweep_row(a: &SweepArgs, n: u32) -> (u32, std::result::Result<[String; 6], String>) {
    let m = a.m.unwrap_or(n / 2);
    let row = (|| -> Result<[String; 6]> {
        let oracle = oracle_for(&a.set, a.base, n)?;
        let c = census(CensusParams::new(a.base, n, m), &oracle)?;
        let construction = match a.set {
            SetKind::Primes => Some(build_primes_automaton_with(&oracle, a.base, n, m)?.1.state_count),
            SetKind::Squares if a.base != 2 && is_prime_u64(a.base) && n.is_multiple_of(2) => {
                Some(build_squares_automaton(a.base, n)?.1.state_count)
            }
            _ => None,
        };
        let (sandwich, _) = size_sandwich(&oracle, a.base, n, None)?;
        Ok([
            c.distinct().to_string(),
            c.sum_sizes.to_string(),
            c.max_size.to_string(),
            construction.map(|s| s.to_string()).unwrap_or_default(),
            sandwich.lower.to_string(),
            sandwich.upper.to_string(),
        ])
    })();
    (m, row.map_err(|e| e.to_string()))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn run_sweep(a: &SweepArgs, argv: &[String]) -> Result<i32> {
    let mut csv = format!("{SWEEP_HEADER}\n");
    let mut failed = false;
    let mut n = a.n_from;
    while n <= a.n_to {
        let (m, row) = sweep_row(a, n);
        match row {
            Ok(cols) => csv.push_str(&format!("{},{n},{m},{},\n", a.base, cols.join(","))),
            Err(e) => {
                failed = true;
                csv.push_str(&format!("{},{n},{m},,,,,,,{}\n", a.base, csv_field(&e)));
            }
        }
        n = match n.checked_add(a.n_step) {
            Some(next) => next,
            None => break,
        };
    }
    let mut out = Outputs::new(a.output_dir.as_deref())?;
    out.write("sweep.csv", csv.as_bytes())?;
    out.finish("sweep", argv, to_value(a), None)?;
    if a.output_dir.is_none() {
        print(csv.as_bytes())?;
    }
    Ok(if failed { 1 } else { 0 })
}

fn run_replay(a: &ReplayArgs) -> Result<i32> {
    let text = fs::read_to_string(&a.manifest).map_err(|e| Error::io(&a.manifest, e))?;
    let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: a.manifest.clone(),
        line: e.line(),
        message: e.to_string(),
    })?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::Argument(format!(
            "manifest schema version {} differs from {SCHEMA_VERSION}",
            manifest.schema_version
        )));
    }
    let mut args = manifest.arguments.clone();
    if let Some(i) = args.iter().position(|s| s == "--output-dir") {
        args.drain(i..(i + 2).min(args.len()));
    }
    args.retain(|s| !s.starts_with("--output-dir="));
    args.push("--output-dir".into());
    args.push(a.output_dir.display().to_string());
    let cli = Cli::try_parse_from(std::iter::once("automaticity".to_string()).chain(args.iter().cloned()))
        .map_err(|e| Error::Argument(format!("manifest arguments do not parse: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(Error::Argument("a manifest cannot replay a replay".into()));
    }
    let status = dispatch(&cli, &args)?;
    let original_dir = a.manifest.parent().unwrap_or(Path::new("."));
    let mut identical = true;
    let mut files = Vec::new();
    for name in &manifest.outputs {
        let old = fs::read(original_dir.join(name)).map_err(|e| Error::io(original_dir.join(name), e))?;
        let new_path = a.output_dir.join(name);
        let new = fs::read(&new_path).map_err(|e| Error::io(&new_path, e))?;
        identical &= old == new;
        files.push(json!({ "name": name, "identical": old == new }));
    }
    eprintln!("{}", serde_json::to_string(&json!({ "replay": files, "identical": identical })).unwrap());
    Ok(if identical { status } else { 1 })
}

fn dispatch(cli: &Cli, argv: &[String]) -> Result<i32> {
    match &cli.command {
        Command::Census(a) => run_census(a, argv),
        Command::Automaton(cmd) => run_automaton(cmd, argv),
        Command::Bounds(cmd) => run_bounds(cmd),
        Command::Sweep(a) => run_sweep(a, argv),
        Command::Replay(a) => run_replay(a),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Argument(_) => 2,
        _ => 1,
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let argv: Vec<String> = args
        .iter()
        .skip(1)
        .map(|s| s.to_string_lossy().into_owned())
        .collect();
    let run = || match dispatch(&cli, &argv) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    match cli.jobs {
        None => run(),
        Some(jobs) => match rayon::ThreadPoolBuilder::new().num_threads(jobs as usize).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                eprintln!("error: cannot start {jobs} worker threads: {e}");
                1
            }
        },
    }
}

pub fn main() -> i32 {
    run_from(std::env::args_os())
}
