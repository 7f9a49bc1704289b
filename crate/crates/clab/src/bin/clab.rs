//! Command-line front end: configuration, the prime-table cache, and JSON/CSV
//! emission for every library operation.
//!
//! Config precedence is flags > environment (CLAB_*) > config file
//! (key=value lines) > defaults. All computations live in the library; this
//! binary owns every file read/write and the worker-pool sizing, so outputs
//! are byte-identical across thread counts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use clab::bridges;
use clab::dynamics::{trajectory_segment, StepRule, DEFAULT_STEP_LIMIT};
use clab::explicit_formula::{
    budget_eval, divergence_ratio, inject_zero, injected_term_magnitude, ledger_report,
    load_zeros, zero_sum, FrozenParams, ZeroTable,
};
use clab::functionals::{
    alpha_eff, composite_select, contraction_scan, make_window, Metric, WindowKind, WindowScan,
};
use clab::netting::{
    audit_wmax, grid_quadform_fast, ls_budget, weighted_l1, zeros_quadsum, ExpSumInstance,
    GridSpec,
};
use clab::prime_engine::{build_checkpoints, ChebyshevValues, PrimeCheckpointTable, DEFAULT_STRIDE};
use clab::{Error, Result};

const USAGE_EXIT: i32 = 64;

fn main() {
    // --schema must not require the subcommand's other arguments, so it is
    // resolved from the raw argv before clap validation runs.
    let argv: Vec<String> = std::env::args().collect();
    if argv.iter().any(|a| a == "--schema") {
        match argv.iter().skip(1).find(|a| !a.starts_with('-')) {
            Some(name) => match schema_by_name(name) {
                Some(s) => {
                    println!("{s}");
                    std::process::exit(0);
                }
                None => {
                    eprintln!("clab: unknown subcommand '{name}'");
                    std::process::exit(USAGE_EXIT);
                }
            },
            None => {
                eprintln!("clab: --schema requires a subcommand");
                std::process::exit(USAGE_EXIT);
            }
        }
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => USAGE_EXIT,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    let cfg = match RunConfig::resolve(&cli.common) {
        Ok(cfg) => cfg,
        Err(e) => return fail(e),
    };
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build_global();
    match dispatch(&cli.cmd, &cfg) {
        Ok(()) => 0,
        Err(e) => fail(e),
    }
}

fn fail(e: Error) -> i32 {
    eprintln!("clab: {e}");
    e.exit_code()
}

#[derive(Parser)]
#[command(
    name = "clab",
    version,
    about = "Verification laboratory for prime-dynamics windows, functionals, \
             and explicit-formula ledgers"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CommonArgs {
    /// Config file with key=value lines (default ./clab.conf when present)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Minimum sieve capacity; commands grow it automatically when needed
    #[arg(long, global = true)]
    max_n: Option<u64>,
    /// Zero-table file (one gamma per line, ascending)
    #[arg(long, global = true)]
    zeros: Option<PathBuf>,
    /// Directory for prime-table caches
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Worker threads (>= 1)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for every randomized driver
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output format; table-style commands print aligned text by default
    #[arg(long, global = true, value_enum)]
    out: Option<OutFormat>,
    /// Prime-step rule: own (retreat_own_gap) or prior (retreat_prior_gap)
    #[arg(long, global = true)]
    rule: Option<String>,
    /// Relative quadrature tolerance, in (0, 1e-3]
    #[arg(long, global = true)]
    quad_tol: Option<f64>,
    /// Print a machine-readable description of this command's output fields
    #[arg(long, global = true)]
    schema: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build (and cache) the checkpointed prime table
    Sieve,
    /// Exact prime count pi(n)
    Pi {
        #[arg(long)]
        n: u64,
    },
    /// Chebyshev psi(x) and theta(x)
    Psi {
        #[arg(long)]
        x: f64,
    },
    /// Trajectory of the integer map from one start, restricted to a window
    Traj {
        #[arg(long)]
        start: u64,
        /// Window scale X
        #[arg(long)]
        x: u64,
        #[arg(long, value_enum, default_value_t = WindowArg::Parent)]
        window: WindowArg,
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Window functional scan: E(X), E-tilde(X), argmax, packing, von Koch
    Scan {
        #[arg(long)]
        x: u64,
        #[arg(long, default_value = "psi")]
        metric: String,
    },
    /// Packing statistics: composite landings and spacing per trajectory
    Hits {
        #[arg(long)]
        x: u64,
    },
    /// Composite selection near random points of the one-visit window
    Select {
        #[arg(long)]
        x: u64,
        #[arg(long, default_value_t = 100)]
        samples: u64,
    },
    /// E-tilde contraction ladder along X^{(3/4)^k}
    Contraction {
        #[arg(long = "x-max")]
        x_max: u64,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value = "psi")]
        metric: String,
    },
    /// Partial-summation bridge identity between pi - Li and psi - x
    Bridge {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        reverse: bool,
    },
    /// Truncated explicit-formula residual at y
    Ef {
        #[arg(long)]
        x: f64,
        /// Truncation height override (default U^3/2 from U = log x)
        #[arg(long = "T")]
        t: Option<f64>,
        /// Synthetic off-critical zero "beta,gamma"
        #[arg(long)]
        inject: Option<String>,
    },
    /// Remainder budget table at U = log X
    Budget {
        #[arg(long = "logX")]
        log_x: f64,
    },
    /// Large-sieve netting: randomized grid trials or the zero-transfer suite
    Netting {
        #[arg(value_enum, default_value_t = NettingMode::Trials)]
        mode: NettingMode,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Cap on the number of distinct positions per instance
        #[arg(long = "M", default_value_t = 4)]
        m: usize,
        /// U determining the grid (h = 2/U, T = U^3/2)
        #[arg(long = "U", default_value_t = 14.0)]
        u: f64,
    },
    /// Combined constant ledger (remainder pieces + alpha_eff) at U
    Ledger {
        #[arg(long = "U")]
        u: f64,
    },
    /// Zero-table management
    Zeros {
        #[command(subcommand)]
        action: ZerosCmd,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowArg {
    OneVisit,
    Parent,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NettingMode {
    Trials,
    Zeros,
}

#[derive(Subcommand)]
enum ZerosCmd {
    /// Parse and validate a zero table; exit 3 on any integrity failure
    Verify {
        #[arg(long)]
        path: Option<PathBuf>,
    },
    /// Gap and coverage statistics of a zero table
    Stats {
        #[arg(long)]
        path: Option<PathBuf>,
        /// Report the count below T = U^3/2 for this U
        #[arg(long = "U")]
        u: Option<f64>,
    },
}

// ---------------------------------------------------------------------------
// configuration

struct RunConfig {
    max_n: u64,
    zeros_path: PathBuf,
    cache_dir: PathBuf,
    threads: usize,
    seed: u64,
    output: Option<OutFormat>,
    prime_rule: StepRule,
    quadrature_tol: f64,
}

impl RunConfig {
    fn resolve(args: &CommonArgs) -> Result<RunConfig> {
        let file = config_file(args)?;
        let lookup = |flag: Option<String>, env: &str, key: &str| -> Option<String> {
            flag.or_else(|| std::env::var(env).ok())
                .or_else(|| file.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone()))
        };
        let parse_num = |name: &str, s: String| {
            s.parse::<f64>()
                .map_err(|_| Error::precondition(format!("bad {name} value '{s}'")))
        };

        let max_n = match lookup(args.max_n.map(|v| v.to_string()), "CLAB_MAX_N", "max_n") {
            Some(s) => parse_num("max_n", s)? as u64,
            None => 2_000_000,
        };
        let zeros_path = lookup(
            args.zeros.clone().map(|p| p.display().to_string()),
            "CLAB_ZEROS",
            "zeros",
        )
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data/zeros_100k.txt"));
        let cache_dir = lookup(
            args.cache_dir.clone().map(|p| p.display().to_string()),
            "CLAB_CACHE_DIR",
            "cache_dir",
        )
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(".clab-cache"));
        let threads = match lookup(args.threads.map(|v| v.to_string()), "CLAB_THREADS", "threads")
        {
            Some(s) => parse_num("threads", s)? as usize,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        if threads < 1 {
            return Err(Error::precondition("threads must be >= 1"));
        }
        let seed = match lookup(args.seed.map(|v| v.to_string()), "CLAB_SEED", "seed") {
            Some(s) => s
                .parse::<u64>()
                .map_err(|_| Error::precondition(format!("bad seed value '{s}'")))?,
            None => 0xC1AB,
        };
        let output = match (
            args.out,
            lookup(None, "CLAB_OUT", "out"),
        ) {
            (Some(f), _) => Some(f),
            (None, Some(s)) => Some(match s.as_str() {
                "json" => OutFormat::Json,
                "csv" => OutFormat::Csv,
                other => {
                    return Err(Error::precondition(format!("unknown output format '{other}'")))
                }
            }),
            (None, None) => None,
        };
        let prime_rule = match lookup(args.rule.clone(), "CLAB_RULE", "rule") {
            Some(s) => StepRule::from_str(&s)?,
            None => StepRule::RetreatOwnGap,
        };
        let quadrature_tol = match lookup(
            args.quad_tol.map(|v| v.to_string()),
            "CLAB_QUAD_TOL",
            "quad_tol",
        ) {
            Some(s) => parse_num("quad_tol", s)?,
            None => bridges::DEFAULT_QUAD_TOL,
        };
        if !(quadrature_tol > 0.0 && quadrature_tol <= 1e-3) {
            return Err(Error::precondition(format!(
                "quad_tol must lie in (0, 1e-3], got {quadrature_tol}"
            )));
        }
        Ok(RunConfig {
            max_n,
            zeros_path,
            cache_dir,
            threads,
            seed,
            output,
            prime_rule,
            quadrature_tol,
        })
    }

    fn format(&self, default: OutFormat) -> OutFormat {
        self.output.unwrap_or(default)
    }
}

fn config_file(args: &CommonArgs) -> Result<Vec<(String, String)>> {
    let explicit = args
        .config
        .clone()
        .or_else(|| std::env::var("CLAB_CONFIG").ok().map(PathBuf::from));
    let path = match explicit {
        Some(p) => p,
        None => {
            let p = PathBuf::from("clab.conf");
            if !p.exists() {
                return Ok(Vec::new());
            }
            p
        }
    };
    let text = std::fs::read_to_string(&path)?;
    let mut pairs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(Error::Parse {
            line: lineno + 1,
            msg: format!("expected key=value, got '{line}'"),
        })?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

// ---------------------------------------------------------------------------
// prime-table cache

/// Load the table from cache or rebuild it, growing capacity to `required`.
/// Any cache defect (bad checksum, truncation, stride mismatch) falls back
/// to a rebuild that overwrites the cache.
fn acquire_table(cfg: &RunConfig, required: u64) -> Result<PrimeCheckpointTable> {
    let max_n = cfg.max_n.max(required);
    let path = cfg
        .cache_dir
        .join(format!("pi_{max_n}_{DEFAULT_STRIDE}.clab1"));
    if path.exists() {
        match PrimeCheckpointTable::load(&path, 3, cfg.seed) {
            Ok(t) if t.max_n() == max_n && t.stride() == DEFAULT_STRIDE => return Ok(t),
            Ok(_) | Err(Error::Integrity(_)) | Err(Error::Parse { .. }) | Err(Error::Io(_)) => {
                eprintln!("clab: cache {} unusable, rebuilding", path.display());
            }
            Err(e) => return Err(e),
        }
    }
    let table = build_checkpoints(max_n, DEFAULT_STRIDE)?;
    std::fs::create_dir_all(&cfg.cache_dir)?;
    table.store(&path)?;
    Ok(table)
}

/// Capacity needed to scan windows at scale x, including trajectory steps
/// that overshoot the parent window before being recorded as exits.
fn window_capacity(x: u64) -> u64 {
    let xf = x as f64;
    let hi = (1.0 + 2.0 / xf.ln()) * xf;
    (hi + 1.3 * hi / hi.ln()).ceil() as u64 + 64
}

// ---------------------------------------------------------------------------
// dispatch

fn dispatch(cmd: &Cmd, cfg: &RunConfig) -> Result<()> {
    match cmd {
        Cmd::Sieve => cmd_sieve(cfg),
        Cmd::Pi { n } => {
            let table = acquire_table(cfg, *n)?;
            println!("{}", table.pi(*n)?);
            Ok(())
        }
        Cmd::Psi { x } => cmd_psi(*x, cfg),
        Cmd::Traj {
            start,
            x,
            window,
            limit,
        } => cmd_traj(*start, *x, *window, *limit, cfg),
        Cmd::Scan { x, metric } => cmd_scan(*x, metric, cfg),
        Cmd::Hits { x } => cmd_hits(*x, cfg),
        Cmd::Select { x, samples } => cmd_select(*x, *samples, cfg),
        Cmd::Contraction {
            x_max,
            levels,
            metric,
        } => cmd_contraction(*x_max, *levels, metric, cfg),
        Cmd::Bridge { x, reverse } => cmd_bridge(*x, *reverse, cfg),
        Cmd::Ef { x, t, inject } => cmd_ef(*x, *t, inject.as_deref(), cfg),
        Cmd::Budget { log_x } => cmd_budget(*log_x, cfg),
        Cmd::Netting { mode, trials, m, u } => cmd_netting(*mode, *trials, *m, *u, cfg),
        Cmd::Ledger { u } => cmd_ledger(*u, cfg),
        Cmd::Zeros { action } => cmd_zeros(action, cfg),
    }
}

fn emit<T: Serialize>(value: &T, format: OutFormat, csv: impl FnOnce() -> String) -> Result<()> {
    match format {
        OutFormat::Json => {
            let s = serde_json::to_string(value)
                .map_err(|e| Error::integrity(format!("serialization failed: {e}")))?;
            println!("{s}");
        }
        OutFormat::Csv => print!("{}", csv()),
    }
    Ok(())
}

fn cmd_sieve(cfg: &RunConfig) -> Result<()> {
    let table = acquire_table(cfg, cfg.max_n)?;
    #[derive(Serialize)]
    struct Out {
        max_n: u64,
        stride: u64,
        pi_max_n: u64,
        base_primes: usize,
        cache_path: String,
    }
    let out = Out {
        max_n: table.max_n(),
        stride: table.stride(),
        pi_max_n: table.pi(table.max_n())?,
        base_primes: table.base_primes().len(),
        cache_path: cfg
            .cache_dir
            .join(format!("pi_{}_{}.clab1", table.max_n(), table.stride()))
            .display()
            .to_string(),
    };
    emit(&out, cfg.format(OutFormat::Json), || {
        format!(
            "max_n,stride,pi_max_n,base_primes,cache_path\n{},{},{},{},{}\n",
            out.max_n, out.stride, out.pi_max_n, out.base_primes, out.cache_path
        )
    })
}

fn cmd_psi(x: f64, cfg: &RunConfig) -> Result<()> {
    let table = acquire_table(cfg, x.ceil() as u64)?;
    let v = ChebyshevValues::compute(x, &table)?;
    #[derive(Serialize)]
    struct Out {
        x: f64,
        psi: f64,
        theta: f64,
        psi_minus_x: f64,
        error_bound: f64,
    }
    let out = Out {
        x,
        psi: v.psi,
        theta: v.theta,
        psi_minus_x: v.psi - x,
        error_bound: v.error_bound,
    };
    emit(&out, cfg.format(OutFormat::Json), || {
        format!(
            "x,psi,theta,psi_minus_x,error_bound\n{},{},{},{},{}\n",
            out.x, out.psi, out.theta, out.psi_minus_x, out.error_bound
        )
    })
}

fn cmd_traj(
    start: u64,
    x: u64,
    window: WindowArg,
    limit: Option<usize>,
    cfg: &RunConfig,
) -> Result<()> {
    let table = acquire_table(cfg, window_capacity(x))?;
    let kind = match window {
        WindowArg::OneVisit => WindowKind::OneVisit,
        WindowArg::Parent => WindowKind::Parent,
    };
    let w = make_window(x, kind)?;
    let traj = trajectory_segment(
        start,
        w,
        cfg.prime_rule,
        &table,
        limit.unwrap_or(DEFAULT_STEP_LIMIT),
    )?;
    #[derive(Serialize)]
    struct Out {
        start: u64,
        rule: &'static str,
        window_lo: u64,
        window_hi: u64,
        points: Vec<(u64, bool)>,
        exit_reason: clab::dynamics::ExitReason,
        exit_point: Option<u64>,
        composite_landings: usize,
    }
    let out = Out {
        start: traj.start,
        rule: cfg.prime_rule.name(),
        window_lo: w.lo,
        window_hi: w.hi,
        points: traj.points.clone(),
        exit_reason: traj.exit_reason,
        exit_point: traj.exit_point,
        composite_landings: traj.composite_landings(),
    };
    emit(&out, cfg.format(OutFormat::Csv), || traj.to_csv())
}

#[derive(Serialize)]
struct ScanOut {
    #[serde(rename = "X")]
    x: u64,
    #[serde(rename = "U")]
    u: f64,
    metric: &'static str,
    rule: &'static str,
    #[serde(rename = "E")]
    e: f64,
    #[serde(rename = "E_tilde")]
    e_tilde: f64,
    argmax: u64,
    landings_max: usize,
    vonkoch_ratio: f64,
}

fn cmd_scan(x: u64, metric: &str, cfg: &RunConfig) -> Result<()> {
    let metric = Metric::from_str(metric)?;
    let table = acquire_table(cfg, window_capacity(x))?;
    let scan = WindowScan::new(x, &table)?;
    let e = scan.big_e(metric);
    let et = scan.big_e_tilde(metric, cfg.prime_rule);
    let packing = scan.packing_stats(cfg.prime_rule);
    let out = ScanOut {
        x,
        u: scan.parent.u,
        metric: metric.name(),
        rule: cfg.prime_rule.name(),
        e: e.value,
        e_tilde: et.value,
        argmax: et.argmax_point,
        landings_max: packing.max_landings,
        vonkoch_ratio: et.vonkoch_ratio(),
    };
    emit(&out, cfg.format(OutFormat::Json), || {
        format!(
            "X,U,metric,rule,E,E_tilde,argmax,landings_max,vonkoch_ratio\n{},{},{},{},{},{},{},{},{}\n",
            out.x, out.u, out.metric, out.rule, out.e, out.e_tilde, out.argmax,
            out.landings_max, out.vonkoch_ratio
        )
    })
}

fn cmd_hits(x: u64, cfg: &RunConfig) -> Result<()> {
    let table = acquire_table(cfg, window_capacity(x))?;
    let scan = WindowScan::new(x, &table)?;
    let stats = scan.packing_stats(cfg.prime_rule);
    let u = scan.parent.u;
    let spacing_bound = (1.0 - 8.0 / u) * x as f64 / u;
    #[derive(Serialize)]
    struct Out {
        x: u64,
        rule: &'static str,
        max_landings: usize,
        min_spacing: u64,
        trajectories: u64,
        spacing_bound: f64,
        landings_ok: bool,
        spacing_ok: bool,
    }
    let out = Out {
        x,
        rule: stats.rule.name(),
        max_landings: stats.max_landings,
        min_spacing: stats.min_spacing,
        trajectories: stats.trajectories,
        spacing_bound,
        landings_ok: stats.max_landings <= 4,
        spacing_ok: stats.min_spacing == u64::MAX || stats.min_spacing as f64 >= spacing_bound,
    };
    emit(&out, cfg.format(OutFormat::Json), || {
        format!(
            "x,rule,max_landings,min_spacing,trajectories,spacing_bound,landings_ok,spacing_ok\n\
             {},{},{},{},{},{},{},{}\n",
            out.x,
            out.rule,
            out.max_landings,
            out.min_spacing,
            out.trajectories,
            out.spacing_bound,
            out.landings_ok,
            out.spacing_ok
        )
    })
}

fn cmd_select(x: u64, samples: u64, cfg: &RunConfig) -> Result<()> {
    let table = acquire_table(cfg, window_capacity(x))?;
    let scan = WindowScan::new(x, &table)?;
    let w = scan.one_visit;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    #[derive(Serialize)]
    struct Row {
        sample: u64,
        x: f64,
        y: u64,
        e_psi_x: f64,
        e_psi_y: f64,
        lower_bound: f64,
        ok: bool,
    }
    let mut rows = Vec::with_capacity(samples as usize);
    for i in 0..samples {
        let xr = rng.gen_range(w.lo as f64..=w.hi as f64);
        let sel = composite_select(xr, &scan)?;
        let e_y = scan.prefix().e_psi(sel.y);
        rows.push(Row {
            sample: i,
            x: xr,
            y: sel.y,
            e_psi_x: scan.prefix().psi(xr.floor() as u64) - xr,
            e_psi_y: e_y,
            lower_bound: sel.lower_bound,
            ok: e_y.abs() >= sel.lower_bound,
        });
    }
    match cfg.format(OutFormat::Csv) {
        OutFormat::Json => {
            for r in &rows {
                println!(
                    "{}",
                    serde_json::to_string(r)
                        .map_err(|e| Error::integrity(format!("serialization failed: {e}")))?
                );
            }
        }
        OutFormat::Csv => {
            let mut s = String::from("sample,x,y,e_psi_x,e_psi_y,lower_bound,ok\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    r.sample, r.x, r.y, r.e_psi_x, r.e_psi_y, r.lower_bound, r.ok
                );
            }
            print!("{s}");
        }
    }
    Ok(())
}

fn cmd_contraction(x_max: u64, levels: usize, metric: &str, cfg: &RunConfig) -> Result<()> {
    let metric = Metric::from_str(metric)?;
    let table = acquire_table(cfg, window_capacity(x_max))?;
    let report = contraction_scan(x_max, levels, metric, cfg.prime_rule, &table)?;
    emit(&report, cfg.format(OutFormat::Json), || {
        let mut s = String::from("x,e_tilde,e_tilde_next,vonkoch_ratio\n");
        for l in &report.ladder {
            let next = l
                .e_tilde_next
                .map_or(String::new(), |v| v.to_string());
            let _ = writeln!(s, "{},{},{},{}", l.x, l.e_tilde, next, l.vonkoch_ratio);
        }
        s
    })
}

fn cmd_bridge(x: f64, reverse: bool, cfg: &RunConfig) -> Result<()> {
    let table = acquire_table(cfg, x.ceil() as u64)?;
    let report = if reverse {
        bridges::bridge_reverse(x, &table, cfg.quadrature_tol)?
    } else {
        bridges::bridge_forward(x, &table, cfg.quadrature_tol)?
    };
    emit(&report, cfg.format(OutFormat::Json), || {
        format!(
            "x,direction,lhs,rhs,abs_gap,r_pp,r_pp_over_sqrt\n{},{},{},{},{},{},{}\n",
            report.x,
            if reverse { "reverse" } else { "forward" },
            report.lhs,
            report.rhs,
            report.abs_gap,
            report.r_pp,
            report.r_pp_over_sqrt
        )
    })
}

fn parse_injection(spec: &str) -> Result<(f64, f64)> {
    let (b, g) = spec
        .split_once(',')
        .ok_or_else(|| Error::precondition(format!("--inject expects beta,gamma, got '{spec}'")))?;
    let beta = b
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::precondition(format!("bad beta '{b}'")))?;
    let gamma = g
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::precondition(format!("bad gamma '{g}'")))?;
    Ok((beta, gamma))
}

fn cmd_ef(y: f64, t_override: Option<f64>, inject: Option<&str>, cfg: &RunConfig) -> Result<()> {
    let table = acquire_table(cfg, y.ceil() as u64)?;
    let zeros = load_zeros(&cfg.zeros_path)?;
    let mut params = FrozenParams::from_x(y)?;
    if let Some(t) = t_override {
        if !(t > 0.0) {
            return Err(Error::precondition(format!("T must be > 0, got {t}")));
        }
        params.t = t;
    }
    let injected = match inject {
        Some(spec) => {
            let (beta, gamma) = parse_injection(spec)?;
            Some((beta, gamma))
        }
        None => None,
    };
    let zeros = match injected {
        Some((beta, gamma)) => inject_zero(&zeros, beta, gamma)?,
        None => zeros,
    };
    let s = zero_sum(y, &params, &zeros)?;
    let e_pi = table.pi(y.floor() as u64)? as f64 - clab::prime_engine::li(y)?.li_byparts;
    #[derive(Serialize)]
    struct Injected {
        beta: f64,
        gamma: f64,
        magnitude: f64,
        divergence_ratio: f64,
    }
    #[derive(Serialize)]
    struct Out {
        y: f64,
        u: f64,
        t: f64,
        pairs: usize,
        under_truncated: bool,
        zero_sum: f64,
        e_pi: f64,
        residual: f64,
        residual_over_sqrt: f64,
        injected: Option<Injected>,
    }
    let residual = e_pi - s.value;
    let out = Out {
        y,
        u: params.u,
        t: params.t,
        pairs: s.pairs,
        under_truncated: s.under_truncated,
        zero_sum: s.value,
        e_pi,
        residual,
        residual_over_sqrt: residual / y.sqrt(),
        injected: injected.map(|(beta, gamma)| Injected {
            beta,
            gamma,
            magnitude: injected_term_magnitude(y, &params, beta, gamma),
            divergence_ratio: divergence_ratio(beta, y).unwrap_or(f64::NAN),
        }),
    };
    emit(&out, cfg.format(OutFormat::Json), || {
        format!(
            "y,u,t,pairs,under_truncated,zero_sum,e_pi,residual,residual_over_sqrt\n\
             {},{},{},{},{},{},{},{},{}\n",
            out.y,
            out.u,
            out.t,
            out.pairs,
            out.under_truncated,
            out.zero_sum,
            out.e_pi,
            out.residual,
            out.residual_over_sqrt
        )
    })
}

fn cmd_budget(log_x: f64, cfg: &RunConfig) -> Result<()> {
    let params = FrozenParams::from_u(log_x)?;
    let budget = budget_eval(log_x, &params)?;
    match cfg.output {
        Some(OutFormat::Json) => emit(&budget, OutFormat::Json, String::new),
        Some(OutFormat::Csv) => {
            let mut s = String::from("piece,value,share\n");
            for p in budget.pieces() {
                let _ = writeln!(s, "{},{},{}", p.name, p.value, p.share);
            }
            let _ = writeln!(s, "total,{},{}", budget.total, budget.share_total);
            print!("{s}");
            Ok(())
        }
        None => {
            println!("remainder budget at U = {log_x} (units of X^1/2)");
            println!("{:<10} {:>14} {:>8}", "piece", "value", "share");
            for p in budget.pieces() {
                println!("{:<10} {:>14.6e} {:>8}", p.name, p.value, p.share);
            }
            println!(
                "{:<10} {:>14.6e} {:>8}",
                "total", budget.total, budget.share_total
            );
            Ok(())
        }
    }
}

fn cmd_netting(mode: NettingMode, trials: u64, m_cap: usize, u: f64, cfg: &RunConfig) -> Result<()> {
    match mode {
        NettingMode::Trials => netting_trials(trials, m_cap, u, cfg),
        NettingMode::Zeros => netting_zeros(m_cap, u, cfg),
    }
}

fn netting_trials(trials: u64, m_cap: usize, u: f64, cfg: &RunConfig) -> Result<()> {
    if m_cap < 1 {
        return Err(Error::precondition("M must be >= 1"));
    }
    let params = FrozenParams::from_u(u)?;
    let grid = GridSpec::new(params.h, params.t)?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut s = String::from("trial,m,lhs,rhs,ratio\n");
    let mut failures = 0u64;
    for trial in 0..trials {
        let m = rng.gen_range(1..=m_cap);
        let u_pos: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..u)).collect();
        let w: Vec<(f64, f64)> = (0..m)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let inst = ExpSumInstance::new(u_pos, w)?;
        let q = grid_quadform_fast(&inst, &grid);
        let ratio = q.lhs / q.rhs_bound;
        if q.lhs > q.rhs_bound {
            failures += 1;
        }
        let _ = writeln!(s, "{},{},{},{},{}", trial, q.m, q.lhs, q.rhs_bound, ratio);
    }
    print!("{s}");
    if failures > 0 {
        return Err(Error::integrity(format!(
            "{failures} of {trials} trials exceeded the grid bound"
        )));
    }
    Ok(())
}

fn netting_zeros(m_cap: usize, u: f64, cfg: &RunConfig) -> Result<()> {
    let params = FrozenParams::from_u(u)?;
    let zeros = load_zeros(&cfg.zeros_path)?;
    let t = params.t.min(zeros.max_gamma());
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let m = m_cap.clamp(1, 8);
    let u_pos: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..u)).collect();
    let w: Vec<(f64, f64)> = (0..m)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let inst = ExpSumInstance::new(u_pos, w)?;
    let grid = GridSpec::new(params.h, t)?;
    let q = grid_quadform_fast(&inst, &grid);
    let zsum = zeros_quadsum(&inst, t, &zeros)?;
    let l1 = weighted_l1(&inst, t, &zeros)?;
    let budget = ls_budget(u, m, audit_wmax(u))?;
    #[derive(Serialize)]
    struct Out {
        u: f64,
        t_used: f64,
        m: usize,
        zeros_quadsum: f64,
        grid_quadsum: f64,
        grid_bound: f64,
        weighted_l1: f64,
        ls_bound: f64,
        ls_ratio_to_vonkoch: f64,
    }
    let out = Out {
        u,
        t_used: t,
        m,
        zeros_quadsum: zsum,
        grid_quadsum: q.lhs,
        grid_bound: q.rhs_bound,
        weighted_l1: l1,
        ls_bound: budget.bound,
        ls_ratio_to_vonkoch: budget.ratio_to_vonkoch,
    };
    emit(&out, cfg.format(OutFormat::Json), || {
        format!(
            "u,t_used,m,zeros_quadsum,grid_quadsum,grid_bound,weighted_l1,ls_bound,ls_ratio_to_vonkoch\n\
             {},{},{},{},{},{},{},{},{}\n",
            out.u,
            out.t_used,
            out.m,
            out.zeros_quadsum,
            out.grid_quadsum,
            out.grid_bound,
            out.weighted_l1,
            out.ls_bound,
            out.ls_ratio_to_vonkoch
        )
    })
}

fn cmd_ledger(u: f64, cfg: &RunConfig) -> Result<()> {
    let report = ledger_report(u)?;
    match cfg.output {
        Some(OutFormat::Json) => emit(&report, OutFormat::Json, String::new),
        Some(OutFormat::Csv) => {
            let mut s = String::from("name,value,bound,margin\n");
            for e in &report.entries {
                let _ = writeln!(s, "{},{},{},{}", e.name, e.value, e.bound, e.margin);
            }
            print!("{s}");
            Ok(())
        }
        None => {
            println!("constant ledger at U = {u}");
            println!("{:<10} {:>14} {:>10} {:>14}", "name", "value", "bound", "margin");
            for e in &report.entries {
                println!(
                    "{:<10} {:>14.6e} {:>10} {:>14.6e}",
                    e.name, e.value, e.bound, e.margin
                );
            }
            let alpha = alpha_eff(u)?;
            if let Some((num, den)) = alpha.rational {
                println!("alpha_eff = {num}/{den} = {:.10}", alpha.value);
            }
            Ok(())
        }
    }
}

fn cmd_zeros(action: &ZerosCmd, cfg: &RunConfig) -> Result<()> {
    match action {
        ZerosCmd::Verify { path } => {
            let p = path.clone().unwrap_or_else(|| cfg.zeros_path.clone());
            let table = load_zeros(&p)?;
            zero_summary(&p, &table, cfg)
        }
        ZerosCmd::Stats { path, u } => {
            let p = path.clone().unwrap_or_else(|| cfg.zeros_path.clone());
            let table = load_zeros(&p)?;
            let gaps: Vec<f64> = table.gammas().windows(2).map(|w| w[1] - w[0]).collect();
            #[derive(Serialize)]
            struct Out {
                path: String,
                count: usize,
                first: f64,
                last: f64,
                min_gap: f64,
                max_gap: f64,
                count_below_t: Option<usize>,
                t: Option<f64>,
            }
            let t = match u {
                Some(u) => Some(FrozenParams::from_u(*u)?.t),
                None => None,
            };
            let out = Out {
                path: p.display().to_string(),
                count: table.gammas().len(),
                first: table.gammas()[0],
                last: table.max_gamma(),
                min_gap: gaps.iter().cloned().fold(f64::INFINITY, f64::min),
                max_gap: gaps.iter().cloned().fold(0.0, f64::max),
                count_below_t: t.map(|t| table.count_in(0.0, t)),
                t,
            };
            emit(&out, cfg.format(OutFormat::Json), || {
                format!(
                    "path,count,first,last,min_gap,max_gap\n{},{},{},{},{},{}\n",
                    out.path, out.count, out.first, out.last, out.min_gap, out.max_gap
                )
            })
        }
    }
}

fn zero_summary(path: &Path, table: &ZeroTable, cfg: &RunConfig) -> Result<()> {
    #[derive(Serialize)]
    struct Out {
        path: String,
        count: usize,
        first: f64,
        last: f64,
        checksum: String,
    }
    let out = Out {
        path: path.display().to_string(),
        count: table.gammas().len(),
        first: table.gammas()[0],
        last: table.max_gamma(),
        checksum: format!("{:016x}", table.source_checksum()),
    };
    emit(&out, cfg.format(OutFormat::Json), || {
        format!(
            "path,count,first,last,checksum\n{},{},{},{},{}\n",
            out.path, out.count, out.first, out.last, out.checksum
        )
    })
}

// ---------------------------------------------------------------------------
// schemas

fn schema_by_name(name: &str) -> Option<String> {
    let fields: &[(&str, &str)] = match name {
        "sieve" => &[
                ("max_n", "integer: sieve capacity"),
                ("stride", "integer: checkpoint stride"),
                ("pi_max_n", "integer: pi at capacity"),
                ("base_primes", "integer: base prime count"),
                ("cache_path", "string: cache file location"),
        ],
        "pi" => &[("pi", "integer: exact prime count, bare on stdout")],
        "psi" => &[
                ("x", "real: evaluation point"),
                ("psi", "real: sum of Lambda(n), n <= x"),
                ("theta", "real: sum of log p, p <= x"),
                ("psi_minus_x", "real: E_psi(x)"),
                ("error_bound", "real: summation error bound"),
        ],
        "traj" => &[
                ("start", "integer: trajectory start"),
                ("index", "integer: step number (CSV)"),
                ("value", "integer: iterate"),
                ("is_composite", "bool"),
                ("in_window", "bool: false only on the exit row"),
        ],
        "scan" => &[
                ("X", "integer: window scale"),
                ("U", "real: log X"),
                ("metric", "string: psi or pi"),
                ("rule", "string: prime-step rule"),
                ("E", "real: one-visit sup of |error| over composites"),
                ("E_tilde", "real: trajectory-sum sup over composite starts"),
                ("argmax", "integer: start attaining E_tilde"),
                ("landings_max", "integer: max composite landings"),
                ("vonkoch_ratio", "real: E_tilde / (sqrt X log X)"),
        ],
        "hits" => &[
                ("x", "integer: window scale"),
                ("rule", "string"),
                ("max_landings", "integer"),
                ("min_spacing", "integer: u64::MAX sentinel when undefined"),
                ("trajectories", "integer: composite starts scanned"),
                ("spacing_bound", "real: (1 - 8/U) X / U"),
                ("landings_ok", "bool: max_landings <= 4"),
                ("spacing_ok", "bool"),
        ],
        "select" => &[
                ("sample", "integer"),
                ("x", "real: sampled point"),
                ("y", "integer: selected even composite, |y - x| <= 1"),
                ("e_psi_x", "real"),
                ("e_psi_y", "real"),
                ("lower_bound", "real: |E_psi(x)| - (log 2X + 1)"),
                ("ok", "bool: |E_psi(y)| >= lower_bound"),
        ],
        "contraction" => &[
                ("metric", "string"),
                ("rule", "string"),
                ("ladder", "array: {x, e_tilde, e_tilde_next, vonkoch_ratio}"),
                ("residuals", "array of real: contraction residuals"),
                ("c_empirical", "real: max residual"),
        ],
        "bridge" => &[
                ("x", "real"),
                ("direction", "string: forward or reverse"),
                ("lhs", "real"),
                ("rhs", "real"),
                ("abs_gap", "real: pure quadrature error"),
                ("r_pp", "real: prime-power remainder"),
                ("r_pp_over_sqrt", "real: r_pp / sqrt x"),
        ],
        "ef" => &[
                ("y", "real"),
                ("u", "real: log y"),
                ("t", "real: truncation height"),
                ("pairs", "integer: conjugate pairs summed"),
                ("under_truncated", "bool: table coverage ended below T"),
                ("zero_sum", "real: S(y;T)"),
                ("e_pi", "real: pi(y) - Li(y)"),
                ("residual", "real: e_pi - zero_sum"),
                ("residual_over_sqrt", "real"),
                ("injected", "object|null: {beta, gamma, magnitude, divergence_ratio}"),
        ],
        "budget" => &[
                ("r_triv,r_gamma,r_tail,r_smooth", "objects: {name, value, share}"),
                ("total", "real: sum of evaluated pieces"),
                ("share_total", "real: budgeted 10.0"),
        ],
        "netting" => &[
                ("trial", "integer (trials mode, CSV)"),
                ("m", "integer: distinct positions"),
                ("lhs", "real: sum |S|^2 over the grid"),
                ("rhs", "real: (4M T/h + M) sum |w|^2"),
                ("ratio", "real: lhs / rhs"),
                ("zeros mode", "object: quadsum/grid/l1/ls-budget fields"),
        ],
        "ledger" => &[
                ("u", "real"),
                ("entries", "array: {name, value, bound, margin}"),
        ],
        "zeros" => &[
                ("path", "string"),
                ("count", "integer"),
                ("first", "real"),
                ("last", "real"),
                ("checksum", "string: FNV-1a 64 of the source bytes"),
        ],
        _ => return None,
    };
    let fields: Vec<serde_json::Value> = fields
        .iter()
        .map(|(n, d)| serde_json::json!({"name": n, "desc": d}))
        .collect();
    Some(serde_json::json!({"command": name, "fields": fields}).to_string())
}
