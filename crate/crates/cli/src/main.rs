//! `subconvex`: runs the verification suites and the exponent optimizer and
//! writes machine-readable reports.
//!
//! Exit status: 0 when every non-skipped check passes, 1 on a failed check,
//! 2 on a configuration or data error.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use subconvex::charsum::{sweep_frak_c, sweep_reduction, FrakSweepConfig};
use subconvex::coeffs::{load_coefficients, verify_gl2_voronoi, voronoi_trunc, VoronoiWeight};
use subconvex::deltamethod::{DeltaConfig, DeltaWeights};
use subconvex::ledger;
use subconvex::special::SpectralParams;
use subconvex::suite::{run_suite, Context, Status, Suite, SuiteError};
use subconvex::transforms::{g_transform_bessel, g_transform_mellin, GSpec, TransformParams};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "subconvex", version, about = "Numerical checks for GL(3)xGL(2) subconvexity machinery")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Directory for report.json, its meta sidecar and CSV files.
    #[arg(long, global = true, env = "SUBCONVEX_OUTPUT_DIR", default_value = "subconvex-out")]
    output_dir: PathBuf,
    /// Size of the worker pool.
    #[arg(long, global = true, env = "SUBCONVEX_WORKERS", default_value_t = 1)]
    workers: usize,
    #[arg(long, global = true, env = "SUBCONVEX_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a named verification suite.
    Run {
        #[arg(long, env = "SUBCONVEX_SUITE", default_value = "all")]
        suite: String,
        /// Tolerance override, key=value; repeatable.
        #[arg(long, env = "SUBCONVEX_TOLERANCE", value_delimiter = ',')]
        tolerance: Vec<String>,
        /// GL(2) coefficient file for the Voronoi suite.
        #[arg(long, env = "SUBCONVEX_DATA")]
        data: Option<PathBuf>,
    },
    /// Minimise the ledger supremum over K at T′ = T^a.
    LedgerOptimize {
        #[arg(long, default_value = "1")]
        a: String,
    },
    /// Compare the delta-symbol expansion with δ(n) at one Q.
    DeltaVerify {
        #[arg(long = "Q", default_value_t = 50.0)]
        q: f64,
        #[arg(long, default_value_t = 10)]
        n_max: i64,
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
    },
    /// Evaluate G by both routes at u = 4π²yN/(T|T′|).
    TransformsVerify {
        #[arg(long, default_value_t = 3.0)]
        t: f64,
        #[arg(long, default_value_t = 9.0)]
        t_f: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.25,1,4")]
        u: Vec<f64>,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Two-sided GL(2) Voronoi check; skipped without a data file.
    Voronoi {
        #[arg(long, env = "SUBCONVEX_DATA")]
        data: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "1,3,5")]
        q: Vec<u64>,
        #[arg(long, default_value_t = 50.0)]
        big_n: f64,
        #[arg(long, default_value_t = 1e-2)]
        tolerance: f64,
    },
    /// Exhaustive character-sum sweeps.
    CharsumSweep {
        #[arg(long, default_value_t = 400)]
        max_modulus: u64,
        #[arg(long, default_value_t = 6)]
        q1_max: u64,
        #[arg(long, default_value_t = 2)]
        r_max: u64,
        #[arg(long, default_value_t = 2)]
        m_max: i64,
        #[arg(long, default_value_t = 40)]
        reduction_q_max: u64,
    },
}

enum Failure {
    Checks(Vec<String>),
    Config(String),
    Data(String),
}

impl From<SuiteError> for Failure {
    fn from(e: SuiteError) -> Self {
        match e {
            SuiteError::Config(m) => Failure::Config(m),
            SuiteError::Data(m) => Failure::Data(m),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.common.workers == 0 {
        eprintln!("error: --workers must be at least 1");
        return ExitCode::from(2);
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.common.workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: worker pool: {e}");
            return ExitCode::from(2);
        }
    };
    let started = chrono::Utc::now();
    let clock = Instant::now();
    let outcome = pool.install(|| dispatch(&cli));
    let code = match &outcome {
        Ok(_) => 0,
        Err(Failure::Checks(names)) => {
            eprintln!("failed checks: {}", names.join(", "));
            1
        }
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            2
        }
        Err(Failure::Data(m)) => {
            eprintln!("data error: {m}");
            2
        }
    };
    // run writes report.json before it reports failed checks
    let wrote_report = matches!(cli.cmd, Cmd::Run { .. }) && matches!(outcome, Ok(()) | Err(Failure::Checks(_)));
    if wrote_report {
        let dir = &cli.common.output_dir;
        let meta = json!({
            "started": started.to_rfc3339(),
            "finished": chrono::Utc::now().to_rfc3339(),
            "elapsed_seconds": clock.elapsed().as_secs_f64(),
            "workers": cli.common.workers,
            "version": env!("CARGO_PKG_VERSION"),
        });
        if let Err(e) = write_json(&dir.join("report.meta.json"), &meta) {
            eprintln!("data error: {e}");
            return ExitCode::from(2);
        }
    }
    ExitCode::from(code)
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    let out = &cli.common.output_dir;
    match &cli.cmd {
        Cmd::Run { suite, tolerance, data } => run(out, cli.common.seed, suite, tolerance, data.clone()),
        Cmd::LedgerOptimize { a } => {
            let a = ledger::parse_rational(a).map_err(|e| Failure::Config(e.to_string()))?;
            let o = ledger::optimize_k(&ledger::merged_ledger(), a).map_err(|e| Failure::Config(e.to_string()))?;
            let paper_match = o.sup == ledger::bound_exponent(a);
            let v = json!({
                "a": a.to_string(), "k_opt": o.k_opt.to_string(), "j_opt": o.j_opt.to_string(),
                "sup": o.sup.to_string(), "convexity": ledger::convexity_exponent(a).to_string(),
                "paper_match": paper_match,
            });
            println!("{}", pretty(&v));
            verdict(paper_match, "ledger_optimum")
        }
        Cmd::DeltaVerify { q, n_max, tolerance } => {
            let dw = DeltaWeights::new(DeltaConfig::new(*q)).map_err(|e| Failure::Config(e.to_string()))?;
            let mut rows = Vec::new();
            let mut worst: f64 = 0.0;
            for n in -n_max..=*n_max {
                let v = dw.delta_expand(n).map_err(|e| Failure::Config(e.to_string()))?;
                let err = (v.value - f64::from(u8::from(n == 0))).abs();
                worst = worst.max(err);
                rows.push(json!({"n": n, "value": v.value, "error": err, "quadrature_err": v.err}));
            }
            println!("{}", pretty(&json!({"Q": q, "max_error": worst, "tolerance": tolerance, "values": rows})));
            verdict(worst <= *tolerance, "delta_verify")
        }
        Cmd::TransformsVerify { t, t_f, b, u, tolerance } => {
            let sp = SpectralParams::new(*t, *t_f);
            let p = TransformParams::with_osc_size(sp, 3.0);
            p.validate().map_err(|e| Failure::Config(e.to_string()))?;
            let g = GSpec::Oscillating { b: *b, sign: 1 };
            let mut rows = Vec::new();
            let mut worst: f64 = 0.0;
            for &uu in u {
                let y = uu * sp.big_t() * sp.t_prime().abs() / (4.0 * PI * PI) / p.big_n;
                for s1 in [1, -1] {
                    let m = g_transform_mellin(y, &p, &g, s1).map_err(|e| Failure::Config(e.to_string()))?;
                    let bs = g_transform_bessel(y, &p, &g, s1).map_err(|e| Failure::Config(e.to_string()))?;
                    let gap = (m - bs).norm() / (m.norm() + 1e-6);
                    worst = worst.max(gap);
                    rows.push(json!({"u": uu, "y": y, "sign": s1, "mellin": [m.re, m.im], "bessel": [bs.re, bs.im], "rel_gap": gap}));
                }
            }
            println!("{}", pretty(&json!({"t": t, "t_f": t_f, "B": b, "max_rel_gap": worst, "values": rows})));
            verdict(worst <= *tolerance, "transforms_verify")
        }
        Cmd::Voronoi { data, q, big_n, tolerance } => {
            let Some(path) = data else {
                println!("{}", pretty(&json!({"status": "SKIPPED", "reason": "no coefficient file given (--data)"})));
                return Ok(());
            };
            let table = load_coefficients(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
            let t_f = table.t_f.ok_or_else(|| Failure::Data("coefficient file does not state t_f".into()))?;
            let g = VoronoiWeight { big_n: *big_n };
            let mut reps = Vec::new();
            let mut worst: f64 = 0.0;
            for &qq in q {
                let r = verify_gl2_voronoi(&table, 1, qq, &g, voronoi_trunc(qq, t_f, *big_n))
                    .map_err(|e| Failure::Data(e.to_string()))?;
                worst = worst.max(r.discrepancy);
                reps.push(json!({"q": qq, "trunc": r.trunc, "discrepancy": r.discrepancy, "tail_estimate": r.tail_estimate}));
            }
            println!("{}", pretty(&json!({"status": if worst <= *tolerance { "PASS" } else { "FAIL" }, "checks": reps})));
            verdict(worst <= *tolerance, "gl2_voronoi")
        }
        Cmd::CharsumSweep { max_modulus, q1_max, r_max, m_max, reduction_q_max } => {
            let red = sweep_reduction(*reduction_q_max, 4, 6);
            let cfg = FrakSweepConfig { max_modulus: *max_modulus, n_range: 10, m_max: *m_max, r_max: *r_max, q1_max: *q1_max, slack: 1.0 + 1e-6 };
            let frak = sweep_frak_c(&cfg);
            let ok = red.max_abs_diff <= 1e-8 && frak.majorant_failures.is_empty() && frak.max_zero_violation < 1e-6;
            println!("{}", pretty(&json!({"reduction": red, "frak_c": frak, "config": cfg})));
            verdict(ok, "charsum_sweep")
        }
    }
}

fn verdict(ok: bool, name: &str) -> Result<(), Failure> {
    if ok {
        Ok(())
    } else {
        Err(Failure::Checks(vec![name.into()]))
    }
}

#[derive(Serialize)]
struct Report<'a> {
    schema_version: u32,
    suite: Suite,
    seed: u64,
    tolerances: &'a BTreeMap<String, f64>,
    summary: BTreeMap<&'static str, usize>,
    failures: Vec<String>,
    checks: &'a [subconvex::suite::Check],
    plots: Vec<&'a str>,
}

fn run(out: &Path, seed: u64, suite: &str, tolerance: &[String], data: Option<PathBuf>) -> Result<(), Failure> {
    let suite: Suite = suite.parse()?;
    let mut ctx = Context::new(seed, data);
    for kv in tolerance {
        let (k, v) = kv.split_once('=').ok_or_else(|| Failure::Config(format!("--tolerance expects key=value, got {kv:?}")))?;
        let v: f64 = v.trim().parse().map_err(|_| Failure::Config(format!("tolerance {k}: {v:?} is not a number")))?;
        ctx = ctx.with_tolerance(k.trim(), v)?;
    }
    fs::create_dir_all(out).map_err(|e| Failure::Config(format!("output dir {}: {e}", out.display())))?;
    let res = run_suite(suite, &ctx)?;
    let count = |s: Status| res.checks.iter().filter(|c| c.status == s).count();
    let summary = BTreeMap::from([("pass", count(Status::Pass)), ("fail", count(Status::Fail)), ("skipped", count(Status::Skipped))]);
    let failures: Vec<String> =
        res.checks.iter().filter(|c| c.status == Status::Fail).map(|c| format!("{}/{}", c.suite, c.name)).collect();
    let report = Report {
        schema_version: SCHEMA_VERSION,
        suite,
        seed,
        tolerances: ctx.tolerances(),
        summary,
        failures: failures.clone(),
        checks: &res.checks,
        plots: res.plots.iter().map(|p| p.file.as_str()).collect(),
    };
    write_json(&out.join("report.json"), &report).map_err(Failure::Config)?;
    for p in &res.plots {
        fs::write(out.join(&p.file), p.to_csv()).map_err(|e| Failure::Config(format!("{}: {e}", p.file)))?;
    }
    for c in &res.checks {
        let status = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        };
        println!("{status:<7} {}/{}", c.suite, c.name);
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Checks(failures))
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).unwrap_or_else(|e| format!("{{\"error\": \"{e}\"}}"))
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<(), String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| e.to_string())?;
    s.push('\n');
    fs::write(path, s).map_err(|e| format!("{}: {e}", path.display()))
}
