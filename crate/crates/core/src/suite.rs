//! Named verification suites: each check reports a status and the values it
//! measured, and some suites also emit tabulated plot data.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::arith::{gcd, kloosterman, primes_up_to, ramanujan, ramanujan_direct, KloostermanTable};
use crate::charsum::{sweep_frak_c, sweep_reduction, FrakSweepConfig};
use crate::coeffs::{load_coefficients, verify_gl2_voronoi, voronoi_trunc, CoeffError, VoronoiWeight};
use crate::deltamethod::{DeltaConfig, DeltaWeights};
use crate::ledger::{self, Q};
use crate::oscint::{self, Gaussian, InertWeight, PhaseModel, PhaseScales, PhaseUnit};
use crate::special::{self, SpectralParams};
use crate::transforms::{
    g_stationary_yn, g_transform_bessel, g_transform_mellin, g_window_ratio, q_polynomials, xi_star_series, GSpec,
    TransformParams,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Arith,
    Charsum,
    Delta,
    Special,
    Oscint,
    Transforms,
    Ledger,
    Voronoi,
    All,
}

impl Suite {
    pub const EACH: [Suite; 8] = [
        Suite::Arith,
        Suite::Charsum,
        Suite::Delta,
        Suite::Special,
        Suite::Oscint,
        Suite::Transforms,
        Suite::Ledger,
        Suite::Voronoi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Arith => "arith",
            Suite::Charsum => "charsum",
            Suite::Delta => "delta",
            Suite::Special => "special",
            Suite::Oscint => "oscint",
            Suite::Transforms => "transforms",
            Suite::Ledger => "ledger",
            Suite::Voronoi => "voronoi",
            Suite::All => "all",
        }
    }

    fn members(self) -> Vec<Suite> {
        if self == Suite::All {
            Suite::EACH.to_vec()
        } else {
            vec![self]
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = SuiteError;
    fn from_str(s: &str) -> Result<Self, SuiteError> {
        Suite::EACH
            .iter()
            .chain([Suite::All].iter())
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| SuiteError::Config(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("config: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    /// The statement the check exercises.
    pub anchor: String,
    pub status: Status,
    pub measured: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlotData {
    pub file: String,
    pub anchor: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl PlotData {
    pub fn to_csv(&self) -> String {
        let mut s = format!("# {}\n{}\n", self.anchor, self.columns.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
            s += &cells.join(",");
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteOutput {
    pub checks: Vec<Check>,
    pub plots: Vec<PlotData>,
}

/// Tolerance keys accepted by `Context::with_tolerance`, with their defaults.
pub const TOLERANCES: [(&str, f64); 10] = [
    ("ramanujan", 1e-9),
    ("reduction", 1e-8),
    ("majorant_slack", 1e-6),
    ("delta", 1e-3),
    ("dual", 1e-4),
    ("window_collapse", 1e3),
    ("series_c", 10.0),
    ("stationary", 0.05),
    ("special", 1e-8),
    ("voronoi", 1e-2),
];

#[derive(Clone, Debug)]
pub struct Context {
    pub seed: u64,
    pub data: Option<PathBuf>,
    tolerances: BTreeMap<String, f64>,
}

impl Context {
    pub fn new(seed: u64, data: Option<PathBuf>) -> Self {
        Self { seed, data, tolerances: TOLERANCES.iter().map(|&(k, v)| (k.to_string(), v)).collect() }
    }

    pub fn with_tolerance(mut self, key: &str, v: f64) -> Result<Self, SuiteError> {
        if !(v.is_finite() && v > 0.0) {
            return Err(SuiteError::Config(format!("tolerance {key} = {v} must be positive")));
        }
        match self.tolerances.get_mut(key) {
            Some(slot) => *slot = v,
            None => return Err(SuiteError::Config(format!("unknown tolerance key {key:?}"))),
        }
        Ok(self)
    }

    pub fn tol(&self, key: &str) -> f64 {
        self.tolerances[key]
    }

    pub fn tolerances(&self) -> &BTreeMap<String, f64> {
        &self.tolerances
    }
}

struct Builder {
    suite: Suite,
    name: &'static str,
    anchor: &'static str,
    measured: BTreeMap<String, Value>,
}

impl Builder {
    fn new(suite: Suite, name: &'static str, anchor: &'static str) -> Self {
        Self { suite, name, anchor, measured: BTreeMap::new() }
    }

    fn m(mut self, k: &str, v: impl Into<Value>) -> Self {
        self.measured.insert(k.to_string(), v.into());
        self
    }

    fn done(self, pass: bool) -> Check {
        self.finish(if pass { Status::Pass } else { Status::Fail }, None)
    }

    fn finish(self, status: Status, reason: Option<String>) -> Check {
        Check { suite: self.suite, name: self.name.into(), anchor: self.anchor.into(), status, measured: self.measured, reason }
    }

    fn error(self, e: impl fmt::Display) -> Check {
        self.finish(Status::Fail, Some(e.to_string()))
    }
}

/// Floats in reports are rounded to 6 significant digits so that reordering
/// of parallel reductions cannot leak into the output.
fn sig(v: f64) -> Value {
    if !v.is_finite() {
        return Value::String(v.to_string());
    }
    json!(format!("{v:.5e}").parse::<f64>().unwrap_or(v))
}

type Job<'a> = Box<dyn Fn(&Context) -> Result<Vec<Check>, SuiteError> + Send + Sync + 'a>;

fn jobs(suite: Suite) -> Vec<Job<'static>> {
    fn one(f: fn(&Context) -> Check) -> Job<'static> {
        Box::new(move |c| Ok(vec![f(c)]))
    }
    match suite {
        Suite::Arith => vec![one(ramanujan_identity), one(weil_bound), one(kloosterman_symmetries)],
        Suite::Charsum => vec![one(c_reduction), one(frak_c_support)],
        Suite::Delta => vec![one(delta_expansion)],
        Suite::Special => vec![one(log_gamma_refs), one(bessel_k_refs), one(bessel_j_refs), one(stirling_improves)],
        Suite::Oscint => vec![one(stationary_corpus), one(nonstationary_decay), one(poisson_gaussian)],
        Suite::Transforms => vec![one(g_dual_forms), one(g_window), one(xi_series)],
        Suite::Ledger => vec![Box::new(|_| Ok(ledger_checks()))],
        Suite::Voronoi => vec![Box::new(voronoi_checks)],
        Suite::All => Suite::EACH.iter().flat_map(|&s| jobs(s)).collect(),
    }
}

fn plots(suite: Suite) -> Vec<fn() -> Result<PlotData, String>> {
    match suite {
        Suite::Delta => vec![delta_error_plot],
        Suite::Transforms => vec![g_magnitude_plot],
        _ => vec![],
    }
}

/// Runs every check of `suite` on the current rayon pool. Results come back in
/// a fixed order regardless of the pool size.
pub fn run_suite(suite: Suite, ctx: &Context) -> Result<SuiteOutput, SuiteError> {
    let js = jobs(suite);
    let results: Vec<Result<Vec<Check>, SuiteError>> = js.par_iter().map(|j| j(ctx)).collect();
    let mut out = SuiteOutput::default();
    for r in results {
        out.checks.extend(r?);
    }
    let ps: Vec<_> = suite.members().into_iter().flat_map(plots).collect();
    let made: Vec<Result<PlotData, String>> = ps.par_iter().map(|p| p()).collect();
    for p in made {
        out.plots.push(p.map_err(SuiteError::Data)?);
    }
    Ok(out)
}

// ---- arith

fn ramanujan_identity(ctx: &Context) -> Check {
    let b = Builder::new(Suite::Arith, "ramanujan_identity", "R_q(b) = Σ_{d | (q,b)} d μ(q/d) against the unit sum");
    let tol = ctx.tol("ramanujan");
    let per_q: Vec<(usize, f64)> = (1..=200u64)
        .into_par_iter()
        .map(|q| {
            let mut bad = 0;
            let mut worst: f64 = 0.0;
            for n in 0..q as i64 {
                let f = ramanujan(q, n) as f64;
                let d = ramanujan_direct(q, n);
                let gap = (d.re - f).abs().max(d.im.abs());
                worst = worst.max(gap);
                bad += usize::from(d.re.round() != f || gap > tol);
            }
            (bad, worst)
        })
        .collect();
    let bad: usize = per_q.iter().map(|r| r.0).sum();
    let worst = per_q.iter().map(|r| r.1).fold(0.0, f64::max);
    b.m("q_max", 200).m("mismatches", bad).m("max_float_gap", sig(worst)).done(bad == 0)
}

fn weil_bound(_: &Context) -> Check {
    let b = Builder::new(Suite::Arith, "weil_bound", "|S(a,b;p)| ≤ 2√p for primes p ∤ ab");
    let per_p: Vec<(u64, f64)> = primes_up_to(997)
        .into_par_iter()
        .map(|p| {
            // S(a,b;p) = S(1,ab;p) for p ∤ a
            let row = KloostermanTable::new(p).row(1);
            let bound = 2.0 * (p as f64).sqrt();
            let worst = (1..p).flat_map(|a| (1..p).map(move |c| (a * c) % p)).map(|k| row[k as usize].abs()).fold(0.0, f64::max);
            ((p - 1) * (p - 1), worst / bound)
        })
        .collect();
    let pairs: u64 = per_p.iter().map(|r| r.0).sum();
    let worst = per_p.iter().map(|r| r.1).fold(0.0, f64::max);
    b.m("p_max", 997).m("pairs", pairs).m("max_ratio", sig(worst)).done(worst <= 1.0 + 1e-9)
}

fn kloosterman_symmetries(ctx: &Context) -> Check {
    let b = Builder::new(Suite::Arith, "kloosterman_symmetries", "S(a,b;c) = S(b,a;c) = S(1,ab;c) for (a,c) = 1, S real");
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut worst: f64 = 0.0;
    let samples = 300;
    for _ in 0..samples {
        let c: u64 = rng.gen_range(1..=600);
        let a: i64 = rng.gen_range(-1000..1000);
        let bb: i64 = rng.gen_range(-1000..1000);
        let s = kloosterman(a, bb, c);
        let mut gap = s.im.abs().max((s - kloosterman(bb, a, c)).norm());
        if gcd(a.rem_euclid(c as i64) as u64, c) == 1 {
            gap = gap.max((s - kloosterman(1, a * bb, c)).norm());
        }
        gap = gap.max((s.re - KloostermanTable::new(c).eval(a, bb)).abs());
        worst = worst.max(gap);
    }
    b.m("samples", samples).m("seed", ctx.seed).m("max_gap", sig(worst)).done(worst < 1e-8)
}

// ---- charsum

fn c_reduction(ctx: &Context) -> Check {
    let b = Builder::new(Suite::Charsum, "c_reduction", "the complete sum 𝒞 equals its Ramanujan-sum reduction");
    let rep = sweep_reduction(40, 4, 6);
    b.m("q_max", 40).m("r_max", 4).m("cases", rep.cases).m("max_abs_diff", sig(rep.max_abs_diff)).done(rep.max_abs_diff <= ctx.tol("reduction"))
}

fn frak_c_support(ctx: &Context) -> Check {
    let b = Builder::new(Suite::Charsum, "frak_c_support_and_majorant", "𝔠(0) = 0 unless q₂ = q₂′, and |𝔠(n)| is bounded by its majorant");
    let slack = 1.0 + ctx.tol("majorant_slack");
    let cfg = FrakSweepConfig { max_modulus: 400, n_range: 10, m_max: 2, r_max: 2, q1_max: 6, slack };
    let rep = sweep_frak_c(&cfg);
    let pass = rep.max_zero_violation < 1e-6 && rep.majorant_failures.is_empty() && rep.max_ratio <= slack;
    b.m("cases", rep.cases)
        .m("zero_cases", rep.zero_cases)
        .m("max_zero_violation", sig(rep.max_zero_violation))
        .m("max_divisibility_violation", sig(rep.max_divisibility_violation))
        .m("max_majorant_ratio", sig(rep.max_ratio))
        .m("majorant_failures", rep.majorant_failures.len())
        .m("max_route_diff", sig(rep.max_route_diff))
        .done(pass)
}

// ---- delta

fn delta_max_error(big_q: f64) -> Result<(f64, f64), String> {
    let dw = DeltaWeights::new(DeltaConfig::new(big_q)).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut reported: f64 = 0.0;
    for n in -10..=10i64 {
        let v = dw.delta_expand(n).map_err(|e| e.to_string())?;
        worst = worst.max((v.value - f64::from(u8::from(n == 0))).abs());
        reported = reported.max(v.err);
    }
    Ok((worst, reported))
}

fn delta_expansion(ctx: &Context) -> Check {
    let b = Builder::new(Suite::Delta, "delta_expansion", "the delta-symbol expansion reproduces δ(n) for |n| ≤ 10");
    match (delta_max_error(50.0), delta_max_error(100.0)) {
        (Ok((e50, _)), Ok((e100, _))) => {
            b.m("error_q50", sig(e50)).m("error_q100", sig(e100)).done(e50 <= ctx.tol("delta") && e100 < e50)
        }
        (Err(e), _) | (_, Err(e)) => b.error(e),
    }
}

fn delta_error_plot() -> Result<PlotData, String> {
    let mut rows = Vec::new();
    for q in [10.0, 20.0, 30.0, 50.0, 70.0, 100.0] {
        let (e, r) = delta_max_error(q)?;
        rows.push(vec![q, e, r]);
    }
    Ok(PlotData {
        file: "delta_error_vs_q.csv".into(),
        anchor: "delta-symbol expansion: max over |n| <= 10 of |expansion - delta(n)| and the quadrature error estimate".into(),
        columns: vec!["Q".into(), "max_abs_error".into(), "quadrature_err_estimate".into()],
        rows,
    })
}

// ---- special

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

fn log_gamma_refs(ctx: &Context) -> Check {
    let b = Builder::new(Suite::Special, "log_gamma_reference", "log Γ on the principal branch, Lanczos against Stirling");
    let refs = [
        (Complex64::new(2.0, 30.0), Complex64::new(-41.102599951006979, 74.356017063487635)),
        (Complex64::new(0.5, 1e4), Complex64::new(-15707.044329415762, 82103.403723928494)),
        (Complex64::new(-3.5, 2.0), Complex64::new(-6.4200913945756579, -9.7119076581964872)),
        (Complex64::new(0.25, 100.0), Complex64::new(-157.3119859115198, 360.12442368392899)),
    ];
    let mut worst: f64 = 0.0;
    for (z, v) in refs {
        match special::log_gamma(z) {
            Ok(g) => worst = worst.max(rel(g, v)),
            Err(e) => return b.error(e),
        }
    }
    let mut route: f64 = 0.0;
    for z in [Complex64::new(20.0, 3.0), Complex64::new(0.5, 50.0), Complex64::new(15.0, 1e4)] {
        let a = special::log_gamma(z).unwrap_or_default();
        route = route.max((a - special::log_gamma_stirling(z, 8)).norm() / a.norm());
    }
    b.m("max_rel_error", sig(worst)).m("lanczos_vs_stirling", sig(route)).done(worst <= ctx.tol("special") && route < 1e-10)
}

// (τ, x, K_{2iτ}(x)), computed with mpmath at 30 digits
const K_REFS: [(f64, f64, f64); 12] = [
    (0.0, 1.0, 0.42102443824070833),
    (5.0, 2.0, 1.1735704221220612e-7),
    (5.0, 1.0, 1.1294550821681802e-7),
    (5.0, 3.0, -6.3759939798738607e-8),
    (10.0, 30.0, 2.3367689472259343e-17),
    (60.0, 100.0, 1.2341764342945494e-83),
    (60.0, 20.0, -2.1296335203841263e-83),
    (60.0, 110.0, -2.153903340480677e-83),
    (60.0, 118.0, 5.2861571624265967e-83),
    (60.0, 122.0, 2.5222537585405387e-83),
    (60.0, 130.0, 1.7221091820835263e-84),
    (60.0, 150.0, 5.0795681529555251e-89),
];

fn bessel_k_refs(ctx: &Context) -> Check {
    let b = Builder::new(Suite::Special, "bessel_k_reference", "K_{iτ}(x) through the oscillatory and transition regions");
    let mut worst: f64 = 0.0;
    for (tau, x, r) in K_REFS {
        match special::bessel_k_imag_order(tau, x) {
            Ok(v) => worst = worst.max(((v - r) / r).abs()),
            Err(e) => return b.error(e),
        }
    }
    b.m("points", K_REFS.len()).m("max_rel_error", sig(worst)).done(worst <= ctx.tol("special"))
}

const J_REFS: [(f64, f64, f64, f64); 6] = [
    (5.0, 2.0, 347723.40568019693, -752584.30226528119),
    (5.0, 400.0, -131583.54744729428, -14137.313689484503),
    (0.0, 35.0, -0.12684568275631257, 0.0),
    (10.0, 15.0, -2187032356066.6211, 2749811439332.0693),
    (60.0, 1600.0, 2.545685753958218e+79, -6.7970094590208712e+79),
    (15.0, 60.0, -3.2395662677942513e+17, 1.4227863682622195e+19),
];

fn bessel_j_refs(ctx: &Context) -> Check {
    let b = Builder::new(Suite::Special, "bessel_j_reference", "J_{iτ}(x) by power series and Debye expansion");
    let mut worst: f64 = 0.0;
    for (tau, x, re, im) in J_REFS {
        match special::bessel_j_imag_order(tau, x) {
            Ok(v) => worst = worst.max(rel(v, Complex64::new(re, im))),
            Err(e) => return b.error(e),
        }
    }
    b.m("points", J_REFS.len()).m("max_rel_error", sig(worst)).done(worst <= ctx.tol("special"))
}

fn stirling_improves(_: &Context) -> Check {
    let b = Builder::new(Suite::Special, "stirling_ratio", "Γ(σ+it)/Γ(σ−it) against its Stirling phase, error falling in |t|");
    let err = |t: f64| special::stirling_ratio(0.5, t, 3).map(|r| (r.approx / r.exact - 1.0).norm());
    match (err(100.0), err(1000.0)) {
        (Ok(e1), Ok(e2)) => b.m("error_t100", sig(e1)).m("error_t1000", sig(e2)).done(e1 <= 1e-3 && e2 < e1),
        (Err(e), _) | (_, Err(e)) => b.error(e),
    }
}

// ---- oscint

fn stationary_corpus(ctx: &Context) -> Check {
    let mut b = Builder::new(Suite::Oscint, "stationary_phase_corpus", "quadrature over the stationary-phase leading term tends to 1");
    let tol = ctx.tol("stationary");
    let mut errs = Vec::new();
    for y in [1e2, 1e3, 1e4] {
        match oscint::stationary_ratio_errors(y) {
            Ok(e) => errs.push(e),
            Err(e) => return b.error(e),
        }
    }
    let mut pass = true;
    for i in 0..errs[0].len() {
        let (e2, e3, e4) = (errs[0][i].1, errs[1][i].1, errs[2][i].1);
        pass &= e3 <= tol && e2 > e3 && e3 > e4;
        b = b.m(errs[0][i].0, json!([sig(e2), sig(e3), sig(e4)]));
    }
    b.m("y", json!([1e2, 1e3, 1e4])).done(pass)
}

fn nonstationary_decay(_: &Context) -> Check {
    let b = Builder::new(Suite::Oscint, "nonstationary_decay", "without a critical point the integral decays faster than any power of R");
    let w = InertWeight::bump(1.0, 2.0);
    let fam = |r: f64| {
        PhaseModel::new(PhaseUnit::Cycles, move |x| r * x.ln(), move |x| r / x, move |x| -r / (x * x), PhaseScales { y: r, q: 1.0, r: r / 2.0 })
    };
    match oscint::nonstationary_decay_check(&w, &fam, &[1e2, 1e3, 1e4], 2) {
        Ok(rep) => b.m("fitted_exponent", sig(rep.fitted_exponent)).done(rep.passed && rep.fitted_exponent >= 1.8),
        Err(e) => b.error(e),
    }
}

fn poisson_gaussian(_: &Context) -> Check {
    let b = Builder::new(Suite::Oscint, "poisson_summation", "Poisson summation in a residue class for a Gaussian");
    let f = Gaussian { center: 3.7, width: 25.0 };
    match oscint::poisson_verify(&f, 4, 9) {
        Ok(rep) => b.m("discrepancy", sig(rep.discrepancy)).m("dual_terms", rep.rhs_terms).done(rep.discrepancy < 1e-10),
        Err(e) => b.error(e),
    }
}

// ---- transforms

fn g_dual_forms(ctx: &Context) -> Check {
    let b = Builder::new(Suite::Transforms, "g_dual_forms", "the Mellin–Barnes and Bessel-kernel forms of G agree");
    let g = GSpec::Oscillating { b: 1.0, sign: 1 };
    let mut grid = Vec::new();
    for t_f in [5.0, 9.0, 15.0] {
        for t in [0.0, 3.0, 12.0] {
            for u in [0.25, 1.0, 4.0] {
                for s1 in [1, -1] {
                    grid.push((t_f, t, u, s1));
                }
            }
        }
    }
    let errs: Vec<Result<f64, String>> = grid
        .par_iter()
        .map(|&(t_f, t, u, s1)| {
            let sp = SpectralParams::new(t, t_f);
            let p = TransformParams::with_osc_size(sp, 3.0);
            let y = u * sp.big_t() * sp.t_prime().abs() / (4.0 * PI * PI) / p.big_n;
            let m = g_transform_mellin(y, &p, &g, s1).map_err(|e| e.to_string())?;
            let v = g_transform_bessel(y, &p, &g, s1).map_err(|e| e.to_string())?;
            Ok((m - v).norm() / (m.norm() + 1e-6))
        })
        .collect();
    let mut worst: f64 = 0.0;
    for e in errs {
        match e {
            Ok(v) => worst = worst.max(v),
            Err(e) => return b.error(e),
        }
    }
    b.m("points", grid.len()).m("max_rel_gap", sig(worst)).done(worst <= ctx.tol("dual"))
}

const WINDOW_SP: (f64, f64) = (140.0, 60.0);

fn g_abs(yn: f64, p: &TransformParams, g: &GSpec) -> Result<f64, String> {
    g_transform_bessel(yn / p.big_n, p, g, 1).map(|v| v.norm()).map_err(|e| e.to_string())
}

fn g_window(ctx: &Context) -> Check {
    let b = Builder::new(Suite::Transforms, "g_window", "with T′ large, G is negligible unless yN ≍ T|T′|");
    let sp = SpectralParams::new(WINDOW_SP.0, WINDOW_SP.1);
    let p = TransformParams::with_osc_size(sp, 3.0);
    let g = GSpec::Oscillating { b: 2.0, sign: 1 };
    let run = || -> Result<(Vec<f64>, Vec<f64>, bool), String> {
        let mut peak: f64 = 0.0;
        let mut ratios = Vec::new();
        let mut inside = true;
        for xi in [1.0, 1.5, 2.0] {
            let yn = g_stationary_yn(2.0, 1, xi, sp);
            let v = g_abs(yn, &p, &g)?;
            let r = v / yn.sqrt();
            inside &= (0.05..=20.0).contains(&r) && (0.25..=4.0).contains(&g_window_ratio(yn, sp));
            ratios.push(r);
            peak = peak.max(v);
        }
        let mut collapse = Vec::new();
        for u in [1.0 / 16.0, 16.0] {
            collapse.push(peak / g_abs(u * sp.big_t() * sp.t_prime().abs() / (4.0 * PI * PI), &p, &g)?);
        }
        Ok((ratios, collapse, inside))
    };
    match run() {
        Ok((ratios, collapse, inside)) => {
            let pass = inside && collapse.iter().all(|&c| c >= ctx.tol("window_collapse"));
            b.m("inside_ratio", ratios.into_iter().map(sig).collect::<Vec<_>>())
                .m("collapse", collapse.into_iter().map(sig).collect::<Vec<_>>())
                .m("t", WINDOW_SP.0)
                .m("t_f", WINDOW_SP.1)
                .done(pass)
        }
        Err(e) => b.error(e),
    }
}

fn g_magnitude_plot() -> Result<PlotData, String> {
    let sp = SpectralParams::new(WINDOW_SP.0, WINDOW_SP.1);
    let p = TransformParams::with_osc_size(sp, 3.0);
    let g = GSpec::Oscillating { b: 2.0, sign: 1 };
    let scale = sp.big_t() * sp.t_prime().abs() / (4.0 * PI * PI);
    let us: Vec<f64> = (-20..=20).map(|k| 2f64.powf(k as f64 / 4.0)).collect();
    let rows: Vec<Result<Vec<f64>, String>> = us
        .par_iter()
        .map(|&u| {
            let yn = u * scale;
            let v = g_abs(yn, &p, &g)?;
            Ok(vec![u, yn / p.big_n, yn, v, v / yn.sqrt()])
        })
        .collect();
    Ok(PlotData {
        file: "g_magnitude_vs_y.csv".into(),
        anchor: "G is negligible unless yN is of size T|T'| (T = 200, |T'| = 80, B = 2); u = 4 pi^2 yN / (T|T'|)".into(),
        columns: ["u", "y", "yN", "abs_G", "abs_G_over_sqrt_yN"].map(String::from).to_vec(),
        rows: rows.into_iter().collect::<Result<_, _>>()?,
    })
}

fn xi_series(ctx: &Context) -> Check {
    let b = Builder::new(Suite::Transforms, "xi_star_series", "ξ* series through third order and the first phase coefficients");
    let sp = SpectralParams::new(WINDOW_SP.0, WINDOW_SP.1);
    let tp = sp.t_prime().abs();
    let yn = 2.0 * PI * sp.big_t() * tp;
    let mut worst: f64 = 0.0;
    for rho in [0.02, 0.05, 0.1] {
        for sign in [1i8, -1] {
            match xi_star_series(rho * tp, sp, yn, 3, sign) {
                Ok(s) => worst = worst.max((s.xi_star() - s.root).abs() / rho.powi(4)),
                Err(e) => return b.error(e),
            }
        }
    }
    let mut exact = true;
    for sign in [1i8, -1] {
        let qs = q_polynomials(3, sign);
        let half = BigRational::new((-(sign as i64)).into(), 2.into());
        exact &= qs[0].0 == vec![BigRational::from_integer(3.into())] && qs[1].0 == vec![half.clone(), half];
    }
    b.m("series_constant", sig(worst)).m("q0_q1_exact", exact).done(worst <= ctx.tol("series_c") && exact)
}

// ---- ledger

fn ledger_checks() -> Vec<Check> {
    let l = ledger::merged_ledger();
    let q = Q::new;
    let mut out = Vec::new();
    for a in [Q::from_integer(1), q(3, 5)] {
        let (k, j) = ledger::chosen_k(a);
        let b = Builder::new(Suite::Ledger, "bound_exponent", "the supremum exponent at the stated choice of K");
        let sup = ledger::evaluate_sup(&l, a, k, j);
        let expect = ledger::bound_exponent(a);
        out.push(match sup {
            Ok(s) => b
                .m("a", a.to_string())
                .m("k", k.to_string())
                .m("j", j.to_string())
                .m("sup", s.to_string())
                .m("expected", expect.to_string())
                .m("paper_match", s == expect)
                .done(s == expect),
            Err(e) => b.error(e),
        });
    }
    let a56 = q(5, 6);
    let lhs = q(7, 8) + q(19, 40) * a56;
    let rhs = q(57, 56) + q(17, 56) * a56;
    out.push(
        Builder::new(Suite::Ledger, "regime_boundary", "the two regime exponents coincide at T′ = T^{5/6}")
            .m("large_regime", lhs.to_string())
            .m("small_regime", rhs.to_string())
            .done(lhs == rhs),
    );
    let mut feasible = true;
    let mut rows = Vec::new();
    for a in [q(3, 5), q(2, 3), q(3, 4), q(5, 6), q(9, 10), Q::from_integer(1)] {
        let (k, j) = ledger::chosen_k(a);
        let kappa = k * a + j;
        let ok = ledger::k_floor(a) <= kappa && kappa <= ledger::k_ceiling(a);
        feasible &= ok;
        rows.push(json!({"a": a.to_string(), "k_exponent": kappa.to_string(), "floor": ledger::k_floor(a).to_string(), "ceiling": ledger::k_ceiling(a).to_string()}));
    }
    out.push(
        Builder::new(Suite::Ledger, "k_feasibility", "the chosen K satisfies the lower and upper constraints")
            .m("cases", rows)
            .done(feasible),
    );
    let doms = ledger::check_merge(&ledger::build_ledger(), &l);
    let undominated: Vec<String> = doms.iter().filter(|d| d.dominated_by.is_none()).map(|d| d.term.clone()).collect();
    out.push(
        Builder::new(Suite::Ledger, "merge_domination", "every collected term is bounded by a term of the final estimate")
            .m("collected", doms.len())
            .m("merged", l.len())
            .m("undominated", undominated.clone())
            .done(undominated.is_empty()),
    );
    let mut opt_ok = true;
    let mut opts = Vec::new();
    for a in [q(3, 5), q(5, 6), Q::from_integer(1)] {
        match ledger::optimize_k(&l, a) {
            Ok(o) => {
                // a = 3/5 is where the bound meets convexity
                let below = o.sup < ledger::convexity_exponent(a) || (a == q(3, 5) && o.sup == ledger::convexity_exponent(a));
                let m = o.sup == ledger::bound_exponent(a) && below;
                opt_ok &= m;
                opts.push(json!({"a": a.to_string(), "k_opt": o.k_opt.to_string(), "j_opt": o.j_opt.to_string(), "sup": o.sup.to_string(), "paper_match": m}));
            }
            Err(e) => {
                opt_ok = false;
                opts.push(json!({"a": a.to_string(), "error": e.to_string()}));
            }
        }
    }
    out.push(
        Builder::new(Suite::Ledger, "k_optimum", "grid optimisation over K recovers the exponent, below convexity for a > 3/5")
            .m("optima", opts)
            .done(opt_ok),
    );
    out
}

// ---- voronoi

fn voronoi_checks(ctx: &Context) -> Result<Vec<Check>, SuiteError> {
    let b = Builder::new(Suite::Voronoi, "gl2_voronoi", "GL(2) Voronoi summation, both sides evaluated");
    let Some(path) = &ctx.data else {
        return Ok(vec![b.finish(Status::Skipped, Some("no Maass coefficient file given (--data)".into()))]);
    };
    let table = load_coefficients(path).map_err(|e| SuiteError::Data(format!("{}: {e}", path.display())))?;
    let t_f = table.t_f.ok_or_else(|| SuiteError::Data("coefficient file does not state t_f".into()))?;
    let g = VoronoiWeight { big_n: 50.0 };
    let mut b = b.m("t_f", t_f);
    let mut worst: f64 = 0.0;
    for (a, q) in [(1i64, 1u64), (1, 3), (2, 5)] {
        let trunc = voronoi_trunc(q, t_f, g.big_n);
        match verify_gl2_voronoi(&table, a, q, &g, trunc) {
            Ok(r) => {
                worst = worst.max(r.discrepancy);
                b = b.m(&format!("discrepancy_q{q}"), sig(r.discrepancy));
            }
            Err(CoeffError::InsufficientData { have, need }) => {
                return Err(SuiteError::Data(format!("table covers n <= {have}, q = {q} needs {need}")))
            }
            Err(e) => return Ok(vec![b.error(e)]),
        }
    }
    Ok(vec![b.done(worst <= ctx.tol("voronoi"))])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::EACH {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn tolerance_keys_are_checked() {
        let c = Context::new(0, None);
        assert!(c.clone().with_tolerance("delta", 1e-2).is_ok());
        assert!(c.clone().with_tolerance("nope", 1.0).is_err());
        assert!(c.with_tolerance("delta", -1.0).is_err());
    }

    #[test]
    fn ledger_suite_matches() {
        let out = run_suite(Suite::Ledger, &Context::new(0, None)).unwrap();
        assert!(out.checks.iter().all(|c| c.status == Status::Pass), "{:?}", out.checks);
        assert_eq!(out.checks[0].measured["sup"], json!("27/20"));
    }

    #[test]
    fn voronoi_without_data_is_skipped() {
        let out = run_suite(Suite::Voronoi, &Context::new(0, None)).unwrap();
        assert_eq!(out.checks.len(), 1);
        assert_eq!(out.checks[0].status, Status::Skipped);
    }

    #[test]
    fn csv_has_anchor_and_header() {
        let p = PlotData { file: "x.csv".into(), anchor: "a".into(), columns: vec!["u".into(), "v".into()], rows: vec![vec![1.0, 0.5]] };
        assert_eq!(p.to_csv(), "# a\nu,v\n1e0,5e-1\n");
    }
}
