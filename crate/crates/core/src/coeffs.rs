//! Fourier coefficient tables: file ingestion, surrogates, GL(2) Voronoi check.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::arith::{self, e_frac, gcd, CompensatedSum};
use crate::oscint::quad::{integrate_real, QuadOpts};
use crate::transforms::{bessel_kernel, TransformError};
use crate::weights::afe_v;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CoeffKind {
    Gl2Maass,
    Gl2DivisorSurrogate,
    Gl3D3Surrogate,
    Zero,
}

#[derive(Debug, Error)]
pub enum CoeffError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("multiplicativity fails at (m, n) = ({m}, {n}): |λ(mn) − λ(m)λ(n)| = {defect:.3e}")]
    Multiplicativity { m: usize, n: usize, defect: f64 },
    #[error("mean square Σ|λ|²/x = {ratio:.3} exceeds {ceiling} at x = {x}")]
    Growth { x: usize, ratio: f64, ceiling: f64 },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("Voronoi check needs cuspidal GL(2) data, got {0:?}")]
    NotCuspidal(CoeffKind),
    #[error("table covers n <= {have}, need {need}")]
    InsufficientData { have: usize, need: usize },
    #[error("a = {a} is not a unit modulo {q}")]
    NotCoprime { a: i64, q: u64 },
    #[error(transparent)]
    Transform(#[from] crate::transforms::TransformError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable {
    pub kind: CoeffKind,
    pub t_f: Option<f64>,
    pub eps_f: Option<i8>,
    values: Vec<Complex64>,
}

pub const MULT_TOL: f64 = 1e-6;
pub const MULT_RANGE: usize = 100;
pub const GROWTH_CEILING: f64 = 50.0;

impl CoefficientTable {
    pub fn new(kind: CoeffKind, t_f: Option<f64>, eps_f: Option<i8>, values: Vec<Complex64>) -> Self {
        Self { kind, t_f, eps_f, values }
    }

    pub fn n_max(&self) -> usize {
        self.values.len()
    }

    /// λ(n) for 1 ≤ n ≤ n_max.
    pub fn get(&self, n: usize) -> Complex64 {
        self.values[n - 1]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn zero(n_max: usize) -> Self {
        Self::new(CoeffKind::Zero, None, None, vec![Complex64::new(0.0, 0.0); n_max])
    }

    /// λ(n) = d(n), the coefficients of the weight-zero Eisenstein series at s = 1/2.
    pub fn divisor_surrogate(n_max: usize) -> Self {
        let v = (1..=n_max as u64).map(|n| Complex64::new(arith::d2(n) as f64, 0.0)).collect();
        Self::new(CoeffKind::Gl2DivisorSurrogate, Some(0.0), Some(1), v)
    }

    /// A(1,n) = d₃(n).
    pub fn d3_surrogate(n_max: usize) -> Self {
        let v = arith::d3_table(n_max)[1..]
            .iter()
            .map(|&d| Complex64::new(d as f64, 0.0))
            .collect();
        Self::new(CoeffKind::Gl3D3Surrogate, None, None, v)
    }

    /// Multiplicativity on coprime pairs m, n ≤ MULT_RANGE with mn ≤ n_max.
    pub fn check_multiplicative(&self) -> Result<(), CoeffError> {
        let lim = self.n_max().min(MULT_RANGE);
        for m in 2..=lim {
            for n in 2..=lim {
                if m * n > self.n_max() || gcd(m as u64, n as u64) != 1 {
                    continue;
                }
                let defect = (self.get(m * n) - self.get(m) * self.get(n)).norm();
                if defect > MULT_TOL {
                    return Err(CoeffError::Multiplicativity { m, n, defect });
                }
            }
        }
        Ok(())
    }

    /// Σ_{n≤x}|λ(n)|²/x over dyadic x stays below the ceiling.
    pub fn check_growth(&self, ceiling: f64) -> Result<(), CoeffError> {
        let mut acc = 0.0;
        let mut next = 16;
        for n in 1..=self.n_max() {
            acc += self.get(n).norm_sqr();
            if n == next || n == self.n_max() {
                let ratio = acc / n as f64;
                if ratio > ceiling {
                    return Err(CoeffError::Growth { x: n, ratio, ceiling });
                }
                next *= 2;
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let eps = self.eps_f.unwrap_or(1);
        let _ = writeln!(
            s,
            "# gl2-maass t_f={} eps_f={}",
            self.t_f.unwrap_or(0.0),
            if eps >= 0 { "+1" } else { "-1" }
        );
        for (i, v) in self.values.iter().enumerate() {
            let _ = writeln!(s, "{},{:e},{:e}", i + 1, v.re, v.im);
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), CoeffError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Parse the plain-text Maass coefficient format and validate it.
pub fn parse_coefficients(text: &str) -> Result<CoefficientTable, CoeffError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or(CoeffError::Parse { line: 1, msg: "empty file".into() })?;
    let perr = |line: usize, msg: &str| CoeffError::Parse { line, msg: msg.to_string() };
    let rest = header
        .strip_prefix("# gl2-maass")
        .ok_or_else(|| perr(1, "expected header `# gl2-maass t_f=<real> eps_f=<+1|-1>`"))?;
    let mut t_f = None;
    let mut eps_f = None;
    for field in rest.split_whitespace() {
        match field.split_once('=') {
            Some(("t_f", v)) => t_f = Some(v.parse::<f64>().map_err(|_| perr(1, "bad t_f"))?),
            Some(("eps_f", v)) => {
                eps_f = Some(match v {
                    "+1" | "1" => 1,
                    "-1" => -1,
                    _ => return Err(perr(1, "eps_f must be +1 or -1")),
                })
            }
            _ => return Err(perr(1, &format!("unknown header field `{field}`"))),
        }
    }
    let t_f = t_f.ok_or_else(|| perr(1, "missing t_f"))?;
    let eps_f = eps_f.ok_or_else(|| perr(1, "missing eps_f"))?;
    if !(t_f.is_finite() && t_f > 0.0) {
        return Err(perr(1, "t_f must be positive"));
    }
    let mut values = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(perr(lineno, "expected `n,re,im`"));
        }
        let n: usize = parts[0].parse().map_err(|_| perr(lineno, "bad index"))?;
        if n != values.len() + 1 {
            return Err(perr(lineno, &format!("expected index {}, got {n}", values.len() + 1)));
        }
        let re: f64 = parts[1].parse().map_err(|_| perr(lineno, "bad real part"))?;
        let im: f64 = parts[2].parse().map_err(|_| perr(lineno, "bad imaginary part"))?;
        if !(re.is_finite() && im.is_finite()) {
            return Err(perr(lineno, "non-finite value"));
        }
        values.push(Complex64::new(re, im));
    }
    if values.is_empty() {
        return Err(perr(2, "no coefficient rows"));
    }
    let table = CoefficientTable::new(CoeffKind::Gl2Maass, Some(t_f), Some(eps_f), values);
    table.check_multiplicative()?;
    table.check_growth(GROWTH_CEILING)?;
    Ok(table)
}

pub fn load_coefficients(path: &Path) -> Result<CoefficientTable, CoeffError> {
    parse_coefficients(&std::fs::read_to_string(path)?)
}

/// The test weight g(x) = V(x/N) with V the bump on [1, 2].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VoronoiWeight {
    pub big_n: f64,
}

impl VoronoiWeight {
    pub fn eval(&self, x: f64) -> f64 {
        afe_v().eval(x / self.big_n)
    }

    pub fn support(&self) -> (f64, f64) {
        let (a, b) = afe_v().support();
        (a * self.big_n, b * self.big_n)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VoronoiReport {
    pub a: i64,
    pub q: u64,
    pub trunc: usize,
    pub lhs: Complex64,
    pub rhs: Complex64,
    /// |lhs − rhs| / |lhs|, or the absolute gap when lhs = 0.
    pub discrepancy: f64,
    /// Size of the last dyadic block (trunc/2, trunc] of the dual sum.
    pub tail_estimate: f64,
}

/// G^±(y) = ε_f^{(1∓1)/2} y ∫ g(x) J^±_f(4π√(yx)) dx.
pub fn g_pm_bessel(y: f64, g: &VoronoiWeight, t_f: f64, eps_f: i8, sign: i32) -> Result<f64, CoeffError> {
    let (lo, hi) = g.support();
    let freq = 4.0 * PI * (y * hi).sqrt() * (1.0 - (lo / hi).sqrt()) + 2.0 * t_f;
    let pieces = 8 + (freq / TAU * 3.0).ceil() as usize;
    let err = std::cell::Cell::new(None);
    let f = |x: f64| {
        let w = g.eval(x);
        if w == 0.0 {
            return 0.0;
        }
        match bessel_kernel(t_f, 4.0 * PI * (y * x).sqrt(), sign) {
            Ok(k) => w * k,
            Err(e) => {
                err.set(Some(e));
                0.0
            }
        }
    };
    let opts = QuadOpts { abs_tol: 1e-12 * g.big_n, rel_tol: 1e-10, max_intervals: 50_000, initial_pieces: pieces };
    let r = integrate_real(f, lo, hi, opts).map_err(TransformError::from)?;
    if let Some(e) = err.take() {
        return Err(e.into());
    }
    let eps = if sign > 0 { 1.0 } else { eps_f as f64 };
    Ok(eps * y * r.0)
}

/// Σ λ(n)e(an/q)g(n) directly, against q Σ_± Σ_{n ≤ trunc} λ(n)/n e(∓ān/q) G^±(n/q²).
pub fn verify_gl2_voronoi(
    table: &CoefficientTable,
    a: i64,
    q: u64,
    g: &VoronoiWeight,
    trunc: usize,
) -> Result<VoronoiReport, CoeffError> {
    if q == 0 || gcd(a.rem_euclid(q as i64) as u64, q) != 1 {
        return Err(CoeffError::NotCoprime { a, q });
    }
    match table.kind {
        CoeffKind::Gl2Maass | CoeffKind::Zero => {}
        k => return Err(CoeffError::NotCuspidal(k)),
    }
    let need = (g.support().1.ceil() as usize).max(trunc);
    if table.n_max() < need {
        return Err(CoeffError::InsufficientData { have: table.n_max(), need });
    }
    let t_f = table.t_f.unwrap_or(0.0);
    let eps_f = table.eps_f.unwrap_or(1);
    let qi = q as i64;
    let am = a.rem_euclid(qi);
    let abar = arith::inverse_mod(am, q).unwrap_or(0) as i64;
    let mut lhs = CompensatedSum::new();
    let (lo, hi) = g.support();
    for n in (lo.floor() as usize).max(1)..=(hi.ceil() as usize) {
        let w = g.eval(n as f64);
        if w != 0.0 {
            lhs.add(table.get(n) * e_frac(am * n as i64, q) * w);
        }
    }
    let terms: Vec<Result<Complex64, CoeffError>> = (1..=trunc)
        .into_par_iter()
        .map(|n| {
            let lam = table.get(n);
            if lam == Complex64::new(0.0, 0.0) {
                return Ok(lam);
            }
            let y = n as f64 / (q * q) as f64;
            let gp = g_pm_bessel(y, g, t_f, eps_f, 1)?;
            let gm = g_pm_bessel(y, g, t_f, eps_f, -1)?;
            let tw = e_frac(-abar * n as i64, q) * gp + e_frac(abar * n as i64, q) * gm;
            Ok(lam / n as f64 * tw)
        })
        .collect();
    let mut rhs = CompensatedSum::new();
    let mut tail = CompensatedSum::new();
    for (i, t) in terms.into_iter().enumerate() {
        let t = t?;
        rhs.add(t);
        if i + 1 > trunc / 2 {
            tail.add(t);
        }
    }
    let lhs = lhs.value();
    let rhs = rhs.value() * q as f64;
    let gap = (lhs - rhs).norm();
    let discrepancy = if lhs.norm() > 0.0 { gap / lhs.norm() } else { gap };
    Ok(VoronoiReport { a, q, trunc, lhs, rhs, discrepancy, tail_estimate: tail.value().norm() * q as f64 })
}

/// The dual length q²(1 + t_f)²/N, scaled by 4.
pub fn voronoi_trunc(q: u64, t_f: f64, big_n: f64) -> usize {
    (4.0 * (q * q) as f64 * (1.0 + t_f).powi(2) / big_n).ceil() as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    // multiplicative but not a genuine form: λ(n) = n^{-1/4}
    fn toy_values() -> Vec<Complex64> {
        (1..=200).map(|n| Complex64::new((n as f64).powf(-0.25), 0.0)).collect()
    }

    fn toy_text() -> String {
        CoefficientTable::new(CoeffKind::Gl2Maass, Some(9.533695261353557), Some(-1), toy_values())
            .to_text()
    }

    #[test]
    fn round_trip() {
        let text = toy_text();
        let t = parse_coefficients(&text).unwrap();
        assert_eq!(t.n_max(), 200);
        assert_eq!(t.eps_f, Some(-1));
        let again = parse_coefficients(&t.to_text()).unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn corruption_detected() {
        let mut v = toy_values();
        v[5] = Complex64::new(9.0, 0.0);
        let text = CoefficientTable::new(CoeffKind::Gl2Maass, Some(9.5), Some(1), v).to_text();
        match parse_coefficients(&text) {
            Err(CoeffError::Multiplicativity { m, n, .. }) => assert_eq!(m * n, 6),
            other => panic!("expected multiplicativity failure, got {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_lines() {
        assert!(matches!(parse_coefficients("hello"), Err(CoeffError::Parse { line: 1, .. })));
        let bad = "# gl2-maass t_f=3.1 eps_f=+1\n1,1,0\n3,1,0\n";
        assert!(matches!(parse_coefficients(bad), Err(CoeffError::Parse { line: 3, .. })));
    }

    #[test]
    fn voronoi_rejects_bad_input() {
        let g = VoronoiWeight { big_n: 50.0 };
        let sur = CoefficientTable::divisor_surrogate(400);
        assert!(matches!(verify_gl2_voronoi(&sur, 1, 3, &g, 100), Err(CoeffError::NotCuspidal(_))));
        let toy = parse_coefficients(&toy_text()).unwrap();
        assert!(matches!(verify_gl2_voronoi(&toy, 3, 3, &g, 100), Err(CoeffError::NotCoprime { .. })));
        assert!(matches!(verify_gl2_voronoi(&toy, 1, 3, &g, 1000), Err(CoeffError::InsufficientData { .. })));
    }

    #[test]
    fn voronoi_on_zero_table() {
        let g = VoronoiWeight { big_n: 50.0 };
        let r = verify_gl2_voronoi(&CoefficientTable::zero(200), 1, 3, &g, 150).unwrap();
        assert_eq!(r.lhs, Complex64::new(0.0, 0.0));
        assert_eq!(r.rhs, Complex64::new(0.0, 0.0));
        assert_eq!(r.discrepancy, 0.0);
    }

    #[test]
    fn g_pm_is_finite() {
        let g = VoronoiWeight { big_n: 50.0 };
        for y in [0.01, 1.0, 30.0] {
            for s in [1, -1] {
                assert!(g_pm_bessel(y, &g, 9.5, 1, s).unwrap().is_finite());
            }
        }
    }

    #[test]
    fn surrogates() {
        let t = CoefficientTable::divisor_surrogate(100);
        assert_eq!(t.kind, CoeffKind::Gl2DivisorSurrogate);
        assert_eq!(t.get(12).re, 6.0);
        t.check_multiplicative().unwrap();
        let t3 = CoefficientTable::d3_surrogate(100);
        assert_eq!(t3.get(4).re, 6.0);
    }
}
