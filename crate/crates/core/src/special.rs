//! Gamma functions, Stirling approximants, gamma factors and Bessel
//! functions of purely imaginary order.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oscint::quad::{integrate_real, QuadOpts};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialError {
    #[error("Gamma has a pole at {0}")]
    PoleAt(f64),
    #[error("{0}")]
    OutOfDomain(String),
    #[error("evaluation did not converge: {0}")]
    ConvergenceFailure(String),
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    pub t: f64,
    pub t_f: f64,
}

impl SpectralParams {
    pub fn new(t: f64, t_f: f64) -> Self {
        assert!(t_f > 0.0, "t_f must be positive");
        Self { t, t_f }
    }

    /// T = t + t_f.
    pub fn big_t(&self) -> f64 {
        self.t + self.t_f
    }

    /// T′ = t − t_f.
    pub fn t_prime(&self) -> f64 {
        self.t - self.t_f
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut x = c(LANCZOS[0], 0.0);
    for (i, &p) in LANCZOS.iter().enumerate().skip(1) {
        x += p / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * TAU.ln() + (z + 0.5) * t.ln() - t + x.ln()
}

/// Principal branch of log Γ(z) (analytic off the negative real axis).
pub fn log_gamma(z: Complex64) -> Result<Complex64, SpecialError> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.floor() {
        return Err(SpecialError::PoleAt(z.re));
    }
    if z.re >= 0.5 {
        return Ok(lanczos(z));
    }
    let m = (0.5 - z.re).ceil() as usize;
    let mut shift = c(0.0, 0.0);
    for k in 0..m {
        shift += (z + k as f64).ln();
    }
    Ok(lanczos(z + m as f64) - shift)
}

fn lg(z: Complex64) -> Result<Complex64, SpecialError> {
    log_gamma(z)
}

// B_{2k} for k = 1..10
const BERNOULLI: [(f64, f64); 10] = [
    (1.0, 6.0),
    (-1.0, 30.0),
    (1.0, 42.0),
    (-1.0, 30.0),
    (5.0, 66.0),
    (-691.0, 2730.0),
    (7.0, 6.0),
    (-3617.0, 510.0),
    (43867.0, 798.0),
    (-174611.0, 330.0),
];

/// Stirling series for log Γ(z), |z| large, Re z > 0.
pub fn log_gamma_stirling(z: Complex64, terms: usize) -> Complex64 {
    let mut s = (z - 0.5) * z.ln() - z + 0.5 * TAU.ln();
    let zi = z.inv();
    let z2 = zi * zi;
    let mut p = zi;
    for &(n, d) in BERNOULLI.iter().take(terms) {
        let k = BERNOULLI.iter().position(|&b| b == (n, d)).unwrap() + 1;
        s += p * (n / d) / ((2 * k) as f64 * (2 * k - 1) as f64);
        p *= z2;
    }
    s
}

type Series = Vec<Complex64>;

fn ser_mul(a: &Series, b: &Series, n: usize) -> Series {
    let mut out = vec![c(0.0, 0.0); n];
    for (i, x) in a.iter().enumerate().take(n) {
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Coefficients a_m with Im log Γ(σ+it) = t log(t/e) + (σ−½)π/2 + Σ_{m≥1} a_m t^{−m}, t → +∞.
fn stirling_phase_coeffs(sigma: f64, order: usize) -> Vec<f64> {
    let n = order + 2;
    let is = c(0.0, sigma);
    // L = log(1 − iσε) = −Σ (iσε)^m/m
    let mut l = vec![c(0.0, 0.0); n + 1];
    let mut pw = c(1.0, 0.0);
    for (m, lm) in l.iter_mut().enumerate().skip(1) {
        pw *= is;
        *lm = -pw / m as f64;
    }
    // (i/ε)·L + (σ − ½)·L
    let mut s = vec![c(0.0, 0.0); n];
    for m in 0..n {
        s[m] += c(0.0, 1.0) * l[m + 1] + (sigma - 0.5) * l[m];
    }
    // z⁻¹ = −iε Σ (iσε)^j
    let mut zinv = vec![c(0.0, 0.0); n];
    let mut pw = c(0.0, -1.0);
    for z in zinv.iter_mut().skip(1) {
        *z = pw;
        pw *= is;
    }
    let zinv2 = ser_mul(&zinv, &zinv, n);
    let mut p = zinv.clone();
    for (k, &(num, den)) in BERNOULLI.iter().enumerate() {
        let k = k + 1;
        let coef = num / den / ((2 * k) as f64 * (2 * k - 1) as f64);
        for m in 0..n {
            s[m] += p[m] * coef;
        }
        p = ser_mul(&p, &zinv2, n);
    }
    s.iter().map(|z| z.im).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StirlingRatio {
    pub approx: Complex64,
    pub exact: Complex64,
}

/// Γ(σ+it)/Γ(σ−it) ≈ exp(2it log(|t|/e))·w_{σ,J}(t) with an O(|t|^{−J}) error.
pub fn stirling_ratio(sigma: f64, t: f64, j: usize) -> Result<StirlingRatio, SpecialError> {
    if t.abs() < 10.0 {
        return Err(SpecialError::OutOfDomain(format!("|t| = {} < 10", t.abs())));
    }
    let at = t.abs();
    let coeffs = stirling_phase_coeffs(sigma, j.max(1));
    let mut corr = (sigma - 0.5) * PI / 2.0;
    for (m, a) in coeffs.iter().enumerate().take(j.max(1)).skip(1) {
        corr += a * at.powi(-(m as i32));
    }
    let mut approx = Complex64::from_polar(1.0, 2.0 * at * (at / std::f64::consts::E).ln())
        * Complex64::from_polar(1.0, 2.0 * corr);
    if t < 0.0 {
        approx = approx.conj();
    }
    let exact = (lg(c(sigma, t))? - lg(c(sigma, -t))?).exp();
    Ok(StirlingRatio { approx, exact })
}

/// The two unit-modulus quotients of γ₂^{±₁}(−1/2 + iτ − it).
pub fn gamma2_terms(tau: f64, p: SpectralParams) -> Result<(Complex64, Complex64), SpecialError> {
    let (tt, tp) = (p.big_t(), p.t_prime());
    let q = |sh: f64| -> Result<Complex64, SpecialError> {
        Ok((lg(c(sh, tau - tt) / 2.0)? + lg(c(sh, tau - tp) / 2.0)?
            - lg(c(sh, tt - tau) / 2.0)?
            - lg(c(sh, tp - tau) / 2.0)?)
        .exp())
    };
    Ok((q(0.5)?, q(1.5)?))
}

/// γ₂^{±₁}(−1/2 + iτ − it) = first ±₁ second.
pub fn gamma2_pm(tau: f64, p: SpectralParams, sign1: i32) -> Result<Complex64, SpecialError> {
    let (a, b) = gamma2_terms(tau, p)?;
    Ok(a + b * sign1 as f64)
}

/// Leading Stirling form of gamma2_terms with J correction orders per quotient.
pub fn gamma2_terms_stirling(tau: f64, p: SpectralParams, j: usize) -> Result<(Complex64, Complex64), SpecialError> {
    let (tt, tp) = (p.big_t(), p.t_prime());
    let q = |sigma: f64| -> Result<Complex64, SpecialError> {
        let a = stirling_ratio(sigma, (tau - tt) / 2.0, j)?.approx;
        let b = stirling_ratio(sigma, (tau - tp) / 2.0, j)?.approx;
        Ok(a * b)
    };
    Ok((q(0.25)?, q(0.75)?))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaFactorGL3 {
    pub alphas: [Complex64; 3],
}

impl GammaFactorGL3 {
    pub fn minimal_eisenstein() -> Self {
        Self { alphas: [c(0.0, 0.0); 3] }
    }
}

/// The two products of γ^± for GL(3).
pub fn gamma3_terms(s: Complex64, g: &GammaFactorGL3) -> Result<(Complex64, Complex64), SpecialError> {
    let mut first = c(0.0, 0.0);
    let mut second = c(0.0, 0.0);
    for a in g.alphas {
        first += lg((s + a) / 2.0)? - lg((1.0 - s - a) / 2.0)?;
        second += lg((1.0 + s + a) / 2.0)? - lg((2.0 - s - a) / 2.0)?;
    }
    Ok((first.exp(), second.exp()))
}

/// γ^±(s) = Π Γ((s+α)/2)/Γ((1−s−α)/2) ± (1/i) Π Γ((1+s+α)/2)/Γ((2−s−α)/2).
pub fn gamma3_pm(s: Complex64, g: &GammaFactorGL3, sign: i32) -> Result<Complex64, SpecialError> {
    let (a, b) = gamma3_terms(s, g)?;
    Ok(a + b * c(0.0, -1.0) * sign as f64)
}

/// A value stored as mantissa·exp(log_scale).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub mantissa: Complex64,
    pub log_scale: f64,
}

impl Scaled {
    pub fn value(&self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }
}

/// Debye polynomials u_k(p) as coefficient lists in ρ = p², after removing p^k.
fn debye_polys() -> &'static Vec<Vec<f64>> {
    static CELL: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    CELL.get_or_init(|| {
        let kmax = 24;
        let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        // full polynomial in p, index = power
        let mut u: Vec<BigRational> = vec![r(1, 1)];
        let mut out = Vec::new();
        for k in 0..=kmax {
            let coeffs: Vec<f64> = (0..=k * 2)
                .map(|j| u.get(k + 2 * j).cloned().unwrap_or_else(BigRational::zero))
                .map(|x| x.to_f64().unwrap())
                .collect();
            out.push(coeffs);
            let deg = u.len() + 3;
            let mut next = vec![BigRational::zero(); deg];
            for (i, ci) in u.iter().enumerate() {
                if ci.is_zero() {
                    continue;
                }
                if i >= 1 {
                    let half = ci * r(i as i64, 2);
                    next[i + 1] += half.clone();
                    next[i + 3] -= half;
                }
                next[i + 1] += ci * r(1, 8 * (i as i64 + 1));
                next[i + 3] -= ci * r(5, 8 * (i as i64 + 3));
            }
            while next.last().map_or(false, |x| x.is_zero()) {
                next.pop();
            }
            u = next;
        }
        out
    })
}

/// Σ_j u_{kj} ρ^j for the k-th Debye polynomial.
fn debye_eval(k: usize, rho: f64) -> f64 {
    debye_polys()[k].iter().rev().fold(0.0, |acc, &cf| acc * rho + cf)
}

/// Debye-type expansion of J_{iμ}(x), μ = 2τ ≥ 0, with `terms` orders (0 = leading).
/// Scaled by exp(πμ/2).
pub fn bessel_j_debye(tau: f64, x: f64, terms: usize) -> Scaled {
    let mu = 2.0 * tau.abs();
    let w = x.hypot(mu);
    let rho = (mu / w).powi(2);
    let mut s1 = c(0.0, 0.0);
    let mut ipow = c(1.0, 0.0);
    for k in 0..terms.min(debye_polys().len()) {
        s1 += ipow * debye_eval(k, rho) * w.powi(-(k as i32));
        ipow *= c(0.0, -1.0);
    }
    let theta = w - mu * (mu / x).asinh() - PI / 4.0;
    let e = Complex64::from_polar(1.0, theta);
    let m = (e * s1 + (-PI * mu).exp() * (e * s1).conj()) / (TAU * w).sqrt();
    let m = if tau < 0.0 { m.conj() } else { m };
    Scaled { mantissa: m, log_scale: PI * mu / 2.0 }
}

fn bessel_j_debye_auto(tau: f64, x: f64) -> Scaled {
    let mu = 2.0 * tau.abs();
    let w = x.hypot(mu);
    let rho = (mu / w).powi(2);
    // truncate at the smallest term
    let mut best = 1;
    let mut smallest = f64::INFINITY;
    for k in 1..debye_polys().len() {
        let t = (debye_eval(k, rho) * w.powi(-(k as i32))).abs();
        if t < smallest {
            smallest = t;
            best = k + 1;
        }
        if t < 1e-18 {
            break;
        }
    }
    bessel_j_debye(tau, x, best)
}

/// Ascending series for J_{2iτ}(x), scaled by exp(π|τ|).
pub fn bessel_j_series(tau: f64, x: f64) -> Result<Scaled, SpecialError> {
    let nu = c(0.0, 2.0 * tau);
    let ls = PI * tau.abs();
    let pref = (nu * (x / 2.0).ln() - lg(nu + 1.0)? - ls).exp();
    let q = -x * x / 4.0;
    let mut term = c(1.0, 0.0);
    let mut sum = crate::arith::CompensatedSum::new();
    sum.add(term);
    let mut k = 0usize;
    loop {
        k += 1;
        term *= q / (k as f64 * (nu + k as f64));
        sum.add(term);
        if k as f64 > x && term.norm() < 1e-18 * sum.value().norm().max(1e-300) {
            break;
        }
        if k > 100_000 {
            return Err(SpecialError::ConvergenceFailure(format!("J series at x = {x}")));
        }
    }
    Ok(Scaled { mantissa: pref * sum.value(), log_scale: ls })
}

/// Below this value of √(x² + 4τ²) the ascending series is used.
pub const J_SWITCH: f64 = 12.0;

/// J_{2iτ}(x), scaled by exp(π|τ|).
pub fn bessel_j_imag_order_scaled(tau: f64, x: f64) -> Result<Scaled, SpecialError> {
    if !(x > 0.0) {
        return Err(SpecialError::OutOfDomain(format!("x = {x} must be positive")));
    }
    if x.hypot(2.0 * tau) < J_SWITCH {
        bessel_j_series(tau, x)
    } else {
        Ok(bessel_j_debye_auto(tau, x))
    }
}

pub fn bessel_j_imag_order(tau: f64, x: f64) -> Result<Complex64, SpecialError> {
    Ok(bessel_j_imag_order_scaled(tau, x)?.value())
}

/// K_{2iτ}(x) (real), scaled.
pub fn bessel_k_imag_order_scaled(tau: f64, x: f64) -> Result<(f64, f64), SpecialError> {
    if !(x > 0.0) {
        return Err(SpecialError::OutOfDomain(format!("x = {x} must be positive")));
    }
    let mu = 2.0 * tau.abs();
    if mu >= 0.5 && x < 0.1 * mu {
        return bessel_k_iseries(mu, x);
    }
    bessel_k_saddle(mu, x)
}

// K = −π Im I_{iμ}(x)/sinh(πμ); the terms stay O(1) only for x ≪ μ.
fn bessel_k_iseries(mu: f64, x: f64) -> Result<(f64, f64), SpecialError> {
    let nu = c(0.0, mu);
    let ls = -PI * mu / 2.0;
    let pref = (nu * (x / 2.0).ln() - lg(nu + 1.0)? - PI * mu / 2.0).exp();
    let q = x * x / 4.0;
    let mut term = c(1.0, 0.0);
    let mut sum = crate::arith::CompensatedSum::new();
    sum.add(term);
    let mut k = 0usize;
    loop {
        k += 1;
        term *= q / (k as f64 * (nu + k as f64));
        sum.add(term);
        if k as f64 > x && term.norm() < 1e-18 * sum.value().norm() {
            break;
        }
        if k > 100_000 {
            return Err(SpecialError::ConvergenceFailure(format!("I series at x = {x}")));
        }
    }
    let im = (pref * sum.value()).im;
    let m = -TAU * im / (1.0 - (-TAU * mu).exp());
    Ok((m, ls))
}

// K_{iμ}(x) = ∫₀^∞ Re e^{−x cosh u + iμu} du taken along Im u = θ(v) through the
// saddle points: θ = π/2 on [0, arccosh(μ/x)] when x ≤ μ, the saddle i·arcsin(μ/x)
// when x > μ; past the saddle the path tilts down so the tail decays.
fn bessel_k_saddle(mu: f64, x: f64) -> Result<(f64, f64), SpecialError> {
    let (theta0, u0) = if mu >= x { (PI / 2.0, (mu / x).acosh()) } else { ((mu / x).asin(), 0.0) };
    let eps_max = 0.5 * theta0.min(1.0);
    let rate = mu.max(1.0) / 4.0;
    let path = |v: f64| -> (f64, f64) {
        if v <= u0 {
            (theta0, 0.0)
        } else {
            let d = v - u0;
            let g = (-rate * d * d).exp();
            (theta0 - eps_max * (1.0 - g), -eps_max * 2.0 * rate * d * g)
        }
    };
    let ls = -mu * theta0 - x * theta0.cos();
    let expo = |v: f64| -> Complex64 {
        let u = c(v, path(v).0);
        -x * u.cosh() + c(0.0, mu) * u - ls
    };
    let mut vmax = u0;
    while expo(vmax).re > -42.0 {
        vmax += 0.05;
        if vmax > u0 + 60.0 {
            return Err(SpecialError::ConvergenceFailure(format!("K path at x = {x}")));
        }
    }
    let f = |v: f64| (expo(v).exp() * c(1.0, path(v).1)).re;
    let phase_span = (expo(vmax).im - expo(0.0).im).abs() + mu * u0;
    let pieces = (phase_span / PI).ceil().max(4.0) as usize;
    let (val, _) = integrate_real(f, 0.0, vmax, QuadOpts { abs_tol: 1e-13, rel_tol: 1e-12, ..QuadOpts::default() }.pieces(pieces))
        .map_err(|e| SpecialError::ConvergenceFailure(e.to_string()))?;
    Ok((val, ls))
}

pub fn bessel_k_imag_order(tau: f64, x: f64) -> Result<f64, SpecialError> {
    let (m, ls) = bessel_k_imag_order_scaled(tau, x)?;
    Ok(m * ls.exp())
}

/// K_{2iτ}(x) = ∫₀^∞ e^{−x cosh u} cos(2τu) du by plain quadrature (reference route).
pub fn bessel_k_integral_plain(tau: f64, x: f64) -> Result<f64, SpecialError> {
    let umax = (1.0 + 46.0 / x).acosh() + 1.0;
    let f = |u: f64| (-x * u.cosh()).exp() * (2.0 * tau * u).cos();
    let pieces = ((2.0 * tau.abs() * umax) / PI).ceil().max(4.0) as usize;
    integrate_real(f, 0.0, umax, QuadOpts::abs(1e-300).pieces(pieces).budget(5000))
        .or_else(|_| integrate_real(f, 0.0, umax, QuadOpts::rel(1e-12).pieces(pieces)))
        .map(|r| r.0)
        .map_err(|e| SpecialError::ConvergenceFailure(e.to_string()))
}

/// J⁺_f(x) = −2π Im J_{2it_f}(x)/sinh(πt_f).
pub fn j_plus_kernel(t_f: f64, x: f64) -> Result<f64, SpecialError> {
    let j = bessel_j_imag_order_scaled(t_f, x)?;
    // log_scale = π t_f, and e^{πt}/sinh(πt) = 2/(1 − e^{−2πt})
    Ok(-2.0 * TAU * j.mantissa.im / (1.0 - (-TAU * t_f).exp()))
}

/// J⁻_f(x) = 4 cosh(πt_f) K_{2it_f}(x).
pub fn j_minus_kernel(t_f: f64, x: f64) -> Result<f64, SpecialError> {
    let (m, ls) = bessel_k_imag_order_scaled(t_f, x)?;
    Ok(2.0 * (1.0 + (-TAU * t_f).exp()) * m * (PI * t_f + ls).exp())
}

/// ω(x, τ) = |τ| arcsinh(|τ|/x) − √(x² + τ²).
pub fn omega_phase(x: f64, tau: f64) -> f64 {
    let a = tau.abs();
    a * (a / x).asinh() - x.hypot(a)
}

/// ∂ω/∂x = −√(x² + τ²)/x.
pub fn omega_phase_dx(x: f64, tau: f64) -> f64 {
    -x.hypot(tau) / x
}
