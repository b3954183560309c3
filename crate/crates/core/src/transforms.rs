//! The integral transforms of the argument: the GL(3) Voronoi transform Ψ,
//! the GL(2) transform G in its Mellin and Bessel forms, the stationary
//! point ξ* of the regime-(iii) phase with its polynomial series, and the
//! kernels ℐ and 𝔦(n) that feed the Poisson step.
//!
//! Inert amplitudes are fixed stand-ins: V = bump on [1, 2] and W = plateau
//! on [1/2, 4] from `weights`. Everything else (phases, gamma factors,
//! Bessel kernels) is the actual object.

use std::f64::consts::{E, PI, TAU};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oscint::quad::{integrate, QuadError, QuadOpts};
use crate::special::{self, GammaFactorGL3, SpecialError, SpectralParams};
use crate::weights::{afe_v, afe_w, Bump};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("{0}")]
    Special(#[from] SpecialError),
    #[error("quadrature failed: {0}")]
    QuadratureFailure(#[from] QuadError),
    #[error("series diverges: {0}")]
    SeriesDivergence(String),
    #[error("kernel is not defined in regime {0:?}")]
    WrongRegime(RegimeTag),
    #[error("{0}")]
    InvalidParams(String),
    #[error("Mellin transform has not decayed within {0} of its centre")]
    Truncation(f64),
}

type Result<T> = std::result::Result<T, TransformError>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// ε in the T^ε thresholds.
pub const EPS: f64 = 0.05;
/// Constants (c₁, c₂) of every ≍ window.
pub const WINDOW: (f64, f64) = (0.25, 4.0);
/// Number of series terms used inside the regime-(iii) kernel.
pub const KERNEL_L: usize = 6;

fn in_window(ratio: f64) -> bool {
    ratio >= WINDOW.0 && ratio <= WINDOW.1
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformParams {
    pub big_n: f64,
    pub big_x: f64,
    pub big_p: f64,
    pub big_q: f64,
    pub q: f64,
    pub r: u64,
    pub x: f64,
    pub spectral: SpectralParams,
    pub eps_f: i8,
}

impl TransformParams {
    /// A parameter set with NX/(PQ) = osc: N = 10⁴, Q = 100, P = 10, q = 15, x = X.
    pub fn with_osc_size(spectral: SpectralParams, osc: f64) -> Self {
        let (big_n, big_q, big_p) = (1e4, 100.0, 10.0);
        let big_x = osc * big_p * big_q / big_n;
        Self { big_n, big_x, big_p, big_q, q: 15.0, r: 1, x: big_x, spectral, eps_f: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(TransformError::InvalidParams(m.to_string()));
        if !(self.big_n > 0.0 && self.big_x > 0.0) {
            return bad("N and X must be positive");
        }
        if !(1.0 <= self.big_p && self.big_p <= self.big_q) {
            return bad("need 1 ≤ P ≤ Q");
        }
        if !(self.q > self.big_p && self.q <= 2.0 * self.big_p) {
            return bad("need q ∈ (P, 2P]");
        }
        if self.r == 0 || self.eps_f.abs() != 1 {
            return bad("need r ≥ 1 and ε_f = ±1");
        }
        Ok(())
    }

    /// NX/(PQ), the size of the additive twist after the x-integral.
    pub fn osc_size(&self) -> f64 {
        self.big_n * self.big_x / (self.big_p * self.big_q)
    }

    /// Nx/(qQ) for the actual q and x.
    pub fn kappa(&self) -> f64 {
        self.big_n * self.x / (self.q * self.big_q)
    }

    fn teps(&self) -> f64 {
        self.spectral.big_t().abs().max(1.0).powf(EPS)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RegimeTag {
    Negligible,
    OscStationary,
    OscKernelIi,
    OscKernelIii,
    NonOsc,
}

/// Split by NX/PQ against T^ε and |T′|^{1−ε}.
pub fn classify_g_regime(p: &TransformParams) -> RegimeTag {
    let y = p.osc_size();
    let tp = p.spectral.t_prime().abs();
    if y <= p.teps() {
        RegimeTag::NonOsc
    } else if y >= tp.powf(1.0 - EPS) {
        RegimeTag::OscKernelIi
    } else {
        RegimeTag::OscKernelIii
    }
}

/// Walks outward from `center` in steps until `mag` stays below rel·peak for
/// eight consecutive samples on each side; returns the trimmed window.
fn scan_window<F: Fn(f64) -> Result<f64>>(
    mag: F,
    center: f64,
    step: f64,
    rel: f64,
    max_extent: f64,
) -> Result<(f64, f64, f64)> {
    let mut samples = vec![(center, mag(center)?)];
    let mut peak = samples[0].1;
    for dir in [-1.0, 1.0] {
        let mut quiet = 0;
        let mut k = 1.0;
        while quiet < 8 {
            let v = center + dir * k * step;
            if k * step > max_extent {
                return Err(TransformError::Truncation(max_extent));
            }
            let m = mag(v)?;
            peak = peak.max(m);
            quiet = if m < rel * peak { quiet + 1 } else { 0 };
            samples.push((v, m));
            k += 1.0;
        }
    }
    let live = samples.iter().filter(|s| s.1 >= rel * peak);
    let lo = live.clone().map(|s| s.0).fold(center, f64::min) - 2.0 * step;
    let hi = live.map(|s| s.0).fold(center, f64::max) + 2.0 * step;
    Ok((lo, hi, peak))
}

// ---------------------------------------------------------------- Ψ

/// ∫ F(λ) e^{−ivλ} dλ for a smooth F supported in (a, b), by the trapezoidal
/// rule; exact up to F̂ at the alias frequency 2π/h, far beyond the window.
struct FourierSampler {
    lam0: f64,
    h: f64,
    vals: Vec<Complex64>,
}

impl FourierSampler {
    fn new<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, bandwidth: f64) -> Self {
        let n = ((b - a) * bandwidth / TAU).ceil().max(64.0) as usize;
        let h = (b - a) / n as f64;
        let vals = (1..n).map(|k| f(a + k as f64 * h)).collect();
        Self { lam0: a + h, h, vals }
    }

    fn eval(&self, v: f64) -> Complex64 {
        let step = cis(-v * self.h);
        let mut rot = cis(-v * self.lam0);
        let mut acc = c(0.0, 0.0);
        for f in &self.vals {
            acc += f * rot;
            rot *= step;
        }
        acc * self.h
    }
}

/// Highest |v| the sampled transforms are asked for, and the extra
/// bandwidth that pushes the alias error below 1e-13.
const MELLIN_REACH: f64 = 4000.0;
const ALIAS_PAD: f64 = 4000.0;

/// v ↦ ψ̃(1/2 − iv) for ψ(u) = e(−κu)V(u).
fn psi_mellin(kappa: f64) -> FourierSampler {
    let bump = afe_v();
    let f = |l: f64| {
        let u = l.exp();
        cis(-TAU * kappa * u) * (bump.eval(u) * (0.5 * l).exp())
    };
    let band = TAU * kappa.abs() * 2.0 + MELLIN_REACH + ALIAS_PAD;
    FourierSampler::new(f, 0.0, 2f64.ln(), band)
}

/// Ψ^±(Z) for ψ(u) = e(−κu)V(u), by the Mellin line integral on Re s = 1/2:
/// Ψ(Z) = Z/(2π) ∫ (π³Z)^{−1/2−iv} γ^±(1/2 + iv) ψ̃(1/2 − iv) dv.
pub fn psi_line_integral(zn: f64, kappa: f64, sign: i32, g: &GammaFactorGL3) -> Result<Complex64> {
    if !(zn > 0.0) {
        return Err(TransformError::InvalidParams(format!("zN = {zn} must be positive")));
    }
    let center = -TAU * kappa * 1.5;
    let mt = psi_mellin(kappa);
    let (lo, hi, peak) = scan_window(|v| Ok(mt.eval(v).norm()), center, 1.0, 1e-11, MELLIN_REACH)?;
    let lz = (PI.powi(3) * zn).ln();
    let f = |v: f64| -> Complex64 {
        let s = c(0.5, v);
        let gm = special::gamma3_pm(s, g, sign).unwrap_or(c(f64::NAN, f64::NAN));
        cis(-v * lz) * gm * mt.eval(v)
    };
    let scale = peak * (hi - lo);
    let opts = QuadOpts::abs(1e-11 * scale).pieces(((hi - lo) / 2.0).ceil() as usize + 1);
    let r = integrate(f, lo, hi, opts)?;
    Ok(r.value * (zn / TAU) * (PI.powi(3) * zn).powf(-0.5))
}

/// Ψ_x^±(z) with ψ_x(u) = e(−ux/qQ)V(u/N), tagged by regime (small argument, matched window, or negligible).
pub fn psi_transform(z: f64, p: &TransformParams, sign: i32) -> Result<(Complex64, RegimeTag)> {
    p.validate()?;
    let zn = z * p.big_n;
    let kappa = p.kappa();
    let value = psi_line_integral(zn, kappa, sign, &GammaFactorGL3::minimal_eisenstein())?;
    let teps = p.teps();
    let tag = if zn >= teps {
        let matched = (p.x > 0.0) == (sign > 0);
        if matched && in_window(sign as f64 * kappa / zn.cbrt()) {
            RegimeTag::OscStationary
        } else {
            RegimeTag::Negligible
        }
    } else if kappa.abs() >= teps {
        RegimeTag::Negligible
    } else {
        RegimeTag::NonOsc
    };
    Ok((value, tag))
}

/// Leading term of Ψ in the matched window: (κ)^{3/2} e(2 (zN)^{1/2}/κ^{1/2}) V(u*),
/// u* = (zN)^{1/2}/κ^{3/2}. The amplitude is only indicative.
pub fn psi_leading_phase(zn: f64, kappa: f64) -> f64 {
    2.0 * zn.sqrt() / kappa.abs().sqrt()
}

// ---------------------------------------------------------------- G

/// The weight g(m) fed into GL(2) Voronoi, written as g(Nξ) = e^{iφ(ξ)} (Nξ)^{−it} W(ξ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GSpec {
    /// e(±3Bξ^{1/3}), after GL(3) Voronoi and the x-integral.
    Oscillating { b: f64, sign: i8 },
    /// e(κξ) with κ = Nx/(qQ).
    NonOscillating { kappa: f64 },
}

impl GSpec {
    /// B = N^{1/3}(n₁²n₂)^{1/3}/(r^{1/3}q).
    pub fn voronoi(n1: f64, n2: f64, r: f64, q: f64, big_n: f64, sign: i8) -> Self {
        GSpec::Oscillating { b: (big_n * n1 * n1 * n2 / r).cbrt() / q, sign }
    }

    fn phase(&self, xi: f64) -> f64 {
        match *self {
            GSpec::Oscillating { b, sign } => TAU * 3.0 * b * sign as f64 * xi.cbrt(),
            GSpec::NonOscillating { kappa } => TAU * kappa * xi,
        }
    }

    /// ξ·φ′(ξ), the stationary value of τ at ξ.
    fn tau_at(&self, xi: f64) -> f64 {
        match *self {
            GSpec::Oscillating { b, sign } => TAU * b * sign as f64 * xi.cbrt(),
            GSpec::NonOscillating { kappa } => TAU * kappa * xi,
        }
    }
}

/// τ ↦ K(τ) = ∫ W(ξ) e^{iφ(ξ)} ξ^{−1/2−iτ} dξ.
fn g_mellin_core(g: &GSpec) -> FourierSampler {
    let w = afe_w();
    let f = |l: f64| {
        let xi = l.exp();
        cis(g.phase(xi)) * (w.eval(xi) * (0.5 * l).exp())
    };
    let (a, b) = w.support();
    let band = g.tau_at(b).abs() + MELLIN_REACH + ALIAS_PAD;
    FourierSampler::new(f, a.ln(), b.ln(), band)
}

fn eps_factor(p: &TransformParams, sign1: i32) -> f64 {
    if sign1 > 0 {
        1.0
    } else {
        p.eps_f as f64
    }
}

/// The γ₂ combination entering G^{±₁}: first ∓₁ second, so that it pairs
/// with J⁺ for ±₁ = + and with K for ±₁ = −.
pub fn gamma2_g(tau: f64, sp: SpectralParams, sign1: i32) -> Result<Complex64> {
    let (a, b) = special::gamma2_terms(tau, sp)?;
    Ok(a - b * sign1 as f64)
}

/// G^{±₁}(y) from the Mellin form on Re s = −1/2, shifted so τ = Im(−s) + t:
/// ε/(4π²) N^{−it} (π²yN)^{1/2+it} ∫ (π²yN)^{−iτ} γ₂(τ) K(τ) dτ.
pub fn g_transform_mellin(y: f64, p: &TransformParams, g: &GSpec, sign1: i32) -> Result<Complex64> {
    let yn = y * p.big_n;
    if !(yn > 0.0) {
        return Err(TransformError::InvalidParams(format!("y = {y} must be positive")));
    }
    let sp = p.spectral;
    let center = g.tau_at(1.5);
    let core = g_mellin_core(g);
    let (lo, hi, peak) = scan_window(|t| Ok(core.eval(t).norm()), center, 1.0, 1e-11, MELLIN_REACH)?;
    let l = (PI * PI * yn).ln();
    let f = |tau: f64| -> Complex64 {
        let gm = gamma2_g(tau, sp, sign1).unwrap_or(c(f64::NAN, f64::NAN));
        cis(-tau * l) * gm * core.eval(tau)
    };
    let scale = peak * (hi - lo);
    let opts = QuadOpts::abs(1e-11 * scale).pieces(((hi - lo) / 2.0).ceil() as usize + 1);
    let r = integrate(f, lo, hi, opts)?;
    let pref = eps_factor(p, sign1) / (4.0 * PI * PI)
        * cis(-sp.t * p.big_n.ln() + sp.t * l)
        * (PI * PI * yn).sqrt();
    Ok(pref * r.value)
}

/// J^±_f, the Bessel kernel of G^±.
pub fn bessel_kernel(t_f: f64, x: f64, sign1: i32) -> Result<f64> {
    Ok(if sign1 > 0 { special::j_plus_kernel(t_f, x)? } else { special::j_minus_kernel(t_f, x)? })
}

/// G^{±₁}(y) = ε y ∫ g(u) J^{±₁}_f(4π√(yu)) du, with u = Nξ.
pub fn g_transform_bessel(y: f64, p: &TransformParams, g: &GSpec, sign1: i32) -> Result<Complex64> {
    let yn = y * p.big_n;
    if !(yn > 0.0) {
        return Err(TransformError::InvalidParams(format!("y = {y} must be positive")));
    }
    let sp = p.spectral;
    let w = afe_w();
    let err = std::cell::Cell::new(None);
    let f = |xi: f64| -> Complex64 {
        let arg = 4.0 * PI * (yn * xi).sqrt();
        let k = match bessel_kernel(sp.t_f, arg, sign1) {
            Ok(v) => v,
            Err(e) => {
                err.set(Some(e));
                0.0
            }
        };
        cis(g.phase(xi) - sp.t * xi.ln()) * (w.eval(xi) * k)
    };
    let (a, b) = w.support();
    let freq = g.tau_at(b).abs() + sp.t.abs() + 4.0 * PI * (b * yn).sqrt() + sp.t_f;
    let pieces = 8 + (freq * 2.5 / TAU).ceil() as usize;
    let opts = QuadOpts { abs_tol: 1e-13, rel_tol: 1e-11, max_intervals: 100_000, initial_pieces: pieces };
    let r = integrate(f, a, b, opts)?;
    if let Some(e) = err.take() {
        return Err(e);
    }
    Ok(r.value * (eps_factor(p, sign1) * yn) * cis(-sp.t * p.big_n.ln()))
}

/// 4π²yN/(T|T′|): the regime-(iii) window variable, ≍ 1 where G lives.
pub fn g_window_ratio(yn: f64, sp: SpectralParams) -> f64 {
    4.0 * PI * PI * yn / (sp.big_t() * sp.t_prime().abs())
}

/// yN at which the stationary point of the oscillating G sits at ξ (the x-variable
/// of W): 4π²yN/(T|T′|) = ξ^{−1}(1 ∓ τ/T)(1 ∓ τ/T′) with τ = 2πBξ^{1/3}.
pub fn g_stationary_yn(b: f64, sign: i8, xi: f64, sp: SpectralParams) -> f64 {
    let tau = TAU * b * xi.cbrt() * sign as f64;
    let (tt, tp) = (sp.big_t(), sp.t_prime());
    let u = (1.0 - tau / tt) * (1.0 - tau / tp) / xi;
    u * tt * tp.abs() / (4.0 * PI * PI)
}

// ---------------------------------------------------------------- ξ* series

/// Homogeneous polynomial in (c₁, c₂): coefficient k multiplies c₁^k c₂^{deg−k}.
#[derive(Clone, Debug, PartialEq)]
pub struct HomPoly(pub Vec<BigRational>);

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl HomPoly {
    fn zero(deg: usize) -> Self {
        HomPoly(vec![BigRational::zero(); deg + 1])
    }

    fn constant(v: BigRational) -> Self {
        HomPoly(vec![v])
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    fn add(&self, o: &HomPoly) -> HomPoly {
        assert_eq!(self.degree(), o.degree());
        HomPoly(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    fn scale(&self, s: &BigRational) -> HomPoly {
        HomPoly(self.0.iter().map(|a| a * s).collect())
    }

    fn mul(&self, o: &HomPoly) -> HomPoly {
        let mut out = HomPoly::zero(self.degree() + o.degree());
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                out.0[i + j] += a * b;
            }
        }
        out
    }

    /// c₁^a + c₂^a.
    fn power_sum(a: usize) -> HomPoly {
        let mut p = HomPoly::zero(a);
        p.0[0] += BigRational::one();
        p.0[a] += BigRational::one();
        p
    }

    pub fn eval(&self, c1: f64, c2: f64) -> f64 {
        let d = self.degree() as i32;
        self.0
            .iter()
            .enumerate()
            .map(|(k, a)| a.to_f64().unwrap_or(f64::NAN) * c1.powi(k as i32) * c2.powi(d - k as i32))
            .sum()
    }
}

type Series = Vec<HomPoly>;

fn series_mul(a: &Series, b: &Series, max_deg: usize) -> Series {
    (0..=max_deg)
        .map(|d| {
            let mut acc = HomPoly::zero(d);
            for i in 0..=d {
                if i < a.len() && d - i < b.len() {
                    acc = acc.add(&a[i].mul(&b[d - i]));
                }
            }
            acc
        })
        .collect()
}

/// The homogeneous parts η_ℓ of η = ξ*/ξ₀ as polynomials in (c₁, c₂) = (Bξ₀/T, Bξ₀/T′),
/// where η³ = (1 ∓ c₁η)(1 ∓ c₂η); ξ_ℓ = ξ₀ η_ℓ.
pub fn xi_polynomials(l: usize, sign: i8) -> Vec<HomPoly> {
    let s = rat(-(sign as i64), 1);
    let third = rat(1, 3);
    let mut eta: Series = vec![HomPoly::constant(BigRational::one())];
    let c_sum = HomPoly::power_sum(1);
    let c_prod = HomPoly(vec![BigRational::zero(), BigRational::one(), BigRational::zero()]);
    for d in 1..=l {
        let mut trial = eta.clone();
        trial.push(HomPoly::zero(d));
        let sq = series_mul(&trial, &trial, d);
        let cube = series_mul(&sq, &trial, d);
        let mut rhs = c_sum.mul(&eta[d - 1]).scale(&s);
        if d >= 2 {
            rhs = rhs.add(&c_prod.mul(&sq[d - 2]));
        }
        let next = rhs.add(&cube[d].scale(&rat(-1, 1))).scale(&third);
        eta.push(next);
    }
    eta
}

/// Q_ℓ^± with h(ξ*) = main ± (B/2π) Σ Q_ℓ(B/T, B/T′) ξ₀^{ℓ+1}.
pub fn q_polynomials(l: usize, sign: i8) -> Vec<HomPoly> {
    let eta = xi_polynomials(l, sign);
    let sigma = rat(sign as i64, 1);
    let mut total: Series = eta.iter().map(|p| p.scale(&rat(3, 1))).collect();
    let mut power = eta.clone();
    for j in 2..=l + 1 {
        power = series_mul(&power, &eta, l);
        let mut coef = rat(1, j as i64);
        for _ in 0..j - 1 {
            coef *= &sigma;
        }
        let ps = HomPoly::power_sum(j - 1).scale(&coef);
        for d in (j - 1)..=l {
            let term = ps.mul(&power[d - (j - 1)]);
            total[d] = total[d].add(&term);
        }
    }
    total
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseSeries {
    pub b: f64,
    pub xi0: f64,
    pub l: usize,
    pub sign: i8,
    /// ξ_ℓ, ℓ = 0..=L.
    pub xi_terms: Vec<f64>,
    /// Q_ℓ^±(B/T, B/T′), ℓ = 0..=L.
    pub coeffs: Vec<f64>,
    /// Root of ξ³ = ξ₀³(1 ∓ Bξ/T)(1 ∓ Bξ/T′) found by Newton's method.
    pub root: f64,
}

impl PhaseSeries {
    pub fn xi_star(&self) -> f64 {
        self.xi_terms.iter().sum()
    }
}

fn cubic_root(xi0: f64, b1: f64, b2: f64, sign: i8, start: f64) -> Result<f64> {
    let s = -(sign as f64);
    let f = |x: f64| x * x * x - xi0.powi(3) * (1.0 + s * b1 * x) * (1.0 + s * b2 * x);
    let df = |x: f64| 3.0 * x * x - xi0.powi(3) * (s * b1 * (1.0 + s * b2 * x) + s * b2 * (1.0 + s * b1 * x));
    let mut x = start;
    for _ in 0..100 {
        let dx = f(x) / df(x);
        x -= dx;
        if dx.abs() <= 1e-15 * x.abs() {
            return Ok(x);
        }
    }
    Err(TransformError::SeriesDivergence("Newton iteration for ξ* did not converge".into()))
}

/// ξ* = ξ₀ + ξ₁ + … + ξ_L with ξ₀ = (2πT|T′|/yN)^{1/3}, plus the numeric root.
pub fn xi_star_series(b: f64, sp: SpectralParams, yn: f64, l: usize, sign: i8) -> Result<PhaseSeries> {
    let (tt, tp) = (sp.big_t(), sp.t_prime());
    if !(b > 0.0 && yn > 0.0) || tp == 0.0 {
        return Err(TransformError::InvalidParams("need B > 0, yN > 0, T′ ≠ 0".into()));
    }
    if b / tp.abs() >= 0.25 {
        return Err(TransformError::SeriesDivergence(format!("B/|T′| = {} ≥ 1/4", b / tp.abs())));
    }
    let xi0 = (TAU * tt * tp.abs() / yn).cbrt();
    let (b1, b2) = (b / tt, b / tp);
    let (c1, c2) = (b1 * xi0, b2 * xi0);
    let xi_terms: Vec<f64> = xi_polynomials(l, sign).iter().map(|p| xi0 * p.eval(c1, c2)).collect();
    let coeffs: Vec<f64> = q_polynomials(l, sign).iter().map(|p| p.eval(b1, b2)).collect();
    let start: f64 = xi_terms.iter().sum();
    let root = cubic_root(xi0, b1, b2, sign, start)?;
    Ok(PhaseSeries { b, xi0, l, sign, xi_terms, coeffs, root })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PhaseValue {
    /// Log main terms plus ±(B/2π) Σ Q_ℓ ξ₀^{ℓ+1}.
    pub expansion: f64,
    /// h evaluated at the numeric root.
    pub direct: f64,
}

fn log_main(sp: SpectralParams) -> f64 {
    let (tt, tp) = (sp.big_t(), sp.t_prime());
    -(tt / TAU) * (tt / (2.0 * E)).ln() - (tp / TAU) * (tp.abs() / (2.0 * E)).ln()
}

/// The regime-(iii) phase h(ξ) in cycles.
pub fn h_phase(xi: f64, b: f64, sp: SpectralParams, yn: f64, sign: i8) -> f64 {
    let (tt, tp) = (sp.big_t(), sp.t_prime());
    let s = sign as f64;
    let bx = s * b * xi;
    (-bx * (PI * PI * yn).ln() - 3.0 * bx * (xi / (TAU * E)).ln()
        + (bx - tt) * ((tt - bx) / (2.0 * E)).ln()
        + (bx - tp) * ((tp - bx).abs() / (2.0 * E)).ln())
        / TAU
}

pub fn phase_at_xistar(series: &PhaseSeries, sp: SpectralParams, yn: f64, sign: i8) -> Result<PhaseValue> {
    if series.b / sp.t_prime().abs() >= 0.25 {
        return Err(TransformError::SeriesDivergence("B/|T′| ≥ 1/4".into()));
    }
    let sum: f64 = series.coeffs.iter().enumerate().map(|(l, q)| q * series.xi0.powi(l as i32 + 1)).sum();
    let expansion = log_main(sp) + sign as f64 * series.b / TAU * sum;
    let direct = h_phase(series.root, series.b, sp, yn, sign);
    Ok(PhaseValue { expansion, direct })
}

// ---------------------------------------------------------------- ℐ and 𝔦

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelArgs {
    pub n2: f64,
    pub n1: u64,
    pub r: u64,
    pub m: f64,
    pub q: f64,
    pub sign: i8,
    pub sign1: i8,
}

/// ±(B/2π) Σ_{ℓ≤L} Q_ℓ ξ₀^{ℓ+1} with B, ξ₀ read off the kernel arguments.
fn kernel_iii_phase(a: &KernelArgs, p: &TransformParams, qs: &[HomPoly]) -> Result<f64> {
    let sp = p.spectral;
    let (tt, tp) = (sp.big_t(), sp.t_prime());
    let n1 = a.n1 as f64;
    let b = (p.big_n * n1 * n1 * a.n2 / a.r as f64).cbrt() / a.q;
    let xi0 = (TAU * a.q * a.q * tt * tp.abs() / (a.m * p.big_n)).cbrt();
    if b * xi0 / tp.abs() >= 0.25 {
        return Err(TransformError::SeriesDivergence(format!("Bξ₀/|T′| = {}", b * xi0 / tp.abs())));
    }
    let sum: f64 = qs.iter().enumerate().map(|(l, q)| q.eval(b / tt, b / tp) * xi0.powi(l as i32 + 1)).sum();
    Ok(a.sign as f64 * b / TAU * sum)
}

/// W₁ stand-in: bumps in each of its three arguments.
fn w1(a: f64, b: f64, c: f64) -> f64 {
    Bump::new(0.5, 4.0).eval(a) * Bump::new(1.0, 16.0).eval(b) * Bump::new(0.5, 4.0).eval(c)
}

/// w^{±₁}(τ) = ε/(4π) π^{2it} (π²r)^{−iτ} γ₂(τ) e(−(3τ/2π) log(±τ/2πe)).
pub fn w_pm1(tau: f64, p: &TransformParams, sign: i8, sign1: i32) -> Result<Complex64> {
    let sp = p.spectral;
    let st = sign as f64 * tau;
    if st <= 0.0 {
        return Ok(c(0.0, 0.0));
    }
    let g = gamma2_g(tau, sp, sign1)?;
    let ph = 2.0 * sp.t * PI.ln() - tau * (PI * PI * p.r as f64).ln() - 3.0 * tau * (st / (TAU * E)).ln();
    Ok(g * cis(ph) * (eps_factor(p, sign1) / (4.0 * PI)))
}

/// ℐ^{±₁}(n₂, n₁, r, m, q): a pure phase in regime (iii), the τ-integral in regime (ii).
pub fn i_kernel(a: &KernelArgs, p: &TransformParams, regime: RegimeTag) -> Result<Complex64> {
    match regime {
        RegimeTag::OscKernelIii => {
            let qs = q_polynomials(KERNEL_L, a.sign);
            Ok(cis(TAU * kernel_iii_phase(a, p, &qs)?))
        }
        RegimeTag::OscKernelIi => {
            let y = p.osc_size();
            let n1 = a.n1 as f64;
            let arg1 = n1 * n1 * a.n2 * p.big_q.powi(3) / (a.r as f64 * p.big_n.powi(2) * p.big_x.powi(3));
            let arg3 = a.q / p.big_p;
            let lr = (n1 * n1 * a.n2 / (a.m * a.q)).ln();
            let s = a.sign as f64;
            let f = |tau: f64| -> Complex64 {
                let amp = w1(arg1, s * tau / y, arg3);
                if amp == 0.0 {
                    return c(0.0, 0.0);
                }
                let w = w_pm1(tau, p, a.sign, a.sign1 as i32).unwrap_or(c(f64::NAN, f64::NAN));
                cis(tau * lr) * w * amp
            };
            let (lo, hi) = if s > 0.0 { (y, 16.0 * y) } else { (-16.0 * y, -y) };
            let pieces = ((hi - lo) / 2.0).ceil() as usize + 1;
            let r = integrate(f, lo, hi, QuadOpts::abs(1e-10).pieces(pieces))?;
            Ok(r.value / y.sqrt())
        }
        other => Err(TransformError::WrongRegime(other)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrakIArgs {
    pub n1: u64,
    pub r: u64,
    pub m: f64,
    pub mp: f64,
    pub q1: u64,
    pub q2: u64,
    pub q2p: u64,
    pub sign: i8,
}

impl FrakIArgs {
    /// N₂ = rN²X³/(n₁²Q³).
    pub fn n2_size(&self, p: &TransformParams) -> f64 {
        let n1 = self.n1 as f64;
        self.r as f64 * p.big_n.powi(2) * p.big_x.powi(3) / (n1 * n1 * p.big_q.powi(3))
    }

    /// rq₁q₂q₂′/n₁, the Poisson modulus.
    pub fn modulus(&self) -> f64 {
        (self.r * self.q1 * self.q2 * self.q2p) as f64 / self.n1 as f64
    }
}

/// 𝔦(n) = N₂ ∫ W(ξ) ℐ(N₂ξ; m, q₁q₂) conj ℐ(N₂ξ; m′, q₁q₂′) e(−nN₂ξ/(rq₁q₂q₂′/n₁)) dξ
/// with the regime-(iii) kernels and W the bump on [1, 2].
pub fn frak_i(n: i64, a: &FrakIArgs, p: &TransformParams) -> Result<Complex64> {
    let n2s = a.n2_size(p);
    let qs = q_polynomials(KERNEL_L, a.sign);
    let k = |m: f64, q2: u64| KernelArgs {
        n2: 0.0,
        n1: a.n1,
        r: a.r,
        m,
        q: (a.q1 * q2) as f64,
        sign: a.sign,
        sign1: 1,
    };
    let (ka, kb) = (k(a.m, a.q2), k(a.mp, a.q2p));
    let lin = n as f64 * n2s / a.modulus();
    let phase = |xi: f64| -> Result<f64> {
        let pa = kernel_iii_phase(&KernelArgs { n2: n2s * xi, ..ka }, p, &qs)?;
        let pb = kernel_iii_phase(&KernelArgs { n2: n2s * xi, ..kb }, p, &qs)?;
        Ok(pa - pb - lin * xi)
    };
    // validate the series range at both ends before integrating
    phase(1.0)?;
    phase(2.0)?;
    let d = (phase(2.0)? - phase(1.0)?).abs();
    let bump = afe_v();
    let f = |xi: f64| cis(TAU * phase(xi).unwrap_or(f64::NAN)) * bump.eval(xi);
    let r = integrate(f, 1.0, 2.0, QuadOpts::abs(1e-13).pieces(4 + (2.0 * d).ceil() as usize))?;
    Ok(r.value * n2s)
}

/// Cutoff PQ²n₁/(q₁NX²)·T^ε for 𝔦(n).
pub fn frak_i_cutoff(a: &FrakIArgs, p: &TransformParams) -> f64 {
    p.big_p * p.big_q * p.big_q * a.n1 as f64 / (a.q1 as f64 * p.big_n * p.big_x * p.big_x) * p.teps()
}

/// Window M(PQ/NX + (NX/PQ)²|T′|^{−2})T^ε for m − m′ when q = q′.
pub fn frak_i_m_window(big_m: f64, p: &TransformParams) -> f64 {
    let y = p.osc_size();
    let tp = p.spectral.t_prime().abs();
    big_m * (1.0 / y + y * y / (tp * tp)) * p.teps()
}

/// M ≍ P²T|T′|/N, the dual length in regime (iii).
pub fn dual_length(p: &TransformParams) -> f64 {
    let sp = p.spectral;
    p.big_p * p.big_p * sp.big_t() * sp.t_prime().abs() / p.big_n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp() -> SpectralParams {
        SpectralParams::new(140.0, 60.0)
    }

    fn yn_at(u: f64, s: SpectralParams) -> f64 {
        u * s.big_t() * s.t_prime().abs() / (4.0 * PI * PI)
    }

    #[test]
    fn classify_examples() {
        let s = sp();
        let tp = s.t_prime().abs();
        assert_eq!(classify_g_regime(&TransformParams::with_osc_size(s, 0.5)), RegimeTag::NonOsc);
        assert_eq!(classify_g_regime(&TransformParams::with_osc_size(s, 10.0 * tp)), RegimeTag::OscKernelIi);
        // |T′| = T^0.9
        let big_t: f64 = 300.0;
        let tp9 = big_t.powf(0.9);
        let s9 = SpectralParams::new((big_t + tp9) / 2.0, (big_t - tp9) / 2.0);
        let p = TransformParams::with_osc_size(s9, tp9.sqrt());
        assert_eq!(classify_g_regime(&p), RegimeTag::OscKernelIii);
    }

    #[test]
    fn classify_is_monotone_in_x() {
        let rank = |t: RegimeTag| match t {
            RegimeTag::NonOsc => 0,
            RegimeTag::OscKernelIii => 1,
            _ => 2,
        };
        let mut last = 0;
        for k in 0..200 {
            let osc = 0.1 * 1.05f64.powi(k);
            let r = rank(classify_g_regime(&TransformParams::with_osc_size(sp(), osc)));
            assert!(r >= last);
            last = r;
        }
        assert_eq!(last, 2);
    }

    #[test]
    fn params_validation() {
        let mut p = TransformParams::with_osc_size(sp(), 3.0);
        assert!(p.validate().is_ok());
        p.q = 25.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn g_dual_forms_agree() {
        let g = GSpec::Oscillating { b: 1.0, sign: 1 };
        for (t, tf, u) in [(0.0, 5.0, 1.0), (3.0, 9.0, 0.25), (12.0, 15.0, 4.0)] {
            let s = SpectralParams::new(t, tf);
            let p = TransformParams::with_osc_size(s, 3.0);
            let y = yn_at(u, s) / p.big_n;
            for s1 in [1, -1] {
                let m = g_transform_mellin(y, &p, &g, s1).unwrap();
                let b = g_transform_bessel(y, &p, &g, s1).unwrap();
                assert!((m - b).norm() <= 1e-6 * (m.norm() + 1e-6), "{t} {tf} {u} {s1}");
            }
        }
    }

    #[test]
    fn g_minus_is_small_at_large_argument() {
        let s = sp();
        let p = TransformParams::with_osc_size(s, 3.0);
        let g = GSpec::Oscillating { b: 2.0, sign: 1 };
        let y = g_stationary_yn(2.0, 1, 1.5, s) / p.big_n;
        let plus = g_transform_bessel(y, &p, &g, 1).unwrap().norm();
        let minus = g_transform_bessel(y, &p, &g, -1).unwrap().norm();
        assert!(minus < 1e-6 * plus, "{minus} vs {plus}");
        // 4π(yN/2)^{1/2} ≥ 3T^ε·2t_f: the K kernel is far past its turning point
        let x_min = 3.0 * p.teps() * 2.0 * s.t_f;
        let yn = 2.0 * (x_min / (4.0 * PI)).powi(2);
        let minus = g_transform_bessel(yn / p.big_n, &p, &g, -1).unwrap().norm();
        assert!(minus < 1e-20 * yn, "{minus}");
    }

    #[test]
    fn g_window_inside_and_outside() {
        let s = sp();
        let p = TransformParams::with_osc_size(s, 3.0);
        let g = GSpec::Oscillating { b: 2.0, sign: 1 };
        let mut peak: f64 = 0.0;
        for xi in [1.0, 1.5, 2.0] {
            let yn = g_stationary_yn(2.0, 1, xi, s);
            assert!(in_window(g_window_ratio(yn, s)));
            let v = g_transform_bessel(yn / p.big_n, &p, &g, 1).unwrap().norm();
            let ratio = v / yn.sqrt();
            assert!((0.05..=20.0).contains(&ratio), "{ratio}");
            peak = peak.max(v);
        }
        for u in [1.0 / 16.0, 16.0] {
            let v = g_transform_bessel(yn_at(u, s) / p.big_n, &p, &g, 1).unwrap().norm();
            assert!(peak / v >= 1e3, "u = {u}: {}", peak / v);
        }
    }

    #[test]
    fn psi_small_argument_is_bounded() {
        let s = sp();
        let g = GammaFactorGL3::minimal_eisenstein();
        let teps = s.big_t().powf(EPS);
        for (zn, kappa) in [(0.1, 0.2), (0.5, 0.5), (1.0, 1.0)] {
            for sign in [1, -1] {
                let v = psi_line_integral(zn, kappa, sign, &g).unwrap();
                assert!(v.norm() <= teps, "{zn} {kappa} {sign}");
            }
        }
    }

    #[test]
    fn psi_matched_window() {
        let g = GammaFactorGL3::minimal_eisenstein();
        let zn: f64 = 1e4;
        // stationary point u* = (zN)^{1/2}/κ^{3/2} at the centre of V
        let kappa = (zn.sqrt() / 1.5).powf(2.0 / 3.0);
        let m = psi_line_integral(zn, kappa, 1, &g).unwrap();
        let mm = psi_line_integral(zn, kappa, -1, &g).unwrap();
        assert!(mm.norm() <= 1e-3 * m.norm());
        let ratio = m.norm() / zn.sqrt();
        assert!((0.05..=20.0).contains(&ratio), "{ratio}");
        let d = 2.0;
        let a = psi_line_integral(zn - d, kappa, 1, &g).unwrap();
        let b = psi_line_integral(zn + d, kappa, 1, &g).unwrap();
        let num = (b / a).arg();
        let pred = TAU * (psi_leading_phase(zn + d, kappa) - psi_leading_phase(zn - d, kappa));
        assert!((num - pred).abs() <= 0.05 * pred.abs(), "{num} vs {pred}");
    }

    #[test]
    fn psi_tags() {
        let s = sp();
        let mut p = TransformParams::with_osc_size(s, 3.0);
        let z = 1e4 / p.big_n;
        let (_, tag) = psi_transform(z, &p, 1).unwrap();
        // κ = 2 is far below (zN)^{1/3}
        assert_eq!(tag, RegimeTag::Negligible);
        p.big_x = 0.5;
        p.x = (1e4f64.sqrt() / 1.5).powf(2.0 / 3.0) * p.q * p.big_q / p.big_n;
        let (_, tag) = psi_transform(z, &p, 1).unwrap();
        assert_eq!(tag, RegimeTag::OscStationary);
        let (_, tag) = psi_transform(z, &p, -1).unwrap();
        assert_eq!(tag, RegimeTag::Negligible);
        let (_, tag) = psi_transform(0.5 / p.big_n, &TransformParams::with_osc_size(s, 0.1), 1).unwrap();
        assert_eq!(tag, RegimeTag::NonOsc);
    }

    #[test]
    fn xi0_is_one_at_the_centre() {
        let s = sp();
        let yn = TAU * s.big_t() * s.t_prime().abs();
        let ser = xi_star_series(1.0, s, yn, 3, 1).unwrap();
        assert!((ser.xi0 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn xi1_example() {
        // B/T = 0.01, B/T′ = 0.02
        let s = SpectralParams::new(75.0, 25.0);
        let yn = TAU * 100.0 * 50.0;
        let ser = xi_star_series(1.0, s, yn, 3, 1).unwrap();
        assert!((ser.xi_terms[1] + 0.01).abs() < 1e-15);
        let ser = xi_star_series(1.0, s, yn, 3, -1).unwrap();
        assert!((ser.xi_terms[1] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn q_polynomials_low_order_exact() {
        for sign in [1i8, -1] {
            let q = q_polynomials(4, sign);
            assert_eq!(q[0], HomPoly(vec![rat(3, 1)]));
            let h = rat(-(sign as i64), 2);
            assert_eq!(q[1], HomPoly(vec![h.clone(), h]));
            for (d, p) in q.iter().enumerate() {
                assert_eq!(p.degree(), d);
            }
        }
    }

    #[test]
    fn series_rejects_large_b() {
        let s = sp();
        let r = xi_star_series(0.3 * 80.0, s, 1e4, 3, 1);
        assert!(matches!(r, Err(TransformError::SeriesDivergence(_))));
    }

    #[test]
    fn series_converges_to_root() {
        let s = sp();
        let tp = s.t_prime().abs();
        let yn = TAU * s.big_t() * tp;
        for rho in [0.02, 0.05, 0.1] {
            for sign in [1i8, -1] {
                let s3 = xi_star_series(rho * tp, s, yn, 3, sign).unwrap();
                let s6 = xi_star_series(rho * tp, s, yn, 6, sign).unwrap();
                let e3 = (s3.xi_star() - s3.root).abs();
                let e6 = (s6.xi_star() - s6.root).abs().max(1e-16);
                assert!(e3 <= 10.0 * rho.powi(4));
                assert!(e3 / e6 >= rho.powi(-2), "{rho} {sign}: {e3} {e6}");
                let pv = phase_at_xistar(&s3, s, yn, sign).unwrap();
                let b = rho * tp;
                assert!((pv.expansion - pv.direct).abs() <= 10.0 * b.powi(5) / tp.powi(4));
            }
        }
    }

    fn kernel_params() -> (TransformParams, KernelArgs) {
        let p = TransformParams::with_osc_size(sp(), 3.0);
        let n2 = 1.5 * p.big_n.powi(2) * p.big_x.powi(3) / p.big_q.powi(3);
        let a = KernelArgs { n2, n1: 1, r: 1, m: dual_length(&p), q: 15.0, sign: 1, sign1: 1 };
        (p, a)
    }

    #[test]
    fn kernel_iii_is_a_phase() {
        let (p, a) = kernel_params();
        for sign in [1i8, -1] {
            let a = KernelArgs { sign, ..a };
            let v = i_kernel(&a, &p, RegimeTag::OscKernelIii).unwrap();
            assert!((v.norm() - 1.0).abs() < 1e-14);
            // derivative in n₂ against the leading term sign·Bξ₀/(2πn₂)
            let h = 1e-4 * a.n2;
            let up = i_kernel(&KernelArgs { n2: a.n2 + h, ..a }, &p, RegimeTag::OscKernelIii).unwrap();
            let dn = i_kernel(&KernelArgs { n2: a.n2 - h, ..a }, &p, RegimeTag::OscKernelIii).unwrap();
            let d = (up / dn).arg() / (2.0 * h * TAU);
            let s = p.spectral;
            let b = (p.big_n * a.n2).cbrt() / a.q;
            let xi0 = (TAU * a.q * a.q * s.big_t() * s.t_prime().abs() / (a.m * p.big_n)).cbrt();
            let lead = sign as f64 * b * xi0 / (TAU * a.n2);
            assert!(in_window(d / lead), "{d} vs {lead}");
        }
        assert!(matches!(
            i_kernel(&a, &p, RegimeTag::NonOsc),
            Err(TransformError::WrongRegime(RegimeTag::NonOsc))
        ));
    }

    #[test]
    fn kernel_ii_is_bounded() {
        let p = TransformParams::with_osc_size(sp(), 100.0);
        assert_eq!(classify_g_regime(&p), RegimeTag::OscKernelIi);
        let n2 = 1.5 * p.big_n.powi(2) * p.big_x.powi(3) / p.big_q.powi(3);
        for sign in [1i8, -1] {
            for sign1 in [1i8, -1] {
                let a = KernelArgs { n2, n1: 1, r: 1, m: dual_length(&p), q: 15.0, sign, sign1 };
                let v = i_kernel(&a, &p, RegimeTag::OscKernelIi).unwrap();
                assert!(v.norm() <= 10.0 * p.teps(), "{sign} {sign1}: {}", v.norm());
            }
        }
    }

    fn frak_args() -> FrakIArgs {
        FrakIArgs { n1: 1, r: 1, m: 160.0, mp: 200.0, q1: 1, q2: 15, q2p: 17, sign: 1 }
    }

    #[test]
    fn frak_i_bounds() {
        let p = TransformParams::with_osc_size(sp(), 3.0);
        let a = frak_args();
        let n2 = a.n2_size(&p);
        let peak = frak_i(0, &a, &p).unwrap().norm();
        for n in [0i64, 1, -3, 10, 30, -100, 300] {
            let v = frak_i(n, &a, &p).unwrap().norm();
            assert!(v <= n2 * (1.0 + 1e-9));
            if n != 0 {
                let mid = n2 * (n.unsigned_abs() as f64 * n2 / a.modulus()).powf(-0.5);
                assert!(v <= 10.0 * mid);
            }
        }
        // ladder cutoff·2^k: decreasing, and down by 10³ at k = 3
        let cut = frak_i_cutoff(&a, &p);
        let mut last = peak;
        for k in 1..=3 {
            let n = (cut * 2f64.powi(k)).round() as i64;
            let v = frak_i(n, &a, &p).unwrap().norm();
            assert!(v < last);
            last = v;
        }
        assert!(peak / last >= 1e3, "{}", peak / last);
    }

    #[test]
    fn frak_i_zero_flat_inside_m_window() {
        let p = TransformParams::with_osc_size(sp(), 3.0);
        let m = dual_length(&p);
        let win = frak_i_m_window(m, &p);
        let at = |dm: f64| {
            let a = FrakIArgs { n1: 1, r: 1, m, mp: m + dm, q1: 1, q2: 15, q2p: 15, sign: 1 };
            frak_i(0, &a, &p).unwrap().norm()
        };
        let peak = at(0.0);
        assert!(at(win) >= 0.9 * peak);
        assert!(at(8.0 * win) <= at(win));
    }

    /// Outside the m-window the two kernel phases differ by well under one
    /// cycle across the support at this scale, so the decay does not appear.
    #[test]
    #[ignore = "not reachable at T = 200: see decisions ledger"]
    fn frak_i_zero_decays_past_m_window() {
        let p = TransformParams::with_osc_size(sp(), 3.0);
        let m = dual_length(&p);
        let win = frak_i_m_window(m, &p);
        let at = |dm: f64| {
            let a = FrakIArgs { n1: 1, r: 1, m, mp: m + dm, q1: 1, q2: 15, q2p: 15, sign: 1 };
            frak_i(0, &a, &p).unwrap().norm()
        };
        assert!(at(0.0) / at(2.0 * win) >= 1e2);
    }
}
