//! Oscillatory integrals: adaptive evaluation, integration-by-parts decay,
//! stationary phase, and Poisson summation.

pub mod quad;

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

pub use quad::{integrate, integrate_real, QuadError, QuadOpts, QuadResult};

use crate::weights::Bump;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OscError {
    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadError),
    #[error("phase derivative {min_dh:.3e} at x = {x} is below the declared R = {r}")]
    MisdeclaredScales { x: f64, min_dh: f64, r: f64 },
    #[error("no critical point of the phase on the support")]
    NoCriticalPoint,
    #[error("second derivative {d2h:.3e} at the critical point {t0} is degenerate")]
    DegenerateSecondDerivative { t0: f64, d2h: f64 },
    #[error("cannot combine a phase in cycles with one in radians")]
    UnitMismatch,
    #[error("phase derivative inconsistent with finite differences at x = {0}")]
    InconsistentDerivative(f64),
    #[error("truncated sum did not converge within {0} terms")]
    TruncationFailure(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PhaseUnit {
    /// paired with e(h) = exp(2πi h)
    Cycles,
    /// paired with exp(i h)
    Radians,
}

impl PhaseUnit {
    fn to_radians(self) -> f64 {
        match self {
            PhaseUnit::Cycles => TAU,
            PhaseUnit::Radians => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseScales {
    pub y: f64,
    pub q: f64,
    pub r: f64,
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct PhaseModel {
    pub unit: PhaseUnit,
    h: RealFn,
    dh: RealFn,
    d2h: RealFn,
    pub scales: PhaseScales,
}

impl std::fmt::Debug for PhaseModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PhaseModel").field("unit", &self.unit).field("scales", &self.scales).finish()
    }
}

impl PhaseModel {
    pub fn new(
        unit: PhaseUnit,
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dh: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        scales: PhaseScales,
    ) -> Self {
        Self { unit, h: Arc::new(h), dh: Arc::new(dh), d2h: Arc::new(d2h), scales }
    }

    pub fn h(&self, x: f64) -> f64 {
        (self.h)(x)
    }
    pub fn dh(&self, x: f64) -> f64 {
        (self.dh)(x)
    }
    pub fn d2h(&self, x: f64) -> f64 {
        (self.d2h)(x)
    }

    /// e(h(x)) or exp(i h(x)) per the declared unit.
    pub fn character(&self, x: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.unit.to_radians() * self.h(x))
    }

    /// h + c in the same unit.
    pub fn shifted(&self, c: f64) -> Self {
        let h = self.h.clone();
        Self { h: Arc::new(move |x| h(x) + c), ..self.clone() }
    }

    /// Sum of two phases declared in the same unit.
    pub fn plus(&self, other: &PhaseModel) -> Result<Self, OscError> {
        if self.unit != other.unit {
            return Err(OscError::UnitMismatch);
        }
        let (h1, h2) = (self.h.clone(), other.h.clone());
        let (d1, d2) = (self.dh.clone(), other.dh.clone());
        let (s1, s2) = (self.d2h.clone(), other.d2h.clone());
        Ok(Self {
            unit: self.unit,
            h: Arc::new(move |x| h1(x) + h2(x)),
            dh: Arc::new(move |x| d1(x) + d2(x)),
            d2h: Arc::new(move |x| s1(x) + s2(x)),
            scales: self.scales,
        })
    }

    /// Central differences of h and dh agree with dh and d2h to relative 1e-4.
    pub fn check_consistency(&self, points: &[f64]) -> Result<(), OscError> {
        for &x in points {
            let step = 1e-5 * x.abs().max(1e-3);
            let fd1 = (self.h(x + step) - self.h(x - step)) / (2.0 * step);
            let fd2 = (self.dh(x + step) - self.dh(x - step)) / (2.0 * step);
            let ok1 = (fd1 - self.dh(x)).abs() <= 1e-4 * self.dh(x).abs().max(1e-8 * self.scales.y.max(1.0));
            let ok2 = (fd2 - self.d2h(x)).abs() <= 1e-4 * self.d2h(x).abs().max(1e-8 * self.scales.y.max(1.0));
            if !(ok1 && ok2) {
                return Err(OscError::InconsistentDerivative(x));
            }
        }
        Ok(())
    }
}

#[derive(Clone)]
pub struct InertWeight {
    w: RealFn,
    pub support: (f64, f64),
    pub x_scale: f64,
    pub v_scale: f64,
}

impl std::fmt::Debug for InertWeight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InertWeight")
            .field("support", &self.support)
            .field("x_scale", &self.x_scale)
            .field("v_scale", &self.v_scale)
            .finish()
    }
}

impl InertWeight {
    pub fn new(
        w: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support: (f64, f64),
        x_scale: f64,
        v_scale: f64,
    ) -> Self {
        Self { w: Arc::new(w), support, x_scale, v_scale }
    }

    /// Peak-one bump on [lo, hi]; V is a fifth of the support length.
    pub fn bump(lo: f64, hi: f64) -> Self {
        let b = Bump::new(lo, hi);
        Self::new(move |x| b.eval(x), (lo, hi), 1.0, (hi - lo) / 5.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.support.0 || x >= self.support.1 {
            0.0
        } else {
            (self.w)(x)
        }
    }

    pub fn mass(&self) -> f64 {
        integrate_real(|x| self.eval(x), self.support.0, self.support.1, QuadOpts::rel(1e-13))
            .map(|r| r.0)
            .unwrap_or(f64::NAN)
    }

    /// max |w′|·V/X over a uniform sample of the support.
    pub fn inert_constant(&self, samples: usize) -> f64 {
        let (a, b) = self.support;
        let h = (b - a) * 1e-6;
        (1..samples)
            .map(|i| {
                let x = a + (b - a) * i as f64 / samples as f64;
                ((self.eval(x + h) - self.eval(x - h)) / (2.0 * h)).abs() * self.v_scale / self.x_scale
            })
            .fold(0.0, f64::max)
    }
}

fn oscillation_pieces(h: &PhaseModel, a: f64, b: f64) -> usize {
    let n = 256;
    let mut maxd: f64 = 0.0;
    for i in 0..=n {
        let x = a + (b - a) * i as f64 / n as f64;
        maxd = maxd.max(h.dh(x).abs());
    }
    let cycles = maxd * h.unit.to_radians() * (b - a) / TAU;
    (cycles / 2.0).ceil().clamp(1.0, 20_000.0) as usize
}

/// ∫ w(ξ) e(h(ξ)) dξ over the support of w, with error estimate.
pub fn integrate_oscillatory(
    w: &InertWeight,
    h: &PhaseModel,
    tol: f64,
) -> Result<(Complex64, f64), OscError> {
    let (a, b) = w.support;
    let pieces = oscillation_pieces(h, a, b);
    let opts = QuadOpts { abs_tol: tol, rel_tol: 0.0, max_intervals: 200_000, initial_pieces: pieces };
    let r = integrate(|x| h.character(x) * w.eval(x), a, b, opts)?;
    Ok((r.value, r.err))
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub a: u32,
    pub ladder: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub errors: Vec<f64>,
    pub bounds: Vec<f64>,
    /// Smallest resolved decay exponent between consecutive ladder points.
    pub fitted_exponent: f64,
    pub passed: bool,
}

/// Decay of ∫ w e(h_R) along a geometric ladder of R.
///
/// `family(R)` must return a phase whose derivative is at least its declared R on the
/// support; the declared scales of each member define the bound
/// (β−α)·X·[(QR/√Y)^−A + (RV)^−A].
pub fn nonstationary_decay_check(
    w: &InertWeight,
    family: &dyn Fn(f64) -> PhaseModel,
    ladder: &[f64],
    a: u32,
) -> Result<DecayReport, OscError> {
    let (lo, hi) = w.support;
    let mass = w.mass().abs().max(1e-300);
    let mut mags = Vec::new();
    let mut errs = Vec::new();
    let mut bounds = Vec::new();
    for &r in ladder {
        let h = family(r);
        for i in 0..=200 {
            let x = lo + (hi - lo) * i as f64 / 200.0;
            let d = h.dh(x).abs();
            if d < h.scales.r * (1.0 - 1e-9) {
                return Err(OscError::MisdeclaredScales { x, min_dh: d, r: h.scales.r });
            }
        }
        let (v, e) = integrate_oscillatory(w, &h, 1e-13 * mass)?;
        let s = h.scales;
        let af = a as f64;
        let bound = (hi - lo)
            * w.x_scale
            * ((s.q * s.r / s.y.sqrt()).powf(-af) + (s.r * w.v_scale).powf(-af));
        mags.push(v.norm());
        errs.push(e);
        bounds.push(bound);
    }
    let floor = |i: usize| (10.0 * errs[i]).max(1e-12 * mass);
    let mut exponent = f64::INFINITY;
    for i in 0..ladder.len().saturating_sub(1) {
        if mags[i] <= floor(i) {
            continue;
        }
        let next = mags[i + 1].max(floor(i + 1));
        let e = (mags[i] / next).ln() / (ladder[i + 1] / ladder[i]).ln();
        exponent = exponent.min(e);
    }
    let passed = exponent >= a as f64 * 0.9;
    Ok(DecayReport {
        a,
        ladder: ladder.to_vec(),
        magnitudes: mags,
        errors: errs,
        bounds,
        fitted_exponent: exponent,
        passed,
    })
}

/// Critical point of h on [a, b]: sign change on a 64-cell grid, then
/// safeguarded Newton/bisection.
pub fn find_critical_point(h: &PhaseModel, a: f64, b: f64) -> Result<f64, OscError> {
    let cells = 64;
    let xs: Vec<f64> = (0..=cells).map(|i| a + (b - a) * i as f64 / cells as f64).collect();
    for win in xs.windows(2) {
        let (mut lo, mut hi) = (win[0], win[1]);
        let (flo, fhi) = (h.dh(lo), h.dh(hi));
        if flo == 0.0 {
            return Ok(lo);
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        let neg_at_lo = flo < 0.0;
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let f = h.dh(x);
            if f == 0.0 {
                return Ok(x);
            }
            if (f < 0.0) == neg_at_lo {
                lo = x;
            } else {
                hi = x;
            }
            let d2 = h.d2h(x);
            let newton = x - f / d2;
            let next = if d2 != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if (next - x).abs() <= 1e-12 * x.abs().max(1e-300) || hi - lo <= 1e-12 * x.abs() {
                return Ok(next);
            }
            x = next;
        }
        return Ok(x);
    }
    if h.dh(b) == 0.0 {
        return Ok(b);
    }
    Err(OscError::NoCriticalPoint)
}

/// Leading stationary-phase term w(t₀)·√(2π/|h″|)·exp(i h(t₀) ± iπ/4), phases
/// converted to radians. Degeneracy threshold: |h″(t₀)| < 10⁻⁸·Y/X₁² with
/// X₁ the support length.
pub fn stationary_phase_leading(w: &InertWeight, h: &PhaseModel) -> Result<(Complex64, f64), OscError> {
    let (a, b) = w.support;
    let t0 = find_critical_point(h, a, b)?;
    let k = h.unit.to_radians();
    let d2 = h.d2h(t0);
    let x1 = b - a;
    if d2.abs() < 1e-8 * h.scales.y / (x1 * x1) {
        return Err(OscError::DegenerateSecondDerivative { t0, d2h: d2 });
    }
    let d2r = k * d2;
    let amp = w.eval(t0) * (TAU / d2r.abs()).sqrt();
    let ph = k * h.h(t0) + d2r.signum() * PI / 4.0;
    Ok((Complex64::from_polar(amp, ph), t0))
}

/// Phases with a single nondegenerate critical point at x = 1 inside the bump
/// on [1/2, 3/2], each of size Y: quadratic, Y(x − log x), and the
/// cube-root phase Y(x − 3x^{1/3}) of the GL(3) Voronoi output.
pub fn test_phase_corpus(y: f64) -> Vec<(&'static str, InertWeight, PhaseModel)> {
    let sc = PhaseScales { y, q: 1.0, r: 1.0 };
    let w = InertWeight::bump(0.5, 1.5);
    vec![
        (
            "quadratic",
            w.clone(),
            PhaseModel::new(PhaseUnit::Radians, move |x| y * (x * x / 2.0 - x), move |x| y * (x - 1.0), move |_| y, sc),
        ),
        (
            "x - log x",
            w.clone(),
            PhaseModel::new(PhaseUnit::Radians, move |x| y * (x - x.ln()), move |x| y * (1.0 - 1.0 / x), move |x| y / (x * x), sc),
        ),
        (
            "x - 3x^(1/3)",
            w,
            PhaseModel::new(
                PhaseUnit::Radians,
                move |x| y * (x - 3.0 * x.cbrt()),
                move |x| y * (1.0 - x.powf(-2.0 / 3.0)),
                move |x| y * (2.0 / 3.0) * x.powf(-5.0 / 3.0),
                sc,
            ),
        ),
    ]
}

/// |∫ w e^{ih} / leading term − 1| for each corpus entry.
pub fn stationary_ratio_errors(y: f64) -> Result<Vec<(&'static str, f64)>, OscError> {
    test_phase_corpus(y)
        .into_iter()
        .map(|(name, w, h)| {
            let (lead, _) = stationary_phase_leading(&w, &h)?;
            let (v, _) = integrate_oscillatory(&w, &h, 1e-11 * lead.norm())?;
            Ok((name, (v / lead - 1.0).norm()))
        })
        .collect()
}

/// A Schwartz function with closed-form Fourier transform f̂(y) = ∫ f(x) e(−xy) dx.
pub trait SchwartzSpec {
    fn f(&self, x: f64) -> Complex64;
    fn fhat(&self, y: f64) -> Complex64;
    /// |f(x)| < eps outside |x − center| ≤ radius.
    fn space_radius(&self, eps: f64) -> (f64, f64);
    /// |f̂(y)| < eps outside |y| ≤ radius.
    fn freq_radius(&self, eps: f64) -> f64;
}

/// exp(−π((x − x₀)/s)²).
#[derive(Clone, Copy, Debug)]
pub struct Gaussian {
    pub center: f64,
    pub width: f64,
}

impl SchwartzSpec for Gaussian {
    fn f(&self, x: f64) -> Complex64 {
        let u = (x - self.center) / self.width;
        Complex64::new((-PI * u * u).exp(), 0.0)
    }
    fn fhat(&self, y: f64) -> Complex64 {
        let s = self.width;
        Complex64::from_polar(s * (-PI * s * s * y * y).exp(), -TAU * self.center * y)
    }
    fn space_radius(&self, eps: f64) -> (f64, f64) {
        (self.center, self.width * ((-eps.ln()) / PI).sqrt())
    }
    fn freq_radius(&self, eps: f64) -> f64 {
        ((-(eps / self.width).ln()) / PI).sqrt() / self.width
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PoissonReport {
    pub lhs: (f64, f64),
    pub rhs: (f64, f64),
    pub discrepancy: f64,
    pub lhs_terms: usize,
    pub rhs_terms: usize,
    /// Largest single dual term over |RHS|.
    pub dominant_fraction: f64,
}

/// Σ_{n≡β (c)} f(n) against (1/c) Σ_n f̂(n/c) e(nβ/c).
pub fn poisson_verify(f: &dyn SchwartzSpec, beta: i64, c: u64) -> Result<PoissonReport, OscError> {
    const EPS: f64 = 1e-20;
    const MAX_TERMS: usize = 10_000_000;
    let cf = c as f64;
    let (center, rad) = f.space_radius(EPS);
    let k_lo = ((center - rad - beta as f64) / cf).floor() as i64 - 1;
    let k_hi = ((center + rad - beta as f64) / cf).ceil() as i64 + 1;
    if (k_hi - k_lo) as usize > MAX_TERMS {
        return Err(OscError::TruncationFailure(MAX_TERMS));
    }
    let mut lhs = crate::arith::CompensatedSum::new();
    for k in k_lo..=k_hi {
        lhs.add(f.f((beta + k * c as i64) as f64));
    }
    let yr = f.freq_radius(EPS);
    let n_hi = (yr * cf).ceil() as i64 + 1;
    if (2 * n_hi) as usize > MAX_TERMS {
        return Err(OscError::TruncationFailure(MAX_TERMS));
    }
    let mut rhs = crate::arith::CompensatedSum::new();
    let mut biggest: f64 = 0.0;
    for n in -n_hi..=n_hi {
        let t = f.fhat(n as f64 / cf) * crate::arith::e_frac(n * beta, c) / cf;
        biggest = biggest.max(t.norm());
        rhs.add(t);
    }
    let (l, r) = (lhs.value(), rhs.value());
    Ok(PoissonReport {
        lhs: (l.re, l.im),
        rhs: (r.re, r.im),
        discrepancy: (l - r).norm(),
        lhs_terms: (k_hi - k_lo + 1) as usize,
        rhs_terms: (2 * n_hi + 1) as usize,
        dominant_fraction: biggest / r.norm().max(1e-300),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scales(y: f64, r: f64) -> PhaseScales {
        PhaseScales { y, q: 1.0, r }
    }

    fn quad_phase(y: f64) -> PhaseModel {
        PhaseModel::new(
            PhaseUnit::Radians,
            move |x| y * (x * x / 2.0 - x),
            move |x| y * (x - 1.0),
            move |_| y,
            scales(y, y),
        )
    }

    #[test]
    fn bump_mass_with_zero_phase() {
        let w = InertWeight::bump(1.0, 2.0);
        let zero = PhaseModel::new(PhaseUnit::Cycles, |_| 0.0, |_| 0.0, |_| 0.0, scales(1.0, 1.0));
        let (v, e) = integrate_oscillatory(&w, &zero, 1e-13).unwrap();
        assert!((v.re - w.mass()).abs() < 1e-12 && v.im.abs() < 1e-15 && e <= 1e-13);
    }

    #[test]
    fn fresnel_limit() {
        // ∫ e(ξ²) dξ = e(1/8)/√2
        let target = Complex64::from_polar(1.0 / 2f64.sqrt(), TAU / 8.0);
        let phase = PhaseModel::new(PhaseUnit::Cycles, |x| x * x, |x| 2.0 * x, |_| 2.0, scales(1.0, 1.0));
        let mut last = f64::INFINITY;
        for half in [3.0, 6.0, 12.0, 24.0] {
            let pl = crate::weights::Plateau::new(-half, -half + 0.3 * half, half - 0.3 * half, half);
            let w = InertWeight::new(move |x| pl.eval(x), (-half, half), 1.0, 0.3 * half);
            let (v, _) = integrate_oscillatory(&w, &phase, 1e-11).unwrap();
            let err = (v - target).norm();
            assert!(err < last || err < 1e-11);
            last = err;
        }
        assert!(last < 1e-6, "{last}");
    }

    #[test]
    fn unit_mismatch_is_an_error() {
        let a = PhaseModel::new(PhaseUnit::Cycles, |x| x, |_| 1.0, |_| 0.0, scales(1.0, 1.0));
        let b = PhaseModel::new(PhaseUnit::Radians, |x| x, |_| 1.0, |_| 0.0, scales(1.0, 1.0));
        assert_eq!(a.plus(&b).unwrap_err(), OscError::UnitMismatch);
        assert!(a.plus(&a).is_ok());
        assert!(quad_phase(10.0).check_consistency(&[0.5, 1.2, 1.9]).is_ok());
        let bad = PhaseModel::new(PhaseUnit::Cycles, |x| x * x, |x| x, |_| 1.0, scales(1.0, 1.0));
        assert!(bad.check_consistency(&[1.0]).is_err());
    }

    #[test]
    fn linear_phase_decay() {
        let w = InertWeight::bump(1.0, 2.0);
        let fam = |r: f64| PhaseModel::new(PhaseUnit::Cycles, move |x| r * x, move |_| r, |_| 0.0, scales(r, r));
        let rep = nonstationary_decay_check(&w, &fam, &[1e2, 1e3, 1e4], 2).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert!(rep.fitted_exponent >= 1.8);
        let logfam = |r: f64| {
            PhaseModel::new(PhaseUnit::Cycles, move |x| r * x.ln(), move |x| r / x, move |x| -r / (x * x), scales(r, r / 2.0))
        };
        let rep = nonstationary_decay_check(&w, &logfam, &[1e2, 1e3, 1e4], 2).unwrap();
        assert!(rep.fitted_exponent >= 1.8, "{rep:?}");
    }

    #[test]
    fn stationary_point_rejected_by_decay_check() {
        let w = InertWeight::bump(0.5, 1.5);
        let fam = |r: f64| quad_phase(r);
        assert!(matches!(
            nonstationary_decay_check(&w, &fam, &[1e2, 1e3], 2),
            Err(OscError::MisdeclaredScales { .. })
        ));
    }

    #[test]
    fn stationary_leading_term() {
        let w = InertWeight::bump(0.5, 1.5);
        let mut last = f64::INFINITY;
        for y in [1e2, 1e3, 1e4] {
            let h = quad_phase(y);
            let (lead, t0) = stationary_phase_leading(&w, &h).unwrap();
            assert!((t0 - 1.0).abs() < 1e-12);
            let expect = Complex64::from_polar(w.eval(1.0) * (TAU / y).sqrt(), PI / 4.0 - y / 2.0);
            assert!((lead - expect).norm() < 1e-12 * expect.norm());
            let (v, _) = integrate_oscillatory(&w, &h, 1e-13).unwrap();
            let rel = (v / lead - 1.0).norm();
            if y == 1e3 {
                assert!(rel < 0.05);
            }
            assert!(rel < last);
            last = rel;
        }
        // symmetric about t₀: quotient by e^{iπ/4}e^{−iY/2} is real
        let h = quad_phase(1e3);
        let (v, _) = integrate_oscillatory(&w, &h, 1e-13).unwrap();
        let z = v * Complex64::from_polar(1.0, -(PI / 4.0 - 500.0));
        // next-order correction is i·w″(t₀)/(2Y·w(t₀)), about 4e-3 here
        assert!(z.im.abs() < 1e-2 * z.norm());
    }

    #[test]
    fn corpus_ratios_improve() {
        let e2 = stationary_ratio_errors(1e2).unwrap();
        let e3 = stationary_ratio_errors(1e3).unwrap();
        let e4 = stationary_ratio_errors(1e4).unwrap();
        for i in 0..3 {
            assert!(e3[i].1 < 0.05, "{}", e3[i].0);
            assert!(e2[i].1 > e3[i].1 && e3[i].1 > e4[i].1, "{}", e3[i].0);
        }
    }

    #[test]
    fn shift_multiplies_by_phase() {
        let w = InertWeight::bump(0.5, 1.5);
        let h = quad_phase(300.0);
        let (a, _) = stationary_phase_leading(&w, &h).unwrap();
        let (b, _) = stationary_phase_leading(&w, &h.shifted(0.7)).unwrap();
        assert!((b - a * Complex64::from_polar(1.0, 0.7)).norm() < 1e-13);
    }

    #[test]
    fn degenerate_and_missing_points() {
        let w = InertWeight::bump(0.5, 1.5);
        let cubic = PhaseModel::new(
            PhaseUnit::Radians,
            |x| (x - 1.0).powi(3),
            |x| 3.0 * (x - 1.0).powi(2) - 0.0,
            |x| 6.0 * (x - 1.0),
            scales(1.0, 1.0),
        );
        // dh ≥ 0 touches zero at 1 without a sign change: grid node hits it exactly
        match stationary_phase_leading(&w, &cubic) {
            Err(OscError::DegenerateSecondDerivative { .. }) | Err(OscError::NoCriticalPoint) => {}
            other => panic!("{other:?}"),
        }
        let lin = PhaseModel::new(PhaseUnit::Radians, |x| x, |_| 1.0, |_| 0.0, scales(1.0, 1.0));
        assert_eq!(stationary_phase_leading(&w, &lin).unwrap_err(), OscError::NoCriticalPoint);
    }

    #[test]
    fn poisson_gaussians() {
        let g = Gaussian { center: 0.0, width: 1.0 };
        assert!(poisson_verify(&g, 0, 1).unwrap().discrepancy < 1e-10);
        let g = Gaussian { center: 0.3, width: 10.0 };
        let rep = poisson_verify(&g, 2, 5).unwrap();
        assert!(rep.discrepancy < 1e-8, "{rep:?}");
        let wide = Gaussian { center: 0.0, width: 200.0 };
        let rep = poisson_verify(&wide, 1, 3).unwrap();
        assert!(rep.dominant_fraction > 1.0 - 1e-12);
    }
}
