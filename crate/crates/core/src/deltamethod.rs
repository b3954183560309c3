//! The delta-symbol expansion δ(n) = (1/Q) Σ_q (1/q) Σ*_a e(an/q) ∫ g(q,x) e(nx/qQ) dx.
//!
//! g is built from the divisor-switching identity
//! δ(n) = Σ_q Σ*_a e(an/q) Δ_q(n), Δ_q(u) = Σ_r (qr)⁻¹ [w(qr) − w(|u|/(qr))],
//! with w a bump on [Q/2, Q] normalized so that Σ_d w(d) = 1. The constant
//! part of Δ_q is multiplied by a smoothed plateau U equal to 1 on |u| ≤ Q²/2,
//! and the r-sum is cut where it no longer reaches |u| ≤ Q²/2, so that
//! g(q, ·) is the Fourier transform of an integrable function agreeing with
//! Δ_q at every integer |n| ≤ Q²/2:
//!
//! g(q,x) = c_q Û(x/qQ) − 2 Σ_{r ≤ Q/q} Φ(r x),  Φ(y) = ∫ w(s) cos(2πys/Q) ds.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{e_frac, ramanujan, CompensatedSum};
use crate::coeffs::CoefficientTable;
use crate::oscint::quad::{gauss_legendre, integrate, QuadError, QuadOpts};
use crate::weights::{afe_v, afe_w};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeltaError {
    #[error("{0}")]
    OutOfRange(String),
    #[error("quadrature failed: {0}")]
    QuadratureFailure(#[from] QuadError),
    #[error("coefficient tables cover n <= {have}, need {need}")]
    InsufficientData { have: usize, need: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeltaConfig {
    pub q: f64,
    /// a in exp(a − a/(1 − τ²)) for the bump w
    pub sharpness: f64,
    pub quad_tol: f64,
    pub x_cutoff: f64,
}

/// Truncation point of the x-integral used by default: 10·Q^{1/2}.
pub fn default_x_cutoff(q: f64) -> f64 {
    10.0 * q.sqrt()
}

impl DeltaConfig {
    pub fn new(q: f64) -> Self {
        Self { q, sharpness: 4.0, quad_tol: 1e-11, x_cutoff: default_x_cutoff(q) }
    }

    pub fn with_cutoff(mut self, x_cutoff: f64) -> Self {
        self.x_cutoff = x_cutoff;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.quad_tol = tol;
        self
    }

    /// Largest |n| at which the expansion is exact.
    pub fn n_max(&self) -> f64 {
        self.q * self.q / 2.0
    }

    fn validate(&self) -> Result<(), DeltaError> {
        if !(self.q >= 10.0) {
            return Err(DeltaError::OutOfRange(format!("Q = {} must be at least 10", self.q)));
        }
        if !(self.quad_tol > 0.0 && self.x_cutoff > 0.0 && self.sharpness > 0.0) {
            return Err(DeltaError::OutOfRange("tolerance, cutoff and sharpness must be positive".into()));
        }
        Ok(())
    }
}

const PSI_STEP: f64 = 0.004;
const PSI_MAX: f64 = 240.0;

/// The DFI weights for one configuration, with Φ tabulated.
pub struct DeltaWeights {
    pub cfg: DeltaConfig,
    kappa: f64,
    c: Vec<f64>,
    plateau: f64,
    sigma: f64,
    // ψ(y) = ∫_{1/2}^{1} b(t) cos(2πyt) dt and ψ′ on a uniform grid
    psi: Vec<(f64, f64)>,
}

impl DeltaWeights {
    pub fn new(cfg: DeltaConfig) -> Result<Self, DeltaError> {
        cfg.validate()?;
        let big_q = cfg.q;
        let a = cfg.sharpness;
        let b = move |t: f64| -> f64 {
            if t <= 0.5 || t >= 1.0 {
                return 0.0;
            }
            let tau = 4.0 * t - 3.0;
            (a - a / (1.0 - tau * tau)).exp()
        };
        let mut norm = 0.0;
        let d_hi = big_q.floor() as u64;
        for d in 1..=d_hi {
            norm += b(d as f64 / big_q);
        }
        let kappa = 1.0 / norm;
        let qmax = big_q.floor() as usize;
        let mut c = vec![0.0; qmax + 1];
        for (q, cq) in c.iter_mut().enumerate().skip(1) {
            let mut r = 1;
            while (q * r) as f64 <= big_q {
                let s = (q * r) as f64;
                *cq += kappa * b(s / big_q) / s;
                r += 1;
            }
        }
        let (xs, ws) = gauss_legendre(600);
        let nodes: Vec<(f64, f64)> = xs
            .iter()
            .zip(&ws)
            .map(|(&x, &w)| {
                let t = 0.75 + 0.25 * x;
                (t, 0.25 * w * b(t))
            })
            .collect();
        let npts = (PSI_MAX / PSI_STEP).round() as usize + 1;
        let psi = (0..npts)
            .map(|i| {
                let y = i as f64 * PSI_STEP;
                let mut v = 0.0;
                let mut dv = 0.0;
                for &(t, wb) in &nodes {
                    let (s, co) = (TAU * y * t).sin_cos();
                    v += wb * co;
                    dv -= wb * TAU * t * s;
                }
                (v, dv)
            })
            .collect();
        let sigma = big_q * big_q / 4.0;
        let plateau = cfg.n_max() + 8.0 * sigma;
        Ok(Self { cfg, kappa, c, plateau, sigma, psi })
    }

    /// w(s) = κ b(s/Q).
    pub fn w(&self, s: f64) -> f64 {
        let t = s / self.cfg.q;
        if t <= 0.5 || t >= 1.0 {
            return 0.0;
        }
        let tau = 4.0 * t - 3.0;
        let a = self.cfg.sharpness;
        self.kappa * (a - a / (1.0 - tau * tau)).exp()
    }

    /// Φ(y) = ∫ w(s) cos(2πys/Q) ds, by cubic Hermite interpolation.
    pub fn phi(&self, y: f64) -> f64 {
        let y = y.abs();
        if y >= PSI_MAX {
            return 0.0;
        }
        let u = y / PSI_STEP;
        let i = (u.floor() as usize).min(self.psi.len() - 2);
        let s = u - i as f64;
        let (p0, d0) = self.psi[i];
        let (p1, d1) = self.psi[i + 1];
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let v = h00 * p0 + h10 * PSI_STEP * d0 + h01 * p1 + h11 * PSI_STEP * d1;
        self.kappa * self.cfg.q * v
    }

    /// Fourier transform of the smoothed plateau U = 1_{[−A,A]} ∗ N(0, σ²).
    pub fn u_hat(&self, xi: f64) -> f64 {
        let damp = (-2.0 * PI * PI * self.sigma * self.sigma * xi * xi).exp();
        if xi.abs() * self.plateau < 1e-8 {
            return 2.0 * self.plateau * damp;
        }
        (TAU * self.plateau * xi).sin() / (PI * xi) * damp
    }

    /// Beyond this |x| the plateau term of g(q, ·) is below e^{−40}.
    fn spike_extent(&self, q: u64) -> f64 {
        q as f64 * self.cfg.q * 20f64.sqrt() / (PI * self.sigma)
    }

    fn r_max(&self, q: u64) -> u64 {
        (self.cfg.q / q as f64).floor() as u64
    }

    fn check_q(&self, q: u64) -> Result<(), DeltaError> {
        if q == 0 || q as f64 > self.cfg.q {
            return Err(DeltaError::OutOfRange(format!("q = {q} outside [1, Q = {}]", self.cfg.q)));
        }
        Ok(())
    }

    pub fn c_q(&self, q: u64) -> f64 {
        self.c[q as usize]
    }

    pub fn g(&self, q: u64, x: f64) -> Result<f64, DeltaError> {
        self.check_q(q)?;
        Ok(self.g_unchecked(q, x))
    }

    fn g_unchecked(&self, q: u64, x: f64) -> f64 {
        let x = x.abs();
        let mut v = 0.0;
        if x < self.spike_extent(q) {
            v += self.c[q as usize] * self.u_hat(x / (q as f64 * self.cfg.q));
        }
        let rm = self.r_max(q);
        for r in 1..=rm {
            let y = r as f64 * x;
            if y >= PSI_MAX {
                break;
            }
            v -= 2.0 * self.phi(y);
        }
        v
    }

    /// Initial subdivision count for an integrand g(q,x)·(oscillation of frequency f) on [lo, hi].
    fn pieces(&self, q: u64, lo: f64, hi: f64, extra_freq: f64) -> usize {
        let rm = self.r_max(q) as f64;
        let spike = if lo < self.spike_extent(q) {
            self.plateau / (q as f64 * self.cfg.q)
        } else {
            0.0
        };
        let freq = rm + spike + extra_freq;
        ((hi - lo) * freq).ceil().clamp(4.0, 200_000.0) as usize
    }

    /// ∫_{−X}^{X} g(q,x) e(nx/qQ) dx, split at the edge of the plateau term.
    fn x_integral(&self, q: u64, n: i64) -> Result<(f64, f64), DeltaError> {
        let xc = self.cfg.x_cutoff;
        let scale = q as f64 * self.cfg.q;
        let f = |x: f64| Complex64::new(self.g_unchecked(q, x) * (TAU * n as f64 * x / scale).cos(), 0.0);
        let mid = self.spike_extent(q).min(xc);
        let hi = xc.min(PSI_MAX);
        let freq = n.unsigned_abs() as f64 / scale;
        let tol = self.cfg.quad_tol / 4.0;
        let mut total = 0.0;
        let mut err = 0.0;
        for (lo, up) in [(0.0, mid), (mid, hi)] {
            if up <= lo {
                continue;
            }
            let opts = QuadOpts::abs(tol).pieces(self.pieces(q, lo, up, freq)).budget(400_000);
            let r = integrate(f, lo, up, opts)?;
            total += r.value.re;
            err += r.err;
        }
        Ok((2.0 * total, 2.0 * err))
    }
}

/// g(q, x) for the given configuration.
pub fn g_weight(q: u64, x: f64, cfg: &DeltaConfig) -> Result<f64, DeltaError> {
    DeltaWeights::new(*cfg)?.g(q, x)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DeltaValue {
    pub value: f64,
    pub err: f64,
}

impl DeltaWeights {
    /// The truncated expansion at n (real, since g is even).
    pub fn delta_expand(&self, n: i64) -> Result<DeltaValue, DeltaError> {
        if n.unsigned_abs() as f64 > self.cfg.n_max() {
            return Err(DeltaError::OutOfRange(format!("|n| = {} exceeds Q²/2", n.abs())));
        }
        let big_q = self.cfg.q;
        let mut acc = CompensatedSum::new();
        let mut err = 0.0;
        for q in 1..=big_q.floor() as u64 {
            let rq = ramanujan(q, n) as f64;
            if rq == 0.0 {
                continue;
            }
            let (v, e) = self.x_integral(q, n)?;
            acc.add(Complex64::new(rq * v / q as f64, 0.0));
            err += rq.abs() * e / q as f64;
        }
        Ok(DeltaValue { value: acc.value().re / big_q, err: err / big_q })
    }
}

pub fn delta_expand(n: i64, cfg: &DeltaConfig) -> Result<DeltaValue, DeltaError> {
    DeltaWeights::new(*cfg)?.delta_expand(n)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecomposeResult {
    pub direct: Complex64,
    pub decomposed: Complex64,
    pub quad_err: f64,
}

/// S_r(N) = Σ A(n) λ(n) n^{−it} V(n/N) directly and through the delta expansion
/// Σ_n Σ_m A(n) V(n/N) λ(m) m^{−it} W(m/N) δ(m − n).
pub fn decompose_sum(
    coeff_a: &CoefficientTable,
    coeff_l: &CoefficientTable,
    t: f64,
    big_n: u64,
    cfg: &DeltaConfig,
) -> Result<DecomposeResult, DeltaError> {
    let dw = DeltaWeights::new(*cfg)?;
    let v = afe_v();
    let w = afe_w();
    let need = (w.support().1 * big_n as f64).ceil() as usize;
    for tab in [coeff_a, coeff_l] {
        if tab.n_max() < need {
            return Err(DeltaError::InsufficientData { have: tab.n_max(), need });
        }
    }
    let nf = big_n as f64;
    let a_terms: Vec<(i64, Complex64)> = (1..=need)
        .filter_map(|n| {
            let x = v.eval(n as f64 / nf);
            (x != 0.0).then(|| (n as i64, coeff_a.get(n) * x))
        })
        .collect();
    let l_terms: Vec<(i64, Complex64)> = (1..=need)
        .filter_map(|m| {
            let x = w.eval(m as f64 / nf);
            let tw = Complex64::from_polar(1.0, -t * (m as f64).ln());
            (x != 0.0).then(|| (m as i64, coeff_l.get(m) * tw * x))
        })
        .collect();
    let mut direct = CompensatedSum::new();
    for &(n, a) in &a_terms {
        let tw = Complex64::from_polar(1.0, -t * (n as f64).ln());
        direct.add(a * coeff_l.get(n as usize) * tw);
    }
    let max_gap = (need as f64) as i64;
    if max_gap as f64 > cfg.n_max() {
        return Err(DeltaError::OutOfRange(format!("m − n reaches {max_gap} > Q²/2")));
    }
    let big_q = cfg.q;
    let mut total = CompensatedSum::new();
    let mut qerr = 0.0;
    let mass: f64 = a_terms.iter().map(|z| z.1.norm()).sum::<f64>() * l_terms.iter().map(|z| z.1.norm()).sum::<f64>();
    for q in 1..=big_q.floor() as u64 {
        let qi = q as usize;
        let scale = q as f64 * big_q;
        // R_q(σ − ρ) for residues ρ, σ
        let rmat: Vec<f64> = (0..qi * qi)
            .map(|k| ramanujan(q, (k % qi) as i64 - (k / qi) as i64) as f64)
            .collect();
        let integrand = |x: f64| -> Complex64 {
            let g = dw.g_unchecked(q, x);
            if g == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let mut ba = vec![Complex64::new(0.0, 0.0); qi];
            let mut bl = vec![Complex64::new(0.0, 0.0); qi];
            for &(n, a) in &a_terms {
                ba[(n % q as i64) as usize] += a * Complex64::from_polar(1.0, -TAU * n as f64 * x / scale);
            }
            for &(m, l) in &l_terms {
                bl[(m % q as i64) as usize] += l * Complex64::from_polar(1.0, TAU * m as f64 * x / scale);
            }
            let mut s = Complex64::new(0.0, 0.0);
            for (rho, &bar) in ba.iter().enumerate() {
                if bar == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row = &rmat[rho * qi..(rho + 1) * qi];
                let mut inner = Complex64::new(0.0, 0.0);
                for (sig, &bls) in bl.iter().enumerate() {
                    inner += bls * row[sig];
                }
                s += bar * inner;
            }
            s * g
        };
        let xc = cfg.x_cutoff.min(PSI_MAX);
        let mid = dw.spike_extent(q).min(xc);
        let freq = need as f64 / scale;
        let tol = cfg.quad_tol * mass.max(1.0) / 4.0;
        for (lo, up) in [(-xc, -mid), (-mid, mid), (mid, xc)] {
            if up <= lo {
                continue;
            }
            let opts = QuadOpts::abs(tol).pieces(dw.pieces(q, lo.abs().min(up.abs()), up.max(-lo), freq)).budget(400_000);
            let r = integrate(integrand, lo, up, opts)?;
            total.add(r.value / q as f64);
            qerr += r.err / q as f64;
        }
    }
    Ok(DecomposeResult { direct: direct.value(), decomposed: total.value() / big_q, quad_err: qerr / big_q })
}

/// e(an/q) summed over units a, exposed for the expansion's arithmetic side.
pub fn unit_sum(n: i64, q: u64) -> Complex64 {
    let mut acc = CompensatedSum::new();
    for a in 1..=q {
        if crate::arith::gcd(a, q) == 1 {
            acc.add(e_frac(a as i64 * n, q));
        }
    }
    acc.value()
}
