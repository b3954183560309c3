//! Adaptive Gauss–Kronrod (10/21) quadrature and Gauss–Legendre rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("subdivision budget of {intervals} intervals exhausted (error estimate {err:.3e})")]
    Budget { intervals: usize, err: f64 },
    #[error("integrand returned a non-finite value at x = {0}")]
    NonFinite(f64),
}

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208977211500,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

// Gauss weights for the nodes XGK[1], XGK[3], …, XGK[9].
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadOpts {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
    /// Number of equal pieces the range is split into before adapting.
    pub initial_pieces: usize,
}

impl Default for QuadOpts {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10, max_intervals: 20_000, initial_pieces: 1 }
    }
}

impl QuadOpts {
    pub fn abs(tol: f64) -> Self {
        Self { abs_tol: tol, rel_tol: 0.0, ..Self::default() }
    }

    pub fn rel(tol: f64) -> Self {
        Self { abs_tol: 0.0, rel_tol: tol, ..Self::default() }
    }

    pub fn pieces(mut self, n: usize) -> Self {
        self.initial_pieces = n.max(1);
        self
    }

    pub fn budget(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: Complex64,
    pub err: f64,
    pub evals: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk21<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Result<Piece, QuadError> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    if !(fc.re.is_finite() && fc.im.is_finite()) {
        return Err(QuadError::NonFinite(c));
    }
    let mut kron = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut fv = [(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); 10];
    for j in 0..10 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        if !(f1.re.is_finite() && f1.im.is_finite() && f2.re.is_finite() && f2.im.is_finite()) {
            return Err(QuadError::NonFinite(c + dx));
        }
        fv[j] = (f1, f2);
        kron += (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    // QUADPACK-style error scaling
    let mean = kron * 0.5;
    let mut resasc = WGK[10] * (fc - mean).norm();
    for j in 0..10 {
        resasc += WGK[j] * ((fv[j].0 - mean).norm() + (fv[j].1 - mean).norm());
    }
    resasc *= h.abs();
    let mut err = ((kron - gauss) * h).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let value = kron * h;
    let resabs = value.norm();
    let floor = 50.0 * f64::EPSILON * resabs;
    Ok(Piece { a, b, value, err: err.max(floor) })
}

/// Globally adaptive integration of a complex integrand over [a, b].
pub fn integrate<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    opts: QuadOpts,
) -> Result<QuadResult, QuadError> {
    if a == b {
        return Ok(QuadResult { value: Complex64::new(0.0, 0.0), err: 0.0, evals: 0 });
    }
    let n0 = opts.initial_pieces.max(1);
    let mut heap = BinaryHeap::with_capacity(2 * n0);
    let mut total = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    let mut evals = 0;
    for i in 0..n0 {
        let lo = a + (b - a) * i as f64 / n0 as f64;
        let hi = if i + 1 == n0 { b } else { a + (b - a) * (i + 1) as f64 / n0 as f64 };
        let p = gk21(&f, lo, hi)?;
        evals += 21;
        total += p.value;
        err += p.err;
        heap.push(p);
    }
    loop {
        let tol = opts.abs_tol.max(opts.rel_tol * total.norm());
        if err <= tol {
            break;
        }
        if heap.len() >= opts.max_intervals.max(n0) {
            return Err(QuadError::Budget { intervals: heap.len(), err });
        }
        let worst = heap.pop().expect("nonempty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval cannot be split further in double precision
            heap.push(worst);
            return Err(QuadError::Budget { intervals: heap.len(), err });
        }
        let l = gk21(&f, worst.a, mid)?;
        let r = gk21(&f, mid, worst.b)?;
        evals += 42;
        total += l.value + r.value - worst.value;
        err += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
        if err < 0.0 || heap.len() % 64 == 0 {
            // resum to shed cancellation drift in the running totals
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.err).sum();
        }
    }
    total = heap.iter().map(|p| p.value).sum();
    err = heap.iter().map(|p| p.err).sum();
    Ok(QuadResult { value: total, err, evals })
}

/// Real-valued convenience wrapper.
pub fn integrate_real<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: QuadOpts,
) -> Result<(f64, f64), QuadError> {
    let r = integrate(|x| Complex64::new(f(x), 0.0), a, b, opts)?;
    Ok((r.value.re, r.err))
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = -x;
        xs[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    (xs, ws)
}
