//! The character sums 𝒞^{±₁}(n₂,n₁,r,m,q) and 𝔠(n), by definition and in
//! reduced form, plus the divisor-sum majorant for 𝔠.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{
    divisors, e_frac, gcd, gcd_i, kloosterman, mobius, modp, units_with_inverses,
    CompensatedSum, KloostermanTable,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CharSumError {
    #[error("invalid arguments: {0}")]
    InvalidArgs(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, CharSumError> {
    Err(CharSumError::InvalidArgs(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CharSumArgs {
    pub n2: i64,
    pub n1: u64,
    pub r: u64,
    pub m: i64,
    pub q: u64,
    pub sign: i8,
    pub sign1: i8,
}

impl CharSumArgs {
    /// The Kloosterman modulus rq/n₁.
    pub fn modulus(&self) -> Result<u64, CharSumError> {
        if self.n1 == 0 || self.r == 0 || self.q == 0 {
            return invalid("n1, r, q must be positive");
        }
        if self.sign.abs() != 1 || self.sign1.abs() != 1 {
            return invalid("signs must be ±1");
        }
        if (self.q * self.r) % self.n1 != 0 {
            return invalid(format!("n1 = {} does not divide qr = {}", self.n1, self.q * self.r));
        }
        Ok(self.r * self.q / self.n1)
    }
}

/// Σ*_{a mod q} e(±₁ ā m/q) S(−r ā, ±n₂; rq/n₁) by direct summation.
pub fn char_sum_c_oracle(args: &CharSumArgs) -> Result<Complex64, CharSumError> {
    let c = args.modulus()?;
    let mut acc = CompensatedSum::new();
    for (_, abar) in units_with_inverses(args.q) {
        let abar = abar as i64;
        let outer = e_frac(args.sign1 as i64 * abar * args.m, args.q);
        let s = kloosterman(-(args.r as i64) * abar, args.sign as i64 * args.n2, c);
        acc.add(outer * s);
    }
    Ok(acc.value())
}

/// Integer weights c[γ], γ mod rq/n₁, with
/// 𝒞(n₂) = Σ_γ c[γ] e(±n₂ γ/(rq/n₁)); γ runs over inverses ᾱ of units α and
/// c[ᾱ] = Σ_{d|q, ±₁m ≡ n₁α (d)} d μ(q/d).
pub fn c_weights(n1: u64, r: u64, m: i64, q: u64, sign1: i8) -> Result<Vec<i64>, CharSumError> {
    let probe = CharSumArgs { n2: 1, n1, r, m, q, sign: 1, sign1 };
    let l = probe.modulus()?;
    let divs: Vec<(u64, i64)> = divisors(q)
        .into_iter()
        .map(|d| (d, d as i64 * mobius(q / d)))
        .filter(|&(_, w)| w != 0)
        .collect();
    let mut out = vec![0i64; l as usize];
    let target = sign1 as i64 * m;
    for (alpha, abar) in units_with_inverses(l) {
        let mut w = 0;
        for &(d, dm) in &divs {
            if modp(target - (n1 * alpha) as i64, d) == 0 {
                w += dm;
            }
        }
        out[abar as usize] += w;
    }
    Ok(out)
}

/// The reduced form Σ_{d|q} d μ(q/d) Σ*_{α mod rq/n₁, ±₁m ≡ n₁α (d)} e(±n₂ᾱ/(rq/n₁)).
pub fn char_sum_c_reduced(args: &CharSumArgs) -> Result<Complex64, CharSumError> {
    let l = args.modulus()?;
    let w = c_weights(args.n1, args.r, args.m, args.q, args.sign1)?;
    let mut acc = CompensatedSum::new();
    for (g, &cw) in w.iter().enumerate() {
        if cw != 0 {
            acc.add(e_frac(args.sign as i64 * args.n2 * g as i64, l) * cw as f64);
        }
    }
    Ok(acc.value())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FrakCArgs {
    pub n: i64,
    pub q1: u64,
    pub q2: u64,
    pub q2p: u64,
    pub m: i64,
    pub mp: i64,
    pub n1: u64,
    pub r: u64,
    pub sign: i8,
    pub sign1: i8,
}

impl FrakCArgs {
    /// The Poisson modulus rq₁q₂q₂′/n₁.
    pub fn modulus(&self) -> Result<u64, CharSumError> {
        let FrakCArgs { q1, q2, q2p, n1, r, .. } = *self;
        if [q1, q2, q2p, n1, r].contains(&0) {
            return invalid("moduli must be positive");
        }
        if self.sign.abs() != 1 || self.sign1.abs() != 1 {
            return invalid("signs must be ±1");
        }
        if gcd(q2, n1 * r) != 1 || gcd(q2p, n1 * r) != 1 {
            return invalid("q2 and q2' must be coprime to n1·r");
        }
        let n1r = n1 / gcd(n1, r);
        if q1 % n1r != 0 {
            return invalid(format!("n1/(n1,r) = {n1r} does not divide q1 = {q1}"));
        }
        Ok(r * q1 * q2 * q2p / n1)
    }

    fn left(&self, beta: i64) -> CharSumArgs {
        CharSumArgs {
            n2: beta,
            n1: self.n1,
            r: self.r,
            m: self.m,
            q: self.q1 * self.q2,
            sign: self.sign,
            sign1: self.sign1,
        }
    }

    fn right(&self, beta: i64) -> CharSumArgs {
        CharSumArgs { m: self.mp, q: self.q1 * self.q2p, ..self.left(beta) }
    }
}

/// 𝒞(β) for all β modulo rq/n₁.
fn c_table(n1: u64, r: u64, m: i64, q: u64, sign: i8, sign1: i8) -> Result<Vec<Complex64>, CharSumError> {
    let w = c_weights(n1, r, m, q, sign1)?;
    let l = w.len() as u64;
    let roots: Vec<Complex64> = (0..l).map(|k| e_frac(k as i64, l)).collect();
    Ok((0..l)
        .map(|beta| {
            let mut acc = CompensatedSum::new();
            for (g, &cw) in w.iter().enumerate() {
                if cw != 0 {
                    let k = modp(sign as i64 * (beta * g as u64) as i64, l);
                    acc.add(roots[k as usize] * cw as f64);
                }
            }
            acc.value()
        })
        .collect())
}

/// 𝔠(n) as the β-average of 𝒞(β)·conj 𝒞′(β)·e(nβ/M), M = rq₁q₂q₂′/n₁.
pub fn frak_c(args: &FrakCArgs) -> Result<Complex64, CharSumError> {
    let big_m = args.modulus()?;
    let (l, rr) = (args.left(0), args.right(0));
    let cl = c_table(l.n1, l.r, l.m, l.q, l.sign, l.sign1)?;
    let cr = c_table(rr.n1, rr.r, rr.m, rr.q, rr.sign, rr.sign1)?;
    let mut acc = CompensatedSum::new();
    for beta in 0..big_m {
        let a = cl[(beta % cl.len() as u64) as usize];
        let b = cr[(beta % cr.len() as u64) as usize].conj();
        acc.add(a * b * e_frac(args.n * beta as i64, big_m));
    }
    Ok(acc.value() / big_m as f64)
}

/// 𝔠(n) by counting: Σ c[γ]c′[γ′] over ±q₂′γ ∓ q₂γ′ ≡ −n (mod M). Exact integer.
pub fn frak_c_count(args: &FrakCArgs) -> Result<i64, CharSumError> {
    let big_m = args.modulus()? as i64;
    let w = c_weights(args.n1, args.r, args.m, args.q1 * args.q2, args.sign1)?;
    let wp = c_weights(args.n1, args.r, args.mp, args.q1 * args.q2p, args.sign1)?;
    let s = args.sign as i64;
    let (q2, q2p) = (args.q2 as i64, args.q2p as i64);
    // bucket the right-hand weights by ∓q₂γ′ mod M
    let mut bucket = vec![0i64; big_m as usize];
    for (g, &c) in wp.iter().enumerate() {
        if c != 0 {
            bucket[modp(-s * q2 * g as i64, big_m as u64) as usize] += c;
        }
    }
    let mut total = 0;
    for (g, &c) in w.iter().enumerate() {
        if c != 0 {
            let need = modp(-args.n - s * q2p * g as i64, big_m as u64);
            total += c * bucket[need as usize];
        }
    }
    Ok(total)
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn divides_power_of(q: u64, base: u64) -> bool {
    let mut q = q;
    loop {
        let g = gcd(q, base);
        if g == 1 {
            return q == 1;
        }
        q /= g;
    }
}

/// The divisor-sum majorant for |𝔠(n)|.
///
/// For n = 0 this is Σ_{d|q}Σ_{d′|q, (d,d′)|(m−m′)} (d,d′)qr when q₂ = q₂′ and 0
/// otherwise. For n ≠ 0 the factorization needs q₁ | (n₁r)^∞.
pub fn frak_c_majorant(args: &FrakCArgs) -> Result<f64, CharSumError> {
    args.modulus()?;
    let FrakCArgs { n, q1, q2, q2p, m, mp, n1, r, sign, sign1 } = *args;
    if n == 0 {
        if q2 != q2p {
            return Ok(0.0);
        }
        let q = q1 * q2;
        let mut s = 0u64;
        for d in divisors(q) {
            for dp in divisors(q) {
                let g = gcd(d, dp);
                if modp(m - mp, g) == 0 {
                    s += g;
                }
            }
        }
        return Ok((s * q * r) as f64);
    }
    if !divides_power_of(q1, n1 * r) {
        return invalid("the majorant needs q1 | (n1 r)^∞");
    }
    let g12 = gcd(q2, q2p);
    if modp(n, g12) != 0 {
        return Ok(0.0);
    }
    let mut c1 = 0.0;
    for d1 in divisors(q1) {
        for d1p in divisors(q1) {
            let g1 = gcd(d1, n1);
            let g1p = gcd(d1p, n1);
            let a = if modp(m, g1) == 0 { (d1p * g1) as f64 } else { 0.0 };
            let b = if modp(mp, g1p) == 0 { (d1 * g1p) as f64 } else { 0.0 };
            c1 += a.min(b);
        }
    }
    c1 *= (r * q1) as f64 / n1 as f64;
    let (s, s1) = (sign as i64, sign1 as i64);
    let x = s * (n1 as i64) * (q2p as i64) + s1 * m * n;
    let xp = -s * (n1 as i64) * (q2 as i64) + s1 * mp * n;
    let mut c2 = 0.0;
    for d2 in divisors(gcd_i(x, q2)) {
        for d2p in divisors(gcd_i(xp, q2p)) {
            let a = q2 / lcm(q2 / g12, d2);
            let b = q2p / lcm(q2p / g12, d2p);
            c2 += (d2 * d2p) as f64 * a.min(b) as f64;
        }
    }
    Ok(c1 * c2)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ReductionReport {
    pub cases: usize,
    pub max_abs_diff: f64,
    pub worst: Option<CharSumArgs>,
}

/// Oracle against reduced form over q ≤ q_max, r ≤ r_max, n₁ | qr, 1 ≤ n₂, m ≤ nm_max, all signs.
pub fn sweep_reduction(q_max: u64, r_max: u64, nm_max: i64) -> ReductionReport {
    let jobs: Vec<(u64, u64, u64)> = (1..=q_max)
        .flat_map(|q| (1..=r_max).flat_map(move |r| divisors(q * r).into_iter().map(move |n1| (q, r, n1))))
        .collect();
    jobs.par_iter()
        .map(|&(q, r, n1)| {
            let c = r * q / n1;
            let table = KloostermanTable::new(c);
            let units = units_with_inverses(q);
            let mut rep = ReductionReport::default();
            for sign1 in [1i8, -1] {
                for m in 1..=nm_max {
                    let w = c_weights(n1, r, m, q, sign1).expect("valid");
                    for sign in [1i8, -1] {
                        for n2 in 1..=nm_max {
                            let b = sign as i64 * n2;
                            let mut oracle = CompensatedSum::new();
                            for &(_, abar) in &units {
                                let abar = abar as i64;
                                let s = table.eval(-(r as i64) * abar, b);
                                oracle.add(e_frac(sign1 as i64 * abar * m, q) * s);
                            }
                            let mut red = CompensatedSum::new();
                            for (g, &cw) in w.iter().enumerate() {
                                if cw != 0 {
                                    red.add(e_frac(b * g as i64, c) * cw as f64);
                                }
                            }
                            let diff = (oracle.value() - red.value()).norm();
                            rep.cases += 1;
                            if diff > rep.max_abs_diff || rep.worst.is_none() {
                                rep.max_abs_diff = rep.max_abs_diff.max(diff);
                                rep.worst = Some(CharSumArgs { n2, n1, r, m, q, sign, sign1 });
                            }
                        }
                    }
                }
            }
            rep
        })
        .reduce(ReductionReport::default, |a, b| {
            let worst = if b.max_abs_diff > a.max_abs_diff { b.worst } else { a.worst.or(b.worst) };
            ReductionReport {
                cases: a.cases + b.cases,
                max_abs_diff: a.max_abs_diff.max(b.max_abs_diff),
                worst,
            }
        })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FrakSweepReport {
    pub cases: usize,
    /// n = 0 cases with q₂ ≠ q₂′
    pub zero_cases: usize,
    pub max_zero_violation: f64,
    /// n with (q₂,q₂′) ∤ n
    pub divisibility_cases: usize,
    pub max_divisibility_violation: f64,
    pub majorant_cases: usize,
    /// max |𝔠(n)| / majorant over cases with a nonzero majorant
    pub max_ratio: f64,
    /// cases where 𝔠(n) ≠ 0 but the majorant is 0, or the ratio exceeds slack·(1 + 10⁻⁶)
    pub majorant_failures: Vec<FrakCArgs>,
    /// max |β-average − count|
    pub max_route_diff: f64,
}

impl FrakSweepReport {
    fn merge(mut self, o: Self) -> Self {
        self.cases += o.cases;
        self.zero_cases += o.zero_cases;
        self.max_zero_violation = self.max_zero_violation.max(o.max_zero_violation);
        self.divisibility_cases += o.divisibility_cases;
        self.max_divisibility_violation = self.max_divisibility_violation.max(o.max_divisibility_violation);
        self.majorant_cases += o.majorant_cases;
        self.max_ratio = self.max_ratio.max(o.max_ratio);
        self.majorant_failures.extend(o.majorant_failures);
        self.max_route_diff = self.max_route_diff.max(o.max_route_diff);
        self
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FrakSweepConfig {
    pub max_modulus: u64,
    pub n_range: i64,
    pub m_max: i64,
    pub r_max: u64,
    pub q1_max: u64,
    pub slack: f64,
}

impl Default for FrakSweepConfig {
    fn default() -> Self {
        Self { max_modulus: 400, n_range: 10, m_max: 3, r_max: 3, q1_max: 12, slack: 1.0 }
    }
}

/// Every admissible (q₁,q₂,q₂′,n₁,r) with q₁ ≤ q1_max, q₁ | (n₁r)^∞ and modulus ≤ max_modulus,
/// m, m′ ≤ m_max, both signs, n ∈ [−n_range, n_range].
pub fn sweep_frak_c(cfg: &FrakSweepConfig) -> FrakSweepReport {
    let mut shapes = Vec::new();
    for r in 1..=cfg.r_max {
        for q1 in 1..=cfg.q1_max {
            for n1 in 1..=q1 * r {
                if q1 % (n1 / gcd(n1, r)) != 0 || !divides_power_of(q1, n1 * r) || n1 > q1 * r {
                    continue;
                }
                let base = r * q1;
                if base % n1 != 0 || base / n1 > cfg.max_modulus {
                    continue;
                }
                let l1 = base / n1;
                for q2 in 1..=cfg.max_modulus / l1 {
                    for q2p in 1..=cfg.max_modulus / (l1 * q2) {
                        if gcd(q2, n1 * r) == 1 && gcd(q2p, n1 * r) == 1 {
                            shapes.push((q1, q2, q2p, n1, r));
                        }
                    }
                }
            }
        }
    }
    shapes
        .par_iter()
        .map(|&(q1, q2, q2p, n1, r)| sweep_shape(q1, q2, q2p, n1, r, cfg))
        .reduce(FrakSweepReport::default, FrakSweepReport::merge)
}

fn dft_weights(w: &[i64]) -> Vec<Complex64> {
    let l = w.len() as u64;
    let roots: Vec<Complex64> = (0..l).map(|k| e_frac(k as i64, l)).collect();
    (0..l)
        .map(|beta| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut k = 0u64;
            for &cw in w {
                if cw != 0 {
                    acc += roots[k as usize] * cw as f64;
                }
                k += beta;
                if k >= l {
                    k -= l;
                }
            }
            acc
        })
        .collect()
}

fn sweep_shape(q1: u64, q2: u64, q2p: u64, n1: u64, r: u64, cfg: &FrakSweepConfig) -> FrakSweepReport {
    let mut rep = FrakSweepReport::default();
    let big_m = r * q1 * q2 * q2p / n1;
    let roots: Vec<Complex64> = (0..big_m).map(|k| e_frac(k as i64, big_m)).collect();
    let g12 = gcd(q2, q2p);
    let ms: Vec<i64> = (1..=cfg.m_max).collect();
    for sign1 in [1i8, -1] {
        let wl: Vec<Vec<i64>> = ms.iter().map(|&m| c_weights(n1, r, m, q1 * q2, sign1).expect("admissible")).collect();
        let wr: Vec<Vec<i64>> = ms.iter().map(|&m| c_weights(n1, r, m, q1 * q2p, sign1).expect("admissible")).collect();
        // 𝒞 at sign −1 is the conjugate of 𝒞 at sign +1
        let tl: Vec<Vec<Complex64>> = wl.iter().map(|w| dft_weights(w)).collect();
        let tr: Vec<Vec<Complex64>> = wr.iter().map(|w| dft_weights(w)).collect();
        for sign in [1i8, -1] {
            let sg = sign as i64;
            for (i, &m) in ms.iter().enumerate() {
                for (j, &mp) in ms.iter().enumerate() {
                    let (cl, cr) = (&tl[i], &tr[j]);
                    let prod: Vec<Complex64> = (0..big_m as usize)
                        .map(|b| {
                            let (x, y) = (cl[b % cl.len()], cr[b % cr.len()]);
                            if sign == 1 { x * y.conj() } else { x.conj() * y }
                        })
                        .collect();
                    let mut bucket = vec![0i64; big_m as usize];
                    for (g, &c) in wr[j].iter().enumerate() {
                        if c != 0 {
                            bucket[modp(-sg * (q2 * g as u64) as i64, big_m) as usize] += c;
                        }
                    }
                    for n in -cfg.n_range..=cfg.n_range {
                        let args = FrakCArgs { n, q1, q2, q2p, m, mp, n1, r, sign, sign1 };
                        let step = modp(n, big_m);
                        let mut k = 0;
                        let mut acc = CompensatedSum::new();
                        for p in &prod {
                            acc.add(p * roots[k as usize]);
                            k += step;
                            if k >= big_m {
                                k -= big_m;
                            }
                        }
                        let val = acc.value() / big_m as f64;
                        let mut count = 0i64;
                        for (g, &c) in wl[i].iter().enumerate() {
                            if c != 0 {
                                count += c * bucket[modp(-n - sg * (q2p * g as u64) as i64, big_m) as usize];
                            }
                        }
                        rep.cases += 1;
                        rep.max_route_diff = rep.max_route_diff.max((val - count as f64).norm());
                        let mag = val.norm();
                        if n == 0 && q2 != q2p {
                            rep.zero_cases += 1;
                            rep.max_zero_violation = rep.max_zero_violation.max(mag);
                        }
                        if modp(n, g12) != 0 {
                            rep.divisibility_cases += 1;
                            rep.max_divisibility_violation = rep.max_divisibility_violation.max(mag);
                        }
                        let bound = frak_c_majorant(&args).expect("admissible") * cfg.slack;
                        rep.majorant_cases += 1;
                        if bound > 0.0 {
                            rep.max_ratio = rep.max_ratio.max(mag / bound);
                        }
                        if mag > bound * (1.0 + 1e-6) + 1e-6 {
                            rep.majorant_failures.push(args);
                        }
                    }
                }
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ca(n2: i64, n1: u64, r: u64, m: i64, q: u64, sign: i8, sign1: i8) -> CharSumArgs {
        CharSumArgs { n2, n1, r, m, q, sign, sign1 }
    }

    #[test]
    fn trivial_modulus() {
        let a = ca(1, 1, 1, 1, 1, 1, 1);
        assert!((char_sum_c_oracle(&a).unwrap() - 1.0).norm() < 1e-14);
        assert!((char_sum_c_reduced(&a).unwrap() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn q_two() {
        // a = 1 only: e(1/2)·S(−1, 1; 2) = (−1)·1
        let a = ca(1, 1, 1, 1, 2, 1, 1);
        let v = char_sum_c_oracle(&a).unwrap();
        assert!((v + 1.0).norm() < 1e-13, "{v}");
        assert!((char_sum_c_reduced(&a).unwrap() - v).norm() < 1e-12);
    }

    #[test]
    fn q_six_routes_agree() {
        let a = ca(3, 1, 1, 2, 6, 1, 1);
        let o = char_sum_c_oracle(&a).unwrap();
        let r = char_sum_c_reduced(&a).unwrap();
        assert!((o - r).norm() < 1e-10);
    }

    #[test]
    fn prime_modulus_expansion() {
        // q = p, p | m: weights d ∈ {1, p} give −Σ* + p·Σ*_{p | n₁α − m}
        let p = 7u64;
        for n2 in 1..6 {
            let a = ca(n2, 1, 2, 14, p, 1, -1);
            let o = char_sum_c_oracle(&a).unwrap();
            let c = 2 * p;
            let mut manual = Complex64::new(0.0, 0.0);
            for (alpha, abar) in units_with_inverses(c) {
                let mut w = -1.0;
                if modp(-14 - alpha as i64, p) == 0 {
                    w += p as f64;
                }
                manual += e_frac(n2 * abar as i64, c) * w;
            }
            assert!((o - manual).norm() < 1e-10);
        }
    }

    #[test]
    fn invalid_args() {
        let a = ca(1, 5, 1, 1, 6, 1, 1);
        assert!(char_sum_c_oracle(&a).is_err());
        let f = FrakCArgs { n: 0, q1: 1, q2: 2, q2p: 1, m: 1, mp: 1, n1: 2, r: 1, sign: 1, sign1: 1 };
        assert!(frak_c(&f).is_err());
    }

    #[test]
    fn reduction_small_sweep() {
        let rep = sweep_reduction(12, 2, 5);
        assert!(rep.cases > 1000);
        assert!(rep.max_abs_diff < 1e-8, "{rep:?}");
    }

    #[test]
    fn frak_examples() {
        let one = FrakCArgs { n: 0, q1: 1, q2: 1, q2p: 1, m: 1, mp: 1, n1: 1, r: 1, sign: 1, sign1: 1 };
        assert!((frak_c(&one).unwrap() - 1.0).norm() < 1e-14);
        let diag = FrakCArgs { q2: 5, q2p: 5, m: 2, mp: 2, ..one };
        let v = frak_c(&diag).unwrap();
        assert!(v.re > 0.5 && v.im.abs() < 1e-10);
        assert_eq!(frak_c_count(&diag).unwrap() as f64, v.re.round());
        assert!(v.re <= frak_c_majorant(&diag).unwrap());
        let off = FrakCArgs { q2: 3, q2p: 5, ..diag };
        assert!(frak_c(&off).unwrap().norm() < 1e-8);
        // (q₂,q₂′) = 3 ∤ n
        let div = FrakCArgs { n: 1, q2: 3, q2p: 3, ..diag };
        assert_eq!(frak_c_majorant(&div).unwrap(), 0.0);
        assert!(frak_c(&div).unwrap().norm() < 1e-8);
        let n1 = FrakCArgs { n: 1, ..one };
        assert!(frak_c(&n1).unwrap().norm() <= frak_c_majorant(&n1).unwrap());
    }

    #[test]
    fn n_zero_diagonal_majorant() {
        let a = FrakCArgs { n: 0, q1: 2, q2: 3, q2p: 3, m: 1, mp: 1, n1: 1, r: 2, sign: 1, sign1: 1 };
        let q = 6u64;
        let mut s = 0;
        for d in divisors(q) {
            for dp in divisors(q) {
                s += gcd(d, dp);
            }
        }
        assert_eq!(frak_c_majorant(&a).unwrap(), (s * q * 2) as f64);
    }

    #[test]
    fn small_frak_sweep() {
        let cfg = FrakSweepConfig { max_modulus: 60, n_range: 4, m_max: 2, r_max: 2, q1_max: 6, slack: 1.0 };
        let rep = sweep_frak_c(&cfg);
        assert!(rep.cases > 500);
        assert!(rep.max_zero_violation < 1e-6);
        assert!(rep.max_divisibility_violation < 1e-6);
        assert!(rep.max_route_diff < 1e-6);
        assert!(rep.majorant_failures.is_empty(), "{:?}", &rep.majorant_failures[..rep.majorant_failures.len().min(5)]);
    }
}
