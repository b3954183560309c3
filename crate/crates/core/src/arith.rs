//! Integer arithmetic, complete exponential sums and divisor-type coefficients.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use thiserror::Error;

use crate::coeffs::CoefficientTable;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArithError {
    #[error("{a} is not invertible modulo {q}")]
    NotCoprime { a: i64, q: u64 },
    #[error("coefficient A({0}) missing from row")]
    MissingCoefficient(u64),
    #[error("table covers n <= {have}, need {need}")]
    InsufficientData { have: usize, need: usize },
}

/// Kahan–Neumaier accumulator for complex sums.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: Complex64,
    comp: Complex64,
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        neumaier(&mut self.sum.re, &mut self.comp.re, z.re);
        neumaier(&mut self.sum.im, &mut self.comp.im, z.im);
    }

    pub fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

pub fn gcd_i(a: i64, b: u64) -> u64 {
    gcd(a.unsigned_abs(), b)
}

/// Least non-negative residue of `a` modulo `q`.
pub fn modp(a: i64, q: u64) -> u64 {
    a.rem_euclid(q as i64) as u64
}

/// e(k/q) for an integer numerator.
pub fn e_frac(k: i64, q: u64) -> Complex64 {
    let r = modp(k, q) as f64 / q as f64;
    Complex64::from_polar(1.0, TAU * r)
}

/// Prime factorization by trial division, ascending primes with exponents.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n >= 1);
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut k = 0;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, k) in factorize(n) {
        let len = ds.len();
        let mut pk = 1;
        for _ in 0..k {
            pk *= p;
            for i in 0..len {
                ds.push(ds[i] * pk);
            }
        }
    }
    ds.sort_unstable();
    ds
}

pub fn mobius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, k)| k > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n).len() == 1 && factorize(n)[0].1 == 1
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if sieve[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
    }
    out
}

/// Inverse of `a` modulo `q` in [0, q).
pub fn inverse_mod(a: i64, q: u64) -> Result<u64, ArithError> {
    if q == 1 {
        return Ok(0);
    }
    let (g, x, _) = ext_gcd(modp(a, q) as i128, q as i128);
    if g != 1 {
        return Err(ArithError::NotCoprime { a, q });
    }
    Ok(x.rem_euclid(q as i128) as u64)
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Units modulo q paired with their inverses.
pub fn units_with_inverses(q: u64) -> Vec<(u64, u64)> {
    if q == 1 {
        return vec![(0, 0)];
    }
    (1..q)
        .filter(|&d| gcd(d, q) == 1)
        .map(|d| (d, inverse_mod(d as i64, q).unwrap()))
        .collect()
}

/// S(a,b;c) by direct summation over units d mod c.
pub fn kloosterman(a: i64, b: i64, c: u64) -> Complex64 {
    assert!(c >= 1 && c <= 1_000_000, "modulus out of range");
    let (a, b) = (modp(a, c), modp(b, c));
    let mut acc = CompensatedSum::new();
    for (d, dbar) in units_with_inverses(c) {
        let k = (a as u128 * d as u128 + b as u128 * dbar as u128) % c as u128;
        acc.add(Complex64::from_polar(1.0, TAU * k as f64 / c as f64));
    }
    acc.value()
}

/// Kloosterman sums for a fixed modulus with tabulated roots of unity.
///
/// Only the real part is accumulated; `S(a,b;c)` is real.
pub struct KloostermanTable {
    c: u64,
    units: Vec<(u64, u64)>,
    cos: Vec<f64>,
}

impl KloostermanTable {
    pub fn new(c: u64) -> Self {
        assert!(c >= 1);
        let cos = (0..c).map(|k| (TAU * k as f64 / c as f64).cos()).collect();
        Self { c, units: units_with_inverses(c), cos }
    }

    pub fn modulus(&self) -> u64 {
        self.c
    }

    pub fn eval(&self, a: i64, b: i64) -> f64 {
        let c = self.c;
        let (a, b) = (modp(a, c), modp(b, c));
        let mut s = 0.0;
        let mut comp = 0.0;
        for &(d, dbar) in &self.units {
            let k = ((a * d) % c + (b * dbar) % c) % c;
            neumaier(&mut s, &mut comp, self.cos[k as usize]);
        }
        s + comp
    }

    /// Row b ↦ S(a,b;c) for b = 0..c, updating residues incrementally.
    pub fn row(&self, a: i64) -> Vec<f64> {
        let c = self.c;
        let a = modp(a, c);
        let mut idx: Vec<u64> = self.units.iter().map(|&(d, _)| (a * d) % c).collect();
        let mut out = Vec::with_capacity(c as usize);
        for _b in 0..c {
            let mut s = 0.0;
            let mut comp = 0.0;
            for k in &idx {
                neumaier(&mut s, &mut comp, self.cos[*k as usize]);
            }
            out.push(s + comp);
            for (k, &(_, dbar)) in idx.iter_mut().zip(&self.units) {
                *k += dbar;
                if *k >= c {
                    *k -= c;
                }
            }
        }
        out
    }
}

/// R_q(b) via Σ_{d | (q,b)} d μ(q/d).
pub fn ramanujan(q: u64, b: i64) -> i64 {
    assert!(q >= 1);
    let g = gcd_i(b, q);
    divisors(g)
        .into_iter()
        .map(|d| d as i64 * mobius(q / d))
        .sum()
}

/// Σ*_{a mod q} e(ba/q) summed term by term.
pub fn ramanujan_direct(q: u64, b: i64) -> Complex64 {
    let mut acc = CompensatedSum::new();
    for a in 1..=q {
        if gcd(a, q) == 1 {
            acc.add(e_frac(b * a as i64, q));
        }
    }
    acc.value()
}

/// Number of ordered triples (a,b,c) with abc = n.
pub fn d3(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .map(|(_, k)| ((k as u64 + 1) * (k as u64 + 2)) / 2)
        .product()
}

/// Number of divisors.
pub fn d2(n: u64) -> u64 {
    factorize(n).into_iter().map(|(_, k)| k as u64 + 1).product()
}

/// d₃(n) for 1 ≤ n ≤ n_max via a smallest-prime-factor sieve; index 0 unused.
pub fn d3_table(n_max: usize) -> Vec<u64> {
    let mut spf = vec![0usize; n_max + 1];
    for i in 2..=n_max {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n_max {
                if spf[j] == 0 {
                    spf[j] = i;
                }
                j += i;
            }
        }
    }
    let mut out = vec![0u64; n_max + 1];
    if n_max >= 1 {
        out[1] = 1;
    }
    for n in 2..=n_max {
        let p = spf[n];
        let mut m = n;
        let mut k = 0u64;
        while m % p == 0 {
            m /= p;
            k += 1;
        }
        out[n] = out[m] * (k + 1) * (k + 2) / 2;
    }
    out
}

/// Boundary coefficients A(k,1) and A(1,k) for Hecke expansion.
#[derive(Clone, Debug, Default)]
pub struct HeckeRow {
    pub first_col: BTreeMap<u64, Complex64>,
    pub first_row: BTreeMap<u64, Complex64>,
}

impl HeckeRow {
    /// A(k,1) = A(1,k), as for a self-dual form.
    pub fn self_dual(row: BTreeMap<u64, Complex64>) -> Self {
        Self { first_col: row.clone(), first_row: row }
    }

    pub fn d3(n_max: u64) -> Self {
        let row = (1..=n_max).map(|k| (k, Complex64::new(d3(k) as f64, 0.0))).collect();
        Self::self_dual(row)
    }
}

/// A(r,n) = Σ_{d | (r,n)} μ(d) A(r/d,1) A(1,n/d).
pub fn hecke_expand(r: u64, n: u64, row: &HeckeRow) -> Result<Complex64, ArithError> {
    let mut acc = Complex64::new(0.0, 0.0);
    for d in divisors(gcd(r, n)) {
        let mu = mobius(d);
        if mu == 0 {
            continue;
        }
        let a = row
            .first_col
            .get(&(r / d))
            .ok_or(ArithError::MissingCoefficient(r / d))?;
        let b = row
            .first_row
            .get(&(n / d))
            .ok_or(ArithError::MissingCoefficient(n / d))?;
        acc += a * b * mu as f64;
    }
    Ok(acc)
}

pub const THETA3: (i64, i64) = (5, 14);
pub const THETA2: (i64, i64) = (7, 64);

#[derive(Clone, Debug, serde::Serialize)]
pub struct RsPoint {
    pub n: usize,
    pub mean_square: f64,
    pub dyadic_l1: f64,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct RsReport {
    pub points: Vec<RsPoint>,
    pub ceiling: f64,
    pub violation: Option<usize>,
}

/// Rankin–Selberg partial sums along N₀, 2N₀, …, N.
///
/// `mean_square` is Σ_{n≤N}|λ(n)|²/N, `dyadic_l1` is Σ_{N<n≤2N}|A(r,n)|/(r^θ₃ N)
/// (zero when the table stops before 2N). A point is flagged when either ratio
/// exceeds `ceiling`.
pub fn rs_partial_sum_check(
    coeffs: &CoefficientTable,
    n: usize,
    r: u64,
    n0: usize,
    ceiling: f64,
) -> Result<RsReport, ArithError> {
    if coeffs.n_max() < n || n == 0 {
        return Err(ArithError::InsufficientData { have: coeffs.n_max(), need: n });
    }
    let theta = THETA3.0 as f64 / THETA3.1 as f64;
    let mut points = Vec::new();
    let mut big_n = n0.max(1).min(n);
    loop {
        let ms: f64 = (1..=big_n).map(|k| coeffs.get(k).norm_sqr()).sum::<f64>() / big_n as f64;
        let dy = if coeffs.n_max() >= 2 * big_n {
            (big_n + 1..=2 * big_n).map(|k| coeffs.get(k).norm()).sum::<f64>()
                / ((r as f64).powf(theta) * big_n as f64)
        } else {
            0.0
        };
        points.push(RsPoint { n: big_n, mean_square: ms, dyadic_l1: dy });
        if big_n >= n {
            break;
        }
        big_n = (2 * big_n).min(n);
    }
    let violation = points
        .iter()
        .find(|p| p.mean_square > ceiling || p.dyadic_l1 > ceiling)
        .map(|p| p.n);
    Ok(RsReport { points, ceiling, violation })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kloosterman_small() {
        assert!((kloosterman(1, 1, 1) - 1.0).norm() < 1e-14);
        assert!((kloosterman(1, 1, 3) + 1.0).norm() < 1e-14);
        for q in 1..30 {
            for b in 0..q as i64 {
                let k = kloosterman(0, b, q);
                assert!((k.re - ramanujan(q, b) as f64).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn table_matches_direct() {
        for c in [1u64, 7, 12, 30, 97] {
            let t = KloostermanTable::new(c);
            for a in 0..c as i64 {
                let row = t.row(a);
                for b in 0..c as i64 {
                    let k = kloosterman(a, b, c);
                    assert!((row[b as usize] - k.re).abs() < 1e-9);
                    assert!((t.eval(a, b) - k.re).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn ramanujan_examples() {
        assert_eq!(ramanujan(4, 2), -2);
        assert_eq!(ramanujan(1, 12345), 1);
        assert_eq!(ramanujan(5, 0), 4);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(inverse_mod(3, 7), Ok(5));
        assert_eq!(inverse_mod(1, 13), Ok(1));
        assert_eq!(inverse_mod(-3, 7), Ok(2));
        assert!(matches!(inverse_mod(2, 4), Err(ArithError::NotCoprime { .. })));
    }

    #[test]
    fn d3_examples() {
        assert_eq!(d3(1), 1);
        assert_eq!(d3(4), 6);
        for p in [2u64, 3, 101, 7919] {
            assert_eq!(d3(p), 3);
        }
        let t = d3_table(2000);
        for n in 1..=2000u64 {
            assert_eq!(t[n as usize], d3(n));
        }
    }

    #[test]
    fn hecke_examples() {
        let row = HeckeRow::d3(20);
        assert_eq!(hecke_expand(2, 2, &row).unwrap(), Complex64::new(8.0, 0.0));
        assert_eq!(hecke_expand(2, 3, &row).unwrap(), Complex64::new(9.0, 0.0));
        assert_eq!(hecke_expand(1, 12, &row).unwrap(), Complex64::new(d3(12) as f64, 0.0));
        assert_eq!(hecke_expand(1, 21, &row), Err(ArithError::MissingCoefficient(21)));
    }

    #[test]
    fn factor_helpers() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(mobius(30), -1);
        assert_eq!(mobius(12), 0);
        assert_eq!(euler_phi(36), 12);
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
    }
}
