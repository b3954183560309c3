//! Exponent bookkeeping for the bound terms of S_r(N, X, P) after the N^{1/2}
//! factor is removed, and the choice of K and R. All arithmetic is exact.
//!
//! Exponents are recorded with T′ = T^a and K = |T′|^k T^j, so every term
//! becomes a power of T whose exponent is linear in a and in k·a + j.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use thiserror::Error;

pub type Q = Rational64;

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

fn q_str<S: Serializer>(v: &Q, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LedgerError {
    #[error("constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("no feasible (k, j) on the grid for a = {0}")]
    InfeasibleConstraints(Q),
    #[error("|T′| < T^(3/5): {0}")]
    RegimeViolation(String),
    #[error("cannot parse rational {0:?}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    N,
    T,
    Tp,
    K,
    /// the r of S_r
    R,
    /// the cutoff R of the r-sum
    BigR,
}

impl Symbol {
    pub fn name(self) -> &'static str {
        match self {
            Symbol::N => "N",
            Symbol::T => "T",
            Symbol::Tp => "Tp",
            Symbol::K => "K",
            Symbol::R => "r",
            Symbol::BigR => "R",
        }
    }
}

/// A monomial ∏ s^{e_s}; adding vectors multiplies the monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExponentVector(BTreeMap<Symbol, Q>);

impl ExponentVector {
    pub fn new(pairs: &[(Symbol, Q)]) -> Self {
        let mut v = Self::default();
        for &(s, e) in pairs {
            v.set(s, v.get(s) + e);
        }
        v
    }

    pub fn get(&self, s: Symbol) -> Q {
        self.0.get(&s).copied().unwrap_or_else(Q::zero)
    }

    pub fn set(&mut self, s: Symbol, e: Q) {
        if e.is_zero() {
            self.0.remove(&s);
        } else {
            self.0.insert(s, e);
        }
    }

    pub fn add(&self, o: &ExponentVector) -> ExponentVector {
        let mut out = self.clone();
        for (&s, &e) in &o.0 {
            out.set(s, out.get(s) + e);
        }
        out
    }

    pub fn sub(&self, o: &ExponentVector) -> ExponentVector {
        let mut out = self.clone();
        for (&s, &e) in &o.0 {
            out.set(s, out.get(s) - e);
        }
        out
    }

    pub fn symbols(&self) -> impl Iterator<Item = (Symbol, Q)> + '_ {
        self.0.iter().map(|(&s, &e)| (s, e))
    }

    /// The exponent of T after T′ = T^a, K = T^κ, r = R = T^ρ.
    pub fn t_exponent(&self, a: Q, kappa: Q, rho: Q) -> Q {
        self.get(Symbol::T)
            + self.get(Symbol::Tp) * a
            + self.get(Symbol::K) * kappa
            + (self.get(Symbol::R) + self.get(Symbol::BigR)) * rho
    }
}

impl Serialize for ExponentVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k.name(), &v.to_string())?;
        }
        m.end()
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|(k, v)| format!("{}^({})", k.name(), v)).collect();
        write!(f, "{}", parts.join(" "))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    pub label: String,
    pub exponents: ExponentVector,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TermLedger {
    pub terms: Vec<Term>,
}

impl TermLedger {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn from_source<'a>(&'a self, src: &'a str) -> impl Iterator<Item = &'a Term> + 'a {
        self.terms.iter().filter(move |t| t.source == src)
    }
}

pub const ZERO_FREQUENCY: &str = "zero frequency";
pub const NONZERO_FREQUENCY: &str = "non-zero frequencies";
pub const MERGED: &str = "merged, K ≤ (T|T′|)^{1/2}";

fn term(label: &str, src: &str, pairs: &[(Symbol, Q)]) -> Term {
    Term { label: label.to_string(), exponents: ExponentVector::new(pairs), source: src.to_string() }
}

/// The collected bounds: three zero-frequency terms and the nine terms from
/// the non-zero frequencies.
pub fn build_ledger() -> TermLedger {
    use Symbol::*;
    let z = ZERO_FREQUENCY;
    let nz = NONZERO_FREQUENCY;
    TermLedger {
        terms: vec![
            term("r^{1/2}K^{3/2}T/|T'|", z, &[(R, q(1, 2)), (K, q(3, 2)), (T, q(1, 1)), (Tp, q(-1, 1))]),
            term("r^{1/2}T^{1/2}|T'|^{1/2}", z, &[(R, q(1, 2)), (T, q(1, 2)), (Tp, q(1, 2))]),
            term("T^{3/8}|T'|^{3/8}K^{3/4}", z, &[(T, q(3, 8)), (Tp, q(3, 8)), (K, q(3, 4))]),
            term("T^{7/8}|T'|^{7/8}/K^{1/2}", nz, &[(T, q(7, 8)), (Tp, q(7, 8)), (K, q(-1, 2))]),
            term("T^{3/4}|T'|^{3/4}/K^{1/4}", nz, &[(T, q(3, 4)), (Tp, q(3, 4)), (K, q(-1, 4))]),
            term("T^{5/8}|T'|^{5/8}", nz, &[(T, q(5, 8)), (Tp, q(5, 8))]),
            term("T^{1/2}|T'|^{1/2}K^{1/4}", nz, &[(T, q(1, 2)), (Tp, q(1, 2)), (K, q(1, 4))]),
            term("K^{3/4}T^{7/8}/|T'|^{1/8}", nz, &[(K, q(3, 4)), (T, q(7, 8)), (Tp, q(-1, 8))]),
            term("T^{3/8}|T'|^{3/8}K^{3/4}", nz, &[(T, q(3, 8)), (Tp, q(3, 8)), (K, q(3, 4))]),
            term("T^{3/4}K/|T'|^{1/4}", nz, &[(T, q(3, 4)), (K, q(1, 1)), (Tp, q(-1, 4))]),
            term("T^{1/4}|T'|^{1/4}K", nz, &[(T, q(1, 4)), (Tp, q(1, 4)), (K, q(1, 1))]),
            term("T^{11/8}K^{5/4}/|T'|^{9/8}", nz, &[(T, q(11, 8)), (K, q(5, 4)), (Tp, q(-9, 8))]),
        ],
    }
}

/// The five terms left after the merge, with r ≤ R.
pub fn merged_ledger() -> TermLedger {
    use Symbol::*;
    let m = MERGED;
    TermLedger {
        terms: vec![
            term("R^{1/2}K^{3/2}T/|T'|", m, &[(BigR, q(1, 2)), (K, q(3, 2)), (T, q(1, 1)), (Tp, q(-1, 1))]),
            term("R^{1/2}T^{1/2}|T'|^{1/2}", m, &[(BigR, q(1, 2)), (T, q(1, 2)), (Tp, q(1, 2))]),
            term("T^{7/8}|T'|^{7/8}/K^{1/2}", m, &[(T, q(7, 8)), (Tp, q(7, 8)), (K, q(-1, 2))]),
            term("K^{3/4}T^{7/8}/|T'|^{1/8}", m, &[(K, q(3, 4)), (T, q(7, 8)), (Tp, q(-1, 8))]),
            term("T^{11/8}K^{5/4}/|T'|^{9/8}", m, &[(T, q(11, 8)), (K, q(5, 4)), (Tp, q(-9, 8))]),
        ],
    }
}

/// Extreme rays of the cone of admissible log-sizes
/// 0 ≤ log|T′| ≤ log T, 0 ≤ log K ≤ (log T + log|T′|)/2, 0 ≤ log r ≤ log R.
fn admissible_rays() -> Vec<ExponentVector> {
    use Symbol::*;
    let tk = [(q(1, 1), q(0, 1), q(0, 1)), (q(1, 1), q(0, 1), q(1, 2)), (q(1, 1), q(1, 1), q(0, 1)), (q(1, 1), q(1, 1), q(1, 1))];
    let mut rays: Vec<ExponentVector> = tk.iter().map(|&(t, tp, k)| ExponentVector::new(&[(T, t), (Tp, tp), (K, k)])).collect();
    rays.push(ExponentVector::new(&[(BigR, q(1, 1))]));
    rays.push(ExponentVector::new(&[(R, q(1, 1)), (BigR, q(1, 1))]));
    rays
}

fn pair(v: &ExponentVector, ray: &ExponentVector) -> Q {
    v.symbols().map(|(s, e)| e * ray.get(s)).sum()
}

/// Whether `big` ≥ `small` for every admissible (T, T′, K, r, R).
pub fn dominates(big: &ExponentVector, small: &ExponentVector) -> bool {
    let d = big.sub(small);
    if !d.get(Symbol::N).is_zero() {
        return false;
    }
    admissible_rays().iter().all(|ray| !pair(&d, ray).is_negative())
}

#[derive(Clone, Debug, Serialize)]
pub struct Domination {
    pub term: String,
    pub source: String,
    /// Label of the first merged term that dominates it, if any.
    pub dominated_by: Option<String>,
}

/// For each collected term, a merged term dominating it everywhere.
pub fn check_merge(raw: &TermLedger, merged: &TermLedger) -> Vec<Domination> {
    raw.terms
        .iter()
        .map(|t| Domination {
            term: t.label.clone(),
            source: t.source.clone(),
            dominated_by: merged.terms.iter().find(|m| dominates(&m.exponents, &t.exponents)).map(|m| m.label.clone()),
        })
        .collect()
}

/// T^{5/6} ≤ |T′|: the large-T′ regime.
pub fn large_regime(a: Q) -> bool {
    a >= q(5, 6)
}

/// (exponent of |T′|, exponent of T) in the cutoff R.
pub fn r_exponent_pair(a: Q) -> (Q, Q) {
    if large_regime(a) {
        (q(77, 180), q(-7, 36))
    } else {
        (q(25, 36), q(-15, 36))
    }
}

pub fn r_exponent(a: Q) -> Q {
    let (x, y) = r_exponent_pair(a);
    x * a + y
}

/// Lower bound on log_T K below which the delta-method error term dominates.
pub fn k_floor(a: Q) -> Q {
    if large_regime(a) {
        q(3, 16) + q(31, 80) * a
    } else {
        q(13, 112) + q(53, 112) * a
    }
}

/// log_T of (T|T′|)^{1/2}.
pub fn k_ceiling(a: Q) -> Q {
    (Q::one() + a) / 2
}

/// Contribution of r ≥ R: T^{3/4}|T′|^{3/4}R^{−9/14}.
pub fn tail_exponent(a: Q) -> Q {
    q(3, 4) + q(3, 4) * a - q(9, 14) * r_exponent(a)
}

/// The exponent of the final bound in each regime.
pub fn bound_exponent(a: Q) -> Q {
    if large_regime(a) {
        q(7, 8) + q(19, 40) * a
    } else {
        q(57, 56) + q(17, 56) * a
    }
}

/// K = |T′|^k T^j for the two regimes.
pub fn chosen_k(a: Q) -> (Q, Q) {
    if large_regime(a) {
        (q(4, 5), Q::zero())
    } else {
        (q(8, 7), q(-2, 7))
    }
}

/// Convexity: (t_f + |t|)^{3/4}(|t_f − |t|| + 1)^{3/4} = T^{3/4 + 3a/4}.
pub fn convexity_exponent(a: Q) -> Q {
    q(3, 4) + q(3, 4) * a
}

fn check_a(a: Q) -> Result<(), LedgerError> {
    if a < q(3, 5) || a > Q::one() {
        return Err(LedgerError::ConstraintViolated(format!("a = {a} outside [3/5, 1]")));
    }
    Ok(())
}

fn sup_unchecked(ledger: &TermLedger, a: Q, kappa: Q, rho: Q) -> Q {
    ledger.terms.iter().map(|t| t.exponents.t_exponent(a, kappa, rho)).max().unwrap_or_else(Q::zero)
}

/// max over terms of the T-exponent with T′ = T^a, K = |T′|^k T^j, r ≤ R.
pub fn evaluate_sup(ledger: &TermLedger, a: Q, k: Q, j: Q) -> Result<Q, LedgerError> {
    check_a(a)?;
    let kappa = k * a + j;
    if kappa > k_ceiling(a) {
        return Err(LedgerError::ConstraintViolated(format!("K = T^{kappa} exceeds (T|T′|)^(1/2)")));
    }
    if kappa < k_floor(a) {
        return Err(LedgerError::ConstraintViolated(format!("K = T^{kappa} is below the floor T^{}", k_floor(a))));
    }
    Ok(sup_unchecked(ledger, a, kappa, r_exponent(a)))
}

#[derive(Clone, Debug, Serialize)]
pub struct KOptimum {
    #[serde(serialize_with = "q_str")]
    pub a: Q,
    #[serde(serialize_with = "q_str")]
    pub k_opt: Q,
    #[serde(serialize_with = "q_str")]
    pub j_opt: Q,
    #[serde(serialize_with = "q_str")]
    pub sup: Q,
    /// Grid points attaining the minimum.
    pub ties: usize,
}

/// Denominator of the (k, j) grid.
pub const GRID_DEN: i64 = 280;

/// Minimises the sup over k ∈ [0, 3/2], j ∈ [−1/2, 1/2] in steps of 1/280,
/// subject to the floor and ceiling on K. Ties go to the smallest |j|, then
/// the smallest k.
pub fn optimize_k(ledger: &TermLedger, a: Q) -> Result<KOptimum, LedgerError> {
    check_a(a)?;
    let (lo, hi) = (k_floor(a), k_ceiling(a));
    let rho = r_exponent(a);
    let mut best: Option<(Q, Q, Q)> = None;
    let mut ties = 0;
    let mut js: Vec<i64> = (-(GRID_DEN / 2)..=GRID_DEN / 2).collect();
    js.sort_by_key(|j| (j.abs(), *j));
    for jn in js {
        let j = q(jn, GRID_DEN);
        for kn in 0..=(3 * GRID_DEN / 2) {
            let k = q(kn, GRID_DEN);
            let kappa = k * a + j;
            if kappa < lo || kappa > hi {
                continue;
            }
            let s = sup_unchecked(ledger, a, kappa, rho);
            match &best {
                Some((b, _, _)) if s > *b => {}
                Some((b, _, _)) if s == *b => ties += 1,
                _ => {
                    best = Some((s, k, j));
                    ties = 1;
                }
            }
        }
    }
    let (sup, k_opt, j_opt) = best.ok_or(LedgerError::InfeasibleConstraints(a))?;
    Ok(KOptimum { a, k_opt, j_opt, sup, ties })
}

/// N_max = T^{3/2}|T′|^{3/2}/r² and the cutoff R for the given spectral sizes.
pub fn afe_cutoffs(big_t: f64, t_prime: f64, r: u64) -> Result<(f64, f64), LedgerError> {
    let tp = t_prime.abs();
    if !(big_t > 1.0 && tp >= big_t.powf(0.6) && r >= 1) {
        return Err(LedgerError::RegimeViolation(format!("T = {big_t}, |T′| = {tp}")));
    }
    let n_max = (big_t * tp).powf(1.5) / (r * r) as f64;
    let big_r = if tp >= big_t.powf(5.0 / 6.0) {
        tp.powf(77.0 / 180.0) * big_t.powf(-7.0 / 36.0)
    } else {
        tp.powf(25.0 / 36.0) * big_t.powf(-15.0 / 36.0)
    };
    Ok((n_max, big_r))
}

/// Accepts "p/q", integers, and finite decimals such as "0.9".
pub fn parse_rational(s: &str) -> Result<Q, LedgerError> {
    let s = s.trim();
    let err = || LedgerError::Parse(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| err())?;
        let d: i64 = d.trim().parse().map_err(|_| err())?;
        if d == 0 {
            return Err(err());
        }
        return Ok(q(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        if fp.len() > 12 || !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let neg = ip.starts_with('-');
        let ipv: i64 = if ip.is_empty() || ip == "-" { 0 } else { ip.parse().map_err(|_| err())? };
        let den = 10i64.pow(fp.len() as u32);
        let fpv: i64 = if fp.is_empty() { 0 } else { fp.parse().map_err(|_| err())? };
        let mag = ipv.abs() * den + fpv;
        return Ok(q(if neg { -mag } else { mag }, den));
    }
    s.parse::<i64>().map(Q::from_integer).map_err(|_| err())
}

#[cfg(test)]
mod tests {
    use super::*;
    use Symbol::*;

    #[test]
    fn inventory() {
        let l = build_ledger();
        assert_eq!(l.len(), 12);
        assert_eq!(l.from_source(ZERO_FREQUENCY).count(), 3);
        assert_eq!(l.from_source(NONZERO_FREQUENCY).count(), 9);
        assert_eq!(merged_ledger().len(), 5);
        let first = &l.terms[0].exponents;
        assert_eq!(*first, ExponentVector::new(&[(T, q(1, 1)), (Tp, q(-1, 1)), (K, q(3, 2)), (R, q(1, 2))]));
        let t = l.terms.iter().find(|t| t.label == "T^{7/8}|T'|^{7/8}/K^{1/2}").unwrap();
        assert_eq!(t.exponents, ExponentVector::new(&[(T, q(7, 8)), (Tp, q(7, 8)), (K, q(-1, 2))]));
    }

    #[test]
    fn merge_is_justified() {
        for d in check_merge(&build_ledger(), &merged_ledger()) {
            assert!(d.dominated_by.is_some(), "{} is not dominated", d.term);
        }
        // not vacuous: K may reach (T|T′|)^{1/2} > T^{1/2}
        let m = ExponentVector::new(&[(T, q(1, 2))]);
        assert!(!dominates(&m, &ExponentVector::new(&[(K, q(1, 1))])));
        assert!(dominates(&ExponentVector::new(&[(T, q(1, 2)), (Tp, q(1, 2))]), &ExponentVector::new(&[(K, q(1, 1))])));
    }

    #[test]
    fn vector_arithmetic() {
        let a = ExponentVector::new(&[(T, q(1, 2)), (K, q(1, 4))]);
        let b = ExponentVector::new(&[(K, q(-1, 4)), (Tp, q(1, 3))]);
        let s = a.add(&b);
        assert_eq!(s.get(K), Q::zero());
        assert_eq!(s.symbols().count(), 2);
        assert_eq!(s.sub(&b), a);
        assert_eq!(a.to_string(), "T^(1/2) K^(1/4)");
    }

    #[test]
    fn large_regime_choice() {
        let l = merged_ledger();
        let a = Q::one();
        assert_eq!(evaluate_sup(&l, a, q(4, 5), Q::zero()).unwrap(), q(27, 20));
        assert_eq!(q(7, 8) + q(19, 40), q(27, 20));
        assert_eq!(k_floor(a), q(46, 80));
        assert_eq!(evaluate_sup(&build_ledger(), a, q(4, 5), Q::zero()).unwrap(), q(27, 20));
        assert_eq!(tail_exponent(a), q(27, 20));
    }

    #[test]
    fn small_regime_choice() {
        let l = merged_ledger();
        let a = q(3, 5);
        let s = evaluate_sup(&l, a, q(8, 7), q(-2, 7)).unwrap();
        assert_eq!(s, q(57, 56) + q(17, 56) * a);
        assert_eq!(s, q(6, 5));
    }

    #[test]
    fn constraints() {
        let l = merged_ledger();
        assert!(matches!(evaluate_sup(&l, Q::one(), Q::one(), q(1, 10)), Err(LedgerError::ConstraintViolated(_))));
        assert!(matches!(evaluate_sup(&l, Q::one(), q(1, 2), Q::zero()), Err(LedgerError::ConstraintViolated(_))));
        assert!(evaluate_sup(&l, q(1, 2), Q::one(), Q::zero()).is_err());
    }

    #[test]
    fn regimes_meet_at_five_sixths() {
        let a = q(5, 6);
        assert_eq!(q(7, 8) + q(19, 40) * a, q(57, 56) + q(17, 56) * a);
    }

    #[test]
    fn r_cutoff() {
        assert_eq!(r_exponent_pair(Q::one()), (q(77, 180), q(-7, 36)));
        assert_eq!(r_exponent(Q::one()), q(7, 30));
        let (n, r) = afe_cutoffs(1000.0, 1000.0, 1).unwrap();
        assert!((n / 1e9 - 1.0).abs() < 1e-12);
        assert!((r / 1000f64.powf(7.0 / 30.0) - 1.0).abs() < 1e-12);
        assert!(matches!(afe_cutoffs(1000.0, 10.0, 1), Err(LedgerError::RegimeViolation(_))));
        let (n2, _) = afe_cutoffs(1000.0, 1000.0, 3).unwrap();
        assert!((n2 * 9.0 / n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn optimizer_recovers_choices() {
        let l = merged_ledger();
        for a in [q(1, 1), q(9, 10), q(5, 6), q(7, 10), q(3, 5)] {
            let opt = optimize_k(&l, a).unwrap();
            let (k, j) = chosen_k(a);
            let chosen = evaluate_sup(&l, a, k, j).unwrap();
            assert!(opt.sup <= chosen, "a = {a}");
            assert_eq!(chosen, bound_exponent(a), "a = {a}");
            if a == Q::one() || a == q(3, 5) {
                assert_eq!(opt.sup, chosen);
            }
        }
        assert_eq!(optimize_k(&l, Q::one()).unwrap().sup, q(27, 20));
    }

    #[test]
    fn subconvex_above_three_fifths() {
        let l = merged_ledger();
        for n in 0..=8 {
            let a = q(3, 5) + q(n, 20);
            let opt = optimize_k(&l, a).unwrap();
            if a > q(3, 5) + q(1, 100) {
                assert!(opt.sup < convexity_exponent(a), "a = {a}");
            } else {
                assert!(opt.sup <= convexity_exponent(a));
            }
        }
    }

    #[test]
    fn parsing() {
        assert_eq!(parse_rational("5/6").unwrap(), q(5, 6));
        assert_eq!(parse_rational("0.9").unwrap(), q(9, 10));
        assert_eq!(parse_rational("1").unwrap(), Q::one());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }
}
