//! Bounded searches over totally positive integers: elements below a given one,
//! decompositions, square roots and squares below a given element.
//!
//! Every search takes a candidate budget and fails with `BudgetExceeded` rather
//! than returning a partial answer. Output is ordered lexicographically on `(a, b, c, d)`.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::field::{AlgebraicNumber, EmbeddingId, FieldSpec, Radical};
use crate::real;

pub const DEFAULT_BUDGET: u64 = 200_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("search budget of {limit} candidates exhausted")]
    BudgetExceeded { limit: u64 },
    #[error("{0} is not an algebraic integer")]
    NotIntegral(String),
    #[error("{0} is not totally positive")]
    NotTotallyPositive(String),
    #[error("coordinates of {0} are too large for a box search")]
    TooLarge(String),
    #[error("{0} does not lie in the requested quadratic subfield")]
    WrongSubfield(String),
}

struct Counter {
    used: u64,
    limit: u64,
}

impl Counter {
    fn new(limit: u64) -> Self {
        Counter { used: 0, limit }
    }

    fn tick(&mut self) -> Result<(), SearchError> {
        self.used += 1;
        if self.used > self.limit {
            Err(SearchError::BudgetExceeded { limit: self.limit })
        } else {
            Ok(())
        }
    }
}

fn isqrt_i128(n: i128) -> i128 {
    if n < 0 {
        -1
    } else {
        n.sqrt()
    }
}

/// Largest `r >= 0` with `r^2 * n < bound^2`, or -1 if none (only when bound <= 0).
fn strict_radius(bound: i128, n: u64) -> i128 {
    if bound <= 0 {
        return -1;
    }
    isqrt_i128((bound * bound - 1) / n as i128)
}

fn small_coords(x: &AlgebraicNumber) -> Result<[i64; 4], SearchError> {
    let q = x.quarters().ok_or_else(|| SearchError::TooLarge(x.pretty()))?;
    if q.iter().any(|v| v.abs() > 1 << 30) {
        return Err(SearchError::TooLarge(x.pretty()));
    }
    Ok(q)
}

fn require_integral(x: &AlgebraicNumber) -> Result<(), SearchError> {
    if x.is_integral() {
        Ok(())
    } else {
        Err(SearchError::NotIntegral(x.pretty()))
    }
}

pub(crate) fn tp_small(f: &FieldSpec, c: [i64; 4]) -> bool {
    EmbeddingId::ALL.into_iter().all(|e| real::sign_small(f, c, f_row(f, e)) > 0)
}

fn f_row(f: &FieldSpec, e: EmbeddingId) -> [i8; 3] {
    Radical::ALL.map(|r| f.embedding_sign(e, r))
}

/// Walks every integral `beta` with `0 <= beta <= alpha` in lexicographic order.
/// `visit` returns `false` to stop early.
fn scan_dominated(
    alpha: &AlgebraicNumber,
    budget: u64,
    mut visit: impl FnMut([i64; 4]) -> bool,
) -> Result<(), SearchError> {
    require_integral(alpha)?;
    if !alpha.is_tp_or_zero() {
        return Err(SearchError::NotTotallyPositive(alpha.pretty()));
    }
    let f = alpha.field().clone();
    let al = small_coords(alpha)?;
    let [m, s, t] = f.radicands();
    let mut ctr = Counter::new(budget);
    let big_a = al[0] as i128;
    if !visit([0; 4]) {
        return Ok(());
    }
    for a in 1..big_a {
        let rest = big_a - a;
        let range = |n: u64, centre: i64| -> (i128, i128) {
            let r1 = strict_radius(a, n);
            let r2 = strict_radius(rest, n);
            let c = centre as i128;
            ((-r1).max(c - r2), r1.min(c + r2))
        };
        let (b0, b1) = range(m, al[1]);
        let (c0, c1) = range(s, al[2]);
        let (d0, d1) = range(t, al[3]);
        for b in b0..=b1 {
            for c in c0..=c1 {
                for d in d0..=d1 {
                    let beta = [a as i64, b as i64, c as i64, d as i64];
                    if !f.is_integral_quarter(beta) {
                        continue;
                    }
                    ctr.tick()?;
                    let diff = [al[0] - beta[0], al[1] - beta[1], al[2] - beta[2], al[3] - beta[3]];
                    if tp_small(&f, beta) && tp_small(&f, diff) && !visit(beta) {
                        return Ok(());
                    }
                }
            }
        }
    }
    if !alpha.is_zero() {
        visit(al);
    }
    Ok(())
}

/// All integral `beta` with `beta >= 0` and `alpha - beta >= 0` (totally), including 0 and `alpha`.
pub fn dominated_by(alpha: &AlgebraicNumber, budget: u64) -> Result<Vec<AlgebraicNumber>, SearchError> {
    let f = alpha.field().clone();
    let mut out = Vec::new();
    scan_dominated(alpha, budget, |c| {
        out.push(AlgebraicNumber::from_quarters(&f, c));
        true
    })?;
    Ok(out)
}

pub fn is_indecomposable(alpha: &AlgebraicNumber, budget: u64) -> Result<bool, SearchError> {
    if !alpha.is_totally_positive() {
        return Err(SearchError::NotTotallyPositive(alpha.pretty()));
    }
    let al = small_coords(alpha)?;
    let mut found = false;
    scan_dominated(alpha, budget, |c| {
        if c != [0; 4] && c != al {
            found = true;
            return false;
        }
        true
    })?;
    Ok(!found)
}

/// A decomposition class under the automorphisms fixing the target.
#[derive(Debug, Clone, Serialize)]
pub struct Orbit {
    /// Pair whose first member is the lexicographically smallest member of the orbit.
    pub representative: (AlgebraicNumber, AlgebraicNumber),
    pub size: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionSet {
    pub target: AlgebraicNumber,
    /// Unordered pairs `(beta, alpha - beta)` with `beta <= alpha - beta` lexicographically.
    pub pairs: Vec<(AlgebraicNumber, AlgebraicNumber)>,
    pub orbits: Vec<Orbit>,
    /// Embedding indices fixing the target; orbits are taken under these.
    pub group: Vec<u8>,
}

/// Orbit key of a decomposition: the smallest element among all images of both parts.
pub fn orbit_key(pair: &(AlgebraicNumber, AlgebraicNumber), group: &[EmbeddingId]) -> AlgebraicNumber {
    let a = pair.0.orbit_min(group);
    let b = pair.1.orbit_min(group);
    a.min(b)
}

pub fn canonical_orbits(
    target: &AlgebraicNumber,
    pairs: &[(AlgebraicNumber, AlgebraicNumber)],
) -> (Vec<EmbeddingId>, Vec<Orbit>) {
    let group = target.stabilizer();
    let mut orbits: Vec<Orbit> = Vec::new();
    let mut keys: Vec<AlgebraicNumber> = Vec::new();
    for p in pairs {
        let k = orbit_key(p, &group);
        match keys.iter().position(|x| *x == k) {
            Some(i) => orbits[i].size += 1,
            None => {
                let other = target - &k;
                keys.push(k.clone());
                orbits.push(Orbit { representative: (k, other), size: 1 });
            }
        }
    }
    let mut idx: Vec<usize> = (0..orbits.len()).collect();
    idx.sort_by(|&i, &j| keys[i].cmp(&keys[j]));
    let sorted = idx.into_iter().map(|i| orbits[i].clone()).collect();
    (group, sorted)
}

pub fn decompositions(alpha: &AlgebraicNumber, include_zero: bool, budget: u64) -> Result<DecompositionSet, SearchError> {
    let all = dominated_by(alpha, budget)?;
    let mut pairs = Vec::new();
    for b in &all {
        let g = alpha - b;
        if *b > g || (!include_zero && (b.is_zero() || g.is_zero())) {
            continue;
        }
        pairs.push((b.clone(), g));
    }
    let (group, orbits) = canonical_orbits(alpha, &pairs);
    Ok(DecompositionSet { target: alpha.clone(), pairs, orbits, group: group.iter().map(|e| e.index()).collect() })
}

/// `x * y` over the denominator 16.
fn mul16(f: &FieldSpec, x: [i64; 4], y: [i64; 4]) -> [i128; 4] {
    let [a1, b1, c1, d1] = x.map(|v| v as i128);
    let [a2, b2, c2, d2] = y.map(|v| v as i128);
    let (m, s, t) = (f.m() as i128, f.s() as i128, f.t() as i128);
    let (m0, s0, t0) = (f.m0() as i128, f.s0() as i128, f.t0() as i128);
    [
        a1 * a2 + m * b1 * b2 + s * c1 * c2 + t * d1 * d2,
        a1 * b2 + b1 * a2 + m0 * (c1 * d2 + d1 * c2),
        a1 * c2 + c1 * a2 + s0 * (b1 * d2 + d1 * b2),
        a1 * d2 + d1 * a2 + t0 * (b1 * c2 + c1 * b2),
    ]
}

/// Square of an integral element, over the denominator 4.
fn square_quarters(f: &FieldSpec, w: [i64; 4]) -> Option<[i64; 4]> {
    let sq = mul16(f, w, w);
    let mut out = [0i64; 4];
    for (o, v) in out.iter_mut().zip(sq) {
        if v % 4 != 0 {
            return None;
        }
        *o = (v / 4).to_i64()?;
    }
    Some(out)
}

/// Every integral `w` with `alpha - w^2 >= 0` (totally), in lexicographic order.
pub fn squares_below(alpha: &AlgebraicNumber, budget: u64) -> Result<Vec<AlgebraicNumber>, SearchError> {
    require_integral(alpha)?;
    if !alpha.is_tp_or_zero() {
        return Err(SearchError::NotTotallyPositive(alpha.pretty()));
    }
    let f = alpha.field().clone();
    let al = small_coords(alpha)?;
    let [m, s, t] = f.radicands().map(|x| x as i128);
    // trace(w^2) <= trace(alpha) reads a^2 + m b^2 + s c^2 + t d^2 <= 4 A
    let cap = 4 * al[0] as i128;
    let mut ctr = Counter::new(budget);
    let mut out = Vec::new();
    let bm = isqrt_i128(cap / m);
    for b in -bm..=bm {
        let r1 = cap - m * b * b;
        let cm = isqrt_i128(r1 / s);
        for c in -cm..=cm {
            let r2 = r1 - s * c * c;
            let dm = isqrt_i128(r2 / t);
            for d in -dm..=dm {
                let r3 = r2 - t * d * d;
                let am = isqrt_i128(r3);
                for a in -am..=am {
                    let w = [a as i64, b as i64, c as i64, d as i64];
                    if !f.is_integral_quarter(w) {
                        continue;
                    }
                    ctr.tick()?;
                    let sq = square_quarters(&f, w).expect("integral square");
                    let diff = [al[0] - sq[0], al[1] - sq[1], al[2] - sq[2], al[3] - sq[3]];
                    if diff == [0; 4] || tp_small(&f, diff) {
                        out.push(AlgebraicNumber::from_quarters(&f, w));
                    }
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Distinct values `w^2` with `alpha - w^2 >= 0`.
pub fn square_parts(alpha: &AlgebraicNumber, budget: u64) -> Result<Vec<AlgebraicNumber>, SearchError> {
    let set: BTreeSet<AlgebraicNumber> = squares_below(alpha, budget)?.iter().map(|w| w.square()).collect();
    Ok(set.into_iter().collect())
}

fn normalize_sign(w: AlgebraicNumber) -> AlgebraicNumber {
    match w.num().iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => -w,
        _ => w,
    }
}

/// Square root in the ring of integers, if there is one. The root is recovered
/// from the square roots of the four real conjugates and then checked exactly.
/// The returned root has its first nonzero coordinate positive.
pub fn sqrt_in_ring(alpha: &AlgebraicNumber) -> Option<AlgebraicNumber> {
    if alpha.is_zero() {
        return Some(alpha.clone());
    }
    if !alpha.is_integral() || !alpha.is_totally_positive() {
        return None;
    }
    let f = alpha.field().clone();
    let den = alpha.den().clone();
    let mag = alpha.num().iter().map(|x| x.bits()).max().unwrap_or(1) as u32;
    let mut bits = 32 + mag / 2 + 8;
    'precision: loop {
        // sqrt of each conjugate, scaled by 2^bits
        let roots: Vec<(BigInt, BigInt)> = EmbeddingId::ALL
            .iter()
            .map(|&e| {
                let (lo, hi) = real::enclose(&f, alpha.num(), f_row(&f, e), bits);
                let lo = lo.div_floor(&den).max(BigInt::zero());
                let hi = hi.div_ceil(&den);
                let lo_r = (lo << bits).sqrt();
                let hi_r = (hi << bits).sqrt() + 1;
                (lo_r, hi_r)
            })
            .collect();
        let sq: Vec<(BigInt, BigInt)> = f
            .radicands()
            .iter()
            .map(|&n| {
                let l = (BigInt::from(n) << (2 * bits)).sqrt();
                let u = &l + 1;
                (l, u)
            })
            .collect();
        let mut candidates = Vec::new();
        for pattern in 0u8..8 {
            let eps: [i32; 4] = [1, sgn(pattern, 0), sgn(pattern, 1), sgn(pattern, 2)];
            let mut coords = [BigInt::zero(), BigInt::zero(), BigInt::zero(), BigInt::zero()];
            let mut ok = true;
            for slot in 0..4 {
                // interval of sum_e chi(e) eps_e sqrt(sigma_e(alpha)), scaled by 2^bits
                let (mut lo, mut hi) = (BigInt::zero(), BigInt::zero());
                for (k, &e) in EmbeddingId::ALL.iter().enumerate() {
                    let chi = if slot == 0 { 1 } else { f_row(&f, e)[slot - 1] as i32 };
                    let w = chi * eps[k];
                    let (l, u) = &roots[k];
                    if w > 0 {
                        lo += l;
                        hi += u;
                    } else {
                        lo -= u;
                        hi -= l;
                    }
                }
                let (lo, hi) = if slot == 0 {
                    (lo, hi)
                } else {
                    // divide by sqrt(n) as multiply by sqrt(n) then divide by n
                    let n = f.radicands()[slot - 1];
                    let (sl, su) = &sq[slot - 1];
                    let prods = [&lo * sl, &lo * su, &hi * sl, &hi * su];
                    let pl = prods.iter().min().unwrap().clone();
                    let pu = prods.iter().max().unwrap().clone();
                    let scale = BigInt::from(n) << bits;
                    (pl.div_floor(&scale), pu.div_ceil(&scale))
                };
                let one = BigInt::from(1) << bits;
                let k_lo = lo.div_ceil(&one);
                let k_hi = hi.div_floor(&one);
                if k_lo > k_hi {
                    ok = false;
                    break;
                }
                if k_lo != k_hi {
                    bits *= 2;
                    continue 'precision;
                }
                coords[slot] = k_lo;
            }
            if ok {
                candidates.push(coords);
            }
        }
        for c in candidates {
            let w = AlgebraicNumber::from_parts(&f, c, BigInt::from(4));
            if w.square() == *alpha {
                return Some(normalize_sign(w));
            }
        }
        return None;
    }
}

fn sgn(pattern: u8, bit: u8) -> i32 {
    if pattern >> bit & 1 == 1 {
        -1
    } else {
        1
    }
}

/// Square root found by scanning the box `trace(w^2) = trace(alpha)`.
pub fn sqrt_in_ring_search(alpha: &AlgebraicNumber, budget: u64) -> Result<Option<AlgebraicNumber>, SearchError> {
    require_integral(alpha)?;
    if alpha.is_zero() {
        return Ok(Some(alpha.clone()));
    }
    if !alpha.is_totally_positive() {
        return Ok(None);
    }
    let f = alpha.field().clone();
    let al = small_coords(alpha)?;
    let [m, s, t] = f.radicands().map(|x| x as i128);
    let cap = 4 * al[0] as i128;
    let mut ctr = Counter::new(budget);
    let bm = isqrt_i128(cap / m);
    for b in 0..=bm {
        let r1 = cap - m * b * b;
        let cm = isqrt_i128(r1 / s);
        for c in -cm..=cm {
            let r2 = r1 - s * c * c;
            let dm = isqrt_i128(r2 / t);
            for d in -dm..=dm {
                ctr.tick()?;
                let r3 = r2 - t * d * d;
                let a = isqrt_i128(r3);
                if a * a != r3 {
                    continue;
                }
                for a in [a, -a] {
                    let w = [a as i64, b as i64, c as i64, d as i64];
                    if f.is_integral_quarter(w) && square_quarters(&f, w) == Some(al) {
                        return Ok(Some(normalize_sign(AlgebraicNumber::from_quarters(&f, w))));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Necessary condition for an element of `Q(sqrt n1)` that is not already a square
/// there to become a square in `K`: every odd divisor of the gcd of the other two
/// radicands must divide it. `false` certifies a nonsquare; squares of the subfield
/// pass.
pub fn odd_divisor_square_filter(alpha: &AlgebraicNumber, subfield: Radical) -> Result<bool, SearchError> {
    if !alpha.in_subfield(subfield) {
        return Err(SearchError::WrongSubfield(alpha.pretty()));
    }
    let f = alpha.field();
    let mut g = f.cofactor(subfield);
    while g % 2 == 0 {
        g /= 2;
    }
    if g == 1 || alpha.div_int(&BigInt::from(g)).is_integral() {
        return Ok(true);
    }
    Ok(sqrt_in_ring(alpha).is_some_and(|r| r.in_subfield(subfield) || r.is_rational()))
}

/// Convenience: the subfield is read off `alpha`, which must be irrational.
pub fn odd_divisor_filter_auto(alpha: &AlgebraicNumber) -> Result<bool, SearchError> {
    let r = alpha.subfield().ok_or_else(|| SearchError::WrongSubfield(alpha.pretty()))?;
    odd_divisor_square_filter(alpha, r)
}

pub fn field_of(alpha: &AlgebraicNumber) -> &Arc<FieldSpec> {
    alpha.field()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(f: &Arc<FieldSpec>, s: &str) -> AlgebraicNumber {
        AlgebraicNumber::parse(f, s).unwrap()
    }

    fn texts(v: &[AlgebraicNumber]) -> Vec<String> {
        v.iter().map(|x| x.pretty()).collect()
    }

    #[test]
    fn elements_below_three() {
        let f = FieldSpec::new(2, 3).unwrap();
        assert_eq!(texts(&dominated_by(&el(&f, "3"), 1 << 20).unwrap()), ["0", "1", "2", "3"]);
        let g = FieldSpec::new(5, 13).unwrap();
        let v = texts(&dominated_by(&el(&g, "3"), 1 << 20).unwrap());
        assert!(v.contains(&"(3 + sqrt(5))/2".to_string()) && v.contains(&"(3 - sqrt(5))/2".to_string()));
        assert_eq!(v.len(), 6);
    }

    #[test]
    fn decomposable_element() {
        let f = FieldSpec::new(2, 21).unwrap();
        let x = el(&f, "7+sqrt(42)");
        assert!(!is_indecomposable(&x, 1 << 20).unwrap());
        let d = decompositions(&x, false, 1 << 20).unwrap();
        let piece = el(&f, "(7+3*sqrt(2)+sqrt(21)+sqrt(42))/2");
        assert!(d.pairs.iter().any(|(a, b)| *a == piece || *b == piece));
        let g = FieldSpec::new(2, 5).unwrap();
        assert!(!is_indecomposable(&el(&g, "7+2*sqrt(10)"), 1 << 20).unwrap());
    }

    #[test]
    fn square_roots() {
        let f = FieldSpec::new(2, 3).unwrap();
        assert_eq!(sqrt_in_ring(&el(&f, "2+sqrt(3)")).unwrap(), el(&f, "(sqrt(2)+sqrt(6))/2"));
        assert_eq!(sqrt_in_ring(&el(&f, "4+2*sqrt(3)")).unwrap(), el(&f, "1+sqrt(3)"));
        let g = FieldSpec::new(2, 5).unwrap();
        assert!(sqrt_in_ring(&el(&g, "2+sqrt(2)")).is_none());
        let w = el(&g, "(7+3*sqrt(2)+sqrt(5)+sqrt(10))/2");
        assert_eq!(sqrt_in_ring(&w.square()).unwrap(), w);
        assert_eq!(sqrt_in_ring_search(&w.square(), 1 << 24).unwrap().unwrap(), w);
    }

    #[test]
    fn parts_of_small_integers() {
        let f = FieldSpec::new(5, 13).unwrap();
        let v = texts(&square_parts(&el(&f, "3"), 1 << 20).unwrap());
        assert_eq!(v, ["0", "1", "(3 - sqrt(5))/2", "(3 + sqrt(5))/2"]);
        let g = FieldSpec::new(10, 13).unwrap();
        let v = texts(&square_parts(&el(&g, "8+2*sqrt(10)"), 1 << 20).unwrap());
        assert_eq!(v, ["0", "1"]);
    }

    #[test]
    fn odd_divisor_filter() {
        let f = FieldSpec::new(2, 5).unwrap();
        assert!(odd_divisor_square_filter(&el(&f, "3+sqrt(5)"), Radical::S).unwrap());
        let g = FieldSpec::new(3, 7).unwrap();
        // gcd(7, 21) = 7 does not divide 2+sqrt 3
        assert!(!odd_divisor_square_filter(&el(&g, "2+sqrt(3)"), Radical::M).unwrap());
        // already a square in Q(sqrt 3)
        assert!(odd_divisor_square_filter(&el(&g, "4+2*sqrt(3)"), Radical::M).unwrap());
    }
}
