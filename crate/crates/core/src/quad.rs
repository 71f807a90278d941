//! Real quadratic fields: continued fractions, units, Pell equations and the
//! indecomposables coming from semiconvergents.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::field::{is_squarefree, AlgebraicNumber, BasisClass, FieldSpec, Radical, Role};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QuadError {
    #[error("{0} is not a square-free integer greater than 1")]
    NotSquarefree(u64),
    #[error("only the right-hand sides -1, 2 and -2 are supported, got {0}")]
    UnsupportedRhs(i64),
    #[error("element lies in Q(sqrt {got}), expected Q(sqrt {want})")]
    WrongSubfield { want: u64, got: u64 },
    #[error("{0} is not indecomposable in its quadratic field")]
    NotIndecomposable(String),
    #[error("the half-integral variant needs a radicand congruent to 1 mod 4, got {0}")]
    VariantUndefined(u64),
}

/// `(a + b sqrt n)/2` in the ring of integers of `Q(sqrt n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadElement {
    n: u64,
    a: BigInt,
    b: BigInt,
}

impl QuadElement {
    /// `(a + b sqrt n)/2`; panics if the value is not integral.
    pub fn from_halves(n: u64, a: BigInt, b: BigInt) -> Self {
        let ok = if n % 4 == 1 { (&a - &b).is_even() } else { a.is_even() && b.is_even() };
        assert!(ok, "({a} + {b} sqrt {n})/2 is not integral");
        QuadElement { n, a, b }
    }

    /// `x + y sqrt n`.
    pub fn from_ints(n: u64, x: BigInt, y: BigInt) -> Self {
        QuadElement { n, a: x * 2, b: y * 2 }
    }

    pub fn int(n: u64, x: i64) -> Self {
        Self::from_ints(n, x.into(), 0.into())
    }

    pub fn omega(n: u64) -> Self {
        if n % 4 == 1 {
            QuadElement { n, a: 1.into(), b: 1.into() }
        } else {
            QuadElement { n, a: 0.into(), b: 2.into() }
        }
    }

    pub fn radicand(&self) -> u64 {
        self.n
    }

    /// Numerators over 2.
    pub fn halves(&self) -> (&BigInt, &BigInt) {
        (&self.a, &self.b)
    }

    pub fn trace(&self) -> &BigInt {
        &self.a
    }

    pub fn norm(&self) -> BigInt {
        (&self.a * &self.a - &self.b * &self.b * self.n) / 4
    }

    pub fn conjugate(&self) -> Self {
        QuadElement { n: self.n, a: self.a.clone(), b: -&self.b }
    }

    pub fn add(&self, o: &Self) -> Self {
        debug_assert_eq!(self.n, o.n);
        QuadElement { n: self.n, a: &self.a + &o.a, b: &self.b + &o.b }
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        QuadElement { n: self.n, a: &self.a * k, b: &self.b * k }
    }

    pub fn mul(&self, o: &Self) -> Self {
        debug_assert_eq!(self.n, o.n);
        let a = &self.a * &o.a + &self.b * &o.b * self.n;
        let b = &self.a * &o.b + &self.b * &o.a;
        QuadElement { n: self.n, a: a / 2, b: b / 2 }
    }

    pub fn is_totally_positive(&self) -> bool {
        self.a.is_positive() && &self.a * &self.a > &self.b * &self.b * self.n
    }

    /// The same number inside a biquadratic field that contains `sqrt n`.
    pub fn embed(&self, field: &Arc<FieldSpec>) -> Option<AlgebraicNumber> {
        let r = field.radical_for(self.n)?;
        let mut num = [BigInt::zero(), BigInt::zero(), BigInt::zero(), BigInt::zero()];
        num[0] = &self.a * 2;
        num[r.slot()] = &self.b * 2;
        Some(AlgebraicNumber::from_parts(field, num, BigInt::from(4)))
    }

    /// Reads back an element of `K` lying in `Q(sqrt n)`.
    pub fn from_algebraic(x: &AlgebraicNumber, r: Radical) -> Option<Self> {
        if !x.in_subfield(r) || !x.is_integral() {
            return None;
        }
        let n = x.field().radicand(r);
        let a = &x.num()[0] / 2;
        let b = &x.num()[r.slot()] / 2;
        if &a * 2 != x.num()[0] || &b * 2 != x.num()[r.slot()] {
            return None;
        }
        Some(QuadElement { n, a, b })
    }
}

impl fmt::Display for QuadElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b, den) = if self.a.is_even() && self.b.is_even() {
            (&self.a / 2, &self.b / 2, false)
        } else {
            (self.a.clone(), self.b.clone(), true)
        };
        let mut s = String::new();
        if !a.is_zero() {
            s.push_str(&a.to_string());
        }
        if !b.is_zero() {
            let mag = b.abs();
            let sq = if mag.is_one() { format!("sqrt({})", self.n) } else { format!("{mag}*sqrt({})", self.n) };
            if s.is_empty() {
                if b.is_negative() {
                    s.push('-');
                }
            } else {
                s.push_str(if b.is_negative() { " - " } else { " + " });
            }
            s.push_str(&sq);
        }
        if s.is_empty() {
            s.push('0');
        }
        if den {
            write!(f, "({s})/2")
        } else {
            f.write_str(&s)
        }
    }
}

impl Serialize for QuadElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Continued fraction and unit data of `Q(sqrt n)`.
#[derive(Debug, Clone, Serialize)]
pub struct QuadData {
    pub n: u64,
    pub omega: QuadElement,
    /// First partial quotient of the expansion of `-conj(omega)`.
    pub u0: u64,
    /// One full period `u_1 .. u_l`.
    pub period: Vec<u64>,
    pub fundamental_unit: QuadElement,
    pub unit_norm: i8,
    /// Largest partial quotient at an odd index.
    pub max_odd_quotient: u64,
}

/// A semiconvergent `alpha_i + k alpha_{i+1}` with odd `i`.
#[derive(Debug, Clone, Serialize)]
pub struct Semiconvergent {
    pub i: i64,
    pub k: u64,
    pub value: QuadElement,
}

fn isqrt_u64(n: u64) -> u64 {
    n.sqrt()
}

struct Surd {
    d: BigInt,
    root: BigInt,
    p: BigInt,
    q: BigInt,
}

impl Surd {
    /// `(p + sqrt d)/q`
    fn new(d: u64, p: i64, q: i64) -> Self {
        Surd { d: d.into(), root: isqrt_u64(d).into(), p: p.into(), q: q.into() }
    }

    fn step(&mut self) -> BigInt {
        let num = if self.q.is_positive() { &self.p + &self.root } else { &self.p + &self.root + 1 };
        let a = num.div_floor(&self.q);
        let p = &a * &self.q - &self.p;
        let q = (&self.d - &p * &p) / &self.q;
        self.p = p;
        self.q = q;
        a
    }

    fn state(&self) -> (BigInt, BigInt) {
        (self.p.clone(), self.q.clone())
    }
}

/// Partial quotients `(u0, period)` of a purely periodic-after-one-step surd.
fn expand(d: u64, p: i64, q: i64) -> (u64, Vec<u64>) {
    let mut s = Surd::new(d, p, q);
    let u0 = s.step().to_u64().expect("nonnegative partial quotient");
    let start = s.state();
    let mut period = Vec::new();
    loop {
        period.push(s.step().to_u64().expect("partial quotient fits u64"));
        if s.state() == start {
            return (u0, period);
        }
    }
}

impl QuadData {
    fn compute(n: u64) -> QuadData {
        let (u0, period) = if n % 4 == 1 { expand(n, -1, 2) } else { expand(n, 0, 1) };
        let omega = QuadElement::omega(n);
        let l = period.len();
        let max_odd_quotient = (1..=2 * l).step_by(2).map(|i| period[(i - 1) % l]).max().unwrap_or(0);
        let mut data = QuadData {
            n,
            omega,
            u0,
            period,
            fundamental_unit: QuadElement::int(n, 1),
            unit_norm: 1,
            max_odd_quotient,
        };
        let (p, q) = data.convergents().nth(l).expect("convergent");
        let unit = data.element(&p, &q);
        let norm = unit.norm();
        assert!(norm.abs().is_one(), "period did not produce a unit for n = {n}");
        data.unit_norm = if norm.is_positive() { 1 } else { -1 };
        data.fundamental_unit = unit;
        data
    }

    /// Partial quotient `u_i` for `i >= 0`.
    pub fn quotient(&self, i: usize) -> u64 {
        if i == 0 {
            self.u0
        } else {
            self.period[(i - 1) % self.period.len()]
        }
    }

    /// `(p_i, q_i)` for `i = -1, 0, 1, ...`.
    pub fn convergents(&self) -> impl Iterator<Item = (BigInt, BigInt)> + '_ {
        let mut prev = (BigInt::zero(), BigInt::one()); // (p_{-2}, q_{-2}) so that the step gives p_{-1} = 1
        let mut cur = (BigInt::one(), BigInt::zero());
        let mut i: usize = 0;
        let mut first = true;
        std::iter::from_fn(move || {
            if first {
                first = false;
                return Some(cur.clone());
            }
            let u = BigInt::from(self.quotient(i));
            i += 1;
            let next = (&prev.0 + &u * &cur.0, &prev.1 + &u * &cur.1);
            prev = std::mem::replace(&mut cur, next);
            Some(cur.clone())
        })
    }

    /// `p + q omega`.
    pub fn element(&self, p: &BigInt, q: &BigInt) -> QuadElement {
        let (wa, wb) = self.omega.halves();
        QuadElement::from_halves(self.n, p * 2 + q * wa, q * wb)
    }

    /// `alpha_i = p_i + q_i omega`, starting at `i = -1`.
    pub fn alphas(&self) -> impl Iterator<Item = QuadElement> + '_ {
        self.convergents().map(move |(p, q)| self.element(&p, &q))
    }

    /// Semiconvergents `alpha_{i,k}` (odd `i`) of trace at most `bound`, in increasing order.
    pub fn semiconvergents(&self, bound: &BigInt) -> Vec<Semiconvergent> {
        let alphas: Vec<QuadElement> = {
            let mut v = Vec::new();
            for (idx, a) in self.alphas().enumerate() {
                let odd = idx % 2 == 0; // idx 0 is i = -1
                if odd && a.trace() > bound {
                    break;
                }
                v.push(a);
            }
            v.push(self.alphas().nth(v.len()).unwrap());
            v
        };
        let mut out = Vec::new();
        let mut idx = 0;
        while idx + 1 < alphas.len() {
            let i = idx as i64 - 1;
            let kmax = self.quotient(idx + 1);
            for k in 0..kmax {
                let v = alphas[idx].add(&alphas[idx + 1].scale(&BigInt::from(k)));
                if v.trace() > bound {
                    break;
                }
                out.push(Semiconvergent { i, k, value: v });
            }
            idx += 2;
        }
        out
    }
}

fn memo() -> &'static RwLock<HashMap<u64, Arc<QuadData>>> {
    static MEMO: OnceLock<RwLock<HashMap<u64, Arc<QuadData>>>> = OnceLock::new();
    MEMO.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Cached continued-fraction data of `Q(sqrt n)`.
pub fn quad_data(n: u64) -> Result<Arc<QuadData>, QuadError> {
    if !is_squarefree(n) {
        return Err(QuadError::NotSquarefree(n));
    }
    if let Some(d) = memo().read().unwrap().get(&n) {
        return Ok(d.clone());
    }
    let d = Arc::new(QuadData::compute(n));
    memo().write().unwrap().entry(n).or_insert_with(|| d.clone());
    Ok(d)
}

/// All indecomposable integers of `Q(sqrt n)` with trace at most `bound`:
/// the semiconvergents with odd index and their conjugates.
pub fn quadratic_indecomposables(n: u64, bound: u64) -> Result<Vec<QuadElement>, QuadError> {
    let d = quad_data(n)?;
    let mut out: Vec<QuadElement> = Vec::new();
    for sc in d.semiconvergents(&BigInt::from(bound)) {
        out.push(sc.value.conjugate());
        out.push(sc.value);
    }
    out.sort_by(|x, y| x.a.cmp(&y.a).then(x.b.cmp(&y.b)));
    out.dedup();
    Ok(out)
}

pub fn is_quadratic_indecomposable(x: &QuadElement) -> Result<bool, QuadError> {
    if !x.is_totally_positive() {
        return Ok(false);
    }
    let bound = x.trace().to_u64().unwrap_or(u64::MAX);
    let d = quad_data(x.n)?;
    Ok(d.semiconvergents(&BigInt::from(bound)).iter().any(|sc| sc.value == *x || sc.value.conjugate() == *x))
}

/// True when `alpha` or its conjugate is a totally positive convergent `alpha_i`.
pub fn is_convergent(x: &QuadElement) -> Result<bool, QuadError> {
    let d = quad_data(x.n)?;
    for a in d.alphas().step_by(2) {
        if a.trace() > x.trace() {
            return Ok(false);
        }
        if a == *x || a.conjugate() == *x {
            return Ok(true);
        }
    }
    unreachable!()
}

/// Solvability of `x^2 - n y^2 = rhs` for `rhs` in `{-1, 2, -2}`, read off the
/// continued fraction of `sqrt n`.
pub fn pell_solvable(n: u64, rhs: i64) -> Result<bool, QuadError> {
    if !is_squarefree(n) {
        return Err(QuadError::NotSquarefree(n));
    }
    if ![-1, 2, -2].contains(&rhs) {
        return Err(QuadError::UnsupportedRhs(rhs));
    }
    if n < 5 && rhs != -1 {
        // |rhs| is not below sqrt(n); a primitive solution is tiny here
        let target = BigInt::from(rhs);
        return Ok((0i64..8).any(|y| (0i64..16).any(|x| BigInt::from(x * x - n as i64 * y * y) == target)));
    }
    let (u0, period) = expand(n, 0, 1);
    let l = period.len();
    let target = BigInt::from(rhs);
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::from(u0), BigInt::one());
    for k in 0..=2 * l {
        if &p1 * &p1 - &q1 * &q1 * n == target {
            return Ok(true);
        }
        let u = BigInt::from(period[k % l]);
        let p2 = &p0 + &u * &p1;
        let q2 = &q0 + &u * &q1;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    Ok(false)
}

/// Smallest integer above `sqrt(u)` for non-square `u`.
pub fn ceil_sqrt(u: u64) -> u64 {
    isqrt_u64(u) + 1
}

/// Smallest odd integer above `sqrt(u)`.
pub fn ceil_sqrt_odd(u: u64) -> u64 {
    let c = ceil_sqrt(u);
    if c % 2 == 1 {
        c
    } else {
        c + 1
    }
}

/// `ceil(sqrt u) + sqrt u`.
pub fn distinguished_full(u: u64) -> QuadElement {
    QuadElement::from_ints(u, ceil_sqrt(u).into(), 1.into())
}

/// `(ceil_odd(sqrt u) + sqrt u)/2`, defined for `u = 1 mod 4`.
pub fn distinguished_half(u: u64) -> Result<QuadElement, QuadError> {
    if u % 4 != 1 {
        return Err(QuadError::VariantUndefined(u));
    }
    Ok(QuadElement::from_halves(u, ceil_sqrt_odd(u).into(), 1.into()))
}

/// The default choice: half-integral when `u = 1 mod 4`.
pub fn distinguished(u: u64) -> QuadElement {
    distinguished_half(u).unwrap_or_else(|_| distinguished_full(u))
}

pub fn element_m(f: &Arc<FieldSpec>) -> AlgebraicNumber {
    distinguished(f.m()).embed(f).unwrap()
}

pub fn element_s(f: &Arc<FieldSpec>) -> AlgebraicNumber {
    distinguished(f.s()).embed(f).unwrap()
}

pub fn element_t(f: &Arc<FieldSpec>) -> AlgebraicNumber {
    distinguished(f.t()).embed(f).unwrap()
}

pub fn element_m1(f: &Arc<FieldSpec>) -> AlgebraicNumber {
    distinguished_full(f.m()).embed(f).unwrap()
}

pub fn element_mhalf(f: &Arc<FieldSpec>) -> Result<AlgebraicNumber, QuadError> {
    Ok(distinguished_half(f.m())?.embed(f).unwrap())
}

/// Sufficient condition for an indecomposable of a quadratic subfield to stay
/// indecomposable in the biquadratic field. `false` means "not certified".
pub fn sufficient_indecomposability(f: &FieldSpec, role: Role, x: &QuadElement) -> Result<bool, QuadError> {
    let (p, q, r) = f.pqr_values();
    let want = match role {
        Role::P => p,
        Role::Q => q,
        Role::R => r,
    };
    if x.radicand() != want {
        return Err(QuadError::WrongSubfield { want, got: x.radicand() });
    }
    if !is_quadratic_indecomposable(x)? {
        return Err(QuadError::NotIndecomposable(x.to_string()));
    }
    // compare sqrt(big) against sqrt(small) and max_odd_quotient * sqrt(small)
    let test = |big: u64, small: u64| -> Result<bool, QuadError> {
        let mk = quad_data(small)?.max_odd_quotient as u128;
        if big as u128 > mk * mk * small as u128 {
            return Ok(true);
        }
        Ok(big > small && is_convergent(x)?)
    };
    match role {
        Role::P => test(r, p),
        Role::R => test(p, r),
        Role::Q => match f.basis() {
            BasisClass::B4a | BasisClass::B4b => test(r, q),
            _ => Ok(true),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fundamental_units() {
        let cases = [(2, "1 + sqrt(2)", -1), (3, "2 + sqrt(3)", 1), (6, "5 + 2*sqrt(6)", 1), (5, "(1 + sqrt(5))/2", -1)];
        for (n, text, sign) in cases {
            let d = quad_data(n).unwrap();
            assert_eq!(d.fundamental_unit.to_string(), text);
            assert_eq!(d.unit_norm, sign);
        }
        assert_eq!(quad_data(21).unwrap().fundamental_unit.to_string(), "(5 + sqrt(21))/2");
        assert_eq!(quad_data(33).unwrap().fundamental_unit.to_string(), "23 + 4*sqrt(33)");
    }

    #[test]
    fn pell_examples() {
        assert!(pell_solvable(10, -1).unwrap());
        assert!(!pell_solvable(10, 2).unwrap());
        assert!(!pell_solvable(10, -2).unwrap());
        assert!(pell_solvable(2, -2).unwrap());
        assert!(pell_solvable(3, -2).unwrap());
        assert!(!pell_solvable(3, 2).unwrap());
        assert!(matches!(pell_solvable(10, 3), Err(QuadError::UnsupportedRhs(3))));
    }

    #[test]
    fn small_indecomposables() {
        let v: Vec<String> = quadratic_indecomposables(2, 5).unwrap().iter().map(|x| x.to_string()).collect();
        assert_eq!(v, ["1", "2 - sqrt(2)", "2 + sqrt(2)"]);
        let w = quadratic_indecomposables(5, 4).unwrap();
        assert!(w.iter().any(|x| x.to_string() == "(3 + sqrt(5))/2"));
    }

    #[test]
    fn distinguished_elements() {
        assert_eq!(distinguished(10).to_string(), "4 + sqrt(10)");
        assert_eq!(distinguished(21).to_string(), "(5 + sqrt(21))/2");
        assert_eq!(distinguished_full(85).to_string(), "10 + sqrt(85)");
        assert!(matches!(distinguished_half(10), Err(QuadError::VariantUndefined(10))));
    }

    #[test]
    fn criterion_examples() {
        let f = FieldSpec::new(2, 3).unwrap();
        let x = QuadElement::from_ints(3, 2.into(), 1.into());
        assert!(sufficient_indecomposability(&f, Role::Q, &x).unwrap());
        let g = FieldSpec::new(2, 21).unwrap();
        let y = QuadElement::from_ints(42, 7.into(), 1.into());
        assert_eq!(g.role(Role::R), Radical::T);
        assert!(!sufficient_indecomposability(&g, Role::R, &y).unwrap());
        let h = FieldSpec::new(5, 101).unwrap();
        let z = QuadElement::from_halves(5, 3.into(), 1.into());
        assert!(sufficient_indecomposability(&h, Role::P, &z).unwrap());
    }
}
