//! Real biquadratic fields `Q(sqrt m, sqrt s)` and exact arithmetic on their elements.
//!
//! An element is stored as four integer coordinates over a positive denominator,
//! `(a + b*sqrt(m) + c*sqrt(s) + d*sqrt(t))/den`, with `den` a multiple of 4.
//! Integral elements always have `den == 4`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::real;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("{0} is not a square-free integer greater than 1")]
    NotSquarefree(u64),
    #[error("the two radicands generate a quadratic field, not a biquadratic one")]
    DegenerateField,
    #[error("elements belong to different fields")]
    FieldMismatch,
    #[error("cannot parse element: {0}")]
    Parse(String),
    #[error("element is not an algebraic integer")]
    NotIntegral,
    #[error("embedding index must be 1..=4, got {0}")]
    BadEmbedding(u8),
}

/// Congruence class of the labelling `(p, q, r)`; it fixes the integral basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum BasisClass {
    B1,
    B2,
    B3,
    B4a,
    B4b,
}

impl fmt::Display for BasisClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BasisClass::B1 => "B1",
            BasisClass::B2 => "B2",
            BasisClass::B3 => "B3",
            BasisClass::B4a => "B4a",
            BasisClass::B4b => "B4b",
        };
        f.write_str(s)
    }
}

/// One of the three square roots, in the sorted order `m < s < t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Radical {
    M,
    S,
    T,
}

impl Radical {
    pub const ALL: [Radical; 3] = [Radical::M, Radical::S, Radical::T];

    /// Position of the coordinate in `(a, b, c, d)`.
    pub fn slot(self) -> usize {
        match self {
            Radical::M => 1,
            Radical::S => 2,
            Radical::T => 3,
        }
    }
}

/// Role of a radical in the `(p, q, r)` labelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Role {
    P,
    Q,
    R,
}

/// Real embedding `sigma_1 .. sigma_4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EmbeddingId(u8);

impl EmbeddingId {
    pub const ALL: [EmbeddingId; 4] = [EmbeddingId(1), EmbeddingId(2), EmbeddingId(3), EmbeddingId(4)];

    pub fn new(i: u8) -> Result<Self, FieldError> {
        if (1..=4).contains(&i) {
            Ok(EmbeddingId(i))
        } else {
            Err(FieldError::BadEmbedding(i))
        }
    }

    pub fn index(self) -> u8 {
        self.0
    }
}

// signs of (sqrt p, sqrt q, sqrt r) under sigma_1..sigma_4
const PQR_SIGNS: [[i8; 3]; 4] = [[1, 1, 1], [-1, 1, -1], [1, -1, -1], [-1, -1, 1]];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SignValue {
    Negative,
    Zero,
    Positive,
}

impl SignValue {
    pub fn from_i8(v: i8) -> Self {
        match v.cmp(&0) {
            Ordering::Less => SignValue::Negative,
            Ordering::Equal => SignValue::Zero,
            Ordering::Greater => SignValue::Positive,
        }
    }
}

pub fn is_squarefree(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = n;
    let mut p = 2u64;
    while p * p <= k {
        if k % p == 0 {
            k /= p;
            if k % p == 0 {
                return false;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    true
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    m: u64,
    s: u64,
    t: u64,
    m0: u64,
    s0: u64,
    t0: u64,
    basis: BasisClass,
    pqr: [Radical; 3],
    // signs of (sqrt m, sqrt s, sqrt t) under each embedding
    signs: [[i8; 3]; 4],
    // floor(sqrt(n) * 2^48) for the fast sign path; 0 when n is too large
    pub(crate) sqrt48: [u64; 3],
}

impl FieldSpec {
    /// Builds `Q(sqrt n1, sqrt n2)`; the radicands are sorted so that `m < s < t`.
    pub fn new(n1: u64, n2: u64) -> Result<Arc<FieldSpec>, FieldError> {
        for n in [n1, n2] {
            if !is_squarefree(n) {
                return Err(FieldError::NotSquarefree(n));
            }
        }
        if n1 == n2 {
            return Err(FieldError::DegenerateField);
        }
        let g = gcd_u64(n1, n2);
        let n3 = (n1 / g) * (n2 / g);
        let mut v = [n1, n2, n3];
        v.sort_unstable();
        let [m, s, t] = v;
        let m0 = gcd_u64(s, t);
        let s0 = gcd_u64(m, t);
        let t0 = gcd_u64(m, s);
        let (basis, pqr) = classify_sorted(m, s, t);
        let mut signs = [[0i8; 3]; 4];
        for (e, pat) in PQR_SIGNS.iter().enumerate() {
            for (k, rad) in pqr.iter().enumerate() {
                signs[e][rad.slot() - 1] = pat[k];
            }
        }
        let sqrt48 = [m, s, t].map(real::sqrt_scaled_u64);
        Ok(Arc::new(FieldSpec { m, s, t, m0, s0, t0, basis, pqr, signs, sqrt48 }))
    }

    pub fn m(&self) -> u64 {
        self.m
    }
    pub fn s(&self) -> u64 {
        self.s
    }
    pub fn t(&self) -> u64 {
        self.t
    }
    pub fn m0(&self) -> u64 {
        self.m0
    }
    pub fn s0(&self) -> u64 {
        self.s0
    }
    pub fn t0(&self) -> u64 {
        self.t0
    }
    pub fn basis(&self) -> BasisClass {
        self.basis
    }
    pub fn radicands(&self) -> [u64; 3] {
        [self.m, self.s, self.t]
    }

    pub fn radicand(&self, r: Radical) -> u64 {
        match r {
            Radical::M => self.m,
            Radical::S => self.s,
            Radical::T => self.t,
        }
    }

    /// gcd of the other two radicands.
    pub fn cofactor(&self, r: Radical) -> u64 {
        match r {
            Radical::M => self.m0,
            Radical::S => self.s0,
            Radical::T => self.t0,
        }
    }

    pub fn radical_for(&self, n: u64) -> Option<Radical> {
        Radical::ALL.into_iter().find(|&r| self.radicand(r) == n)
    }

    /// The radical playing role `p`, `q` or `r`.
    pub fn role(&self, role: Role) -> Radical {
        match role {
            Role::P => self.pqr[0],
            Role::Q => self.pqr[1],
            Role::R => self.pqr[2],
        }
    }

    pub fn pqr_values(&self) -> (u64, u64, u64) {
        (self.radicand(self.pqr[0]), self.radicand(self.pqr[1]), self.radicand(self.pqr[2]))
    }

    /// Sign of `sqrt(radical)` under the embedding.
    pub fn embedding_sign(&self, e: EmbeddingId, r: Radical) -> i8 {
        self.signs[(e.0 - 1) as usize][r.slot() - 1]
    }

    pub(crate) fn sign_row(&self, e: EmbeddingId) -> [i8; 3] {
        self.signs[(e.0 - 1) as usize]
    }

    pub fn contains_sqrt(&self, n: u64) -> bool {
        self.radical_for(n).is_some()
    }

    /// Integrality test for coordinates over the denominator 4.
    pub fn is_integral_quarter(&self, c: [i64; 4]) -> bool {
        let at = |r: Radical| c[r.slot()];
        let (a, b, cq, d) = (c[0], at(self.pqr[0]), at(self.pqr[1]), at(self.pqr[2]));
        match self.basis {
            BasisClass::B1 => {
                a.rem_euclid(4) == 0
                    && cq.rem_euclid(4) == 0
                    && b.rem_euclid(2) == 0
                    && d.rem_euclid(2) == 0
                    && (b / 2 - d / 2).rem_euclid(2) == 0
            }
            BasisClass::B2 | BasisClass::B3 => {
                [a, b, cq, d].iter().all(|x| x.rem_euclid(2) == 0)
                    && (a / 2 - cq / 2).rem_euclid(2) == 0
                    && (b / 2 - d / 2).rem_euclid(2) == 0
            }
            BasisClass::B4a | BasisClass::B4b => {
                let sum = a + b + cq + d;
                if [a, b, cq, d].iter().all(|x| x.rem_euclid(2) == 0) {
                    sum.rem_euclid(4) == 0
                } else if [a, b, cq, d].iter().all(|x| x.rem_euclid(2) == 1) {
                    let want = if self.basis == BasisClass::B4a { 0 } else { 2 };
                    sum.rem_euclid(4) == want
                } else {
                    false
                }
            }
        }
    }

    /// A Z-basis of the ring of integers, as elements over the denominator 4.
    pub fn integral_basis(self: &Arc<Self>) -> [AlgebraicNumber; 4] {
        let mut out: [[i64; 4]; 4] = [[4, 0, 0, 0], [0; 4], [0; 4], [0; 4]];
        let (p, q, r) = (self.pqr[0].slot(), self.pqr[1].slot(), self.pqr[2].slot());
        match self.basis {
            BasisClass::B1 => {
                out[1][p] = 4;
                out[2][q] = 4;
                out[3][p] = 2;
                out[3][r] = 2;
            }
            BasisClass::B2 | BasisClass::B3 => {
                out[1][p] = 4;
                out[2][0] = 2;
                out[2][q] = 2;
                out[3][p] = 2;
                out[3][r] = 2;
            }
            BasisClass::B4a | BasisClass::B4b => {
                out[1][0] = 2;
                out[1][p] = 2;
                out[2][0] = 2;
                out[2][q] = 2;
                out[3] = [1, 1, 1, 1];
                out[3][p] = if self.basis == BasisClass::B4a { 1 } else { -1 };
            }
        }
        out.map(|c| AlgebraicNumber::from_quarters(self, c))
    }

    pub fn describe(&self) -> String {
        format!("Q(sqrt({}), sqrt({}))", self.m, self.s)
    }

    /// Parses a field written as `(m,s)`, `m,s` or `Q(sqrt m, sqrt s)`.
    pub fn parse(text: &str) -> Result<Arc<FieldSpec>, FieldError> {
        let digits: Vec<u64> = text
            .split(|c: char| !c.is_ascii_digit())
            .filter(|w| !w.is_empty())
            .map(|w| w.parse::<u64>().map_err(|_| FieldError::Parse(text.to_string())))
            .collect::<Result<_, _>>()?;
        match digits.as_slice() {
            [a, b] => FieldSpec::new(*a, *b),
            _ => Err(FieldError::Parse(format!("expected two radicands in {text:?}"))),
        }
    }
}

fn classify_sorted(m: u64, s: u64, t: u64) -> (BasisClass, [Radical; 3]) {
    let res = [m % 4, s % 4, t % 4];
    let rads = Radical::ALL;
    if res.iter().all(|&x| x == 1) {
        let g = gcd_u64(m, s);
        let class = if g % 4 == 1 { BasisClass::B4a } else { BasisClass::B4b };
        return (class, [Radical::M, Radical::S, Radical::T]);
    }
    // exactly one residue differs from the other two; it is q
    let qi = (0..3)
        .find(|&i| res[(i + 1) % 3] == res[(i + 2) % 3] && res[i] != res[(i + 1) % 3])
        .expect("square-free residues always leave one odd one out");
    let mut others: Vec<usize> = (0..3).filter(|&i| i != qi).collect();
    others.sort_unstable();
    let (pi, ri) = (others[0], others[1]);
    let class = match (res[pi], res[qi]) {
        (2, 3) => BasisClass::B1,
        (2, 1) => BasisClass::B2,
        (3, 1) => BasisClass::B3,
        _ => unreachable!("residue pattern {res:?}"),
    };
    (class, [rads[pi], rads[qi], rads[ri]])
}

/// Basis class of `Q(sqrt m, sqrt s)`, with the radicands playing `p, q, r`.
pub fn classify(m: u64, s: u64) -> Result<(BasisClass, (u64, u64, u64)), FieldError> {
    let f = FieldSpec::new(m, s)?;
    Ok((f.basis(), f.pqr_values()))
}

#[derive(Clone)]
pub struct AlgebraicNumber {
    field: Arc<FieldSpec>,
    num: [BigInt; 4],
    den: BigInt,
}

impl fmt::Debug for AlgebraicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}", self, self.field.describe())
    }
}

impl PartialEq for AlgebraicNumber {
    fn eq(&self, other: &Self) -> bool {
        self.same_field(other) && self.num == other.num && self.den == other.den
    }
}
impl Eq for AlgebraicNumber {}

impl std::hash::Hash for AlgebraicNumber {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.num.hash(state);
        self.den.hash(state);
    }
}

impl PartialOrd for AlgebraicNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AlgebraicNumber {
    /// Lexicographic on the rational coordinates `(a, b, c, d)`.
    fn cmp(&self, other: &Self) -> Ordering {
        for i in 0..4 {
            let l = &self.num[i] * &other.den;
            let r = &other.num[i] * &self.den;
            match l.cmp(&r) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl AlgebraicNumber {
    pub fn from_quarters(field: &Arc<FieldSpec>, c: [i64; 4]) -> Self {
        Self::from_parts(field, c.map(BigInt::from), BigInt::from(4))
    }

    /// `(num[0] + num[1] sqrt m + num[2] sqrt s + num[3] sqrt t) / den`, `den > 0`.
    pub fn from_parts(field: &Arc<FieldSpec>, num: [BigInt; 4], den: BigInt) -> Self {
        assert!(den.is_positive(), "denominator must be positive");
        let mut x = AlgebraicNumber { field: field.clone(), num, den };
        x.normalize();
        x
    }

    pub fn from_int(field: &Arc<FieldSpec>, n: i64) -> Self {
        Self::from_quarters(field, [4 * n, 0, 0, 0])
    }

    pub fn from_bigint(field: &Arc<FieldSpec>, n: &BigInt) -> Self {
        Self::from_parts(field, [n * 4, BigInt::zero(), BigInt::zero(), BigInt::zero()], BigInt::from(4))
    }

    pub fn zero(field: &Arc<FieldSpec>) -> Self {
        Self::from_int(field, 0)
    }

    pub fn one(field: &Arc<FieldSpec>) -> Self {
        Self::from_int(field, 1)
    }

    pub fn sqrt_of(field: &Arc<FieldSpec>, r: Radical) -> Self {
        let mut c = [0i64; 4];
        c[r.slot()] = 4;
        Self::from_quarters(field, c)
    }

    fn normalize(&mut self) {
        let four = BigInt::from(4);
        let g = self.den.gcd(&four);
        if g != four {
            let k = &four / &g;
            for x in self.num.iter_mut() {
                *x *= &k;
            }
            self.den *= &k;
        }
        let mut e = &self.den / &four;
        if e.is_one() {
            return;
        }
        for x in self.num.iter() {
            e = e.gcd(x);
            if e.is_one() {
                return;
            }
        }
        for x in self.num.iter_mut() {
            *x /= &e;
        }
        self.den /= &e;
    }

    pub fn field(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    pub fn num(&self) -> &[BigInt; 4] {
        &self.num
    }

    pub fn den(&self) -> &BigInt {
        &self.den
    }

    pub fn same_field(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.field, &other.field) || *self.field == *other.field
    }

    fn check(&self, other: &Self) -> Result<(), FieldError> {
        if self.same_field(other) {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    /// Coordinates over the denominator 4, when they fit in `i64`.
    pub fn quarters(&self) -> Option<[i64; 4]> {
        if self.den != BigInt::from(4) {
            return None;
        }
        let mut out = [0i64; 4];
        for (o, x) in out.iter_mut().zip(self.num.iter()) {
            *o = x.to_i64()?;
        }
        Some(out)
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    pub fn is_rational(&self) -> bool {
        self.num[1..].iter().all(Zero::is_zero)
    }

    /// True when the element lies in `Q(sqrt radical)`.
    pub fn in_subfield(&self, r: Radical) -> bool {
        Radical::ALL.into_iter().filter(|&x| x != r).all(|x| self.num[x.slot()].is_zero())
    }

    /// The quadratic subfield containing this element, if it is irrational and lies in one.
    pub fn subfield(&self) -> Option<Radical> {
        let nz: Vec<Radical> = Radical::ALL.into_iter().filter(|r| !self.num[r.slot()].is_zero()).collect();
        match nz.as_slice() {
            [r] => Some(*r),
            _ => None,
        }
    }

    pub fn is_integral(&self) -> bool {
        if self.den != BigInt::from(4) {
            return false;
        }
        let small: Vec<i64> = self.num.iter().map(|x| x.mod_floor(&BigInt::from(8)).to_i64().unwrap()).collect();
        // the conditions only look at residues mod 4, so mod 8 representatives are enough
        self.field.is_integral_quarter([small[0], small[1], small[2], small[3]])
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self, FieldError> {
        self.check(o)?;
        Ok(self.add_unchecked(o, false))
    }

    pub fn checked_sub(&self, o: &Self) -> Result<Self, FieldError> {
        self.check(o)?;
        Ok(self.add_unchecked(o, true))
    }

    pub fn checked_mul(&self, o: &Self) -> Result<Self, FieldError> {
        self.check(o)?;
        Ok(self.mul_unchecked(o))
    }

    fn add_unchecked(&self, o: &Self, negate: bool) -> Self {
        let num = if self.den == o.den {
            std::array::from_fn(|i| if negate { &self.num[i] - &o.num[i] } else { &self.num[i] + &o.num[i] })
        } else {
            std::array::from_fn(|i| {
                let l = &self.num[i] * &o.den;
                let r = &o.num[i] * &self.den;
                if negate {
                    l - r
                } else {
                    l + r
                }
            })
        };
        let den = if self.den == o.den { self.den.clone() } else { &self.den * &o.den };
        Self::from_parts(&self.field, num, den)
    }

    fn mul_unchecked(&self, o: &Self) -> Self {
        let f = &*self.field;
        let [a1, b1, c1, d1] = &self.num;
        let [a2, b2, c2, d2] = &o.num;
        let a = a1 * a2 + b1 * b2 * f.m + c1 * c2 * f.s + d1 * d2 * f.t;
        let b = a1 * b2 + b1 * a2 + (c1 * d2 + d1 * c2) * f.m0;
        let c = a1 * c2 + c1 * a2 + (b1 * d2 + d1 * b2) * f.s0;
        let d = a1 * d2 + d1 * a2 + (b1 * c2 + c1 * b2) * f.t0;
        Self::from_parts(&self.field, [a, b, c, d], &self.den * &o.den)
    }

    pub fn scale(&self, k: i64) -> Self {
        Self::from_parts(&self.field, self.num.clone().map(|x| x * k), self.den.clone())
    }

    pub fn scale_big(&self, k: &BigInt) -> Self {
        Self::from_parts(&self.field, self.num.clone().map(|x| x * k), self.den.clone())
    }

    /// Division by a nonzero rational integer.
    pub fn div_int(&self, k: &BigInt) -> Self {
        assert!(!k.is_zero(), "division by zero");
        let mut num = self.num.clone();
        if k.is_negative() {
            num = num.map(|x| -x);
        }
        Self::from_parts(&self.field, num, &self.den * k.abs())
    }

    pub fn square(&self) -> Self {
        self.mul_unchecked(self)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(&self.field);
        for _ in 0..e {
            acc = acc.mul_unchecked(self);
        }
        acc
    }

    /// Image under a real embedding, as an element of the same field.
    pub fn conjugate(&self, e: EmbeddingId) -> Self {
        let sg = self.field.sign_row(e);
        let num = std::array::from_fn(|i| if i == 0 || sg[i - 1] > 0 { self.num[i].clone() } else { -&self.num[i] });
        AlgebraicNumber { field: self.field.clone(), num, den: self.den.clone() }
    }

    pub fn conjugates(&self) -> [AlgebraicNumber; 4] {
        EmbeddingId::ALL.map(|e| self.conjugate(e))
    }

    /// Sum of the four embeddings.
    pub fn trace(&self) -> BigRational {
        BigRational::new(&self.num[0] * 4, self.den.clone())
    }

    /// Rational part `a/den`.
    pub fn rational_part(&self) -> BigRational {
        BigRational::new(self.num[0].clone(), self.den.clone())
    }

    /// Product of the four embeddings.
    pub fn norm(&self) -> BigRational {
        let p = self
            .conjugate(EmbeddingId(1))
            .mul_unchecked(&self.conjugate(EmbeddingId(2)))
            .mul_unchecked(&self.conjugate(EmbeddingId(3)))
            .mul_unchecked(&self.conjugate(EmbeddingId(4)));
        debug_assert!(p.is_rational());
        p.rational_part()
    }

    /// Exact sign of the image under `e`.
    pub fn sign_at(&self, e: EmbeddingId) -> SignValue {
        SignValue::from_i8(real::sign_under(&self.field, &self.num, self.field.sign_row(e)))
    }

    pub fn is_totally_positive(&self) -> bool {
        EmbeddingId::ALL.into_iter().all(|e| self.sign_at(e) == SignValue::Positive)
    }

    /// Totally positive or zero.
    pub fn is_tp_or_zero(&self) -> bool {
        self.is_zero() || self.is_totally_positive()
    }

    /// `other - self` totally positive or zero.
    pub fn preceq(&self, other: &Self) -> bool {
        other.add_unchecked(self, true).is_tp_or_zero()
    }

    /// Rational enclosure of the image under `e`, accurate to about `bits` bits.
    pub fn enclose(&self, e: EmbeddingId, bits: u32) -> (BigRational, BigRational) {
        let (lo, hi) = real::enclose(&self.field, &self.num, self.field.sign_row(e), bits);
        let scale = &self.den << bits;
        (BigRational::new(lo, scale.clone()), BigRational::new(hi, scale))
    }

    /// Floating-point value of the image under `e`; display only.
    pub fn approx(&self, e: EmbeddingId) -> f64 {
        let (lo, hi) = self.enclose(e, 64);
        let mid = (lo + hi) / BigRational::from_integer(BigInt::from(2));
        mid.numer().to_f64().unwrap_or(f64::NAN) / mid.denom().to_f64().unwrap_or(f64::NAN)
    }

    /// Lexicographically smallest element of the orbit under the given automorphisms.
    pub fn orbit_min(&self, group: &[EmbeddingId]) -> Self {
        group.iter().map(|&e| self.conjugate(e)).min().expect("nonempty group")
    }

    /// Embeddings fixing this element.
    pub fn stabilizer(&self) -> Vec<EmbeddingId> {
        EmbeddingId::ALL.into_iter().filter(|&e| self.conjugate(e) == *self).collect()
    }

    /// Human-readable form that the parser accepts, e.g. `(5 + sqrt(21))/2`.
    pub fn pretty(&self) -> String {
        let mut g = self.den.clone();
        for x in &self.num {
            g = g.gcd(x);
        }
        let den = &self.den / &g;
        let num: Vec<BigInt> = self.num.iter().map(|x| x / &g).collect();
        let names = ["1".to_string(), self.field.m.to_string(), self.field.s.to_string(), self.field.t.to_string()];
        let mut out = String::new();
        for (i, x) in num.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let neg = x.sign() == Sign::Minus;
            let mag = x.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if i == 0 {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&format!("sqrt({})", names[i]));
            } else {
                out.push_str(&format!("{}*sqrt({})", mag, names[i]));
            }
        }
        if out.is_empty() {
            return "0".into();
        }
        if den.is_one() {
            out
        } else {
            format!("({out})/{den}")
        }
    }
}

impl fmt::Display for AlgebraicNumber {
    /// Canonical form `(a + b*sqrt(m) + c*sqrt(s) + d*sqrt(t))/den`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fs = &*self.field;
        write!(f, "({}", self.num[0])?;
        for (i, n) in [fs.m, fs.s, fs.t].iter().enumerate() {
            let x = &self.num[i + 1];
            if x.is_negative() {
                write!(f, " - {}*sqrt({n})", -x)?;
            } else {
                write!(f, " + {x}*sqrt({n})")?;
            }
        }
        write!(f, ")/{}", self.den)
    }
}

impl Serialize for AlgebraicNumber {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("AlgebraicNumber", 3)?;
        st.serialize_field("num", &self.num.iter().map(|x| x.to_string()).collect::<Vec<_>>())?;
        st.serialize_field("den", &self.den.to_string())?;
        st.serialize_field("text", &self.pretty())?;
        st.end()
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $body:expr) => {
        impl std::ops::$tr<&AlgebraicNumber> for &AlgebraicNumber {
            type Output = AlgebraicNumber;
            fn $f(self, o: &AlgebraicNumber) -> AlgebraicNumber {
                assert!(self.same_field(o), "elements belong to different fields");
                $body(self, o)
            }
        }
        impl std::ops::$tr<AlgebraicNumber> for AlgebraicNumber {
            type Output = AlgebraicNumber;
            fn $f(self, o: AlgebraicNumber) -> AlgebraicNumber {
                std::ops::$tr::$f(&self, &o)
            }
        }
        impl std::ops::$tr<&AlgebraicNumber> for AlgebraicNumber {
            type Output = AlgebraicNumber;
            fn $f(self, o: &AlgebraicNumber) -> AlgebraicNumber {
                std::ops::$tr::$f(&self, o)
            }
        }
    };
}

binop!(Add, add, |a: &AlgebraicNumber, b| a.add_unchecked(b, false));
binop!(Sub, sub, |a: &AlgebraicNumber, b| a.add_unchecked(b, true));
binop!(Mul, mul, |a: &AlgebraicNumber, b| a.mul_unchecked(b));

impl std::ops::Neg for &AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn neg(self) -> AlgebraicNumber {
        AlgebraicNumber { field: self.field.clone(), num: self.num.clone().map(|x| -x), den: self.den.clone() }
    }
}

impl std::ops::Neg for AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn neg(self) -> AlgebraicNumber {
        -&self
    }
}

// --- parsing -------------------------------------------------------------

struct Parser<'a> {
    field: &'a Arc<FieldSpec>,
    src: &'a str,
    toks: Vec<Tok>,
    pos: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Sqrt,
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Tok>, FieldError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1
            }
            '-' | '\u{2212}' => {
                out.push(Tok::Minus);
                i += 1
            }
            '*' => {
                out.push(Tok::Star);
                i += 1
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1
            }
            '\u{221a}' => {
                out.push(Tok::Sqrt);
                i += 1
            }
            d if d.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push(Tok::Int(s.parse().map_err(|_| FieldError::Parse(src.into()))?));
            }
            's' if chars[i..].iter().take(4).collect::<String>() == "sqrt" => {
                out.push(Tok::Sqrt);
                i += 4;
            }
            _ => return Err(FieldError::Parse(format!("unexpected character {c:?} in {src:?}"))),
        }
    }
    Ok(out)
}

impl<'a> Parser<'a> {
    fn err(&self, what: &str) -> FieldError {
        FieldError::Parse(format!("{what} in {:?}", self.src))
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<AlgebraicNumber, FieldError> {
        let mut acc = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                -self.term()?
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<AlgebraicNumber, FieldError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = &acc * &self.factor()?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let d = self.factor()?;
                    if !d.is_rational() || d.is_zero() {
                        return Err(self.err("division by a non-rational or zero value"));
                    }
                    // x / (p/q) = x * q / p
                    let r = d.rational_part();
                    acc = acc.scale_big(r.denom()).div_int(r.numer());
                }
                // implicit multiplication, as in 5/2sqrt(2) or 2(1+sqrt(3))
                Some(Tok::Sqrt) | Some(Tok::LParen) => {
                    acc = &acc * &self.factor()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<AlgebraicNumber, FieldError> {
        match self.next() {
            Some(Tok::Int(n)) => Ok(AlgebraicNumber::from_bigint(self.field, &n)),
            Some(Tok::LParen) => {
                let v = self.expr()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(v),
                    _ => Err(self.err("missing ')'")),
                }
            }
            Some(Tok::Sqrt) => {
                let paren = self.peek() == Some(&Tok::LParen);
                if paren {
                    self.pos += 1;
                }
                let n = match self.next() {
                    Some(Tok::Int(n)) => n,
                    _ => return Err(self.err("sqrt needs an integer argument")),
                };
                if paren && self.next() != Some(Tok::RParen) {
                    return Err(self.err("missing ')' after sqrt"));
                }
                self.sqrt_int(&n)
            }
            _ => Err(self.err("unexpected token")),
        }
    }

    fn sqrt_int(&self, n: &BigInt) -> Result<AlgebraicNumber, FieldError> {
        let n = n.to_u64().ok_or_else(|| self.err("radicand too large"))?;
        if n == 0 {
            return Ok(AlgebraicNumber::zero(self.field));
        }
        // n = k^2 * r with r square-free
        let mut k = 1u64;
        let mut r = n;
        let mut p = 2u64;
        while p * p <= r {
            while r % (p * p) == 0 {
                r /= p * p;
                k *= p;
            }
            p += 1;
        }
        let base = if r == 1 {
            AlgebraicNumber::one(self.field)
        } else {
            let rad = self.field.radical_for(r).ok_or_else(|| self.err(&format!("sqrt({r}) is not in the field")))?;
            AlgebraicNumber::sqrt_of(self.field, rad)
        };
        Ok(base.scale(k as i64))
    }
}

impl AlgebraicNumber {
    /// Parses expressions such as `(7 + 3*sqrt(2) + sqrt(21) + sqrt(42))/2`,
    /// `4+sqrt(10)` or `5/2sqrt(2)`. Only rational divisors are allowed.
    pub fn parse(field: &Arc<FieldSpec>, src: &str) -> Result<Self, FieldError> {
        let toks = tokenize(src)?;
        if toks.is_empty() {
            return Err(FieldError::Parse("empty input".into()));
        }
        let mut p = Parser { field, src, toks, pos: 0 };
        let v = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(p.err("trailing input"));
        }
        Ok(v)
    }
}
