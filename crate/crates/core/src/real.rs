//! Exact signs of real embeddings by dyadic interval refinement.
//!
//! A nonzero value `a + b sqrt(m) + c sqrt(s) + d sqrt(t)` is enclosed in an interval
//! whose endpoints are integers over `2^k`; `k` doubles until the interval misses zero.
//! Zero is recognised directly, since `1, sqrt m, sqrt s, sqrt t` are independent over Q.

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::field::FieldSpec;

const FAST_BITS: u32 = 48;
const FAST_LIMIT: i64 = 1 << 40;

/// `floor(sqrt(n) * 2^48)`, or 0 when that would not fit the fast path.
pub(crate) fn sqrt_scaled_u64(n: u64) -> u64 {
    if n >= 1 << 32 {
        return 0;
    }
    let v = BigUint::from(n) << (2 * FAST_BITS);
    v.sqrt().to_u64().unwrap_or(0)
}

fn floor_sqrt_scaled(n: u64, bits: u32) -> BigInt {
    BigInt::from((BigUint::from(n) << (2 * bits)).sqrt())
}

fn fast_sign(f: &FieldSpec, c: [i64; 4], signs: [i8; 3]) -> Option<i8> {
    if c.iter().any(|x| x.abs() >= FAST_LIMIT) || f.sqrt48.contains(&0) {
        return None;
    }
    let mut lo = (c[0] as i128) << FAST_BITS;
    let mut hi = lo;
    for i in 0..3 {
        let k = c[i + 1] as i128 * signs[i] as i128;
        let l = f.sqrt48[i] as i128;
        if k >= 0 {
            lo += k * l;
            hi += k * (l + 1);
        } else {
            lo += k * (l + 1);
            hi += k * l;
        }
    }
    if lo > 0 {
        Some(1)
    } else if hi < 0 {
        Some(-1)
    } else {
        None
    }
}

/// Sign of a value given by small quarter coordinates.
pub(crate) fn sign_small(f: &FieldSpec, c: [i64; 4], signs: [i8; 3]) -> i8 {
    if c.iter().all(|&x| x == 0) {
        return 0;
    }
    if let Some(s) = fast_sign(f, c, signs) {
        return s;
    }
    sign_slow(f, &c.map(BigInt::from), signs)
}

/// Sign of `num[0] + sum(signs[i] * num[i+1] * sqrt(n_i))`.
pub(crate) fn sign_under(f: &FieldSpec, num: &[BigInt; 4], signs: [i8; 3]) -> i8 {
    if num.iter().all(Zero::is_zero) {
        return 0;
    }
    if let Some(c) = to_small(num) {
        if let Some(s) = fast_sign(f, c, signs) {
            return s;
        }
    }
    sign_slow(f, num, signs)
}

fn to_small(num: &[BigInt; 4]) -> Option<[i64; 4]> {
    let mut out = [0i64; 4];
    for (o, x) in out.iter_mut().zip(num) {
        *o = x.to_i64()?;
    }
    Some(out)
}

fn sign_slow(f: &FieldSpec, num: &[BigInt; 4], signs: [i8; 3]) -> i8 {
    let mag = num.iter().map(|x| x.bits()).max().unwrap_or(0) as u32;
    let mut bits = 64 + mag.min(4096);
    loop {
        let (lo, hi) = enclose(f, num, signs, bits);
        if lo.is_positive() {
            return 1;
        }
        if hi.is_negative() {
            return -1;
        }
        bits *= 2;
    }
}

/// Integers `lo <= value * 2^bits <= hi`.
pub(crate) fn enclose(f: &FieldSpec, num: &[BigInt; 4], signs: [i8; 3], bits: u32) -> (BigInt, BigInt) {
    let mut lo: BigInt = &num[0] << bits;
    let mut hi = lo.clone();
    for (i, n) in f.radicands().into_iter().enumerate() {
        let k = &num[i + 1] * signs[i] as i32;
        if k.is_zero() {
            continue;
        }
        let l = floor_sqrt_scaled(n, bits);
        let u = &l + 1;
        if k.is_positive() {
            lo += &k * &l;
            hi += &k * &u;
        } else {
            lo += &k * &u;
            hi += &k * &l;
        }
    }
    (lo, hi)
}
