//! Slow reference implementations used to cross-check the library.
//!
//! Nothing here calls into the library's arithmetic. Elements are stored on the
//! basis `1, sqrt m, sqrt s, sqrt m * sqrt s` with an explicit denominator, signs are
//! decided by repeated squaring, and integrality is read off the characteristic
//! polynomial. Box bounds come from conjugate estimates in floating point with a
//! safety margin, so they can only be too large.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

#[derive(Clone, Copy, Debug)]
pub struct Fld {
    pub m: i128,
    pub s: i128,
    /// `sqrt m * sqrt s = g * sqrt t`
    pub g: i128,
    pub t: i128,
}

impl Fld {
    pub fn new(m: u64, s: u64) -> Self {
        let g = m.gcd(&s) as i128;
        let (m, s) = (m as i128, s as i128);
        Fld { m, s, g, t: m * s / (g * g) }
    }
}

/// `(c[0] + c[1] sqrt m + c[2] sqrt s + c[3] sqrt(ms)) / den`
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct El {
    pub c: [i128; 4],
    pub den: i128,
}

impl El {
    /// From coordinates over `1, sqrt m, sqrt s, sqrt t` with denominator 4.
    pub fn from_quarters(f: &Fld, q: [i64; 4]) -> El {
        let g = f.g;
        El { c: [q[0] as i128 * g, q[1] as i128 * g, q[2] as i128 * g, q[3] as i128], den: 4 * g }.reduced()
    }

    /// Coordinates over `1, sqrt m, sqrt s, sqrt t` with denominator 4, if they are integers.
    pub fn to_quarters(&self, f: &Fld) -> Option<[i64; 4]> {
        let scaled = [self.c[0] * 4, self.c[1] * 4, self.c[2] * 4, self.c[3] * 4 * f.g];
        let mut out = [0i64; 4];
        for (o, v) in out.iter_mut().zip(scaled) {
            if v % self.den != 0 {
                return None;
            }
            *o = (v / self.den) as i64;
        }
        Some(out)
    }

    pub fn int(k: i128) -> El {
        El { c: [k, 0, 0, 0], den: 1 }
    }

    fn reduced(mut self) -> El {
        let mut g = self.den;
        for v in self.c {
            g = g.gcd(&v);
        }
        if g > 1 {
            for v in self.c.iter_mut() {
                *v /= g;
            }
            self.den /= g;
        }
        self
    }

    pub fn add(&self, o: &El) -> El {
        let mut c = [0; 4];
        for i in 0..4 {
            c[i] = self.c[i] * o.den + o.c[i] * self.den;
        }
        El { c, den: self.den * o.den }.reduced()
    }

    pub fn neg(&self) -> El {
        El { c: self.c.map(|v| -v), den: self.den }
    }

    pub fn sub(&self, o: &El) -> El {
        self.add(&o.neg())
    }

    pub fn mul(&self, f: &Fld, o: &El) -> El {
        let [a1, b1, c1, d1] = self.c;
        let [a2, b2, c2, d2] = o.c;
        let (m, s) = (f.m, f.s);
        let c = [
            a1 * a2 + m * b1 * b2 + s * c1 * c2 + m * s * d1 * d2,
            a1 * b2 + b1 * a2 + s * (c1 * d2 + d1 * c2),
            a1 * c2 + c1 * a2 + m * (b1 * d2 + d1 * b2),
            a1 * d2 + d1 * a2 + b1 * c2 + c1 * b2,
        ];
        El { c, den: self.den * o.den }.reduced()
    }

    pub fn is_zero(&self) -> bool {
        self.c == [0; 4]
    }

    /// Sign of the image where `sqrt m -> em sqrt m` and `sqrt s -> es sqrt s`.
    pub fn sign_at(&self, f: &Fld, em: i128, es: i128) -> i32 {
        let [a, b, c, d] = self.c;
        // (a + em b sqrt m) + es sqrt s (c + em d sqrt m)
        sign_plus_root((a, em * b), (es * c, es * em * d), f.m, f.s)
    }

    pub fn signs(&self, f: &Fld) -> [i32; 4] {
        [(1, 1), (-1, 1), (1, -1), (-1, -1)].map(|(em, es)| self.sign_at(f, em, es))
    }

    pub fn totally_positive(&self, f: &Fld) -> bool {
        self.signs(f).iter().all(|&s| s > 0)
    }

    pub fn totally_nonnegative(&self, f: &Fld) -> bool {
        self.is_zero() || self.totally_positive(f)
    }

    /// The characteristic polynomial over Q is `(x^2 - T x + N)(x^2 - T' x + N')`, where
    /// `T, N` lie in `Q(sqrt m)`; the element is integral iff all its coefficients are integers.
    pub fn is_integral(&self, f: &Fld) -> bool {
        let r = |v: i128| BigRational::new(BigInt::from(v), BigInt::from(self.den));
        let x = (r(self.c[0]), r(self.c[1]));
        let y = (r(self.c[2]), r(self.c[3]));
        let m = BigRational::from_integer(BigInt::from(f.m));
        let s = BigRational::from_integer(BigInt::from(f.s));
        let qmul = |p: &(BigRational, BigRational), q: &(BigRational, BigRational)| {
            (&p.0 * &q.0 + &m * &p.1 * &q.1, &p.0 * &q.1 + &p.1 * &q.0)
        };
        let conj = |p: &(BigRational, BigRational)| (p.0.clone(), -p.1.clone());
        let two = BigRational::from_integer(BigInt::from(2));
        let tr = (&x.0 * &two, &x.1 * &two);
        let x2 = qmul(&x, &x);
        let y2 = qmul(&y, &y);
        let nm = (&x2.0 - &s * &y2.0, &x2.1 - &s * &y2.1);
        let (trc, nmc) = (conj(&tr), conj(&nm));
        let e1 = &tr.0 + &trc.0;
        let tt = qmul(&tr, &trc);
        let e2 = &tt.0 + &nm.0 + &nmc.0;
        let a = qmul(&tr, &nmc);
        let b = qmul(&trc, &nm);
        let e3 = &a.0 + &b.0;
        let e4 = qmul(&nm, &nmc).0;
        [e1, e2, e3, e4].iter().all(|v| v.is_integer())
    }

    pub fn approx(&self, f: &Fld, em: f64, es: f64) -> f64 {
        let (rm, rs) = ((f.m as f64).sqrt(), (f.s as f64).sqrt());
        let [a, b, c, d] = self.c.map(|v| v as f64);
        (a + em * b * rm + es * c * rs + em * es * d * rm * rs) / self.den as f64
    }

    pub fn approx_conjugates(&self, f: &Fld) -> [f64; 4] {
        [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)].map(|(em, es)| self.approx(f, em, es))
    }
}

fn sign_i(v: i128) -> i32 {
    v.signum() as i32
}

/// Sign of `p + q sqrt n` for integers.
fn sign_quad(p: i128, q: i128, n: i128) -> i32 {
    let (sp, sq) = (sign_i(p), sign_i(q));
    if sp >= 0 && sq >= 0 {
        return (sp + sq).signum();
    }
    if sp <= 0 && sq <= 0 {
        return -((-sp - sq).signum());
    }
    sign_i(p * p - n * q * q) * sp
}

/// Sign of `x + y sqrt s` with `x = x0 + x1 sqrt m`, `y = y0 + y1 sqrt m`.
fn sign_plus_root(x: (i128, i128), y: (i128, i128), m: i128, s: i128) -> i32 {
    let sx = sign_quad(x.0, x.1, m);
    let sy = sign_quad(y.0, y.1, m);
    if sx >= 0 && sy >= 0 {
        return (sx + sy).signum();
    }
    if sx <= 0 && sy <= 0 {
        return -((-sx - sy).signum());
    }
    // x^2 - s y^2 decides which term dominates
    let z0 = x.0 * x.0 + m * x.1 * x.1 - s * (y.0 * y.0 + m * y.1 * y.1);
    let z1 = 2 * x.0 * x.1 - s * 2 * y.0 * y.1;
    sign_quad(z0, z1, m) * sx
}

fn floor_box(bound: f64) -> i64 {
    bound.floor() as i64 + 1
}

/// Every integral `beta` with `0 <= beta <= alpha` totally, as quarter coordinates,
/// sorted lexicographically.
pub fn dominated(f: &Fld, alpha: [i64; 4]) -> Vec<[i64; 4]> {
    let al = El::from_quarters(f, alpha);
    let conj = al.approx_conjugates(f);
    // the coordinate of sqrt n times sqrt n is a signed average of the conjugates
    let pattern: [[f64; 4]; 3] = [[1.0, -1.0, 1.0, -1.0], [1.0, 1.0, -1.0, -1.0], [1.0, -1.0, -1.0, 1.0]];
    let radic = [f.m, f.s, f.t].map(|v| (v as f64).sqrt());
    let mut ranges = Vec::new();
    for k in 0..3 {
        let hi: f64 = (0..4).filter(|&i| pattern[k][i] > 0.0).map(|i| conj[i].max(0.0)).sum();
        let lo: f64 = (0..4).filter(|&i| pattern[k][i] < 0.0).map(|i| conj[i].max(0.0)).sum();
        ranges.push((-floor_box(lo / radic[k]), floor_box(hi / radic[k])));
    }
    let trace = alpha[0];
    let mut out = Vec::new();
    for a in 0..=trace {
        for b in ranges[0].0..=ranges[0].1 {
            for c in ranges[1].0..=ranges[1].1 {
                for d in ranges[2].0..=ranges[2].1 {
                    let q = [a, b, c, d];
                    let beta = El::from_quarters(f, q);
                    if !beta.totally_nonnegative(f) || !al.sub(&beta).totally_nonnegative(f) {
                        continue;
                    }
                    if beta.is_integral(f) {
                        out.push(q);
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// Every integral `w` with `alpha - w^2 >= 0` totally, as quarter coordinates, using
/// the coarse box `a^2 + m b^2 + s c^2 + t d^2 <= 16 Tr(alpha)`.
pub fn squares_under(f: &Fld, alpha: &El) -> Vec<[i64; 4]> {
    assert!(alpha.totally_nonnegative(f));
    let tr = 4.0 * alpha.c[0] as f64 / alpha.den as f64;
    let cap = 16.0 * tr + 1.0;
    let lim = |n: i128| (cap / n as f64).sqrt().floor() as i64;
    let mut out = Vec::new();
    for a in -lim(1)..=lim(1) {
        for b in -lim(f.m)..=lim(f.m) {
            for c in -lim(f.s)..=lim(f.s) {
                for d in -lim(f.t)..=lim(f.t) {
                    let q = [a, b, c, d];
                    let norm2 = (a * a) as i128 + f.m * (b * b) as i128 + f.s * (c * c) as i128 + f.t * (d * d) as i128;
                    if norm2 as f64 > cap {
                        continue;
                    }
                    let w = El::from_quarters(f, q);
                    if !w.is_integral(f) {
                        continue;
                    }
                    if alpha.sub(&w.mul(f, &w)).totally_nonnegative(f) {
                        out.push(q);
                    }
                }
            }
        }
    }
    out.sort();
    out
}

/// Class label from the congruence table of integral bases.
pub fn basis_class(m: u64, s: u64) -> &'static str {
    let f = Fld::new(m, s);
    let vals = [f.m, f.s, f.t];
    let res = vals.map(|v| v % 4);
    let odd_one = (0..3).find(|&i| res.iter().filter(|&&r| r == res[i]).count() == 1);
    match odd_one {
        None => {
            // all three are 1 mod 4
            if (f.g % 4) == 1 {
                "B4a"
            } else {
                "B4b"
            }
        }
        Some(qi) => {
            let q = res[qi];
            let p = res[(qi + 1) % 3];
            match (p, q) {
                (2, 3) => "B1",
                (2, 1) => "B2",
                (3, 1) => "B3",
                _ => panic!("no class for residues {res:?}"),
            }
        }
    }
}

/// Discriminant of the classes: products of the quadratic discriminants.
pub fn expected_discriminant(m: u64, s: u64) -> i128 {
    let f = Fld::new(m, s);
    let pqr = f.m * f.s * f.t;
    match basis_class(m, s) {
        "B1" => 64 * pqr,
        "B2" | "B3" => 16 * pqr,
        _ => pqr,
    }
}

/// `det(Tr(b_i b_j))` for four elements given by quarter coordinates.
pub fn discriminant(f: &Fld, basis: &[[i64; 4]; 4]) -> BigRational {
    let els: Vec<El> = basis.iter().map(|q| El::from_quarters(f, *q)).collect();
    let mut g = vec![vec![BigRational::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let p = els[i].mul(f, &els[j]);
            g[i][j] = BigRational::new(BigInt::from(4 * p.c[0]), BigInt::from(p.den));
        }
    }
    det(g)
}

fn det(mut a: Vec<Vec<BigRational>>) -> BigRational {
    let n = a.len();
    let mut d = BigRational::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if piv != col {
            a.swap(piv, col);
            d = -d;
        }
        d *= a[col][col].clone();
        for r in col + 1..n {
            let k = &a[r][col] / &a[col][col];
            for c in col..n {
                let v = &k * &a[col][c];
                a[r][c] -= v;
            }
        }
    }
    d
}

/// A random square-free pair `m < s` with `t <= max_t`.
pub fn random_field(rng: &mut impl Rng, max_t: u64) -> (u64, u64) {
    loop {
        let m = rng.gen_range(2..=max_t / 2);
        let s = rng.gen_range(m + 1..=max_t);
        if !squarefree(m) || !squarefree(s) {
            continue;
        }
        let f = Fld::new(m, s);
        if f.t as u64 <= max_t && f.t > f.s {
            return (m, s);
        }
    }
}

pub fn squarefree(n: u64) -> bool {
    n > 1 && (2..).take_while(|p| p * p <= n).all(|p| n % (p * p) != 0)
}

/// A random totally positive integral element with trace between 1 and `max_trace`,
/// as quarter coordinates.
pub fn random_tp(rng: &mut impl Rng, f: &Fld, max_trace: i64) -> [i64; 4] {
    loop {
        let a = rng.gen_range(1..=max_trace);
        let span = |n: i128| ((a as f64) / (n as f64).sqrt()).floor() as i64;
        let q = [a, rng.gen_range(-span(f.m)..=span(f.m)), rng.gen_range(-span(f.s)..=span(f.s)), rng.gen_range(-span(f.t)..=span(f.t))];
        let e = El::from_quarters(f, q);
        if e.totally_positive(f) && e.is_integral(f) {
            return q;
        }
    }
}
