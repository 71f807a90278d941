//! Classical quadratic forms over the ring of integers: evaluation, determinants,
//! representation search, and the escalation over diagonal quadruples.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering as AtomicOrdering};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::enumerate::{squares_below, SearchError};
use crate::field::{AlgebraicNumber, FieldSpec, Radical};
use crate::quad::{element_m, element_m1, element_s, QuadElement};
use crate::units::{unit_report, UnitCase, UnitError, UnitReport};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormsError {
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("form is not totally positive definite")]
    NotDefinite,
    #[error("no witness recipe covers {0}")]
    NoRecipe(String),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Unit(#[from] UnitError),
}

/// Symmetric Gram matrix `(g_ij)` of the form `sum g_ij x_i x_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FormMatrix {
    n: usize,
    entries: Vec<AlgebraicNumber>,
}

impl FormMatrix {
    pub fn new(rows: Vec<Vec<AlgebraicNumber>>) -> Result<Self, FormsError> {
        let n = rows.len();
        for r in &rows {
            if r.len() != n {
                return Err(FormsError::DimensionMismatch { expected: n, got: r.len() });
            }
        }
        for i in 0..n {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(FormsError::NotSymmetric);
                }
            }
        }
        Ok(FormMatrix { n, entries: rows.into_iter().flatten().collect() })
    }

    pub fn diagonal(diag: &[AlgebraicNumber]) -> Self {
        let n = diag.len();
        let f = diag[0].field().clone();
        let mut entries = vec![AlgebraicNumber::zero(&f); n * n];
        for (i, d) in diag.iter().enumerate() {
            entries[i * n + i] = d.clone();
        }
        FormMatrix { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &Arc<FieldSpec> {
        self.entries[0].field()
    }

    pub fn entry(&self, i: usize, j: usize) -> &AlgebraicNumber {
        &self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<AlgebraicNumber>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn evaluate(&self, v: &[AlgebraicNumber]) -> Result<AlgebraicNumber, FormsError> {
        if v.len() != self.n {
            return Err(FormsError::DimensionMismatch { expected: self.n, got: v.len() });
        }
        let mut acc = AlgebraicNumber::zero(self.field());
        for i in 0..self.n {
            let mut row = AlgebraicNumber::zero(self.field());
            for j in 0..self.n {
                row = &row + &(self.entry(i, j) * &v[j]);
            }
            acc = &acc + &(&row * &v[i]);
        }
        Ok(acc)
    }

    /// Exact determinant by cofactor expansion.
    pub fn det(&self) -> AlgebraicNumber {
        let idx: Vec<usize> = (0..self.n).collect();
        self.minor(&idx, &idx)
    }

    fn minor(&self, rows: &[usize], cols: &[usize]) -> AlgebraicNumber {
        match rows.len() {
            0 => AlgebraicNumber::one(self.field()),
            1 => self.entry(rows[0], cols[0]).clone(),
            2 => {
                let a = self.entry(rows[0], cols[0]) * self.entry(rows[1], cols[1]);
                let b = self.entry(rows[0], cols[1]) * self.entry(rows[1], cols[0]);
                a - b
            }
            _ => {
                let mut acc = AlgebraicNumber::zero(self.field());
                let sub_rows = &rows[1..];
                for (k, &c) in cols.iter().enumerate() {
                    let e = self.entry(rows[0], c);
                    if e.is_zero() {
                        continue;
                    }
                    let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                    let term = e * &self.minor(sub_rows, &sub_cols);
                    acc = if k % 2 == 0 { acc + term } else { acc - term };
                }
                acc
            }
        }
    }

    /// All leading principal minors totally positive.
    pub fn is_tp_definite(&self) -> bool {
        (1..=self.n).all(|k| {
            let idx: Vec<usize> = (0..k).collect();
            self.minor(&idx, &idx).is_totally_positive()
        })
    }

    /// Applies an embedding entrywise.
    pub fn conjugate(&self, e: crate::field::EmbeddingId) -> Self {
        FormMatrix { n: self.n, entries: self.entries.iter().map(|x| x.conjugate(e)).collect() }
    }
}

/// Where representation vectors are searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SearchDomain {
    /// The full ring of integers of `K`.
    Full,
    /// The ring of integers of the quadratic subfield `Q(sqrt radical)`.
    Subfield(Radical),
}

fn domain_basis(f: &Arc<FieldSpec>, d: SearchDomain) -> Vec<AlgebraicNumber> {
    match d {
        SearchDomain::Full => f.integral_basis().to_vec(),
        SearchDomain::Subfield(r) => {
            let n = f.radicand(r);
            vec![AlgebraicNumber::one(f), QuadElement::omega(n).embed(f).unwrap()]
        }
    }
}

fn trace_int(x: &AlgebraicNumber) -> BigInt {
    let t = x.trace();
    debug_assert!(t.is_integer());
    t.to_integer()
}

/// Every vector `v` over the domain with `Q(v) = target`, found by enumerating the
/// lattice points of the positive definite trace form `Tr(Q(v)) <= Tr(target)`.
pub fn represents_all(
    q: &FormMatrix,
    target: &AlgebraicNumber,
    domain: SearchDomain,
    budget: u64,
) -> Result<Vec<Vec<AlgebraicNumber>>, FormsError> {
    let mut out = Vec::new();
    search_representations(q, target, domain, budget, |v| {
        out.push(v);
        true
    })?;
    Ok(out)
}

/// One representation, if any.
pub fn represents(
    q: &FormMatrix,
    target: &AlgebraicNumber,
    domain: SearchDomain,
    budget: u64,
) -> Result<Option<Vec<AlgebraicNumber>>, FormsError> {
    let mut out = None;
    search_representations(q, target, domain, budget, |v| {
        out = Some(v);
        false
    })?;
    Ok(out)
}

fn search_representations(
    q: &FormMatrix,
    target: &AlgebraicNumber,
    domain: SearchDomain,
    budget: u64,
    mut visit: impl FnMut(Vec<AlgebraicNumber>) -> bool,
) -> Result<(), FormsError> {
    if !q.is_tp_definite() {
        return Err(FormsError::NotDefinite);
    }
    let f = q.field().clone();
    if !target.is_tp_or_zero() {
        return Ok(());
    }
    let basis = domain_basis(&f, domain);
    let k = basis.len();
    let n = q.dim();
    let dim = n * k;
    let mut gram = vec![vec![BigInt::zero(); dim]; dim];
    for a in 0..n {
        for i in 0..k {
            for b in 0..n {
                for j in 0..k {
                    let x = q.entry(a, b) * &(&basis[i] * &basis[j]);
                    gram[a * k + i][b * k + j] = trace_int(&x);
                }
            }
        }
    }
    let bound = trace_int(target);
    let mut stop = false;
    let mut err = None;
    lattice_points(&gram, &bound, budget, |x| {
        let v: Vec<AlgebraicNumber> = (0..n)
            .map(|a| {
                let mut acc = AlgebraicNumber::zero(&f);
                for i in 0..k {
                    if !x[a * k + i].is_zero() {
                        acc = &acc + &basis[i].scale_big(&x[a * k + i]);
                    }
                }
                acc
            })
            .collect();
        match q.evaluate(&v) {
            Ok(val) if val == *target => {
                if !visit(v) {
                    stop = true;
                }
            }
            Ok(_) => {}
            Err(e) => {
                err = Some(e);
                stop = true;
            }
        }
        !stop
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Integer vectors `x` with `x^T G x = bound`, for a positive definite integer `G`.
fn lattice_points(
    gram: &[Vec<BigInt>],
    bound: &BigInt,
    budget: u64,
    visit: impl FnMut(&[BigInt]) -> bool,
) -> Result<(), SearchError> {
    let small: Option<Vec<Vec<i64>>> =
        gram.iter().map(|r| r.iter().map(|x| x.to_i64().filter(|v| v.abs() < 1 << 30)).collect()).collect();
    match (small, bound.to_i64().filter(|b| *b < 1 << 40)) {
        (Some(g), Some(b)) => lattice_points_float(&g, b, budget, visit),
        _ => lattice_points_exact(gram, bound, budget, visit),
    }
}

/// Fincke-Pohst in floating point with a slack that can only enlarge the search;
/// every leaf is confirmed with exact integer arithmetic.
fn lattice_points_float(
    gram: &[Vec<i64>],
    bound: i64,
    budget: u64,
    mut visit: impl FnMut(&[BigInt]) -> bool,
) -> Result<(), SearchError> {
    let n = gram.len();
    let mut q: Vec<Vec<f64>> = gram.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    for i in 0..n {
        for j in i + 1..n {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                q[k][l] -= q[k][i] * q[i][l];
            }
        }
    }
    let slack = 1e-6 * (1.0 + bound as f64);
    let exact_value = |x: &[i64]| -> i128 {
        let mut acc = 0i128;
        for i in 0..n {
            if x[i] == 0 {
                continue;
            }
            let mut row = 0i128;
            for j in 0..n {
                row += gram[i][j] as i128 * x[j] as i128;
            }
            acc += row * x[i] as i128;
        }
        acc
    };
    let mut x = vec![0i64; n];
    let mut rest = vec![0f64; n + 1];
    rest[n] = bound as f64;
    let mut ranges = vec![(0i64, 0i64); n];
    let centre = |x: &[i64], i: usize, q: &[Vec<f64>]| -> f64 { (i + 1..n).map(|j| q[i][j] * x[j] as f64).sum() };
    let range = |c: f64, qii: f64, rest: f64| -> (i64, i64) {
        let r = (rest + slack) / qii;
        if r < 0.0 {
            return (1, 0);
        }
        let root = r.sqrt();
        ((-c - root).ceil() as i64, (-c + root).floor() as i64)
    };
    let mut used = 0u64;
    let mut i = n - 1;
    ranges[i] = range(centre(&x, i, &q), q[i][i], rest[i + 1]);
    x[i] = ranges[i].0 - 1;
    loop {
        x[i] += 1;
        if x[i] > ranges[i].1 {
            if i == n - 1 {
                return Ok(());
            }
            i += 1;
            continue;
        }
        used += 1;
        if used > budget {
            return Err(SearchError::BudgetExceeded { limit: budget });
        }
        let d = x[i] as f64 + centre(&x, i, &q);
        rest[i] = rest[i + 1] - q[i][i] * d * d;
        if i == 0 {
            if rest[0].abs() <= slack && exact_value(&x) == bound as i128 {
                let big: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
                if !visit(&big) {
                    return Ok(());
                }
            }
            continue;
        }
        i -= 1;
        ranges[i] = range(centre(&x, i, &q), q[i][i], rest[i + 1]);
        x[i] = ranges[i].0 - 1;
    }
}

/// The same enumeration in exact rational arithmetic, for large entries.
fn lattice_points_exact(
    gram: &[Vec<BigInt>],
    bound: &BigInt,
    budget: u64,
    mut visit: impl FnMut(&[BigInt]) -> bool,
) -> Result<(), SearchError> {
    let n = gram.len();
    let mut q: Vec<Vec<BigRational>> =
        gram.iter().map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect();
    for i in 0..n {
        for j in i + 1..n {
            q[j][i] = q[i][j].clone();
            q[i][j] = &q[i][j] / &q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                let d = &q[k][i] * &q[i][l];
                q[k][l] = &q[k][l] - d;
            }
        }
    }
    let b = BigRational::from_integer(bound.clone());
    let mut x = vec![BigInt::zero(); n];
    let mut used = 0u64;
    // remaining budget above each level; level n is the top
    let mut rest = vec![BigRational::zero(); n + 1];
    rest[n] = b;
    let mut ranges: Vec<(BigInt, BigInt)> = vec![(BigInt::zero(), BigInt::zero()); n];
    let centre = |x: &[BigInt], q: &[Vec<BigRational>], i: usize| -> BigRational {
        let mut c = BigRational::zero();
        for j in i + 1..n {
            if !x[j].is_zero() {
                c += &q[i][j] * BigRational::from_integer(x[j].clone());
            }
        }
        c
    };
    // integer range of x_i with q_ii (x_i + c)^2 <= rest
    let range = |c: &BigRational, qii: &BigRational, rest: &BigRational| -> (BigInt, BigInt) {
        let r = rest / qii;
        if r.is_negative() {
            return (BigInt::one(), BigInt::zero());
        }
        let root = (r.numer() / r.denom()).sqrt() + 1u32;
        let lo0 = (-c).floor().to_integer() - &root;
        let hi0 = (-c).ceil().to_integer() + &root;
        let fits = |v: &BigInt| {
            let d = BigRational::from_integer(v.clone()) + c;
            &d * &d <= r
        };
        let mut lo = lo0;
        while lo <= hi0 && !fits(&lo) {
            lo += 1;
        }
        let mut hi = hi0;
        while hi >= lo && !fits(&hi) {
            hi -= 1;
        }
        (lo, hi)
    };
    let mut i = n - 1;
    let c = centre(&x, &q, i);
    ranges[i] = range(&c, &q[i][i], &rest[i + 1]);
    x[i] = ranges[i].0.clone() - 1;
    loop {
        x[i] += 1;
        if x[i] > ranges[i].1 {
            if i == n - 1 {
                return Ok(());
            }
            i += 1;
            continue;
        }
        used += 1;
        if used > budget {
            return Err(SearchError::BudgetExceeded { limit: budget });
        }
        let c = centre(&x, &q, i);
        let d = BigRational::from_integer(x[i].clone()) + &c;
        rest[i] = &rest[i + 1] - &q[i][i] * &d * &d;
        if i == 0 {
            if rest[0].is_zero() && !visit(&x) {
                return Ok(());
            }
            continue;
        }
        i -= 1;
        let c = centre(&x, &q, i);
        ranges[i] = range(&c, &q[i][i], &rest[i + 1]);
        x[i] = ranges[i].0.clone() - 1;
    }
}

/// All integral `rho` with `lambda_i lambda_j - rho^2` totally nonnegative.
pub fn rho_candidates(
    li: &AlgebraicNumber,
    lj: &AlgebraicNumber,
    budget: u64,
) -> Result<Vec<AlgebraicNumber>, FormsError> {
    Ok(squares_below(&(li * lj), budget)?)
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    /// No candidate Gram matrix is singular, so no ternary classical form
    /// represents all four diagonal entries.
    NoSingularMatrix,
    /// A singular candidate exists; the quadruple proves nothing.
    SingularWitness { matrix: FormMatrix },
    BudgetExceeded { examined: u64 },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::NoSingularMatrix => "NoSingularMatrix",
            Verdict::SingularWitness { .. } => "SingularWitness",
            Verdict::BudgetExceeded { .. } => "BudgetExceeded",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EscalationRun {
    pub diagonal: Vec<AlgebraicNumber>,
    /// Candidate sets for the pairs (1,2), (1,3), (1,4), (2,3), (2,4), (3,4).
    pub rho_sets: Vec<Vec<AlgebraicNumber>>,
    pub candidates_examined: u64,
    pub verdict: Verdict,
}

pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Runs every symmetric matrix with the given diagonal and off-diagonal entries
/// allowed by the 2x2 minors, and looks for a singular one.
pub fn escalate_quadruple(diag: &[AlgebraicNumber; 4], budget: u64) -> Result<EscalationRun, FormsError> {
    let mut sets = Vec::new();
    for (i, j) in PAIRS {
        sets.push(rho_candidates(&diag[i], &diag[j], budget)?);
    }
    let [r12, r13, r14, r23, r24, r34] = [0, 1, 2, 3, 4, 5].map(|k| &sets[k]);
    let inner = (r14.len() * r24.len() * r34.len()) as u64;
    let mut outer: Vec<(usize, usize, usize)> = Vec::new();
    for a in 0..r12.len() {
        for b in 0..r13.len() {
            for c in 0..r23.len() {
                outer.push((a, b, c));
            }
        }
    }
    let examined = AtomicU64::new(0);
    let over = AtomicBool::new(false);
    let [l1, l2, l3, l4] = diag;
    let found = outer.par_iter().find_map_first(|&(a, b, c)| {
        if over.load(AtomicOrdering::Relaxed) {
            return None;
        }
        let done = examined.fetch_add(inner, AtomicOrdering::Relaxed) + inner;
        if done > budget {
            over.store(true, AtomicOrdering::Relaxed);
            return None;
        }
        let (p12, p13, p23) = (&r12[a], &r13[b], &r23[c]);
        // adjugate of the leading 3x3 block
        let adj11 = l2 * l3 - p23 * p23;
        let adj22 = l1 * l3 - p13 * p13;
        let adj33 = l1 * l2 - p12 * p12;
        let adj12 = p13 * p23 - p12 * l3;
        let adj13 = p12 * p23 - p13 * l2;
        let adj23 = p12 * p13 - l1 * p23;
        let delta = l1 * &adj11 + p12 * &adj12 + p13 * &adj13;
        let base = l4 * &delta;
        for p14 in r14 {
            for p24 in r24 {
                for p34 in r34 {
                    let quad = &adj11 * &(p14 * p14)
                        + &adj22 * &(p24 * p24)
                        + &adj33 * &(p34 * p34)
                        + (&adj12 * &(p14 * p24) + &adj13 * &(p14 * p34) + &adj23 * &(p24 * p34)).scale(2);
                    if base == quad {
                        let rows = vec![
                            vec![l1.clone(), p12.clone(), p13.clone(), p14.clone()],
                            vec![p12.clone(), l2.clone(), p23.clone(), p24.clone()],
                            vec![p13.clone(), p23.clone(), l3.clone(), p34.clone()],
                            vec![p14.clone(), p24.clone(), p34.clone(), l4.clone()],
                        ];
                        return Some(FormMatrix::new(rows).expect("symmetric by construction"));
                    }
                }
            }
        }
        None
    });
    let n = examined.load(AtomicOrdering::Relaxed).min(outer.len() as u64 * inner);
    let verdict = match found {
        Some(matrix) => {
            debug_assert!(matrix.det().is_zero());
            Verdict::SingularWitness { matrix }
        }
        None if over.load(AtomicOrdering::Relaxed) => Verdict::BudgetExceeded { examined: n.min(budget) },
        None => Verdict::NoSingularMatrix,
    };
    Ok(EscalationRun { diagonal: diag.to_vec(), rho_sets: sets, candidates_examined: n, verdict })
}

/// Fields whose quadruple is listed explicitly, with `lambda_2, lambda_3, lambda_4`.
pub const TABLE_ROWS: [(u64, u64, [&str; 3]); 7] = [
    (2, 3, ["4+5/2sqrt(2)+2sqrt(3)+3/2sqrt(6)", "3+sqrt(6)", "3-3/2sqrt(2)-sqrt(3)+1/2sqrt(6)"]),
    (2, 5, ["2+sqrt(2)", "3", "5/2+1/2sqrt(2)+1/2sqrt(5)+1/2sqrt(10)"]),
    (2, 21, ["2+sqrt(2)", "5/2+1/2sqrt(21)", "5+5/2sqrt(2)+sqrt(21)+1/2sqrt(42)"]),
    (2, 33, ["2+sqrt(2)", "7/2+1/2sqrt(33)", "6+sqrt(33)"]),
    (3, 5, ["2+sqrt(3)", "5/2+1/2sqrt(3)+1/2sqrt(5)+1/2sqrt(15)", "3+1/2sqrt(3)+1/2sqrt(15)"]),
    (5, 13, ["5/2+1/2sqrt(13)", "4+sqrt(13)", "13/4+3/4sqrt(5)+3/4sqrt(13)+1/4sqrt(65)"]),
    (5, 17, ["5/2+1/2sqrt(17)", "29/2+7/2sqrt(17)", "13/4+1/4sqrt(5)+1/4sqrt(17)+1/4sqrt(85)"]),
];

pub fn table_quadruple(f: &Arc<FieldSpec>) -> Option<[AlgebraicNumber; 4]> {
    let row = TABLE_ROWS.iter().find(|r| r.0 == f.m() && r.1 == f.s())?;
    let parse = |s: &str| AlgebraicNumber::parse(f, s).expect("table entry parses");
    Some([AlgebraicNumber::one(f), parse(row.2[0]), parse(row.2[1]), parse(row.2[2])])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WitnessBranch {
    Table,
    TwoFamily,
    FiveFamily,
    UnitCaseI,
    UnitCaseIINonsquareTwoEps,
    UnitCaseIISquareTwoEps,
    UnitCaseIII,
}

impl WitnessBranch {
    /// Whether the conclusion rests on the escalation rather than on units.
    pub fn needs_escalation(self) -> bool {
        matches!(self, WitnessBranch::Table | WitnessBranch::TwoFamily | WitnessBranch::FiveFamily | WitnessBranch::UnitCaseIII)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub branch: WitnessBranch,
    pub diagonal: [AlgebraicNumber; 4],
    pub units: Option<UnitReport>,
}

/// Chooses four totally positive elements that no ternary classical form can
/// represent simultaneously, following the case split by field and unit structure.
pub fn witness_quadruple(f: &Arc<FieldSpec>) -> Result<Witness, FormsError> {
    let one = AlgebraicNumber::one(f);
    let int = |k: i64| AlgebraicNumber::from_int(f, k);
    if let Some(d) = table_quadruple(f) {
        return Ok(Witness { branch: WitnessBranch::Table, diagonal: d, units: None });
    }
    if f.m() == 2 {
        let d = [one, AlgebraicNumber::parse(f, "2+sqrt(2)").unwrap(), int(3), element_s(f)];
        return Ok(Witness { branch: WitnessBranch::TwoFamily, diagonal: d, units: None });
    }
    if f.m() == 5 && ![6, 21, 33].contains(&f.s()) {
        let d = [one, int(2), AlgebraicNumber::parse(f, "6+sqrt(5)").unwrap(), element_s(f)];
        return Ok(Witness { branch: WitnessBranch::FiveFamily, diagonal: d, units: None });
    }
    let report = unit_report(f)?;
    let (branch, diagonal) = match &report.case {
        UnitCase::CaseI { eps, eps2, product } => {
            (WitnessBranch::UnitCaseI, [one, eps.clone(), eps2.clone(), product.clone()])
        }
        UnitCase::CaseII { eps, two_eps_square: false } => {
            (WitnessBranch::UnitCaseIINonsquareTwoEps, [one, eps.clone(), int(2), eps.scale(2)])
        }
        UnitCase::CaseII { eps, two_eps_square: true } => {
            if [3, 5].contains(&f.m()) {
                if f.s() == 5 {
                    return Err(FormsError::NoRecipe(f.describe()));
                }
                let s = element_s(f);
                (WitnessBranch::UnitCaseIISquareTwoEps, [one, eps.clone(), s.clone(), eps * &s])
            } else {
                let m = element_m(f);
                (WitnessBranch::UnitCaseIISquareTwoEps, [one, eps.clone(), m.clone(), eps * &m])
            }
        }
        UnitCase::CaseIIICandidate => {
            let m = match f.m() {
                65 => AlgebraicNumber::parse(f, "(25+3*sqrt(65))/2").unwrap(),
                85 => element_m1(f),
                _ => element_m(f),
            };
            (WitnessBranch::UnitCaseIII, [one, int(2), int(5), m])
        }
    };
    Ok(Witness { branch, diagonal, units: Some(report) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(f: &Arc<FieldSpec>, s: &str) -> AlgebraicNumber {
        AlgebraicNumber::parse(f, s).unwrap()
    }

    fn q0(f: &Arc<FieldSpec>) -> FormMatrix {
        FormMatrix::new(vec![vec![el(f, "7"), el(f, "-3*sqrt(10)")], vec![el(f, "-3*sqrt(10)"), el(f, "13")]]).unwrap()
    }

    #[test]
    fn binary_form_over_sqrt10() {
        let f = FieldSpec::new(2, 5).unwrap();
        let q = q0(&f);
        assert_eq!(q.det(), el(&f, "1"));
        assert_eq!(q.evaluate(&[el(&f, "sqrt(10)"), el(&f, "2")]).unwrap(), el(&f, "2"));
        assert_eq!(q.evaluate(&[el(&f, "5"), el(&f, "sqrt(10)")]).unwrap(), el(&f, "5"));
        let reps = represents_all(&q, &el(&f, "2"), SearchDomain::Subfield(Radical::T), 1 << 20).unwrap();
        assert_eq!(reps.len(), 4);
        let sum = FormMatrix::diagonal(&[el(&f, "1"), el(&f, "1")]);
        assert!(represents(&sum, &el(&f, "7"), SearchDomain::Subfield(Radical::T), 1 << 20).unwrap().is_none());
    }

    #[test]
    fn rho_examples() {
        let f = FieldSpec::new(2, 23).unwrap();
        let s = element_s(&f);
        let v: Vec<String> = rho_candidates(&el(&f, "3"), &s, 1 << 20).unwrap().iter().map(|x| x.pretty()).collect();
        // 3S - 1 has a negative conjugate when ceil(sqrt 23) - sqrt 23 < 1/3
        assert_eq!(v, ["0"]);
        let g = FieldSpec::new(2, 31).unwrap();
        let w: Vec<String> = rho_candidates(&el(&g, "3"), &element_s(&g), 1 << 20).unwrap().iter().map(|x| x.pretty()).collect();
        assert_eq!(w, ["-1", "0", "1"]);
        assert_eq!(rho_candidates(&el(&f, "1"), &el(&f, "2+sqrt(2)"), 1 << 20).unwrap().len(), 1);
    }

    #[test]
    fn float_and_exact_enumerations_agree() {
        // a few positive definite Gram matrices of mixed shape
        let grams: [Vec<Vec<i64>>; 3] = [
            vec![vec![2, 1, 0], vec![1, 2, 1], vec![0, 1, 2]],
            vec![vec![4, 2, 1, 0], vec![2, 6, 1, 1], vec![1, 1, 3, 0], vec![0, 1, 0, 5]],
            vec![vec![10, 7], vec![7, 5]],
        ];
        for g in grams {
            let big: Vec<Vec<BigInt>> = g.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
            for b in 0..14 {
                let mut fl = Vec::new();
                lattice_points_float(&g, b, 1 << 24, |x| {
                    fl.push(x.to_vec());
                    true
                })
                .unwrap();
                let mut ex = Vec::new();
                lattice_points_exact(&big, &BigInt::from(b), 1 << 24, |x| {
                    ex.push(x.to_vec());
                    true
                })
                .unwrap();
                assert_eq!(fl, ex, "bound {b}");
            }
        }
    }

    #[test]
    fn diagonal_ones_are_singular() {
        let f = FieldSpec::new(2, 3).unwrap();
        let one = el(&f, "1");
        let run = escalate_quadruple(&[one.clone(), one.clone(), one.clone(), one], 1 << 20).unwrap();
        assert!(matches!(run.verdict, Verdict::SingularWitness { .. }));
    }
}
