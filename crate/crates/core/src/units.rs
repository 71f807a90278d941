//! Totally positive units coming from the three quadratic subfields, and which of
//! their products become squares in the biquadratic field.
//!
//! Only the subgroup generated by `eps_m, eps_s, eps_t` is examined, so the case
//! reported here is a lower bound on the true structure of totally positive units
//! modulo squares.

use std::sync::Arc;

use num_traits::One;
use serde::Serialize;

use crate::enumerate::sqrt_in_ring;
use crate::field::{AlgebraicNumber, FieldSpec, Radical};
use crate::quad::{quad_data, QuadElement, QuadError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UnitError {
    #[error("{0} is not totally positive")]
    NotTotallyPositive(String),
    #[error("{0} is not a unit")]
    NotUnit(String),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// One of the seven nonempty products of `eps_m, eps_s, eps_t`.
#[derive(Debug, Clone, Serialize)]
pub struct ProductClass {
    /// Which fundamental units enter, e.g. `"ms"`.
    pub label: String,
    pub value: AlgebraicNumber,
    pub totally_positive: bool,
    pub square: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "case")]
pub enum UnitCase {
    /// Two totally positive units whose product and both factors are nonsquares.
    CaseI { eps: AlgebraicNumber, eps2: AlgebraicNumber, product: AlgebraicNumber },
    /// Exactly one nonsquare class of totally positive units among the products.
    CaseII { eps: AlgebraicNumber, two_eps_square: bool },
    /// Every totally positive product is a square (lower bound only).
    CaseIIICandidate,
}

impl UnitCase {
    pub fn name(&self) -> &'static str {
        match self {
            UnitCase::CaseI { .. } => "I",
            UnitCase::CaseII { .. } => "II",
            UnitCase::CaseIIICandidate => "III-candidate",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UnitReport {
    pub m: u64,
    pub s: u64,
    pub t: u64,
    /// Fundamental units of `Q(sqrt m)`, `Q(sqrt s)`, `Q(sqrt t)`.
    pub eps: [QuadElement; 3],
    pub eps_norms: [i8; 3],
    /// Products in the order m, s, t, ms, mt, st, mst.
    pub classes: Vec<ProductClass>,
    pub case: UnitCase,
}

const LABELS: [&str; 7] = ["m", "s", "t", "ms", "mt", "st", "mst"];
const MASKS: [u8; 7] = [1, 2, 4, 3, 5, 6, 7];

pub fn unit_report(f: &Arc<FieldSpec>) -> Result<UnitReport, UnitError> {
    let data = Radical::ALL.map(|r| quad_data(f.radicand(r)));
    let mut eps = Vec::new();
    let mut norms = [0i8; 3];
    for (i, d) in data.into_iter().enumerate() {
        let d = d?;
        norms[i] = d.unit_norm;
        eps.push(d.fundamental_unit.clone());
    }
    let embedded: Vec<AlgebraicNumber> = eps.iter().map(|e| e.embed(f).expect("subfield unit")).collect();
    let mut classes = Vec::new();
    for (label, mask) in LABELS.iter().zip(MASKS) {
        let mut v = AlgebraicNumber::one(f);
        for (i, e) in embedded.iter().enumerate() {
            if mask >> i & 1 == 1 {
                v = &v * e;
            }
        }
        let tp = v.is_totally_positive();
        let square = tp && sqrt_in_ring(&v).is_some();
        classes.push(ProductClass { label: label.to_string(), value: v, totally_positive: tp, square });
    }
    let nonsquare = |mask: u8| {
        let i = MASKS.iter().position(|&x| x == mask).unwrap();
        classes[i].totally_positive && !classes[i].square
    };
    let mut case = None;
    'outer: for (i, &a) in MASKS.iter().enumerate() {
        for &b in &MASKS[i + 1..] {
            if nonsquare(a) && nonsquare(b) && nonsquare(a ^ b) {
                let ea = classes[MASKS.iter().position(|&x| x == a).unwrap()].value.clone();
                let eb = classes[MASKS.iter().position(|&x| x == b).unwrap()].value.clone();
                let product = &ea * &eb;
                case = Some(UnitCase::CaseI { eps: ea, eps2: eb, product });
                break 'outer;
            }
        }
    }
    let case = match case {
        Some(c) => c,
        None => match classes.iter().find(|c| c.totally_positive && !c.square) {
            Some(c) => {
                let two = (&c.value).scale(2);
                UnitCase::CaseII { eps: c.value.clone(), two_eps_square: sqrt_in_ring(&two).is_some() }
            }
            None => UnitCase::CaseIIICandidate,
        },
    };
    let [e0, e1, e2]: [QuadElement; 3] = eps.try_into().unwrap();
    Ok(UnitReport { m: f.m(), s: f.s(), t: f.t(), eps: [e0, e1, e2], eps_norms: norms, classes, case })
}

/// Whether `2 eps` is a square, for a totally positive unit `eps`.
pub fn two_eps_square(eps: &AlgebraicNumber) -> Result<bool, UnitError> {
    if !eps.is_totally_positive() {
        return Err(UnitError::NotTotallyPositive(eps.pretty()));
    }
    if !eps.is_integral() || !eps.norm().is_one() {
        return Err(UnitError::NotUnit(eps.pretty()));
    }
    Ok(sqrt_in_ring(&eps.scale(2)).is_some())
}

/// `false` certifies that neither the fundamental unit of the subfield nor twice
/// it becomes a square in `K` (the gcd of the other radicands has an odd prime).
pub fn quadratic_unit_square_filter(f: &FieldSpec, which: Radical) -> bool {
    f.cofactor(which) < 3
}
