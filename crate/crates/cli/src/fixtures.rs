//! Expected lists embedded from `fixtures/expected.json`.

use std::sync::{Arc, OnceLock};

use anyhow::{Context, Result};
use biquad::{AlgebraicNumber, FieldSpec};
use serde::Deserialize;

const RAW: &str = include_str!("../fixtures/expected.json");

#[derive(Debug, Deserialize)]
pub struct Expected {
    pub trivial_decompositions: Vec<DecompositionRule>,
    pub trivial_decomposition_fields: Vec<(u64, u64)>,
    pub square_parts: SquareParts,
    pub coefficient_families: Vec<CoefficientFamily>,
    pub nonsquare: Vec<NonsquareRule>,
    pub table: Vec<TableRow>,
    pub binary_form_sqrt10: BinaryForm,
}

#[derive(Debug, Deserialize)]
pub struct DecompositionRule {
    pub n: i64,
    pub nontrivial: Vec<ListedPair>,
}

#[derive(Debug, Deserialize)]
pub struct ListedPair {
    pub pair: (String, String),
    /// Radicands whose square roots the pair uses.
    pub needs: Vec<u64>,
}

#[derive(Debug, Deserialize)]
pub struct SquareParts {
    /// Square roots assumed absent from the field.
    pub absent: Vec<u64>,
    pub fields: Vec<(u64, u64)>,
    pub cases: Vec<SquarePartCase>,
}

#[derive(Debug, Deserialize)]
pub struct SquarePartCase {
    pub n: i64,
    pub always: Vec<String>,
    pub errata: Vec<Erratum>,
    pub conditional: Vec<Conditional>,
}

#[derive(Debug, Deserialize)]
pub struct Erratum {
    pub value: String,
    pub reason: String,
}

#[derive(Debug, Deserialize)]
pub struct Conditional {
    pub needs: u64,
    pub values: Vec<String>,
}

#[derive(Debug, Deserialize)]
pub struct CoefficientFamily {
    pub id: String,
    pub m: u64,
    pub excluded_s: Vec<u64>,
    pub sample_s: Vec<u64>,
    pub parts: Vec<CoefficientPart>,
}

#[derive(Debug, Deserialize)]
pub struct CoefficientPart {
    /// Factors of the bound; `S` stands for the distinguished element of `Q(sqrt s)`.
    pub product: Vec<String>,
    pub printed: Vec<String>,
}

#[derive(Debug, Deserialize)]
pub struct NonsquareRule {
    pub id: String,
    pub factor: i64,
    pub base: String,
    pub shift: i64,
    pub m_in: Vec<u64>,
    pub fields: Vec<(u64, u64)>,
}

#[derive(Debug, Deserialize)]
pub struct TableRow {
    pub m: u64,
    pub s: u64,
    pub diagonal: Vec<String>,
}

#[derive(Debug, Deserialize)]
pub struct NormFact {
    pub element: String,
    pub norm: i64,
}

#[derive(Debug, Deserialize)]
pub struct BinaryForm {
    pub field: (u64, u64),
    pub gram: Vec<Vec<String>>,
    pub det: String,
    pub e: Vec<String>,
    pub f: Vec<String>,
    pub value_at_e: String,
    pub representations_of_2: Vec<Vec<String>>,
    pub gamma: String,
    pub beta: String,
    pub two_gamma_minus_beta_squared: String,
    pub sum_of_two_squares_misses: String,
    pub norms: Vec<NormFact>,
}

pub fn expected() -> &'static Expected {
    static CELL: OnceLock<Expected> = OnceLock::new();
    CELL.get_or_init(|| serde_json::from_str(RAW).expect("embedded fixture parses"))
}

pub fn parse_el(f: &Arc<FieldSpec>, s: &str) -> Result<AlgebraicNumber> {
    AlgebraicNumber::parse(f, s).with_context(|| format!("parsing {s:?} in {}", f.describe()))
}

impl NonsquareRule {
    pub fn applies(&self, f: &FieldSpec) -> bool {
        self.m_in.contains(&f.m()) || self.fields.contains(&(f.m(), f.s()))
    }
}
