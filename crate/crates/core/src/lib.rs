//! Exact arithmetic in real biquadratic fields `Q(sqrt m, sqrt s)`, with searches for
//! indecomposable integers, squares, and an escalation that certifies when no ternary
//! classical quadratic form over the ring of integers can be universal.
//!
//! ```
//! use biquad::field::{AlgebraicNumber, FieldSpec};
//! let k = FieldSpec::new(2, 3).unwrap();
//! let w = AlgebraicNumber::parse(&k, "(sqrt(2)+sqrt(6))/2").unwrap();
//! assert_eq!(w.square(), AlgebraicNumber::parse(&k, "2+sqrt(3)").unwrap());
//! ```

pub mod enumerate;
pub mod field;
pub mod forms;
pub mod quad;
mod real;
pub mod units;

pub use enumerate::{
    decompositions, dominated_by, is_indecomposable, odd_divisor_square_filter, square_parts, sqrt_in_ring,
    squares_below, SearchError, DEFAULT_BUDGET,
};
pub use field::{classify, AlgebraicNumber, BasisClass, EmbeddingId, FieldError, FieldSpec, Radical, Role, SignValue};
pub use forms::{escalate_quadruple, represents, rho_candidates, witness_quadruple, FormMatrix, SearchDomain, Verdict};
pub use quad::{pell_solvable, quad_data, quadratic_indecomposables, QuadData, QuadElement};
pub use units::{unit_report, UnitCase, UnitReport};

/// Square-free integers `n` with `lo <= n <= hi`.
pub fn squarefree_range(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(2)..=hi).filter(|&n| field::is_squarefree(n)).collect()
}

/// Every field `Q(sqrt m, sqrt s)` with `m < s < t <= max_t`, ordered by `(m, s)`.
pub fn fields_up_to(max_t: u64) -> Vec<std::sync::Arc<FieldSpec>> {
    let sf = squarefree_range(2, max_t);
    let mut out = Vec::new();
    for (i, &m) in sf.iter().enumerate() {
        for &s in &sf[i + 1..] {
            let f = FieldSpec::new(m, s).expect("square-free pair");
            if f.m() == m && f.s() == s && f.t() <= max_t {
                out.push(f);
            }
        }
    }
    out
}
