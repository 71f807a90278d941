//! Per-field records: basis data, units, the chosen quadruple and its verdict.

use std::sync::Arc;
use std::time::Instant;

use biquad::forms::{FormsError, WitnessBranch};
use biquad::quad::{element_m, element_s, element_t};
use biquad::{escalate_quadruple, unit_report, witness_quadruple, FieldSpec, UnitCase, Verdict};
use serde::{Deserialize, Serialize};

use crate::config::VERSION;

/// Bumped whenever the CSV columns change.
pub const CSV_VERSION: u32 = 1;

pub const CSV_COLUMNS: [&str; 12] = [
    "csv_version",
    "m",
    "s",
    "t",
    "basis",
    "unit_case",
    "branch",
    "verdict",
    "candidates",
    "status",
    "version",
    "config_hash",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distinguished {
    pub m: String,
    pub s: String,
    pub t: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitSummary {
    pub case: String,
    /// Fundamental units of the three quadratic subfields.
    pub eps: Vec<String>,
    pub eps_norms: Vec<i8>,
    /// Labels (`m`, `st`, ...) of totally positive products.
    pub totally_positive: Vec<String>,
    pub squares: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub two_eps_square: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSummary {
    pub branch: String,
    pub diagonal: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscalationSummary {
    pub verdict: String,
    pub candidates_examined: u64,
    pub rho_set_sizes: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub singular_matrix: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Certified,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub version: String,
    pub config_hash: String,
    pub m: u64,
    pub s: u64,
    pub t: u64,
    pub basis: String,
    pub pqr: (u64, u64, u64),
    pub integral_basis: Vec<String>,
    pub distinguished: Distinguished,
    pub units: Option<UnitSummary>,
    pub witness: Option<WitnessSummary>,
    pub escalation: Option<EscalationSummary>,
    pub status: Status,
    /// `escalation` or `units` when certified.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub timing_ms: Option<u64>,
}

fn branch_name(b: WitnessBranch) -> String {
    format!("{b:?}")
}

fn units_summary(f: &Arc<FieldSpec>) -> Result<UnitSummary, String> {
    let r = unit_report(f).map_err(|e| e.to_string())?;
    let two_eps_square = match &r.case {
        UnitCase::CaseII { two_eps_square, .. } => Some(*two_eps_square),
        _ => None,
    };
    Ok(UnitSummary {
        case: r.case.name().into(),
        eps: r.eps.iter().map(|e| e.to_string()).collect(),
        eps_norms: r.eps_norms.to_vec(),
        totally_positive: r.classes.iter().filter(|c| c.totally_positive).map(|c| c.label.clone()).collect(),
        squares: r.classes.iter().filter(|c| c.square).map(|c| c.label.clone()).collect(),
        two_eps_square,
    })
}

/// Builds the full record for one field. `budget` caps every enumeration.
pub fn field_record(f: &Arc<FieldSpec>, budget: u64, config_hash: &str, timing: bool) -> FieldRecord {
    let start = Instant::now();
    let (p, q, r) = f.pqr_values();
    let mut rec = FieldRecord {
        version: VERSION.into(),
        config_hash: config_hash.into(),
        m: f.m(),
        s: f.s(),
        t: f.t(),
        basis: f.basis().to_string(),
        pqr: (p, q, r),
        integral_basis: f.integral_basis().iter().map(|b| b.pretty()).collect(),
        distinguished: Distinguished {
            m: element_m(f).pretty(),
            s: element_s(f).pretty(),
            t: element_t(f).pretty(),
        },
        units: None,
        witness: None,
        escalation: None,
        status: Status::Inconclusive,
        method: None,
        reason: None,
        timing_ms: None,
    };
    match units_summary(f) {
        Ok(u) => rec.units = Some(u),
        Err(e) => rec.reason = Some(format!("unit report failed: {e}")),
    }
    match witness_quadruple(f) {
        Err(FormsError::NoRecipe(_)) => {
            rec.reason = Some("no quadruple recipe covers this field".into());
        }
        Err(e) => rec.reason = Some(e.to_string()),
        Ok(w) => {
            rec.witness = Some(WitnessSummary {
                branch: branch_name(w.branch),
                diagonal: w.diagonal.iter().map(|x| x.pretty()).collect(),
            });
            if !w.branch.needs_escalation() {
                rec.status = Status::Certified;
                rec.method = Some("units".into());
            } else {
                match escalate_quadruple(&w.diagonal, budget) {
                    Err(e) => rec.reason = Some(e.to_string()),
                    Ok(run) => {
                        let singular = match &run.verdict {
                            Verdict::SingularWitness { matrix } => Some(
                                matrix.rows().iter().map(|row| row.iter().map(|x| x.pretty()).collect()).collect(),
                            ),
                            _ => None,
                        };
                        match run.verdict {
                            Verdict::NoSingularMatrix => {
                                rec.status = Status::Certified;
                                rec.method = Some("escalation".into());
                            }
                            Verdict::SingularWitness { .. } => {
                                rec.reason = Some("a singular candidate matrix exists; the quadruple proves nothing".into())
                            }
                            Verdict::BudgetExceeded { .. } => rec.reason = Some("escalation budget exhausted".into()),
                        }
                        rec.escalation = Some(EscalationSummary {
                            verdict: run.verdict.name().into(),
                            candidates_examined: run.candidates_examined,
                            rho_set_sizes: run.rho_sets.iter().map(|v| v.len()).collect(),
                            singular_matrix: singular,
                        });
                    }
                }
            }
        }
    }
    if timing {
        rec.timing_ms = Some(start.elapsed().as_millis() as u64);
    }
    rec
}

impl FieldRecord {
    pub fn csv_row(&self) -> Vec<String> {
        vec![
            CSV_VERSION.to_string(),
            self.m.to_string(),
            self.s.to_string(),
            self.t.to_string(),
            self.basis.clone(),
            self.units.as_ref().map(|u| u.case.clone()).unwrap_or_default(),
            self.witness.as_ref().map(|w| w.branch.clone()).unwrap_or_default(),
            self.escalation.as_ref().map(|e| e.verdict.clone()).unwrap_or_default(),
            self.escalation.as_ref().map(|e| e.candidates_examined.to_string()).unwrap_or_default(),
            match self.status {
                Status::Certified => "certified".into(),
                Status::Inconclusive => "inconclusive".into(),
            },
            self.version.clone(),
            self.config_hash.clone(),
        ]
    }

    pub fn render_text(&self) -> String {
        let mut s = format!("Q(sqrt({}), sqrt({})), t = {}\n", self.m, self.s, self.t);
        s.push_str(&format!("  basis {} with (p, q, r) = {:?}: {}\n", self.basis, self.pqr, self.integral_basis.join(", ")));
        s.push_str(&format!("  M = {}, S = {}, T = {}\n", self.distinguished.m, self.distinguished.s, self.distinguished.t));
        if let Some(u) = &self.units {
            s.push_str(&format!(
                "  units: case {}, eps = {} (norms {:?}), totally positive [{}], squares [{}]\n",
                u.case,
                u.eps.join(", "),
                u.eps_norms,
                u.totally_positive.join(" "),
                u.squares.join(" ")
            ));
        }
        if let Some(w) = &self.witness {
            s.push_str(&format!("  quadruple ({}): {}\n", w.branch, w.diagonal.join("; ")));
        }
        if let Some(e) = &self.escalation {
            s.push_str(&format!(
                "  escalation: {} after {} candidates, pair set sizes {:?}\n",
                e.verdict, e.candidates_examined, e.rho_set_sizes
            ));
        }
        let status = match self.status {
            Status::Certified => format!("certified by {}", self.method.as_deref().unwrap_or("?")),
            Status::Inconclusive => "inconclusive".into(),
        };
        s.push_str(&format!("  status: {status}"));
        if let Some(r) = &self.reason {
            s.push_str(&format!(" ({r})"));
        }
        s.push('\n');
        s
    }
}
