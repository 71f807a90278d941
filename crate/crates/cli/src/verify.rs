//! Recomputes the finite lists behind each lemma and diffs them against the
//! embedded expectations.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use anyhow::{bail, Result};
use biquad::forms::{represents_all, table_quadruple};
use biquad::quad::{distinguished, element_m, element_s};
use biquad::{
    decompositions, escalate_quadruple, fields_up_to, sqrt_in_ring, square_parts, squares_below, AlgebraicNumber,
    EmbeddingId, FieldSpec, FormMatrix, Radical, SearchDomain, Verdict,
};
use num_rational::BigRational;
use serde::Serialize;

use crate::fixtures::{expected, parse_el, CoefficientFamily, NonsquareRule};

pub const LEMMAS: [&str; 10] = [
    "trivdecomp-2",
    "trivdecomp-3",
    "trivdecomp-5",
    "10and8",
    "2coeff",
    "5coeff",
    "table1",
    "appendixA",
    "nonsquareM",
    "nonsquareS",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Computed and expected sets coincide.
    Equal,
    /// Every computed element is listed.
    Subset,
    /// Some computed element is not listed.
    Escapes,
    /// A single fact, expected and computed rendered as text.
    Fact,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Equal => "equal",
            Relation::Subset => "subset",
            Relation::Escapes => "escapes",
            Relation::Fact => "fact",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub lemma: String,
    pub context: String,
    pub expected: Vec<String>,
    pub computed: Vec<String>,
    /// What was required of the two lists.
    pub relation: Relation,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Params {
    pub s: Option<u64>,
    pub fields: Vec<(u64, u64)>,
    pub max_t: u64,
    pub budget: u64,
}

impl Default for Params {
    fn default() -> Self {
        Params { s: None, fields: Vec::new(), max_t: 300, budget: 1 << 36 }
    }
}

fn texts<'a>(v: impl IntoIterator<Item = &'a AlgebraicNumber>) -> Vec<String> {
    v.into_iter().map(|x| x.pretty()).collect()
}

fn set_check(
    lemma: &str,
    context: String,
    expected: &BTreeSet<AlgebraicNumber>,
    computed: &BTreeSet<AlgebraicNumber>,
    want: Relation,
) -> Check {
    let subset = computed.is_subset(expected);
    let ok = match want {
        Relation::Equal => computed == expected,
        Relation::Subset => subset,
        Relation::Escapes => !subset,
        Relation::Fact => unreachable!("facts are not sets"),
    };
    let missing: Vec<_> = expected.difference(computed).collect();
    let extra: Vec<_> = computed.difference(expected).collect();
    let mut note = Vec::new();
    if !extra.is_empty() {
        note.push(format!("not listed: {}", texts(extra).join(", ")));
    }
    if !missing.is_empty() {
        note.push(format!("listed but absent: {}", texts(missing).join(", ")));
    }
    Check {
        lemma: lemma.into(),
        context,
        expected: texts(expected),
        computed: texts(computed),
        relation: want,
        ok,
        note: (!note.is_empty()).then(|| note.join("; ")),
    }
}

fn fact(lemma: &str, context: &str, expected: String, computed: String, ok: bool) -> Check {
    Check {
        lemma: lemma.into(),
        context: context.into(),
        expected: vec![expected],
        computed: vec![computed],
        relation: Relation::Fact,
        ok,
        note: None,
    }
}

fn fields_of(list: &[(u64, u64)]) -> Result<Vec<Arc<FieldSpec>>> {
    list.iter().map(|&(a, b)| Ok(FieldSpec::new(a, b)?)).collect()
}

pub fn run(lemma: &str, p: &Params) -> Result<Vec<Check>> {
    match lemma {
        "trivdecomp-2" => trivial_decompositions(2, p),
        "trivdecomp-3" => trivial_decompositions(3, p),
        "trivdecomp-5" => trivial_decompositions(5, p),
        "10and8" => ten_and_eight(p),
        "2coeff" | "5coeff" => {
            let fam = expected().coefficient_families.iter().find(|f| f.id == lemma).expect("fixture lists family");
            coefficient_sets(fam, p)
        }
        "table1" => table(p.budget),
        "appendixA" => binary_form_sqrt10(),
        "nonsquareM" => nonsquare(&["M", "2M", "3M", "4M", "5M", "2M-1"], p),
        "nonsquareS" => nonsquare(&["S", "2S"], p),
        other => bail!("unknown lemma {other:?}; expected one of {}", LEMMAS.join(", ")),
    }
}

fn normalized(a: AlgebraicNumber, b: AlgebraicNumber) -> (AlgebraicNumber, AlgebraicNumber) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Nontrivial decompositions of `n`, against the Galois orbits of the listed pairs
/// whose square roots lie in the field.
pub fn trivial_decompositions(n: i64, p: &Params) -> Result<Vec<Check>> {
    let fx = expected();
    let rule = fx.trivial_decompositions.iter().find(|r| r.n == n).expect("fixture lists n");
    let fields = if p.fields.is_empty() { &fx.trivial_decomposition_fields } else { &p.fields };
    let lemma = format!("trivdecomp-{n}");
    let mut out = Vec::new();
    for f in fields_of(fields)? {
        let mut want = BTreeSet::new();
        for listed in &rule.nontrivial {
            if !listed.needs.iter().all(|&r| f.contains_sqrt(r)) {
                continue;
            }
            let (a, b) = (parse_el(&f, &listed.pair.0)?, parse_el(&f, &listed.pair.1)?);
            for e in EmbeddingId::ALL {
                want.insert(normalized(a.conjugate(e), b.conjugate(e)));
            }
        }
        let d = decompositions(&AlgebraicNumber::from_int(&f, n), false, p.budget)?;
        let got: BTreeSet<_> =
            d.pairs.into_iter().filter(|(a, b)| !(a.is_rational() && b.is_rational())).collect();
        let show = |s: &BTreeSet<(AlgebraicNumber, AlgebraicNumber)>| -> Vec<String> {
            s.iter().map(|(a, b)| format!("({}) + ({})", a.pretty(), b.pretty())).collect()
        };
        let ok = got == want;
        let mut note = None;
        if !ok {
            let extra: Vec<_> = got.difference(&want).map(|(a, b)| format!("({}) + ({})", a.pretty(), b.pretty())).collect();
            let missing: Vec<_> =
                want.difference(&got).map(|(a, b)| format!("({}) + ({})", a.pretty(), b.pretty())).collect();
            note = Some(format!("not listed: [{}]; listed but absent: [{}]", extra.join(", "), missing.join(", ")));
        }
        out.push(Check {
            lemma: lemma.clone(),
            context: f.describe(),
            expected: show(&want),
            computed: show(&got),
            relation: Relation::Equal,
            ok,
            note,
        });
    }
    Ok(out)
}

/// Values of `w^2` with `n - w^2` totally nonnegative, for `n = 8, 10`.
pub fn ten_and_eight(p: &Params) -> Result<Vec<Check>> {
    let fx = &expected().square_parts;
    let fields = if p.fields.is_empty() { &fx.fields } else { &p.fields };
    let mut out = Vec::new();
    for f in fields_of(fields)? {
        let present: Vec<u64> = fx.absent.iter().copied().filter(|&r| f.contains_sqrt(r)).collect();
        if !present.is_empty() {
            bail!("{} contains sqrt of {:?}; the lists assume these are absent", f.describe(), present);
        }
        for case in &fx.cases {
            let mut want = BTreeSet::new();
            for v in &case.always {
                if !case.errata.iter().any(|e| &e.value == v) {
                    want.insert(parse_el(&f, v)?);
                }
            }
            for c in case.conditional.iter().filter(|c| f.contains_sqrt(c.needs)) {
                for v in &c.values {
                    want.insert(parse_el(&f, v)?);
                }
            }
            let got: BTreeSet<_> = square_parts(&AlgebraicNumber::from_int(&f, case.n), p.budget)?.into_iter().collect();
            let mut check = set_check("10and8", format!("{} n = {}", f.describe(), case.n), &want, &got, Relation::Equal);
            for e in &case.errata {
                let gone = !got.contains(&parse_el(&f, &e.value)?);
                let text = format!("listed {} dropped ({}){}", e.value, e.reason, if gone { "" } else { " but it occurs" });
                check.ok &= gone;
                check.note = Some(match check.note {
                    Some(n) => format!("{n}; {text}"),
                    None => text,
                });
            }
            out.push(check);
        }
    }
    Ok(out)
}

/// The field for parameter `s` of a family and its element `S`.
pub fn family_field(m: u64, s: u64) -> Result<(Arc<FieldSpec>, AlgebraicNumber)> {
    let f = FieldSpec::new(m, s)?;
    let big_s = distinguished(s).embed(&f).expect("Q(sqrt s) lies in the field");
    Ok((f, big_s))
}

/// Admissible parameters of a family with `t <= max_t`.
pub fn family_parameters(fam: &CoefficientFamily, max_t: u64) -> Vec<u64> {
    fields_up_to(max_t)
        .into_iter()
        .filter(|f| f.m() == fam.m && !fam.excluded_s.contains(&f.s()))
        .map(|f| f.s())
        .collect()
}

/// Candidate sets of one family member, one entry per lemma part.
pub fn family_sets(
    fam: &CoefficientFamily,
    s: u64,
    budget: u64,
) -> Result<Vec<(String, BTreeSet<AlgebraicNumber>, BTreeSet<AlgebraicNumber>)>> {
    let (f, big_s) = family_field(fam.m, s)?;
    let mut out = Vec::new();
    for part in &fam.parts {
        let mut bound = AlgebraicNumber::one(&f);
        for factor in &part.product {
            let x = if factor == "S" { big_s.clone() } else { parse_el(&f, factor)? };
            bound = &bound * &x;
        }
        let printed: BTreeSet<_> = part.printed.iter().map(|w| parse_el(&f, w)).collect::<Result<_>>()?;
        let got: BTreeSet<_> = squares_below(&bound, budget)?.into_iter().collect();
        out.push((part.product.join(" * "), printed, got));
    }
    Ok(out)
}

/// Admissible `s` must stay inside every printed set; each excluded `s` must
/// leave at least one of them.
pub fn coefficient_sets(fam: &CoefficientFamily, p: &Params) -> Result<Vec<Check>> {
    let params: Vec<u64> = match p.s {
        Some(s) => vec![s],
        None if !p.fields.is_empty() => {
            let picked: Vec<u64> = p.fields.iter().filter(|&&(m, _)| m == fam.m).map(|&(_, s)| s).collect();
            if picked.is_empty() {
                bail!("{} concerns fields with m = {}", fam.id, fam.m);
            }
            picked
        }
        None => {
            let mut v = family_parameters(fam, p.max_t);
            v.extend(fam.excluded_s.iter().copied());
            v.sort_unstable();
            v.dedup();
            v
        }
    };
    let mut out = Vec::new();
    for s in params {
        let (f, _) = family_field(fam.m, s)?;
        let sets = family_sets(fam, s, p.budget)?;
        if fam.excluded_s.contains(&s) {
            let escaping: Vec<String> = sets
                .iter()
                .filter(|(_, printed, got)| !got.is_subset(printed))
                .map(|(label, printed, got)| {
                    format!("{label}: {}", texts(got.difference(printed)).join(", "))
                })
                .collect();
            out.push(Check {
                lemma: fam.id.clone(),
                context: format!("{} (excluded s = {s})", f.describe()),
                expected: vec!["some set leaves its printed list".into()],
                computed: escaping.clone(),
                relation: Relation::Escapes,
                ok: !escaping.is_empty(),
                note: None,
            });
            continue;
        }
        for (k, (label, printed, got)) in sets.iter().enumerate() {
            let mut c = set_check(
                &fam.id,
                format!("{} part {} bound {label}", f.describe(), k + 1),
                printed,
                got,
                Relation::Subset,
            );
            if c.ok && got != printed {
                c.note = Some(format!("strict subset; absent: {}", texts(printed.difference(got)).join(", ")));
            }
            out.push(c);
        }
    }
    Ok(out)
}

/// Escalates every listed diagonal, after checking it against the library's copy.
pub fn table(budget: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for row in &expected().table {
        let f = FieldSpec::new(row.m, row.s)?;
        let listed: Vec<AlgebraicNumber> = row.diagonal.iter().map(|x| parse_el(&f, x)).collect::<Result<_>>()?;
        let ours = table_quadruple(&f).expect("row is built in");
        let ctx = f.describe();
        out.push(fact("table1", &format!("{ctx} diagonal"), texts(&listed).join("; "), texts(&ours).join("; "), listed == ours));
        let run = escalate_quadruple(&ours, budget)?;
        let sizes: Vec<String> = run.rho_sets.iter().map(|v| v.len().to_string()).collect();
        let mut c = fact(
            "table1",
            &format!("{ctx} escalation"),
            "NoSingularMatrix".into(),
            run.verdict.name().into(),
            matches!(run.verdict, Verdict::NoSingularMatrix),
        );
        c.note = Some(format!("{} candidates, pair set sizes {}", run.candidates_examined, sizes.join("/")));
        out.push(c);
    }
    Ok(out)
}

/// The binary form over `Q(sqrt 10)` and the norms used with it.
pub fn binary_form_sqrt10() -> Result<Vec<Check>> {
    let fx = &expected().binary_form_sqrt10;
    let f = FieldSpec::new(fx.field.0, fx.field.1)?;
    let el = |s: &str| parse_el(&f, s);
    let rows: Vec<Vec<AlgebraicNumber>> =
        fx.gram.iter().map(|r| r.iter().map(|x| el(x)).collect::<Result<_>>()).collect::<Result<_>>()?;
    let q = FormMatrix::new(rows)?;
    let dom = SearchDomain::Subfield(Radical::T);
    let lemma = "appendixA";
    let mut out = Vec::new();

    let det = q.det();
    out.push(fact(lemma, "determinant", fx.det.clone(), det.pretty(), det == el(&fx.det)? && q.is_tp_definite()));

    let e: Vec<_> = fx.e.iter().map(|x| el(x)).collect::<Result<_>>()?;
    let v = q.evaluate(&e)?;
    out.push(fact(lemma, "value at e", fx.value_at_e.clone(), v.pretty(), v == el(&fx.value_at_e)?));

    let two = el(&fx.value_at_e)?;
    let reps = represents_all(&q, &two, dom, 1 << 24)?;
    let show = |v: &[AlgebraicNumber]| format!("({})", texts(v).join(", "));
    let got: BTreeSet<String> = reps.iter().map(|v| show(v)).collect();
    let mut want = BTreeSet::new();
    for r in &fx.representations_of_2 {
        let v: Vec<_> = r.iter().map(|x| el(x)).collect::<Result<_>>()?;
        want.insert(show(&v));
    }
    out.push(Check {
        lemma: lemma.into(),
        context: "vectors representing 2".into(),
        expected: want.iter().cloned().collect(),
        computed: got.iter().cloned().collect(),
        relation: Relation::Equal,
        ok: got == want,
        note: None,
    });

    let seven = el(&fx.sum_of_two_squares_misses)?;
    let sum = FormMatrix::diagonal(&[AlgebraicNumber::one(&f), AlgebraicNumber::one(&f)]);
    let by_sum = biquad::represents(&sum, &seven, dom, 1 << 24)?;
    let by_q = biquad::represents(&q, &seven, dom, 1 << 24)?;
    out.push(fact(
        lemma,
        "7 under x^2 + y^2 and under the form",
        "not represented; represented".into(),
        format!(
            "{}; {}",
            if by_sum.is_some() { "represented" } else { "not represented" },
            if by_q.is_some() { "represented" } else { "not represented" }
        ),
        by_sum.is_none() && by_q.is_some(),
    ));

    // gamma = Q(f), beta = B(e, f) = (Q(e + f) - Q(e) - Q(f)) / 2
    let fv: Vec<_> = fx.f.iter().map(|x| el(x)).collect::<Result<_>>()?;
    let gamma = q.evaluate(&fv)?;
    let ef: Vec<_> = e.iter().zip(&fv).map(|(a, b)| a + b).collect();
    let beta = (&(&q.evaluate(&ef)? - &v) - &gamma).div_int(&2.into());
    out.push(fact(
        lemma,
        "gamma and beta",
        format!("{}; {}", fx.gamma, fx.beta),
        format!("{}; {}", gamma.pretty(), beta.pretty()),
        gamma == el(&fx.gamma)? && beta == el(&fx.beta)? && !gamma.is_integral() && gamma.scale(2).is_integral(),
    ));
    let d = &gamma.scale(2) - &beta.square();
    out.push(fact(
        lemma,
        "2 gamma - beta^2",
        fx.two_gamma_minus_beta_squared.clone(),
        d.pretty(),
        d == el(&fx.two_gamma_minus_beta_squared)?,
    ));

    for n in &fx.norms {
        let x = el(&n.element)?;
        let norm = x.norm();
        out.push(fact(
            lemma,
            &format!("norm of {}", n.element),
            n.norm.to_string(),
            norm.to_string(),
            norm == BigRational::from_integer(n.norm.into()),
        ));
    }
    let m = element_m(&FieldSpec::new(10, 11)?);
    let shifted = &m.scale(2) - &AlgebraicNumber::one(m.field());
    out.push(fact(
        lemma,
        "2M - 1 for m = 10",
        "7+2*sqrt(10)".into(),
        shifted.pretty(),
        shifted == AlgebraicNumber::parse(m.field(), "7+2*sqrt(10)")?,
    ));
    Ok(out)
}

fn rule_value(rule: &NonsquareRule, f: &Arc<FieldSpec>) -> AlgebraicNumber {
    let base = if rule.base == "M" { element_m(f) } else { element_s(f) };
    &base.scale(rule.factor) + &AlgebraicNumber::from_int(f, rule.shift)
}

/// Over all fields with `t <= max_t`, the fields where each element is a square.
pub fn nonsquare(ids: &[&str], p: &Params) -> Result<Vec<Check>> {
    let fields = if p.fields.is_empty() { fields_up_to(p.max_t) } else { fields_of(&p.fields)? };
    let mut out = Vec::new();
    for id in ids {
        let rule = expected().nonsquare.iter().find(|r| r.id == *id).expect("fixture lists rule");
        let mut want = Vec::new();
        let mut got = Vec::new();
        for f in &fields {
            let label = format!("({},{})", f.m(), f.s());
            if rule.applies(f) {
                want.push(label.clone());
            }
            if sqrt_in_ring(&rule_value(rule, f)).is_some() {
                got.push(label);
            }
        }
        let ok = want == got;
        let note = (!ok).then(|| {
            let extra: Vec<_> = got.iter().filter(|x| !want.contains(x)).cloned().collect();
            let missing: Vec<_> = want.iter().filter(|x| !got.contains(x)).cloned().collect();
            format!("squares outside the rule: [{}]; rule fields without a root: [{}]", extra.join(", "), missing.join(", "))
        });
        let lemma = if rule.base == "M" { "nonsquareM" } else { "nonsquareS" };
        out.push(Check {
            lemma: lemma.into(),
            context: format!("{} over {} fields", id, fields.len()),
            expected: want,
            computed: got,
            relation: Relation::Equal,
            ok,
            note,
        });
    }
    Ok(out)
}

/// Plain-text rendering; long lists are cut after `limit` entries.
pub fn render_text(checks: &[Check], limit: usize) -> String {
    let cut = |v: &[String]| {
        if v.len() <= limit {
            v.join(", ")
        } else {
            format!("{}, ... ({} total)", v[..limit].join(", "), v.len())
        }
    };
    let mut s = String::new();
    for c in checks {
        s.push_str(&format!("[{}] {}\n", c.lemma, c.context));
        s.push_str(&format!("  expected: {}\n", cut(&c.expected)));
        s.push_str(&format!("  computed: {}\n", cut(&c.computed)));
        s.push_str(&format!("  {}: {}\n", c.relation, if c.ok { "ok" } else { "MISMATCH" }));
        if let Some(n) = &c.note {
            s.push_str(&format!("  note: {n}\n"));
        }
    }
    let bad = checks.iter().filter(|c| !c.ok).count();
    s.push_str(&format!("{} checks, {} mismatches\n", checks.len(), bad));
    s
}
