//! One line per acceptance criterion. Runs without the test harness so the table
//! is always printed.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::collections::BTreeSet;

use biquad::quad::{element_m, element_s, element_t, pell_solvable, quad_data};
use biquad::{
    decompositions, dominated_by, fields_up_to, is_indecomposable, odd_divisor_square_filter, rho_candidates,
    sqrt_in_ring, square_parts, AlgebraicNumber, FieldSpec, Radical, DEFAULT_BUDGET,
};
use biquad_cli::fixtures::expected;
use biquad_cli::verify::{self, family_parameters, family_sets, Params};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;
use support::{El, Fld};

type Outcome = (bool, String);

fn lemmas(ids: &[&str]) -> Outcome {
    let p = Params::default();
    let mut total = 0;
    let mut bad = Vec::new();
    for id in ids {
        let checks = verify::run(id, &p).unwrap();
        total += checks.len();
        bad.extend(checks.into_iter().filter(|c| !c.ok).map(|c| format!("{id}: {}", c.context)));
    }
    (bad.is_empty() && total > 0, format!("{total} checks, {} failing {bad:?}", bad.len()))
}

fn classification() -> Outcome {
    let fields = fields_up_to(500);
    let mut bad: Vec<_> = fields
        .iter()
        .filter(|f| f.basis().to_string() != support::basis_class(f.m(), f.s()))
        .map(|f| (f.m(), f.s()))
        .collect();
    for (m, s, class) in [(2, 3, "B1"), (2, 5, "B2"), (3, 5, "B3"), (5, 13, "B4a"), (21, 33, "B4b")] {
        if FieldSpec::new(m, s).unwrap().basis().to_string() != class {
            bad.push((m, s));
        }
    }
    (bad.is_empty(), format!("{} fields with t <= 500, mismatches {bad:?}", fields.len()))
}

fn distinguished_indecomposables() -> Outcome {
    let mut bad = Vec::new();
    let fields = fields_up_to(300);
    for f in &fields {
        for x in [element_m(f), element_s(f)] {
            if !is_indecomposable(&x, DEFAULT_BUDGET).unwrap() {
                bad.push(format!("{} {}", f.describe(), x.pretty()));
            }
        }
    }
    let f = FieldSpec::new(2, 21).unwrap();
    let x = AlgebraicNumber::parse(&f, "7+sqrt(42)").unwrap();
    let split = !is_indecomposable(&x, DEFAULT_BUDGET).unwrap();
    (bad.is_empty() && split, format!("{} fields, failures {bad:?}, 7+sqrt(42) decomposable: {split}", fields.len()))
}

/// Every admissible parameter stays inside the printed sets, except for one pair
/// missing from the second list of the m = 5 family.
fn coefficient_families() -> Outcome {
    let mut extras: Vec<(String, u64, usize, BTreeSet<String>)> = Vec::new();
    let mut checked = 0;
    let mut stuck = Vec::new();
    for fam in &expected().coefficient_families {
        for s in family_parameters(fam, 300) {
            for (k, (_, printed, got)) in family_sets(fam, s, 1 << 36).unwrap().into_iter().enumerate() {
                checked += 1;
                let extra: BTreeSet<String> = got.difference(&printed).map(|x| x.pretty()).collect();
                if !extra.is_empty() {
                    extras.push((fam.id.clone(), s, k + 1, extra));
                }
            }
        }
        for &s in &fam.excluded_s {
            let sets = family_sets(fam, s, 1 << 36).unwrap();
            if sets.iter().all(|(_, printed, got)| got.is_subset(printed)) {
                stuck.push((fam.id.clone(), s));
            }
        }
    }
    let ok = extras.is_empty() && stuck.is_empty();
    let known = !extras.is_empty()
        && stuck.is_empty()
        && extras.iter().all(|(id, _, part, extra)| {
            let f = FieldSpec::new(5, 11).unwrap();
            let a = AlgebraicNumber::parse(&f, "(3-sqrt(5))/2").unwrap();
            let want: BTreeSet<String> = [a.pretty(), (-&a).pretty()].into();
            id == "5coeff" && *part == 2 && *extra == want
        });
    let summary = match extras.first() {
        Some((id, _, part, extra)) => format!(
            "{checked} sets; {} escape, all {id} part {part} gaining {extra:?}; known omission: {known}",
            extras.len()
        ),
        None => format!("{checked} sets, excluded parameters all escape: {}", stuck.is_empty()),
    };
    assert!(ok || known, "unexpected coefficient mismatch: {extras:?} {stuck:?}");
    (ok, summary)
}

fn is_prime(n: u64) -> bool {
    n > 1 && (2..).take_while(|p| p * p <= n).all(|p| n % p != 0)
}

/// Norms of quadratic units, and the odd-divisor filter against the exact square root.
fn units_and_filter() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bad = Vec::new();
    let mut seen = 0;
    while seen < 200 {
        let n = rng.gen_range(2..=2000u64);
        if !support::squarefree(n) {
            continue;
        }
        seen += 1;
        let d = quad_data(n).unwrap();
        let neg = d.unit_norm == -1;
        // a prime factor 3 mod 4 rules out norm -1
        let blocked = (3..=n).any(|p| n % p == 0 && p % 4 == 3 && is_prime(p));
        let small = (1..=3000i128).any(|y| {
            let v = n as i128 * y * y;
            [v - 1, v - 4].iter().any(|&w| w >= 0 && (w as f64).sqrt().round().powi(2) as i128 == w)
        });
        if neg != pell_solvable(n, -1).unwrap()
            || (d.fundamental_unit.norm() < 0.into()) != neg
            || (blocked && neg)
            || (small && !neg)
        {
            bad.push(n);
        }
    }
    let (mut filtered, mut wrong) = (0, Vec::new());
    for f in fields_up_to(300) {
        for (r, base) in [(Radical::M, element_m(&f)), (Radical::S, element_s(&f)), (Radical::T, element_t(&f))] {
            for k in 1..=6 {
                let x = base.scale(k);
                if !odd_divisor_square_filter(&x, r).unwrap() {
                    filtered += 1;
                    if sqrt_in_ring(&x).is_some() {
                        wrong.push(format!("{} {}", f.describe(), x.pretty()));
                    }
                }
            }
        }
    }
    (
        bad.is_empty() && wrong.is_empty() && filtered > 0,
        format!("200 radicands, bad {bad:?}; {filtered} filtered nonsquares, {} wrong", wrong.len()),
    )
}

fn quarters(v: &[AlgebraicNumber]) -> Vec<[i64; 4]> {
    v.iter().map(|x| x.quarters().unwrap()).collect()
}

fn oracle_instance(m: u64, s: u64, q: [i64; 4], y: [i64; 4]) -> bool {
    let fl = Fld::new(m, s);
    let f = FieldSpec::new(m, s).unwrap();
    let alpha = AlgebraicNumber::from_quarters(&f, q);
    let al = El::from_quarters(&fl, q);
    let below = support::dominated(&fl, q);
    let mut pairs = BTreeSet::new();
    for b in &below {
        let g = al.sub(&El::from_quarters(&fl, *b)).to_quarters(&fl).unwrap();
        if *b != [0; 4] && g != [0; 4] {
            pairs.insert(if *b <= g { (*b, g) } else { (g, *b) });
        }
    }
    let ours: BTreeSet<_> = decompositions(&alpha, false, DEFAULT_BUDGET)
        .unwrap()
        .pairs
        .iter()
        .map(|(x, y)| (x.quarters().unwrap(), y.quarters().unwrap()))
        .collect();
    let squares: BTreeSet<[i64; 4]> = support::squares_under(&fl, &al)
        .iter()
        .map(|w| {
            let e = El::from_quarters(&fl, *w);
            e.mul(&fl, &e).to_quarters(&fl).unwrap()
        })
        .collect();
    let parts: BTreeSet<_> = quarters(&square_parts(&alpha, DEFAULT_BUDGET).unwrap()).into_iter().collect();
    let mut ok = quarters(&dominated_by(&alpha, DEFAULT_BUDGET).unwrap()) == below && ours == pairs && parts == squares;
    // keep the product inside the trace bound
    let prod = al.mul(&fl, &El::from_quarters(&fl, y));
    if 4 * prod.c[0] <= 40 * prod.den {
        let rho = rho_candidates(&alpha, &AlgebraicNumber::from_quarters(&f, y), DEFAULT_BUDGET).unwrap();
        ok &= quarters(&rho) == support::squares_under(&fl, &prod);
    }
    ok
}

fn oracle_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let cases: Vec<_> = (0..50)
        .map(|_| {
            let (m, s) = support::random_field(&mut rng, 150);
            let fl = Fld::new(m, s);
            (m, s, support::random_tp(&mut rng, &fl, 40), support::random_tp(&mut rng, &fl, 6))
        })
        .collect();
    let bad: Vec<_> = cases
        .par_iter()
        .filter(|&&(m, s, q, y)| !oracle_instance(m, s, q, y))
        .map(|(m, s, q, _)| format!("({m},{s}) {q:?}"))
        .collect();
    (bad.is_empty(), format!("50 instances, mismatches {bad:?}"))
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("basis classes", classification),
        ("trivial decompositions of 2, 3, 5", || lemmas(&["trivdecomp-2", "trivdecomp-3", "trivdecomp-5"])),
        ("square parts of 10 and 8", || lemmas(&["10and8"])),
        ("M and S indecomposable", distinguished_indecomposables),
        ("nonsquare multiples of M and S", || lemmas(&["nonsquareM", "nonsquareS"])),
        ("coefficient sets", coefficient_families),
        ("listed quadruples", || lemmas(&["table1"])),
        ("binary form over Q(sqrt 10)", || lemmas(&["appendixA"])),
        ("unit norms and square filter", units_and_filter),
        ("searches against box scans", oracle_suite),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let clock = std::time::Instant::now();
        let (ok, detail) = run();
        let detail = format!("{detail} [{:.1?}]", clock.elapsed());
        println!("{} {:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" }, k + 1);
        if !ok {
            failed.push(k + 1);
        }
    }
    // criterion 6 is red on a known omission, checked inside coefficient_families
    assert_eq!(failed, vec![6], "failing criteria");
}
