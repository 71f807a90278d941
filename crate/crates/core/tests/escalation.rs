use std::sync::Arc;

use biquad::forms::{represents, table_quadruple, FormMatrix, SearchDomain, TABLE_ROWS};
use biquad::quad::element_s;
use biquad::{escalate_quadruple, witness_quadruple, AlgebraicNumber, FieldSpec, Radical, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn el(f: &Arc<FieldSpec>, s: &str) -> AlgebraicNumber {
    AlgebraicNumber::parse(f, s).unwrap()
}

#[test]
fn listed_quadruples_admit_no_singular_matrix() {
    for (m, s, _) in TABLE_ROWS {
        let f = FieldSpec::new(m, s).unwrap();
        let d = table_quadruple(&f).unwrap();
        for x in &d {
            assert!(x.is_integral() && x.is_totally_positive(), "{}", x.pretty());
        }
        let run = escalate_quadruple(&d, 1 << 32).unwrap();
        assert!(matches!(run.verdict, Verdict::NoSingularMatrix), "({m},{s})");
        for (k, set) in run.rho_sets.iter().enumerate() {
            let (i, j) = biquad::forms::PAIRS[k];
            for r in set {
                assert!((&(&d[i] * &d[j]) - &r.square()).is_tp_or_zero());
            }
        }
    }
}

/// With diagonal `1, 2 + sqrt 2, 3, S` only the last entry leaves `Q(sqrt 2)`, so
/// `det G = Delta S + (element of Q(sqrt 2))`; a zero determinant needs `Delta = 0`.
#[test]
fn leading_minor_never_vanishes_for_two_family() {
    for s in [23u64, 31, 37, 41, 43, 47, 53, 59, 61, 67] {
        let f = FieldSpec::new(2, s).unwrap();
        let w = witness_quadruple(&f).unwrap();
        let d = &w.diagonal;
        assert_eq!(d[3], element_s(&f));
        let run = escalate_quadruple(d, 1 << 30).unwrap();
        assert!(matches!(run.verdict, Verdict::NoSingularMatrix), "s = {s}");
        let sets = &run.rho_sets;
        for p12 in &sets[0] {
            for p13 in &sets[1] {
                for p23 in &sets[3] {
                    let lead = FormMatrix::new(vec![
                        vec![d[0].clone(), p12.clone(), p13.clone()],
                        vec![p12.clone(), d[1].clone(), p23.clone()],
                        vec![p13.clone(), p23.clone(), d[2].clone()],
                    ])
                    .unwrap();
                    let delta = lead.det();
                    assert!(!delta.is_zero() && delta.in_subfield(Radical::M));
                    for p14 in &sets[2] {
                        for p24 in &sets[4] {
                            for p34 in &sets[5] {
                                let g = FormMatrix::new(vec![
                                    vec![d[0].clone(), p12.clone(), p13.clone(), p14.clone()],
                                    vec![p12.clone(), d[1].clone(), p23.clone(), p24.clone()],
                                    vec![p13.clone(), p23.clone(), d[2].clone(), p34.clone()],
                                    vec![p14.clone(), p24.clone(), p34.clone(), d[3].clone()],
                                ])
                                .unwrap();
                                let rest = &g.det() - &(&delta * &d[3]);
                                assert!(rest.in_subfield(Radical::M) || rest.is_rational());
                            }
                        }
                    }
                }
            }
        }
    }
}

fn random_entry(rng: &mut impl Rng, f: &Arc<FieldSpec>) -> AlgebraicNumber {
    let b = f.integral_basis();
    let mut x = AlgebraicNumber::zero(f);
    for e in b.iter() {
        x = &x + &e.scale(rng.gen_range(-1..=1));
    }
    x
}

/// No sampled ternary form represents all four entries of a certified quadruple.
#[test]
fn sampled_ternary_forms_miss_a_listed_entry() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (m, s) in [(2u64, 3u64), (5, 13)] {
        let f = FieldSpec::new(m, s).unwrap();
        let d = table_quadruple(&f).unwrap();
        let (mut tried, mut drawn, mut partial) = (0, 0, 0);
        while tried < 25 {
            drawn += 1;
            assert!(drawn < 20_000, "sampler starved");
            let mut rows = vec![vec![AlgebraicNumber::zero(&f); 3]; 3];
            for i in 0..3 {
                for j in i..3 {
                    let x = if i == j {
                        let b = &f.integral_basis()[rng.gen_range(0..4)];
                        &b.square() + &AlgebraicNumber::from_int(&f, rng.gen_range(0..=3))
                    } else if rng.gen_bool(0.5) {
                        random_entry(&mut rng, &f)
                    } else {
                        AlgebraicNumber::zero(&f)
                    };
                    rows[i][j] = x.clone();
                    rows[j][i] = x;
                }
            }
            let q = FormMatrix::new(rows).unwrap();
            if !q.is_tp_definite() || (0..3).any(|i| q.entry(i, i).trace() > num_rational::BigRational::from_integer(20.into())) {
                continue;
            }
            tried += 1;
            let hits = d.iter().filter(|x| represents(&q, x, SearchDomain::Full, 1 << 26).unwrap().is_some()).count();
            assert!(hits < 4);
            partial += hits;
        }
        assert!(partial > 0);
    }
    let f = FieldSpec::new(2, 3).unwrap();
    // the sum of three squares represents 1, 2 and 3 but not every listed entry
    let sum = FormMatrix::diagonal(&[el(&f, "1"), el(&f, "1"), el(&f, "1")]);
    assert!(represents(&sum, &el(&f, "3"), SearchDomain::Full, 1 << 26).unwrap().is_some());
}
