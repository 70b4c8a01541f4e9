use proptest::prelude::*;
use secant_scope::binary_forms::{DivisorP1, PointP1};
use secant_scope::gonality::{
    check_theorem_hypotheses, clifford_trichotomy, genus_subcanonical, gonality_from_secants, CliffordCase,
    TheoremMode,
};
use secant_scope::line::LineP3;
use secant_scope::scalar::Scalar;
use secant_scope::strata::{conditions_imposed, expected_dims, AlignedScheme, FamilyParams};
use secant_scope::Rational;

fn q(n: i64) -> Rational {
    Rational::from_i64(n)
}

fn distinct_points(xs: &[i64], fat: bool) -> DivisorP1<Rational> {
    let mut xs = xs.to_vec();
    xs.sort();
    xs.dedup();
    DivisorP1::new(
        xs.into_iter()
            .enumerate()
            .map(|(i, x)| (PointP1::affine(q(x)), if fat && i == 0 { 2 } else { 1 }))
            .collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn aligned_scheme_imposes_min_conditions(
        p in prop::array::uniform4(-4i64..=4),
        r in prop::array::uniform4(-4i64..=4),
        xs in prop::collection::vec(-30i64..=30, 2..=8),
        fat: bool,
        m in 1usize..=6,
    ) {
        let line = LineP3::from_points(p.map(q), r.map(q));
        prop_assume!(line.is_ok());
        let divisor = distinct_points(&xs, fat);
        let k = divisor.degree();
        let z = AlignedScheme { line: line.unwrap(), divisor };
        prop_assert_eq!(conditions_imposed(&z, m).unwrap(), k.min(m + 1));
    }

    #[test]
    fn trichotomy_cases(l in 3usize..=12, extra in 4usize..=60) {
        let dc = l + extra;
        let gon = gonality_from_secants(dc, l).unwrap();
        let (cl, case) = clifford_trichotomy(dc, l).unwrap();
        let g3 = case == CliffordCase::GonMinus3;
        prop_assert!(cl + 3 == gon || cl + 2 == gon);
        prop_assert_eq!(g3, l == 3);
        prop_assert_eq!(g3, cl + 3 == gon);
        if g3 {
            prop_assert_eq!(cl, dc - 6);
        }
    }

    #[test]
    fn gonality_strictly_decreases_in_l(dc in 5usize..=80, l in 2usize..=70) {
        prop_assume!(l + 2 < dc);
        prop_assert!(gonality_from_secants(dc, l + 1).unwrap() < gonality_from_secants(dc, l).unwrap());
    }

    #[test]
    fn subcanonical_genus_of_complete_intersections(a in 1i64..=12, b in 1i64..=12) {
        let (a, b) = (a.min(b), a.max(b));
        let g = genus_subcanonical(a + b - 4, (a * b) as usize).unwrap();
        prop_assert_eq!(2 * g - 2, a * b * (a + b - 4));
    }

    #[test]
    fn rational_dims_decrease_in_k(d in 6usize..=20, k in 4usize..=18) {
        prop_assume!(k + 2 <= d);
        let dim = |k| {
            expected_dims(FamilyParams::Rational { d, k }).unwrap()
                .into_iter().find(|r| r.stratum.starts_with('H')).unwrap().dim
        };
        prop_assert!(dim(k + 1) < dim(k));
    }

    #[test]
    fn hypotheses_overall_is_conjunction(alpha in 1i64..=20, dc in 4usize..=200, p_off in 0i64..=3, f0 in 1i64..=10, span in 0i64..=10) {
        let p = alpha - p_off;
        let s = check_theorem_hypotheses(alpha, dc, TheoremMode::Thm1_4 { p }, f0..=f0 + span, None).unwrap();
        for r in &s.reports {
            prop_assert_eq!(r.overall, r.cond_b && r.cond_c && r.cond_d);
            prop_assert_eq!(r.cond_c, r.cond_c_s.is_some());
        }
        prop_assert_eq!(s.overall, s.reports.iter().any(|r| r.overall));
        let first = s.reports.iter().find(|r| r.overall).map(|r| (r.f, r.cond_c_s.unwrap()));
        prop_assert_eq!(s.witness, first);
    }
}
