use std::collections::BTreeSet;

use proptest::prelude::*;

use zgrade::freealg::{pi_d, GradedPolynomial};
use zgrade::grading::{FiniteModel, GradingSpec, UpperIndex};
use zgrade::support::{support_contains, SupportQueryResult};
use zgrade::verify::{is_graded_identity, support_bruteforce, Scope};

fn arb_upper() -> impl Strategy<Value = UpperIndex> {
    prop_oneof![
        (0u64..4).prop_map(UpperIndex::Finite),
        Just(UpperIndex::Infinity)
    ]
}

fn arb_spec() -> impl Strategy<Value = GradingSpec> {
    (
        prop::collection::btree_set(-8i64..=8, 1..=3),
        prop::collection::vec(arb_upper(), 3),
    )
        .prop_map(|(lower, upper)| {
            let lower: Vec<i64> = lower.into_iter().collect();
            let upper = upper[..lower.len()].to_vec();
            GradingSpec::new(lower, upper).unwrap()
        })
}

/// Sums reachable with coefficients up to `cap` (and the block limits).
fn reachable(spec: &GradingSpec, cap: u64) -> BTreeSet<i64> {
    let mut sums = BTreeSet::from([0i64]);
    for (r, u) in spec.lower().iter().zip(spec.upper()) {
        let top = u.capped(cap) as i64;
        sums = sums
            .iter()
            .flat_map(|s| (0..=top).map(move |t| s + t * r))
            .collect();
    }
    sums
}

proptest! {
    #[test]
    fn witnesses_are_valid_and_no_answers_are_sound(spec in arb_spec(), z in -30i64..=30) {
        match support_contains(&spec, z, 12) {
            SupportQueryResult::Yes { witness } => {
                let sum: i64 = witness.iter().zip(spec.lower()).map(|(&a, &r)| a as i64 * r).sum();
                prop_assert_eq!(sum, z);
                for (a, u) in witness.iter().zip(spec.upper()) {
                    prop_assert!(u.at_least(*a));
                }
            }
            SupportQueryResult::ExactNo { .. } => {
                prop_assert!(!reachable(&spec, 60).contains(&z));
            }
            SupportQueryResult::NotFoundWithinBound => {
                prop_assert!(!reachable(&spec, 12).contains(&z));
            }
        }
    }

    #[test]
    fn model_degrees_lie_in_support(spec in arb_spec(), counts in prop::collection::vec(0usize..3, 3)) {
        let counts: Vec<usize> = counts[..spec.num_blocks()]
            .iter()
            .zip(spec.upper())
            .map(|(&c, u)| u.capped(c as u64) as usize)
            .collect();
        let model = FiniteModel::build(spec.clone(), counts).unwrap();
        for z in support_bruteforce(&model, 6) {
            prop_assert!(support_contains(&spec, z, 12).is_yes());
        }
    }

    #[test]
    fn quotient_reading_refutes_at_least_as_often(g1 in -1i64..=1, g2 in -1i64..=1, d in 1i64..=3) {
        let spec = GradingSpec::new(vec![-1, 0, 1], vec![UpperIndex::Infinity, UpperIndex::Finite(2), UpperIndex::Infinity]).unwrap();
        let model = FiniteModel::build(spec, vec![3, 2, 3]).unwrap();
        let f = GradedPolynomial::parse(&format!("[x1@{g1}, x2@{g2}]")).unwrap();
        let scope = Scope::default();
        let integral = is_graded_identity(&f, &model, &scope).unwrap();
        let quotient = is_graded_identity(&pi_d(&f, d).unwrap(), &model, &scope).unwrap();
        // every Z-admissible substitution is also Z_d-admissible
        prop_assert!(integral.holds() || !quotient.holds());
    }
}
