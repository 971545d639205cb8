//! Property-based checks of the core combinatorial and numeric invariants.

use proptest::prelude::*;

use perturblab::objectives::{exact_optimize_seq, Objective};
use perturblab::partitions::visit_k_partitions;
use perturblab::*;

fn labels_strategy(n: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..n, n)
}

fn matrix_strategy(n: usize) -> impl Strategy<Value = DissimMatrix> {
    prop::collection::vec(0.1f64..10.0, n * (n - 1) / 2)
        .prop_map(move |upper| DissimMatrix::from_upper(n, upper).unwrap())
}

proptest! {
    #[test]
    fn hamming_is_a_pseudometric(
        a in labels_strategy(8),
        b in labels_strategy(8),
        c in labels_strategy(8),
    ) {
        let (a, b, c) = (
            Clustering::from_labels(&a).unwrap(),
            Clustering::from_labels(&b).unwrap(),
            Clustering::from_labels(&c).unwrap(),
        );
        let ab = hamming(&a, &b).unwrap();
        let ba = hamming(&b, &a).unwrap();
        let aa = hamming(&a, &a).unwrap();
        let bc = hamming(&b, &c).unwrap();
        let ac = hamming(&a, &c).unwrap();
        prop_assert_eq!(ab.num, ba.num);
        prop_assert_eq!(aa.num, 0);
        // all three share the denominator C(8,2), so the triangle
        // inequality holds exactly on numerators
        prop_assert!(ac.num <= ab.num + bc.num);
    }

    #[test]
    fn canonicalization_is_idempotent(raw in labels_strategy(9)) {
        let once = Clustering::from_labels(&raw).unwrap();
        let twice = Clustering::from_labels(once.labels()).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn enumeration_count_matches_stirling(n in 1usize..8, k in 1usize..8) {
        prop_assume!(k <= n);
        let mut count = 0u64;
        visit_k_partitions(n, k, 8, |_| count += 1).unwrap();
        prop_assert_eq!(count, stirling2(n, k));
    }

    #[test]
    fn replicate_then_restrict_roundtrips(d in matrix_strategy(6), r in 1usize..4) {
        let (rep, origin) = d.replicate(r);
        // keep one copy of each original point
        let keep: Vec<usize> = (0..6).map(|p| p * r).collect();
        let back = rep.restrict(&keep);
        for (i, j, v) in d.pairs() {
            prop_assert_eq!(back.get(i, j), v);
        }
        for (idx, &o) in origin.iter().enumerate() {
            prop_assert_eq!(o, idx / r);
        }
    }

    #[test]
    fn sampled_perturbations_are_valid(
        d in matrix_strategy(7),
        seed in any::<u64>(),
        alpha in 1.01f64..3.0,
        eps in 0.01f64..2.0,
    ) {
        for spec in [
            PerturbSpec::multiplicative(alpha).unwrap(),
            PerturbSpec::additive(eps).unwrap(),
        ] {
            let s = sample_perturbation(&d, &spec, seed);
            prop_assert!(is_valid_perturbation(&d, &s, &spec).unwrap().valid);
        }
    }

    #[test]
    fn parallel_and_sequential_optimizers_agree(
        d in matrix_strategy(7),
        k in 2usize..4,
    ) {
        for obj in Objective::ALL {
            let (cp, costp) = exact_optimize(obj, &d, k).unwrap();
            let (cs, costs) = exact_optimize_seq(obj, &d, k, 7).unwrap();
            prop_assert_eq!(cp, cs);
            prop_assert!((costp - costs).abs() <= 1e-9 * (1.0 + costp.abs()));
        }
    }

    #[test]
    fn optimum_cost_is_minimal(d in matrix_strategy(6), raw in labels_strategy(6)) {
        let other = Clustering::from_labels(&raw).unwrap();
        for obj in Objective::ALL {
            let (_, best) = exact_optimize(obj, &d, other.k()).unwrap();
            prop_assert!(best <= obj.cost(&d, &other) + 1e-9);
        }
    }

    #[test]
    fn refinement_implies_smaller_or_equal_k(raw in labels_strategy(8)) {
        let coarse = Clustering::from_labels(&raw).unwrap();
        let fine = Clustering::singletons(8);
        prop_assert!(is_refinement(&fine, &coarse).unwrap());
        if coarse.k() > 1 {
            prop_assert!(coarse.k() == 1 || !is_refinement(&coarse, &fine).unwrap() || coarse.k() == 8);
        }
    }
}

#[test]
fn stirling_recurrence_holds_to_twelve() {
    for n in 2..=12usize {
        for k in 1..=n {
            let expect = k as u64 * stirling2(n - 1, k) + stirling2(n - 1, k - 1);
            assert_eq!(stirling2(n, k), expect, "n={n} k={k}");
        }
    }
}
