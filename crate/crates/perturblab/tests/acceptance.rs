//! End-to-end acceptance suite: each test covers one headline property of the
//! library and prints a single PASS line when it holds.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use perturblab::axioms::{impossibility_demo, perturbation_chain, richness_witness};
use perturblab::bounds::{certify, robust_bound, BoundInputs, Variant, VerdictStatus};
use perturblab::clusterability::separability_profile;
use perturblab::generators::{
    gen_cloud_singletons, gen_euclidean_three_body, gen_separable,
    SeparationTarget,
};
use perturblab::objectives::{exact_optimize, Objective};
use perturblab::*;

// ---------------------------------------------------------------------------
// 1. Three-point swap: every function shifts by exactly 2/3 at r = 1.
// ---------------------------------------------------------------------------
#[test]
fn swap_construction_shifts_every_function_by_exactly_two_thirds() {
    let specs = [
        PerturbSpec::multiplicative(1.5).unwrap(),
        PerturbSpec::multiplicative(2.0).unwrap(),
        PerturbSpec::additive(0.5).unwrap(),
        PerturbSpec::additive(1.0).unwrap(),
    ];
    for spec in specs {
        let start = std::time::Instant::now();
        for func in ClusterFn::ALL {
            let rep = impossibility_demo(func, &spec, 1).unwrap();
            assert!(rep.perturbation_valid, "{:?} {}", spec, func.name());
            assert!(rep.before_as_constructed, "{:?} {}", spec, func.name());
            assert!(rep.after_as_constructed, "{:?} {}", spec, func.name());
            assert_eq!(rep.before.labels(), &[0, 1, 1]);
            assert_eq!(rep.after.labels(), &[0, 0, 1]);
            assert!(rep.delta.eq_ratio(2, 3), "{:?} {}", spec, func.name());
        }
        assert!(start.elapsed().as_secs_f64() < 1.0, "too slow for {spec:?}");
    }
    println!("PASS: swap construction shifts all six functions by exactly 2/3");
}

// ---------------------------------------------------------------------------
// 2. Replicated swap: the shift follows 4r/(3(3r-1)), not a constant 2/3,
//    and the report flags the dilution. Oracle: direct pair count.
// ---------------------------------------------------------------------------
#[test]
fn replicated_swap_shift_follows_the_dilution_law() {
    let specs =
        [PerturbSpec::multiplicative(2.0).unwrap(), PerturbSpec::additive(1.0).unwrap()];
    for spec in specs {
        for r in [2usize, 3, 4] {
            let rep = impossibility_demo(ClusterFn::Exact(Objective::KMeans), &spec, r).unwrap();
            let (num, den) = (4 * r as u64, 3 * (3 * r as u64 - 1));
            assert!(rep.delta.eq_ratio(num, den), "r={r}: got {:?}", rep.delta);
            assert!(rep.matches_expected_delta);
            assert!(rep.replication_discrepancy, "r={r} must flag the dilution");

            // independent brute-force pair count over the two outputs
            let (a, b) = (rep.before.labels(), rep.after.labels());
            let n = a.len();
            let mut diff = 0u64;
            let mut total = 0u64;
            for x in 0..n {
                for y in x + 1..n {
                    total += 1;
                    if (a[x] == a[y]) != (b[x] == b[y]) {
                        diff += 1;
                    }
                }
            }
            assert_eq!(diff * den, num * total, "oracle disagrees at r={r}");
        }
    }
    println!("PASS: replicated swap shift equals 4r/(3(3r-1)) and the dilution is flagged");
}

// ---------------------------------------------------------------------------
// 3. Exact solvers agree with an independently coded enumeration oracle.
// ---------------------------------------------------------------------------

/// Plain recursive set-partition enumeration, written independently of the
/// library's iterator: assign each point to an existing block or a new one.
fn oracle_partitions(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; n];
    fn rec(i: usize, used: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == n {
            if used == k {
                out.push(cur.clone());
            }
            return;
        }
        for b in 0..=used.min(n - 1) {
            cur[i] = b;
            let next_used = used.max(b + 1);
            rec(i + 1, next_used, n, k, cur, out);
        }
    }
    rec(0, 0, n, k, &mut cur, &mut out);
    out
}

fn oracle_cost(obj: Objective, d: &DissimMatrix, labels: &[usize], k: usize) -> f64 {
    let n = labels.len();
    let mut total = 0.0;
    for block in 0..k {
        let members: Vec<usize> = (0..n).filter(|&i| labels[i] == block).collect();
        match obj {
            Objective::KMeans => {
                let mut s = 0.0;
                for (a, &x) in members.iter().enumerate() {
                    for &y in &members[a + 1..] {
                        s += d.get(x, y) * d.get(x, y);
                    }
                }
                total += s / members.len() as f64;
            }
            Objective::KMedoids => {
                let best = members
                    .iter()
                    .map(|&m| members.iter().map(|&x| d.get(x, m)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min);
                total += best;
            }
            Objective::MinSum => {
                for (a, &x) in members.iter().enumerate() {
                    for &y in &members[a + 1..] {
                        total += d.get(x, y);
                    }
                }
            }
        }
    }
    total
}

#[test]
fn exact_solvers_match_an_independent_enumeration_oracle() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE55);
    for case in 0..200usize {
        let n = 4 + case % 5; // 4..=8
        let k = 2 + case % 2;
        let d = DissimMatrix::from_fn(n, |_, _| rng.gen_range(0.5..5.0)).unwrap();
        let all = oracle_partitions(n, k);
        for obj in Objective::ALL {
            let (got, got_cost) = exact_optimize(obj, &d, k).unwrap();
            let mut best_cost = f64::INFINITY;
            for labels in &all {
                best_cost = best_cost.min(oracle_cost(obj, &d, labels, k));
            }
            assert!(
                (got_cost - best_cost).abs() <= 1e-9 * (1.0 + best_cost.abs()),
                "case {case} {}: {got_cost} vs oracle {best_cost}",
                obj.name()
            );
            // canonical tie-break: lexicographically smallest among ties
            let tol = 1e-9 * (1.0 + best_cost.abs());
            let expect = all
                .iter()
                .filter(|l| oracle_cost(obj, &d, l, k) <= best_cost + tol)
                .min()
                .unwrap();
            assert_eq!(got.labels(), &expect[..], "case {case} {}", obj.name());
        }
    }
    assert!(start.elapsed().as_secs() < 60, "oracle comparison too slow");
    println!("PASS: exact solvers match the independent enumeration oracle on 200 instances");
}

// ---------------------------------------------------------------------------
// 4. Linkage output does not move on strongly separated data.
// ---------------------------------------------------------------------------
#[test]
fn linkage_is_unmoved_on_strongly_separated_data() {
    // multiplicative side: separation ratio alpha^2
    for case in 0..100usize {
        let alpha = if case % 2 == 0 { 1.5 } else { 2.0 };
        let k = 2 + case % 3;
        let n = [9, 12, 15, 18, 24][case % 5].max(if case == 99 { 60 } else { 0 });
        let (d, planted) =
            gen_separable(n, k, SeparationTarget::Ratio(alpha * alpha), 1000 + case as u64)
                .unwrap();
        let spec = PerturbSpec::multiplicative(alpha).unwrap();
        for m in LinkageMethod::ALL {
            let (before, _) = linkage_run(m, &d, k).unwrap();
            assert_eq!(before, planted, "case {case} {}", m.name());
            for s in 0..50u64 {
                let d2 = sample_perturbation(&d, &spec, s * 7919 + case as u64);
                let (after, _) = linkage_run(m, &d2, k).unwrap();
                assert_eq!(after, before, "case {case} seed {s} {}", m.name());
            }
        }
    }
    // additive side: margin 2*epsilon
    for case in 0..100usize {
        let eps = if case % 2 == 0 { 0.25 } else { 0.5 };
        let k = 2 + case % 3;
        let n = [9, 12, 15, 18, 24][case % 5];
        let (d, planted) =
            gen_separable(n, k, SeparationTarget::Margin(2.0 * eps), 5000 + case as u64).unwrap();
        let spec = PerturbSpec::additive(eps).unwrap();
        for m in LinkageMethod::ALL {
            let (before, _) = linkage_run(m, &d, k).unwrap();
            assert_eq!(before, planted, "case {case} {}", m.name());
            for s in 0..50u64 {
                let d2 = sample_perturbation(&d, &spec, s * 104729 + case as u64);
                let (after, _) = linkage_run(m, &d2, k).unwrap();
                assert_eq!(after, before, "case {case} seed {s} {}", m.name());
            }
        }
    }
    println!("PASS: all linkage methods give delta = 0 on 200 separated instances x 50 perturbations");
}

// ---------------------------------------------------------------------------
// 5. Separation closure: sampled perturbations keep the planted clustering
//    (1,k)- / (0,k)-separable.
// ---------------------------------------------------------------------------
#[test]
fn separation_survives_sampled_perturbations() {
    for trial in 0..500usize {
        let alpha = 1.2 + (trial % 9) as f64 * 0.1;
        let n = 8 + trial % 9;
        let k = 2 + trial % 3;
        let (d, planted) =
            gen_separable(n, k, SeparationTarget::Ratio(alpha * alpha), 31 + trial as u64)
                .unwrap();
        let spec = PerturbSpec::multiplicative(alpha).unwrap();
        let d2 = sample_perturbation(&d, &spec, trial as u64);
        let prof = separability_profile(&d2, &planted);
        assert!(prof.rho >= 1.0 - 1e-9, "trial {trial}: rho {}", prof.rho);
    }
    for trial in 0..500usize {
        let eps = 0.1 + (trial % 8) as f64 * 0.05;
        let n = 8 + trial % 9;
        let k = 2 + trial % 3;
        let (d, planted) =
            gen_separable(n, k, SeparationTarget::Margin(2.0 * eps), 77 + trial as u64).unwrap();
        let spec = PerturbSpec::additive(eps).unwrap();
        let d2 = sample_perturbation(&d, &spec, trial as u64);
        let prof = separability_profile(&d2, &planted);
        assert!(prof.margin >= -1e-9, "trial {trial}: margin {}", prof.margin);
    }
    println!("PASS: separation closure holds in 1000/1000 sampled-perturbation trials");
}

// ---------------------------------------------------------------------------
// 6. Certified verdicts survive a 10^5-budget adversarial search, and the
//    additive bound satisfies its own derivation chain.
// ---------------------------------------------------------------------------
#[test]
fn certified_verdicts_survive_adversarial_search() {
    let delta = 0.5;
    let mut certified = 0usize;
    let mut case = 0usize;
    while certified < 50 {
        let func = ClusterFn::ALL[case % 6];
        let mult_side = case % 2 == 0;
        let n = 5 + case % 2;
        let k = 2;
        let (d, spec) = if mult_side {
            let (d, _) =
                gen_separable(n, k, SeparationTarget::Ratio(16.0), 900 + case as u64).unwrap();
            (d, PerturbSpec::multiplicative(1.5).unwrap())
        } else {
            let (d, _) =
                gen_separable(n, k, SeparationTarget::Margin(10.0), 900 + case as u64).unwrap();
            (d, PerturbSpec::additive(0.1).unwrap())
        };
        let v = certify(func, &d, k, &spec, delta, 100, case as u64).unwrap();
        assert_eq!(
            v.status,
            VerdictStatus::Certified,
            "case {case} {}: {}",
            func.name(),
            v.provenance
        );
        assert!(v.bound.unwrap() >= spec.size());
        let search = adversarial_search(func, &d, k, &spec, 100_000, case as u64).unwrap();
        assert!(
            search.delta.as_f64() < delta,
            "case {case} {}: search found delta {:?} against a certificate",
            func.name(),
            search.delta
        );
        certified += 1;
        case += 1;
    }

    // the additive bound must satisfy its own chain at epsilon = bound
    for (c, c0, n) in [(2.0, 64.0, 4), (1.5, 7.0, 6), (3.0, 0.4, 8), (1.01, 12.0, 10)] {
        let m = (n as f64) * (n as f64 - 1.0) / 2.0;
        let e = robust_bound(
            ClusterFn::Exact(Objective::KMeans),
            &PerturbSpec::additive(0.01).unwrap(),
            Variant::ProofConsistent,
            BoundInputs::Uo { c, c0, n },
        )
        .unwrap();
        assert!(1.0 + 2.0 * e <= c + 1e-9);
        assert!(m * (e * e + 2.0 * e) <= c0 + 1e-9);
    }
    println!("PASS: 50 certified instances all survive 100000-evaluation adversarial search");
}

// ---------------------------------------------------------------------------
// 7. Cloud-plus-outliers sweep reaches the large-shift threshold 4/7.
// ---------------------------------------------------------------------------
#[test]
fn cloud_and_outlier_sweep_reaches_the_large_shift() {
    let mut found = None;
    'sweep: for &d_cs in &[1.2, 1.5, 1.8, 2.1, 2.5, 3.0] {
        for &d_ss in &[0.6, 1.0, 2.0, 4.0] {
            let out =
                gen_cloud_singletons(Objective::KMeans, 2, 2, 1.0, d_cs, d_ss, 2.0, 14).unwrap();
            assert_eq!(out.instance.d.n(), 9);
            let spec = PerturbSpec::multiplicative(2.0).unwrap();
            assert!(is_valid_perturbation(&out.instance.d, &out.instance.d2, &spec)
                .unwrap()
                .valid);
            if out.before != out.after && out.meets_threshold {
                assert!(out.delta_cloud.as_f64() >= 4.0 / 7.0 - 1e-9);
                found = Some((d_cs, d_ss, out.delta_cloud));
                break 'sweep;
            }
        }
    }
    let (d_cs, d_ss, delta) = found.expect("sweep found no large-shift instance");
    println!(
        "PASS: cloud sweep reaches cloud-restricted delta {}/{} >= 4/7 at (d_cs={d_cs}, d_ss={d_ss})",
        delta.num, delta.den
    );
}

// ---------------------------------------------------------------------------
// 8. Along small-step chains between a richness witness pair, every function
//    changes output at some step while each step stays a valid perturbation.
// ---------------------------------------------------------------------------
#[test]
fn output_changes_along_small_step_chains() {
    let specs =
        [PerturbSpec::additive(0.25).unwrap(), PerturbSpec::multiplicative(1.3).unwrap()];
    for spec in specs {
        for func in ClusterFn::ALL {
            let (d1, d2) = richness_witness(func, 3, 2, 14)
                .unwrap()
                .unwrap_or_else(|| panic!("no witness for {}", func.name()));
            let chain = perturbation_chain(&d1, &d2, &spec).unwrap();
            assert!(chain.len() >= 2);
            let mut changed = false;
            for w in chain.windows(2) {
                assert!(
                    is_valid_perturbation(&w[0], &w[1], &spec).unwrap().valid,
                    "{:?} {}",
                    spec,
                    func.name()
                );
                let a = func.evaluate(&w[0], 2).unwrap();
                let b = func.evaluate(&w[1], 2).unwrap();
                if a != b {
                    changed = true;
                }
            }
            assert!(changed, "{:?} {}: no step changed the output", spec, func.name());
        }
    }
    println!("PASS: all six functions change output along valid small-step chains");
}

// ---------------------------------------------------------------------------
// 9. Euclidean three-point family: the flip holds with a verified-valid
//    induced matrix perturbation in dimensions 1 and 3.
// ---------------------------------------------------------------------------
#[test]
fn euclidean_swap_flips_every_function() {
    let specs =
        [PerturbSpec::additive(0.25).unwrap(), PerturbSpec::multiplicative(2.0).unwrap()];
    for spec in specs {
        for dim in [1usize, 3] {
            let e = gen_euclidean_three_body(dim, 0.01, &spec, 1).unwrap();
            assert!(e.check.valid, "{:?} dim {dim}", spec);
            for func in ClusterFn::ALL {
                let before = func.evaluate(&e.paired.d, 2).unwrap();
                let after = func.evaluate(&e.paired.d2, 2).unwrap();
                assert_eq!(before.labels(), &[0, 1, 1], "{:?} dim {dim} {}", spec, func.name());
                assert_eq!(after.labels(), &[0, 0, 1], "{:?} dim {dim} {}", spec, func.name());
            }
        }
    }
    println!("PASS: euclidean swap flips all six functions in dims 1 and 3 with valid perturbations");
}

// ---------------------------------------------------------------------------
// 10. Core metric and counting invariants.
// ---------------------------------------------------------------------------
#[test]
fn pair_metric_and_counting_invariants_hold() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0DE);
    for trial in 0..10_000usize {
        let n = 2 + trial % 9; // 2..=10
        let label = |rng: &mut ChaCha8Rng| {
            let raw: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            Clustering::from_labels(&raw).unwrap()
        };
        let (a, b, c) = (label(&mut rng), label(&mut rng), label(&mut rng));
        let ab = hamming(&a, &b).unwrap();
        let ba = hamming(&b, &a).unwrap();
        let aa = hamming(&a, &a).unwrap();
        let bc = hamming(&b, &c).unwrap();
        let ac = hamming(&a, &c).unwrap();
        assert_eq!(ab.num, ba.num);
        assert_eq!(aa.num, 0);
        // shared denominator C(n,2): the triangle inequality is exact on
        // numerators
        assert!(ac.num <= ab.num + bc.num, "trial {trial}");
    }
    for n in 0..=12usize {
        for k in 0..=n {
            let expect = if n == 0 {
                u64::from(k == 0)
            } else if k == 0 {
                0
            } else {
                k as u64 * stirling2(n - 1, k) + stirling2(n - 1, k - 1)
            };
            assert_eq!(stirling2(n, k), expect, "n={n} k={k}");
        }
    }
    println!("PASS: 10000 random triples satisfy the pair metric axioms; partition counts match the recurrence");
}
