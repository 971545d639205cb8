//! Instance families used by the robustness demonstrations: the
//! three-body/replication pair, random strictly separable data, the
//! cloud-plus-singletons pair, and the Euclidean three-point family.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::clusterability::separability_profile;
use crate::clustering::{hamming, Clustering, PairFraction};
use crate::error::{Error, Result};
use crate::matrix::DissimMatrix;
use crate::objectives::{exact_optimize_capped, Objective};
use crate::perturb::{is_valid_perturbation, PerturbCheck, PerturbSpec};

/// A base instance together with a valid perturbation of it and the
/// clusterings the construction forces before and after.
#[derive(Debug, Clone)]
pub struct PairedInstance {
    pub d: DissimMatrix,
    pub d2: DissimMatrix,
    pub spec: PerturbSpec,
    pub expected_before: Clustering,
    pub expected_after: Clustering,
    /// Construction parameters, for reports.
    pub notes: String,
}

/// The three-point swap construction, replicated `r` times.
///
/// Points are ordered a, b, c; replica `p*r + t` copies point `p`. The base
/// instance has the closest pair at (b,c); the perturbation moves it to
/// (a,b) while keeping every entry inside its admissible interval, so any
/// function obeying the three-body rule and replication invariance must
/// switch from {B u C, A} to {A u B, C}.
pub fn gen_three_body(spec: &PerturbSpec, r: usize) -> Result<PairedInstance> {
    assert!(r >= 1);
    // upper triangle order: (ab, ac, bc)
    let (before, after) = match spec {
        PerturbSpec::Multiplicative { alpha } => {
            (vec![*alpha, alpha + 1.0, 1.0], vec![1.0, alpha + 1.0, *alpha])
        }
        PerturbSpec::Additive { epsilon } => (
            vec![1.0 + epsilon / 2.0, 1.0 + epsilon, 1.0],
            vec![1.0, 1.0 + epsilon, 1.0 + epsilon / 2.0],
        ),
    };
    let base = DissimMatrix::from_upper(3, before)?;
    let pert = DissimMatrix::from_upper(3, after)?;
    let (d, origin) = base.replicate(r);
    let (d2, _) = pert.replicate(r);
    let expected_before = Clustering::from_labels(&[0, 1, 1])?.lift(&origin);
    let expected_after = Clustering::from_labels(&[0, 0, 1])?.lift(&origin);
    let check = is_valid_perturbation(&d, &d2, spec)?;
    debug_assert!(check.valid);
    Ok(PairedInstance {
        d,
        d2,
        spec: *spec,
        expected_before,
        expected_after,
        notes: format!("three-body swap, r={r}"),
    })
}

/// Separation target for planted instances: a multiplicative ratio or an
/// additive margin.
#[derive(Debug, Clone, Copy)]
pub enum SeparationTarget {
    Ratio(f64),
    Margin(f64),
}

/// Plant a balanced strictly separable instance: in-block distances uniform
/// in [0.5, 1], cross-block distances shifted past the requested separation.
/// The returned instance is re-verified by `separability_profile`.
pub fn gen_separable(
    n: usize,
    k: usize,
    target: SeparationTarget,
    seed: u64,
) -> Result<(DissimMatrix, Clustering)> {
    if k < 1 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    match target {
        SeparationTarget::Ratio(rho) if rho <= 1.0 => {
            return Err(Error::InvalidSpec { reason: format!("need rho > 1, got {rho}") })
        }
        SeparationTarget::Margin(m) if m <= 0.0 => {
            return Err(Error::InvalidSpec { reason: format!("need margin > 0, got {m}") })
        }
        _ => {}
    }
    // balanced contiguous blocks: the first n % k blocks get one extra point
    let mut labels = Vec::with_capacity(n);
    let (base, extra) = (n / k, n % k);
    for block in 0..k {
        let size = base + usize::from(block < extra);
        labels.extend(std::iter::repeat(block).take(size));
    }
    let planted = Clustering::from_labels(&labels)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = DissimMatrix::from_fn(n, |i, j| {
        if labels[i] == labels[j] {
            rng.gen_range(0.5..1.0)
        } else {
            match target {
                SeparationTarget::Ratio(rho) => rng.gen_range(rho..rho * 1.5),
                SeparationTarget::Margin(m) => rng.gen_range(1.0 + m..1.5 + m),
            }
        }
    })?;
    let profile = separability_profile(&d, &planted);
    let ok = match target {
        SeparationTarget::Ratio(rho) => profile.rho >= rho,
        SeparationTarget::Margin(m) => profile.margin >= m,
    };
    if !ok {
        return Err(Error::Infeasible {
            reason: format!(
                "planted instance missed the separation target (rho={}, margin={})",
                profile.rho, profile.margin
            ),
        });
    }
    Ok((d, planted))
}

/// Outcome of the cloud-plus-singletons construction.
#[derive(Debug, Clone)]
pub struct CloudOutcome {
    pub instance: PairedInstance,
    pub before: Clustering,
    pub after: Clustering,
    /// Hamming distance restricted to cloud-point pairs.
    pub delta_cloud: PairFraction,
    /// The target 2(k-1)m / (k^2 (m-1)) on cloud pairs.
    pub threshold: f64,
    pub meets_threshold: bool,
}

/// Cloud of `k^2 * cell_size` points on a k-by-k cell grid plus `k-1`
/// singletons. Under `d` points sharing a grid row sit at distance 1 and all
/// other cloud pairs at `1 + gamma`; under `d2` the roles of rows and columns
/// swap, which is a valid alpha-perturbation whenever `1 + gamma <= alpha`.
/// Singleton distances (`d_cs` to the cloud, `d_ss` between singletons) are
/// identical in both matrices. The exact optimizer judges what actually
/// happens; the report compares the realized cloud-restricted shift to the
/// construction's target.
#[allow(clippy::too_many_arguments)]
pub fn gen_cloud_singletons(
    obj: Objective,
    k: usize,
    cell_size: usize,
    gamma: f64,
    d_cs: f64,
    d_ss: f64,
    alpha: f64,
    cap: usize,
) -> Result<CloudOutcome> {
    if k < 2 || cell_size < 1 {
        return Err(Error::InvalidSpec { reason: "need k >= 2 and cell_size >= 1".into() });
    }
    if gamma < 0.0 || alpha <= 1.0 {
        return Err(Error::InvalidSpec { reason: "need gamma >= 0 and alpha > 1".into() });
    }
    if 1.0 + gamma > alpha {
        return Err(Error::Infeasible {
            reason: format!("row/column swap needs 1 + gamma <= alpha; got gamma={gamma}, alpha={alpha}"),
        });
    }
    let m = k * k * cell_size;
    let n = m + k - 1;
    let row = |t: usize| t / (k * cell_size);
    let col = |t: usize| (t / cell_size) % k;
    let build = |by_row: bool| {
        DissimMatrix::from_fn(n, |i, j| {
            match (i < m, j < m) {
                (true, true) => {
                    let same = if by_row { row(i) == row(j) } else { col(i) == col(j) };
                    if same {
                        1.0
                    } else {
                        1.0 + gamma
                    }
                }
                (true, false) | (false, true) => d_cs,
                (false, false) => d_ss,
            }
        })
    };
    let d = build(true)?;
    let d2 = build(false)?;
    let spec = PerturbSpec::multiplicative(alpha)?;
    let check = is_valid_perturbation(&d, &d2, &spec)?;
    debug_assert!(check.valid);
    let (before, _) = exact_optimize_capped(obj, &d, k, cap)?;
    let (after, _) = exact_optimize_capped(obj, &d2, k, cap)?;
    let cloud: Vec<usize> = (0..m).collect();
    let before_cloud = restrict_clustering(&before, &cloud);
    let after_cloud = restrict_clustering(&after, &cloud);
    let delta_cloud = hamming(&before_cloud, &after_cloud)?;
    let threshold = 2.0 * (k as f64 - 1.0) * m as f64 / ((k * k) as f64 * (m as f64 - 1.0));
    let meets = delta_cloud.as_f64() >= threshold - 1e-9;
    Ok(CloudOutcome {
        instance: PairedInstance {
            d,
            d2,
            spec,
            expected_before: before.clone(),
            expected_after: after.clone(),
            notes: format!("cloud k={k} cell_size={cell_size} gamma={gamma} d_cs={d_cs} d_ss={d_ss}"),
        },
        before,
        after,
        delta_cloud,
        threshold,
        meets_threshold: meets,
    })
}

fn restrict_clustering(c: &Clustering, keep: &[usize]) -> Clustering {
    let labels: Vec<usize> = keep.iter().map(|&i| c.labels()[i]).collect();
    Clustering::from_labels(&labels).expect("nonempty restriction")
}

/// The Euclidean three-point family with explicit coordinates.
#[derive(Debug, Clone)]
pub struct EuclideanPaired {
    pub paired: PairedInstance,
    pub coords_before: Vec<Vec<f64>>,
    pub coords_after: Vec<Vec<f64>>,
    pub check: PerturbCheck,
}

/// Three collinear diagonal points a = 1*1, b = (2+eps')*1, c = (3+eps')*1 in
/// `dim` dimensions; the perturbation slides b toward a far enough to make
/// (a,b) the closest pair while keeping the induced matrix perturbation
/// valid: multiplicatively the a-b gap shrinks by exactly alpha, additively
/// b moves by epsilon of Euclidean distance (epsilon / sqrt(dim) per
/// coordinate). Validity of the induced matrix perturbation is checked, and
/// parameter combinations that fail it (or fail to flip the closest pair)
/// are reported as infeasible.
pub fn gen_euclidean_three_body(
    dim: usize,
    eps_prime: f64,
    spec: &PerturbSpec,
    r: usize,
) -> Result<EuclideanPaired> {
    if dim < 1 || eps_prime <= 0.0 {
        return Err(Error::InvalidSpec { reason: "need dim >= 1 and eps_prime > 0".into() });
    }
    let point = |v: f64| vec![v; dim];
    let b_before = 2.0 + eps_prime;
    let b_after = match spec {
        PerturbSpec::Multiplicative { alpha } => 1.0 + (1.0 + eps_prime) / alpha,
        PerturbSpec::Additive { epsilon } => b_before - epsilon / (dim as f64).sqrt(),
    };
    let coords_before = vec![point(1.0), point(b_before), point(3.0 + eps_prime)];
    let coords_after = vec![point(1.0), point(b_after), point(3.0 + eps_prime)];
    let euclid = |p: &[f64], q: &[f64]| {
        p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    };
    let matrix_of = |coords: &[Vec<f64>]| {
        DissimMatrix::from_fn(3, |i, j| euclid(&coords[i], &coords[j]))
    };
    let base = matrix_of(&coords_before)?;
    let pert = matrix_of(&coords_after)?;

    // The construction only demonstrates the flip when the closest pair
    // actually changes from (b,c) to (a,b).
    let ordered_before = base.get(1, 2) < base.get(0, 1) && base.get(0, 1) < base.get(0, 2);
    let ordered_after = pert.get(0, 1) < pert.get(1, 2) && pert.get(1, 2) < pert.get(0, 2);
    if !ordered_before || !ordered_after {
        return Err(Error::Infeasible {
            reason: format!(
                "three-body ordering not achieved (before: {:?}, after: {:?})",
                (base.get(0, 1), base.get(0, 2), base.get(1, 2)),
                (pert.get(0, 1), pert.get(0, 2), pert.get(1, 2)),
            ),
        });
    }
    let (d, origin) = base.replicate(r);
    let (d2, _) = pert.replicate(r);
    let check = is_valid_perturbation(&d, &d2, spec)?;
    if !check.valid {
        let (i, j) = check.worst_pair.unwrap_or((0, 1));
        return Err(Error::Infeasible {
            reason: format!(
                "induced matrix perturbation invalid at pair ({i},{j}): excess {}",
                check.worst_excess
            ),
        });
    }
    let expected_before = Clustering::from_labels(&[0, 1, 1])?.lift(&origin);
    let expected_after = Clustering::from_labels(&[0, 0, 1])?.lift(&origin);
    let rep_coords = |coords: &[Vec<f64>]| -> Vec<Vec<f64>> {
        origin.iter().map(|&o| coords[o].clone()).collect()
    };
    Ok(EuclideanPaired {
        paired: PairedInstance {
            d,
            d2,
            spec: *spec,
            expected_before,
            expected_after,
            notes: format!("euclidean three-body dim={dim} eps_prime={eps_prime} r={r}"),
        },
        coords_before: rep_coords(&coords_before),
        coords_after: rep_coords(&coords_after),
        check,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::ClusterFn;
    use crate::linkage::{linkage_run, LinkageMethod};

    #[test]
    fn three_body_mult_values() {
        let spec = PerturbSpec::multiplicative(2.0).unwrap();
        let p = gen_three_body(&spec, 1).unwrap();
        assert_eq!(p.d.upper_triangle(), &[2.0, 3.0, 1.0]);
        assert_eq!(p.d2.upper_triangle(), &[1.0, 3.0, 2.0]);
        assert!(is_valid_perturbation(&p.d, &p.d2, &spec).unwrap().valid);
    }

    #[test]
    fn three_body_additive_values() {
        let spec = PerturbSpec::additive(1.0).unwrap();
        let p = gen_three_body(&spec, 1).unwrap();
        assert_eq!(p.d.upper_triangle(), &[1.5, 2.0, 1.0]);
        assert_eq!(p.d2.upper_triangle(), &[1.0, 2.0, 1.5]);
        assert!(is_valid_perturbation(&p.d, &p.d2, &spec).unwrap().valid);
    }

    #[test]
    fn three_body_replicated_solves_as_expected() {
        let spec = PerturbSpec::multiplicative(2.0).unwrap();
        let p = gen_three_body(&spec, 2).unwrap();
        assert_eq!(p.d.n(), 6);
        for func in ClusterFn::ALL {
            assert_eq!(func.evaluate(&p.d, 2).unwrap(), p.expected_before, "{}", func.name());
            assert_eq!(func.evaluate(&p.d2, 2).unwrap(), p.expected_after, "{}", func.name());
        }
    }

    #[test]
    fn separable_recovered_by_linkage() {
        let (d, planted) = gen_separable(12, 3, SeparationTarget::Ratio(4.0), 7).unwrap();
        assert!(separability_profile(&d, &planted).rho >= 4.0);
        for m in LinkageMethod::ALL {
            let (c, _) = linkage_run(m, &d, 3).unwrap();
            assert_eq!(c, planted, "{}", m.name());
        }
    }

    #[test]
    fn separable_margin_and_singletons() {
        let (d, planted) = gen_separable(12, 3, SeparationTarget::Margin(0.5), 3).unwrap();
        assert!(separability_profile(&d, &planted).margin >= 0.5);

        let (d, planted) = gen_separable(4, 4, SeparationTarget::Ratio(2.0), 1).unwrap();
        assert_eq!(planted, Clustering::singletons(4));
        assert!(separability_profile(&d, &planted).rho.is_infinite());
    }

    #[test]
    fn cloud_ratios_and_degenerate_gamma() {
        let out = gen_cloud_singletons(Objective::KMeans, 2, 2, 0.5, 3.0, 1.0, 2.0, 14).unwrap();
        assert_eq!(out.instance.d.n(), 9);
        for (i, j, v) in out.instance.d.pairs() {
            let w = out.instance.d2.get(i, j);
            let ratio = if v > 0.0 { w / v } else { 1.0 };
            assert!([1.0, 1.5, 1.0 / 1.5].iter().any(|t| (ratio - t).abs() < 1e-12));
        }

        let flat = gen_cloud_singletons(Objective::KMeans, 2, 2, 0.0, 3.0, 1.0, 2.0, 14).unwrap();
        assert!(flat.delta_cloud.is_zero());
    }

    #[test]
    fn cloud_rejects_infeasible_alpha() {
        assert!(matches!(
            gen_cloud_singletons(Objective::KMeans, 2, 2, 1.5, 3.0, 1.0, 2.0, 14),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn euclidean_additive_dim1_distances() {
        let spec = PerturbSpec::additive(0.25).unwrap();
        let e = gen_euclidean_three_body(1, 0.01, &spec, 1).unwrap();
        let d = &e.paired.d;
        let d2 = &e.paired.d2;
        assert!((d.get(0, 1) - 1.01).abs() < 1e-12);
        assert!((d.get(1, 2) - 1.0).abs() < 1e-12);
        assert!((d.get(0, 2) - 2.01).abs() < 1e-12);
        assert!((d2.get(0, 1) - 0.76).abs() < 1e-12);
        assert!((d2.get(1, 2) - 1.25).abs() < 1e-12);
        assert!((d2.get(0, 2) - 2.01).abs() < 1e-12);
        assert!(e.check.valid);
    }

    #[test]
    fn euclidean_flip_under_all_functions() {
        for spec in [PerturbSpec::multiplicative(2.0).unwrap(), PerturbSpec::additive(0.25).unwrap()] {
            for dim in [1, 3] {
                let e = gen_euclidean_three_body(dim, 0.01, &spec, 1).unwrap();
                for func in ClusterFn::ALL {
                    assert_eq!(func.evaluate(&e.paired.d, 2).unwrap(), e.paired.expected_before);
                    assert_eq!(func.evaluate(&e.paired.d2, 2).unwrap(), e.paired.expected_after);
                }
            }
        }
    }
}
