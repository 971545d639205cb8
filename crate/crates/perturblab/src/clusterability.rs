//! The two clusterability notions: uniqueness of optimum (exhaustive cost
//! landscape) and strict separability (multiplicative ratio and additive
//! margin), measured per instance.

use crate::clustering::{Clustering, PairFraction};
use crate::error::Result;
use crate::linkage::{linkage_run, LinkageMethod};
use crate::matrix::DissimMatrix;
use crate::objectives::{exact_optimize_capped, Objective};
use crate::partitions::{visit_k_partitions, DEFAULT_ENUM_CAP};

/// Exhaustive cost landscape of all k-clusterings relative to the optimum,
/// for a Hamming threshold `delta`: any clustering at distance >= delta from
/// the optimum is "far", and `min_far_cost` is the cheapest such cost.
#[derive(Debug, Clone)]
pub struct UOProfile {
    pub objective: Objective,
    pub k: usize,
    pub delta: f64,
    pub opt: Clustering,
    pub opt_cost: f64,
    /// Smallest cost among far clusterings; infinite when none exists.
    pub min_far_cost: f64,
    /// Largest admissible cost factor at c0 = 0; infinite when opt_cost = 0
    /// or no clustering is far.
    pub c_max: f64,
}

impl UOProfile {
    /// Largest admissible additive slack for a chosen cost factor `c`.
    pub fn c0_max(&self, c: f64) -> f64 {
        self.min_far_cost - c * self.opt_cost
    }
}

/// Enumerate every k-clustering, comparing cost and Hamming distance against
/// the exact optimum.
pub fn uo_profile(
    obj: Objective,
    d: &DissimMatrix,
    k: usize,
    delta: f64,
) -> Result<UOProfile> {
    uo_profile_capped(obj, d, k, delta, DEFAULT_ENUM_CAP)
}

pub fn uo_profile_capped(
    obj: Objective,
    d: &DissimMatrix,
    k: usize,
    delta: f64,
    cap: usize,
) -> Result<UOProfile> {
    assert!(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]");
    let (opt, opt_cost) = exact_optimize_capped(obj, d, k, cap)?;
    let n = d.n();
    let total_pairs = (n as u64) * (n as u64 - 1) / 2;
    let opt_labels = opt.labels().to_vec();
    let mut min_far_cost = f64::INFINITY;
    visit_k_partitions(n, k, cap, |labels| {
        let mut diff = 0u64;
        for x in 0..n {
            for y in x + 1..n {
                if (labels[x] == labels[y]) != (opt_labels[x] == opt_labels[y]) {
                    diff += 1;
                }
            }
        }
        let far = PairFraction::new(diff, total_pairs.max(1)).as_f64() >= delta;
        if far {
            let cost = obj.cost_labels(d, labels, k);
            if cost < min_far_cost {
                min_far_cost = cost;
            }
        }
    })?;
    let c_max = if opt_cost > 0.0 { min_far_cost / opt_cost } else { f64::INFINITY };
    Ok(UOProfile { objective: obj, k, delta, opt, opt_cost, min_far_cost, c_max })
}

/// Strict-separability measures of a fixed clustering: the largest
/// multiplicative ratio and additive margin it supports, per-point as the
/// definitions quantify them.
#[derive(Debug, Clone)]
pub struct SeparabilityProfile {
    pub clustering: Clustering,
    /// sup alpha with alpha * d(x,y) <= d(x,z) for all in-block y and
    /// out-of-block z; infinite when every in-block constraint is vacuous.
    pub rho: f64,
    /// sup epsilon with d(x,y) + epsilon <= d(x,z); analogous subtraction.
    pub margin: f64,
}

pub fn separability_profile(d: &DissimMatrix, c: &Clustering) -> SeparabilityProfile {
    assert_eq!(d.n(), c.n(), "clustering must cover the matrix");
    let n = d.n();
    let mut rho = f64::INFINITY;
    let mut margin = f64::INFINITY;
    for x in 0..n {
        let mut max_in: Option<f64> = None;
        let mut min_out: Option<f64> = None;
        for y in 0..n {
            if y == x {
                continue;
            }
            let v = d.get(x, y);
            if c.same_block(x, y) {
                max_in = Some(max_in.map_or(v, |m| m.max(v)));
            } else {
                min_out = Some(min_out.map_or(v, |m| m.min(v)));
            }
        }
        match (max_in, min_out) {
            (Some(mi), Some(mo)) => {
                let r = if mi > 0.0 { mo / mi } else { f64::INFINITY };
                rho = rho.min(r);
                margin = margin.min(mo - mi);
            }
            // Singleton block or k = 1: the point constrains nothing.
            _ => {}
        }
    }
    SeparabilityProfile { clustering: c.clone(), rho, margin }
}

/// Look for the (at most one) strictly separable k-clustering: single linkage
/// proposes a candidate and `separability_profile` verifies rho > 1.
pub fn find_separable_clustering(
    d: &DissimMatrix,
    k: usize,
) -> Result<Option<(Clustering, SeparabilityProfile)>> {
    let (candidate, _) = linkage_run(LinkageMethod::Single, d, k)?;
    let profile = separability_profile(d, &candidate);
    if profile.rho > 1.0 {
        Ok(Some((candidate, profile)))
    } else {
        Ok(None)
    }
}
