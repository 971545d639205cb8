//! The three cost functions (pairwise k-means, k-medoids, min-sum) and the
//! exact enumeration-backed optimizer.

use serde::{Deserialize, Serialize};

use crate::clustering::Clustering;
use crate::error::Result;
use crate::matrix::DissimMatrix;
use crate::partitions::{visit_k_partitions, DEFAULT_ENUM_CAP};

/// Relative tolerance under which two costs are treated as tied.
pub const COST_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    KMeans,
    KMedoids,
    MinSum,
}

impl Objective {
    pub const ALL: [Objective; 3] = [Objective::KMeans, Objective::KMedoids, Objective::MinSum];

    pub fn name(&self) -> &'static str {
        match self {
            Objective::KMeans => "kmeans",
            Objective::KMedoids => "kmedoids",
            Objective::MinSum => "minsum",
        }
    }

    /// Cost of a clustering under this objective.
    ///
    /// k-means uses the center-free pairwise form
    /// `sum_i (1/|C_i|) sum_{pairs in C_i} d(x,y)^2`, k-medoids enumerates
    /// every in-block medoid candidate, and min-sum adds all in-cluster
    /// pairwise distances once per unordered pair.
    pub fn cost(&self, d: &DissimMatrix, c: &Clustering) -> f64 {
        assert_eq!(d.n(), c.n(), "clustering must cover the matrix");
        self.cost_labels(d, c.labels(), c.k())
    }

    pub(crate) fn cost_labels(&self, d: &DissimMatrix, labels: &[usize], k: usize) -> f64 {
        let n = labels.len();
        match self {
            Objective::KMeans | Objective::MinSum => {
                let mut sums = vec![0.0f64; k];
                let mut counts = vec![0usize; k];
                for (i, &l) in labels.iter().enumerate() {
                    counts[l] += 1;
                    for (j, &l2) in labels.iter().enumerate().take(i) {
                        if l == l2 {
                            let v = d.get(j, i);
                            sums[l] += if matches!(self, Objective::KMeans) { v * v } else { v };
                        }
                    }
                }
                match self {
                    Objective::KMeans => sums
                        .iter()
                        .zip(&counts)
                        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
                        .sum(),
                    _ => sums.iter().sum(),
                }
            }
            Objective::KMedoids => {
                let mut blocks = vec![Vec::new(); k];
                for (i, &l) in labels.iter().enumerate().take(n) {
                    blocks[l].push(i);
                }
                blocks
                    .iter()
                    .map(|members| {
                        members
                            .iter()
                            .map(|&c| members.iter().map(|&x| d.get(x, c)).sum::<f64>())
                            .fold(f64::INFINITY, f64::min)
                    })
                    .sum()
            }
        }
    }
}

/// Candidate ordering for the optimizer: strictly lower cost wins; costs tied
/// within `COST_TIE_TOL * (1 + |cost|)` fall back to lexicographically
/// smallest canonical labels. Deterministic across enumeration schedules.
fn improves(cost: f64, labels: &[usize], best_cost: f64, best_labels: &[usize]) -> bool {
    let tol = COST_TIE_TOL * (1.0 + best_cost.abs());
    if cost < best_cost - tol {
        true
    } else {
        (cost - best_cost).abs() <= tol && labels < best_labels
    }
}

/// Exhaustive minimization of the objective over all k-partitions,
/// sequential enumeration.
pub fn exact_optimize_seq(
    obj: Objective,
    d: &DissimMatrix,
    k: usize,
    cap: usize,
) -> Result<(Clustering, f64)> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    visit_k_partitions(d.n(), k, cap, |labels| {
        let cost = obj.cost_labels(d, labels, k);
        match &best {
            None => best = Some((cost, labels.to_vec())),
            Some((bc, bl)) => {
                if improves(cost, labels, *bc, bl) {
                    best = Some((cost, labels.to_vec()));
                }
            }
        }
    })?;
    let (cost, labels) = best.expect("at least one k-partition exists");
    Ok((Clustering::from_canonical(labels)?, cost))
}

#[cfg(feature = "parallel")]
fn exact_optimize_impl(
    obj: Objective,
    d: &DissimMatrix,
    k: usize,
    cap: usize,
) -> Result<(Clustering, f64)> {
    use rayon::prelude::*;

    const CHUNK: usize = 8192;
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut chunk: Vec<Vec<usize>> = Vec::with_capacity(CHUNK);
    let flush = |chunk: &mut Vec<Vec<usize>>, best: &mut Option<(f64, Vec<usize>)>| {
        let local = chunk
            .par_iter()
            .map(|labels| (obj.cost_labels(d, labels, k), labels))
            .reduce_with(|a, b| if improves(b.0, b.1, a.0, a.1) { b } else { a });
        if let Some((cost, labels)) = local {
            let take = match best {
                None => true,
                Some((bc, bl)) => improves(cost, labels, *bc, bl),
            };
            if take {
                *best = Some((cost, labels.clone()));
            }
        }
        chunk.clear();
    };
    visit_k_partitions(d.n(), k, cap, |labels| {
        chunk.push(labels.to_vec());
        if chunk.len() == CHUNK {
            flush(&mut chunk, &mut best);
        }
    })?;
    flush(&mut chunk, &mut best);
    let (cost, labels) = best.expect("at least one k-partition exists");
    Ok((Clustering::from_canonical(labels)?, cost))
}

#[cfg(not(feature = "parallel"))]
fn exact_optimize_impl(
    obj: Objective,
    d: &DissimMatrix,
    k: usize,
    cap: usize,
) -> Result<(Clustering, f64)> {
    exact_optimize_seq(obj, d, k, cap)
}

/// The exact clustering function: minimum-cost k-clustering with the
/// canonical tie-break, under the default enumeration cap.
pub fn exact_optimize(obj: Objective, d: &DissimMatrix, k: usize) -> Result<(Clustering, f64)> {
    exact_optimize_capped(obj, d, k, DEFAULT_ENUM_CAP)
}

pub fn exact_optimize_capped(
    obj: Objective,
    d: &DissimMatrix,
    k: usize,
    cap: usize,
) -> Result<(Clustering, f64)> {
    exact_optimize_impl(obj, d, k, cap)
}
