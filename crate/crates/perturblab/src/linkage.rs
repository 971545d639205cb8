//! Agglomerative linkage (single, average, complete) with the k-stopping
//! criterion. Deliberately naive: linkage values are recomputed from the
//! matrix at every step so the merge trace reflects exact between-cluster
//! distances.

use serde::{Deserialize, Serialize};

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::matrix::DissimMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkageMethod {
    Single,
    Average,
    Complete,
}

impl LinkageMethod {
    pub const ALL: [LinkageMethod; 3] =
        [LinkageMethod::Single, LinkageMethod::Average, LinkageMethod::Complete];

    pub fn name(&self) -> &'static str {
        match self {
            LinkageMethod::Single => "single",
            LinkageMethod::Average => "average",
            LinkageMethod::Complete => "complete",
        }
    }

    fn between(&self, d: &DissimMatrix, a: &[usize], b: &[usize]) -> f64 {
        let mut acc = match self {
            LinkageMethod::Single => f64::INFINITY,
            LinkageMethod::Average => 0.0,
            LinkageMethod::Complete => f64::NEG_INFINITY,
        };
        for &x in a {
            for &y in b {
                let v = d.get(x, y);
                acc = match self {
                    LinkageMethod::Single => acc.min(v),
                    LinkageMethod::Average => acc + v,
                    LinkageMethod::Complete => acc.max(v),
                };
            }
        }
        if matches!(self, LinkageMethod::Average) {
            acc / (a.len() * b.len()) as f64
        } else {
            acc
        }
    }
}

/// One merge: the two blocks are identified by their smallest members at the
/// time of the merge, `rep_a < rep_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeStep {
    pub rep_a: usize,
    pub rep_b: usize,
    pub distance: f64,
}

/// The full merge history of a linkage run stopped at k clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeTrace {
    pub n: usize,
    pub steps: Vec<MergeStep>,
}

impl MergeTrace {
    /// Replay the first `t` merges from singletons.
    pub fn prefix_clustering(&self, t: usize) -> Clustering {
        let mut labels: Vec<usize> = (0..self.n).collect();
        for step in &self.steps[..t] {
            let (a, b) = (labels[step.rep_a], labels[step.rep_b]);
            for l in labels.iter_mut() {
                if *l == b {
                    *l = a;
                }
            }
        }
        Clustering::from_labels(&labels).expect("nonempty")
    }
}

/// Run agglomerative clustering until k clusters remain.
///
/// Each step merges the active pair with the smallest between-cluster
/// distance; ties go to the smallest (rep_a, rep_b) pair, where clusters are
/// identified by their smallest member.
pub fn linkage_run(
    method: LinkageMethod,
    d: &DissimMatrix,
    k: usize,
) -> Result<(Clustering, MergeTrace)> {
    let n = d.n();
    if k < 1 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    // Clusters ordered by smallest member; the invariant is maintained by
    // merging the larger representative into the smaller one.
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut steps = Vec::with_capacity(n - k);
    while clusters.len() > k {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let v = method.between(d, &clusters[a], &clusters[b]);
                let take = match best {
                    None => true,
                    Some((bv, _, _)) => v < bv,
                };
                if take {
                    best = Some((v, a, b));
                }
            }
        }
        let (dist, a, b) = best.expect("more than one active cluster");
        steps.push(MergeStep { rep_a: clusters[a][0], rep_b: clusters[b][0], distance: dist });
        let absorbed = clusters.remove(b);
        clusters[a].extend(absorbed);
        clusters[a].sort_unstable();
    }
    let mut labels = vec![0usize; n];
    for (idx, members) in clusters.iter().enumerate() {
        for &m in members {
            labels[m] = idx;
        }
    }
    Ok((Clustering::from_labels(&labels)?, MergeTrace { n, steps }))
}
