//! A uniform handle over the six implemented clustering functions: the three
//! exact objective minimizers and the three linkage methods.

use serde::{Deserialize, Serialize};

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::linkage::{linkage_run, LinkageMethod};
use crate::matrix::DissimMatrix;
use crate::objectives::{exact_optimize_capped, Objective};
use crate::partitions::DEFAULT_ENUM_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterFn {
    Exact(Objective),
    Linkage(LinkageMethod),
}

impl ClusterFn {
    pub const ALL: [ClusterFn; 6] = [
        ClusterFn::Exact(Objective::KMeans),
        ClusterFn::Exact(Objective::KMedoids),
        ClusterFn::Exact(Objective::MinSum),
        ClusterFn::Linkage(LinkageMethod::Single),
        ClusterFn::Linkage(LinkageMethod::Average),
        ClusterFn::Linkage(LinkageMethod::Complete),
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ClusterFn::Exact(o) => o.name(),
            ClusterFn::Linkage(m) => m.name(),
        }
    }

    pub fn parse(name: &str) -> Option<ClusterFn> {
        Self::ALL.iter().copied().find(|f| f.name() == name)
    }

    pub fn evaluate(&self, d: &DissimMatrix, k: usize) -> Result<Clustering> {
        self.evaluate_capped(d, k, DEFAULT_ENUM_CAP)
    }

    pub fn evaluate_capped(&self, d: &DissimMatrix, k: usize, cap: usize) -> Result<Clustering> {
        match self {
            ClusterFn::Exact(obj) => Ok(exact_optimize_capped(*obj, d, k, cap)?.0),
            ClusterFn::Linkage(m) => Ok(linkage_run(*m, d, k)?.0),
        }
    }
}

impl std::str::FromStr for ClusterFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<ClusterFn> {
        ClusterFn::parse(s).ok_or_else(|| Error::InvalidSpec {
            reason: format!("unknown clustering function {s:?}; expected one of kmeans, kmedoids, minsum, single, average, complete"),
        })
    }
}
