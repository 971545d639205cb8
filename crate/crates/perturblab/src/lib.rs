//! Exact clustering and perturbation-robustness analysis on dissimilarity
//! matrices.
//!
//! The crate provides:
//! - dissimilarity matrices, canonical clusterings, and the pair-counting
//!   Hamming distance between clusterings ([`matrix`], [`clustering`]);
//! - exhaustive partition enumeration and exact optimization of the
//!   pairwise k-means, k-medoids, and min-sum objectives ([`partitions`],
//!   [`objectives`]);
//! - single/average/complete linkage with the k-stopping criterion and a
//!   merge trace ([`linkage`]);
//! - multiplicative and additive perturbation models, seeded sampling, and
//!   adversarial search for the worst-case output shift ([`perturb`]);
//! - clusterability measures (uniqueness of optimum, strict separability)
//!   and closed-form robustness certification ([`clusterability`],
//!   [`bounds`]);
//! - executable axiom checks and the instance generators behind them
//!   ([`axioms`], [`generators`]).
//!
//! The `parallel` feature (on by default) runs the enumeration-backed inner
//! loops on rayon; without it everything falls back to sequential code with
//! identical results.

pub mod axioms;
pub mod bounds;
pub mod clusterability;
pub mod clustering;
pub mod error;
pub mod function;
pub mod generators;
pub mod linkage;
pub mod matrix;
pub mod objectives;
pub mod partitions;
pub mod perturb;

pub use clustering::{hamming, is_refinement, Clustering, PairFraction};
pub use error::{Error, Result};
pub use function::ClusterFn;
pub use linkage::{linkage_run, LinkageMethod, MergeStep, MergeTrace};
pub use matrix::{validate_dissim, DissimMatrix};
pub use objectives::{exact_optimize, Objective};
pub use partitions::{enumerate_k_partitions, stirling2, DEFAULT_ENUM_CAP};
pub use perturb::{adversarial_search, is_valid_perturbation, sample_perturbation, PerturbSpec};
