//! Perturbation regimes over dissimilarity matrices: validity checking,
//! seeded random sampling, and adversarial search for the worst-case
//! Hamming shift of a clustering function's output.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clustering::{hamming, PairFraction};
use crate::error::{Error, Result};
use crate::function::ClusterFn;
use crate::matrix::DissimMatrix;

/// Absolute tolerance on perturbation-interval boundary comparisons.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// A perturbation regime: multiplicative with factor `alpha > 1`, or
/// additive with offset `epsilon > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PerturbSpec {
    Multiplicative { alpha: f64 },
    Additive { epsilon: f64 },
}

impl PerturbSpec {
    pub fn multiplicative(alpha: f64) -> Result<Self> {
        if alpha > 1.0 && alpha.is_finite() {
            Ok(PerturbSpec::Multiplicative { alpha })
        } else {
            Err(Error::InvalidSpec { reason: format!("alpha must be > 1, got {alpha}") })
        }
    }

    pub fn additive(epsilon: f64) -> Result<Self> {
        if epsilon > 0.0 && epsilon.is_finite() {
            Ok(PerturbSpec::Additive { epsilon })
        } else {
            Err(Error::InvalidSpec { reason: format!("epsilon must be > 0, got {epsilon}") })
        }
    }

    /// The perturbation size: alpha or epsilon.
    pub fn size(&self) -> f64 {
        match self {
            PerturbSpec::Multiplicative { alpha } => *alpha,
            PerturbSpec::Additive { epsilon } => *epsilon,
        }
    }

    /// Admissible interval for a pair whose original value is `v`.
    /// Multiplicative pairs at 0 are pinned at 0; additive intervals are
    /// clamped at 0 so the result stays a dissimilarity.
    pub fn interval(&self, v: f64) -> (f64, f64) {
        match self {
            PerturbSpec::Multiplicative { alpha } => {
                if v == 0.0 {
                    (0.0, 0.0)
                } else {
                    (v / alpha, v * alpha)
                }
            }
            PerturbSpec::Additive { epsilon } => ((v - epsilon).max(0.0), v + epsilon),
        }
    }
}

/// Outcome of a validity check, naming the worst-violating pair when any
/// entry leaves its admissible interval.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbCheck {
    pub valid: bool,
    pub worst_pair: Option<(usize, usize)>,
    /// How far the worst pair lies outside its interval (0 when valid).
    pub worst_excess: f64,
}

/// Check that `d2` is a valid perturbation of `d` per `spec`.
pub fn is_valid_perturbation(
    d: &DissimMatrix,
    d2: &DissimMatrix,
    spec: &PerturbSpec,
) -> Result<PerturbCheck> {
    if d.n() != d2.n() {
        return Err(Error::SizeMismatch { left: d.n(), right: d2.n() });
    }
    let mut worst: Option<(usize, usize, f64)> = None;
    for (i, j, v) in d.pairs() {
        let w = d2.get(i, j);
        let excess = match spec {
            PerturbSpec::Multiplicative { alpha } => {
                if v == 0.0 {
                    w.abs()
                } else {
                    (w - v * alpha).max(v / alpha - w).max(0.0)
                }
            }
            PerturbSpec::Additive { epsilon } => ((w - v).abs() - epsilon).max(0.0),
        };
        if excess > 0.0 && worst.map_or(true, |(_, _, e)| excess > e) {
            worst = Some((i, j, excess));
        }
    }
    match worst {
        Some((i, j, excess)) if excess > BOUNDARY_TOL => {
            Ok(PerturbCheck { valid: false, worst_pair: Some((i, j)), worst_excess: excess })
        }
        Some((i, j, excess)) => {
            Ok(PerturbCheck { valid: true, worst_pair: Some((i, j)), worst_excess: excess })
        }
        None => Ok(PerturbCheck { valid: true, worst_pair: None, worst_excess: 0.0 }),
    }
}

/// Sample a random valid perturbation, deterministically in `seed`.
///
/// Each unordered pair is perturbed independently: multiplicative factors
/// are drawn log-uniformly from `[1/alpha, alpha]`; additive offsets are
/// uniform in `[-epsilon, epsilon]` with the result clamped at 0.
pub fn sample_perturbation(d: &DissimMatrix, spec: &PerturbSpec, seed: u64) -> DissimMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = d.clone();
    for (i, j, v) in d.pairs() {
        let w = match spec {
            PerturbSpec::Multiplicative { alpha } => {
                let u: f64 = rng.gen_range(-1.0..=1.0);
                v * (u * alpha.ln()).exp()
            }
            PerturbSpec::Additive { epsilon } => {
                let off: f64 = rng.gen_range(-*epsilon..=*epsilon);
                (v + off).max(0.0)
            }
        };
        out.set(i, j, w);
    }
    out
}

/// Result of an adversarial search: the valid perturbation with the largest
/// observed output shift, and the exact shift of that witness.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub witness: DissimMatrix,
    pub delta: PairFraction,
    pub evaluations: usize,
}

/// Search for a valid perturbation maximizing the Hamming distance of
/// `func`'s output from its output on `d`.
///
/// The candidate schedule is deterministic in `(seed, budget)` and ordered so
/// that a larger budget only extends it: a few structured candidates built
/// from per-pair interval endpoints, a first-improvement coordinate climb
/// over those endpoints, then seeded random samples. The reported delta is
/// the exact Hamming distance of the returned witness; the search is a lower
/// bound on the true worst case, never a certificate.
pub fn adversarial_search(
    func: ClusterFn,
    d: &DissimMatrix,
    k: usize,
    spec: &PerturbSpec,
    budget: usize,
    seed: u64,
) -> Result<SearchResult> {
    adversarial_search_capped(func, d, k, spec, budget, seed, crate::partitions::DEFAULT_ENUM_CAP)
}

pub fn adversarial_search_capped(
    func: ClusterFn,
    d: &DissimMatrix,
    k: usize,
    spec: &PerturbSpec,
    budget: usize,
    seed: u64,
    cap: usize,
) -> Result<SearchResult> {
    if budget == 0 {
        return Err(Error::ZeroBudget);
    }
    let base = func.evaluate_capped(d, k, cap)?;
    let zero = PairFraction::new(0, (d.n() as u64 * (d.n() as u64 - 1) / 2).max(1));

    let mut best_delta = zero;
    let mut best_witness = d.clone();
    let mut used = 0usize;

    let consider = |cand: DissimMatrix,
                        used: &mut usize,
                        best_delta: &mut PairFraction,
                        best_witness: &mut DissimMatrix|
     -> Result<bool> {
        if *used >= budget {
            return Ok(false);
        }
        *used += 1;
        let out = func.evaluate_capped(&cand, k, cap)?;
        let delta = hamming(&base, &out)?;
        if delta > *best_delta {
            *best_delta = delta;
            *best_witness = cand;
            Ok(true)
        } else {
            Ok(false)
        }
    };

    // Phase 1: structured endpoint candidates.
    for cand in structured_candidates(d, spec) {
        consider(cand, &mut used, &mut best_delta, &mut best_witness)?;
        if used >= budget {
            return Ok(SearchResult { witness: best_witness, delta: best_delta, evaluations: used });
        }
    }

    // Phase 2: first-improvement coordinate climb over per-pair extremes,
    // starting from the structured best. The path depends only on phase 1,
    // so a larger budget extends rather than reshuffles the schedule.
    let mut current = best_witness.clone();
    let mut current_delta = best_delta;
    let pairs: Vec<(usize, usize, f64)> = d.pairs().collect();
    'climb: loop {
        let mut improved = false;
        for &(i, j, v) in &pairs {
            let (lo, hi) = spec.interval(v);
            for target in [lo, hi] {
                if current.get(i, j) == target {
                    continue;
                }
                let mut cand = current.clone();
                cand.set(i, j, target);
                if consider(cand.clone(), &mut used, &mut best_delta, &mut best_witness)? {
                    current = cand;
                    current_delta = best_delta;
                    improved = true;
                }
                if used >= budget {
                    break 'climb;
                }
            }
        }
        if !improved {
            break;
        }
    }
    let _ = current_delta;

    // Phase 3: seeded random sampling for the remaining budget.
    while used < budget {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            let batch = (budget - used).min(256);
            let seeds: Vec<u64> = (0..batch).map(|i| mix_seed(seed, (used + i) as u64)).collect();
            let evaluated: Vec<(PairFraction, DissimMatrix)> = seeds
                .par_iter()
                .map(|&s| {
                    let cand = sample_perturbation(d, spec, s);
                    let out = func.evaluate_capped(&cand, k, cap)?;
                    Ok((hamming(&base, &out)?, cand))
                })
                .collect::<Result<_>>()?;
            // Earliest candidate wins ties: scan in schedule order.
            for (delta, cand) in evaluated {
                if delta > best_delta {
                    best_delta = delta;
                    best_witness = cand;
                }
            }
            used += batch;
        }
        #[cfg(not(feature = "parallel"))]
        {
            let cand = sample_perturbation(d, spec, mix_seed(seed, used as u64));
            consider(cand, &mut used, &mut best_delta, &mut best_witness)?;
        }
    }

    debug_assert!(is_valid_perturbation(d, &best_witness, spec)?.valid);
    Ok(SearchResult { witness: best_witness, delta: best_delta, evaluations: used })
}

fn mix_seed(seed: u64, serial: u64) -> u64 {
    // splitmix64 step over (seed, serial)
    let mut z = seed ^ serial.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Endpoint candidates: everything at the lower extreme, everything at the
/// upper extreme, and a value-class reversal that maps each distinct original
/// value to the reversed class's value, clamped into the pair's interval.
/// The reversal reproduces the swap witnesses of three-body-style instances.
fn structured_candidates(d: &DissimMatrix, spec: &PerturbSpec) -> Vec<DissimMatrix> {
    let mut lo_m = d.clone();
    let mut hi_m = d.clone();
    for (i, j, v) in d.pairs() {
        let (lo, hi) = spec.interval(v);
        lo_m.set(i, j, lo);
        hi_m.set(i, j, hi);
    }

    let mut values: Vec<f64> = d.pairs().map(|(_, _, v)| v).collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    values.dedup();
    let mut reversed = d.clone();
    for (i, j, v) in d.pairs() {
        let idx = values.iter().position(|&u| u == v).unwrap();
        let target = values[values.len() - 1 - idx];
        let (lo, hi) = spec.interval(v);
        reversed.set(i, j, target.clamp(lo, hi));
    }

    vec![lo_m, hi_m, reversed]
}
