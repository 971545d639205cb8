//! Clusterings as canonical restricted-growth label strings, plus the
//! pair-counting Hamming distance between them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A partition of `n` indexed points into `k` nonempty blocks.
///
/// Labels are kept in canonical restricted-growth form: the first occurrence
/// of block `j` precedes the first occurrence of block `j+1`. All tie-breaking
/// elsewhere in the crate is lexicographic on these strings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Clustering {
    n: usize,
    k: usize,
    labels: Vec<usize>,
}

impl Clustering {
    /// Build from arbitrary block labels; relabels into canonical form.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidClustering { reason: "empty label vector".into() });
        }
        let canonical = canonicalize(labels);
        let k = canonical.iter().max().unwrap() + 1;
        Ok(Self { n: labels.len(), k, labels: canonical })
    }

    /// Labels already in canonical restricted-growth form; checked.
    pub fn from_canonical(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidClustering { reason: "empty label vector".into() });
        }
        let mut max_seen = 0usize;
        for (i, &l) in labels.iter().enumerate() {
            let bound = if i == 0 { 0 } else { max_seen + 1 };
            if l > bound {
                return Err(Error::InvalidClustering {
                    reason: format!("label {l} at position {i} breaks restricted growth"),
                });
            }
            max_seen = max_seen.max(l);
        }
        let k = max_seen + 1;
        Ok(Self { n: labels.len(), k, labels })
    }

    /// The all-singletons clustering (k = n).
    pub fn singletons(n: usize) -> Self {
        Self { n, k: n, labels: (0..n).collect() }
    }

    /// Blocks as sorted member lists, indexed by block label.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            blocks[l].push(i);
        }
        blocks
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn same_block(&self, x: usize, y: usize) -> bool {
        self.labels[x] == self.labels[y]
    }

    /// Push the clustering forward along an origin map: point `i` of the new
    /// domain joins the block of `origin[i]` in `self`.
    pub fn lift(&self, origin: &[usize]) -> Clustering {
        let labels: Vec<usize> = origin.iter().map(|&o| self.labels[o]).collect();
        Clustering::from_labels(&labels).expect("lifted labels are nonempty")
    }
}

fn canonicalize(labels: &[usize]) -> Vec<usize> {
    let mut map: Vec<Option<usize>> = vec![None; labels.iter().max().map_or(0, |m| m + 1)];
    let mut next = 0usize;
    labels
        .iter()
        .map(|&l| {
            *map[l].get_or_insert_with(|| {
                let v = next;
                next += 1;
                v
            })
        })
        .collect()
}

/// An exact fraction of unordered point pairs, used so equality checks like
/// `delta = 2/3` are rational, not floating-point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairFraction {
    pub num: u64,
    pub den: u64,
}

impl PairFraction {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0);
        Self { num, den }
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Exact equality with the fraction `p/q`.
    pub fn eq_ratio(&self, p: u64, q: u64) -> bool {
        (self.num as u128) * (q as u128) == (p as u128) * (self.den as u128)
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }
}

impl PartialOrd for PairFraction {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PairFraction {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        ((self.num as u128) * (other.den as u128)).cmp(&((other.num as u128) * (self.den as u128)))
    }
}

/// Hamming distance between clusterings of the same `n >= 2` points:
/// the fraction of unordered pairs whose same-block status disagrees.
pub fn hamming(a: &Clustering, b: &Clustering) -> Result<PairFraction> {
    if a.n() != b.n() {
        return Err(Error::SizeMismatch { left: a.n(), right: b.n() });
    }
    let n = a.n();
    let mut diff = 0u64;
    for x in 0..n {
        for y in x + 1..n {
            if a.same_block(x, y) != b.same_block(x, y) {
                diff += 1;
            }
        }
    }
    Ok(PairFraction::new(diff, (n as u64) * (n as u64 - 1) / 2))
}

/// True iff every block of `fine` is contained in a single block of `coarse`.
pub fn is_refinement(fine: &Clustering, coarse: &Clustering) -> Result<bool> {
    if fine.n() != coarse.n() {
        return Err(Error::SizeMismatch { left: fine.n(), right: coarse.n() });
    }
    let mut rep: Vec<Option<usize>> = vec![None; fine.k()];
    for (i, &l) in fine.labels().iter().enumerate() {
        match rep[l] {
            None => rep[l] = Some(coarse.labels()[i]),
            Some(c) if c != coarse.labels()[i] => return Ok(false),
            _ => {}
        }
    }
    Ok(true)
}

// Serde: accept {"n", "k", "labels"} but re-validate on deserialize.
impl<'de> Deserialize<'de> for Clustering {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            k: usize,
            labels: Vec<usize>,
        }
        let raw = Raw::deserialize(de)?;
        let c = Clustering::from_labels(&raw.labels).map_err(serde::de::Error::custom)?;
        if c.n() != raw.n || c.k() != raw.k {
            return Err(serde::de::Error::custom(format!(
                "declared (n={}, k={}) but labels give (n={}, k={})",
                raw.n,
                raw.k,
                c.n(),
                c.k()
            )));
        }
        Ok(c)
    }
}
