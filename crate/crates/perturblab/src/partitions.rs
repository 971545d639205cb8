//! Enumeration of all partitions of `{0..n-1}` into exactly `k` nonempty
//! blocks, in lexicographic restricted-growth order, plus Stirling counts.

use crate::clustering::Clustering;
use crate::error::{Error, Result};

/// Desk-scale ceiling on exhaustive enumeration; override explicitly when a
/// larger run is intended.
pub const DEFAULT_ENUM_CAP: usize = 14;

/// Stirling number of the second kind, S(n, k).
pub fn stirling2(n: usize, k: usize) -> u64 {
    if k == 0 || k > n {
        return if n == 0 && k == 0 { 1 } else { 0 };
    }
    let mut row = vec![0u64; k + 1];
    row[0] = 1; // S(0,0)
    for m in 1..=n {
        for j in (1..=k.min(m)).rev() {
            row[j] = (j as u64) * row[j] + row[j - 1];
        }
        row[0] = 0;
    }
    row[k]
}

/// Streaming enumerator over restricted-growth strings with exactly `k`
/// distinct labels, in lexicographic order.
pub struct KPartitionIter {
    n: usize,
    k: usize,
    labels: Vec<usize>,
    prefix_max: Vec<usize>,
    started: bool,
    done: bool,
}

impl KPartitionIter {
    fn new(n: usize, k: usize) -> Self {
        let mut it = Self {
            n,
            k,
            labels: vec![0; n],
            prefix_max: vec![0; n],
            started: false,
            done: false,
        };
        // Lexicographically smallest string: zeros, then the forced new labels.
        for i in 0..n {
            it.labels[i] = if i >= n - (k - 1) { i - (n - k) } else { 0 };
        }
        it.refresh_prefix_max(0);
        it
    }

    fn refresh_prefix_max(&mut self, from: usize) {
        for i in from..self.n {
            let prev = if i == 0 { 0 } else { self.prefix_max[i - 1] };
            self.prefix_max[i] = prev.max(self.labels[i]);
        }
    }

    /// Current labels; valid between construction/advance calls.
    fn current(&self) -> &[usize] {
        &self.labels
    }

    /// Advance to the lexicographic successor; false when exhausted.
    fn advance(&mut self) -> bool {
        let (n, k) = (self.n, self.k);
        for i in (1..n).rev() {
            let m = self.prefix_max[i - 1];
            let v = self.labels[i] + 1;
            // v must respect restricted growth, stay under k, and leave the
            // suffix enough room to reach exactly k labels.
            if v <= m + 1 && v <= k - 1 && m.max(v) + 1 + (n - 1 - i) >= k {
                self.labels[i] = v;
                let mut cur_max = m.max(v);
                for j in i + 1..n {
                    let need = k - (cur_max + 1);
                    let rem = n - j;
                    if need == rem {
                        self.labels[j] = cur_max + 1;
                        cur_max += 1;
                    } else {
                        self.labels[j] = 0;
                    }
                }
                self.refresh_prefix_max(i);
                return true;
            }
        }
        false
    }
}

impl Iterator for KPartitionIter {
    type Item = Clustering;

    fn next(&mut self) -> Option<Clustering> {
        if self.done {
            return None;
        }
        if self.started && !self.advance() {
            self.done = true;
            return None;
        }
        self.started = true;
        Some(Clustering::from_canonical(self.current().to_vec()).expect("enumerator emits canonical strings"))
    }
}

/// All k-partitions of n points under the default enumeration cap.
pub fn enumerate_k_partitions(n: usize, k: usize) -> Result<KPartitionIter> {
    enumerate_k_partitions_capped(n, k, DEFAULT_ENUM_CAP)
}

pub fn enumerate_k_partitions_capped(n: usize, k: usize, cap: usize) -> Result<KPartitionIter> {
    if k < 1 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    Ok(KPartitionIter::new(n, k))
}

/// Allocation-free traversal of every canonical k-partition label string.
pub fn visit_k_partitions(n: usize, k: usize, cap: usize, mut f: impl FnMut(&[usize])) -> Result<()> {
    if k < 1 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    if n > cap {
        return Err(Error::EnumerationCap { n, cap });
    }
    let mut it = KPartitionIter::new(n, k);
    loop {
        f(it.current());
        if !it.advance() {
            return Ok(());
        }
    }
}
