//! Symmetric nonnegative dissimilarity matrices with zero diagonal.
//!
//! Only the strict upper triangle is stored, so symmetry is structural:
//! after ingestion there is no pair of entries that could disagree.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A symmetric, nonnegative pairwise dissimilarity table over `n` points.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimMatrix {
    n: usize,
    upper: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl DissimMatrix {
    /// Build from the strict upper triangle in row-major order
    /// (`(0,1), (0,2), ..., (0,n-1), (1,2), ...`).
    pub fn from_upper(n: usize, upper: Vec<f64>) -> Result<Self> {
        assert_eq!(upper.len(), n * (n - 1) / 2, "upper triangle length mismatch");
        for (idx, &v) in upper.iter().enumerate() {
            if v < 0.0 || !v.is_finite() {
                let (i, j) = unflatten(n, idx);
                return Err(Error::NegativeEntry { i, j, value: v });
            }
        }
        Ok(Self { n, upper, labels: None })
    }

    /// Build from a pairwise function on indices.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut upper = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                upper.push(f(i, j));
            }
        }
        Self::from_upper(n, upper)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.n);
        self.labels = Some(labels);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            let (a, b) = if i < j { (i, j) } else { (j, i) };
            self.upper[flatten(self.n, a, b)]
        }
    }

    /// All unordered pairs `(i, j, d(i,j))` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        self.upper
            .iter()
            .enumerate()
            .map(move |(idx, &v)| {
                let (i, j) = unflatten(n, idx);
                (i, j, v)
            })
    }

    pub fn upper_triangle(&self) -> &[f64] {
        &self.upper
    }

    /// Replace the value of one unordered pair; `i != j` required.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert_ne!(i, j, "diagonal is fixed at zero");
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let n = self.n;
        self.upper[flatten(n, a, b)] = value;
    }

    pub fn max_entry(&self) -> f64 {
        self.upper.iter().cloned().fold(0.0, f64::max)
    }

    /// Restrict to a subset of points, preserving their order.
    pub fn restrict(&self, keep: &[usize]) -> DissimMatrix {
        DissimMatrix::from_fn(keep.len(), |i, j| self.get(keep[i], keep[j]))
            .expect("restriction of a valid matrix is valid")
    }

    /// Replicate every point `r` times. Copies of a point sit at mutual
    /// distance 0 and inherit all other distances from their origin.
    /// New index `p*r + c` is copy `c` of original point `p`; the returned
    /// map sends each new index back to its origin.
    pub fn replicate(&self, r: usize) -> (DissimMatrix, Vec<usize>) {
        assert!(r >= 1, "replication factor must be positive");
        let n = self.n;
        let origin: Vec<usize> = (0..n * r).map(|idx| idx / r).collect();
        let d = DissimMatrix::from_fn(n * r, |i, j| self.get(origin[i], origin[j]))
            .expect("replication of a valid matrix is valid");
        (d, origin)
    }

    /// Emit the full `n x n` table as CSV, with a header row when labels exist.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        if let Some(labels) = &self.labels {
            writeln!(w, "{}", labels.join(","))?;
        }
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| format!("{}", self.get(i, j))).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn write_csv_path(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Parse a distance-matrix CSV: `n` rows of `n` comma-separated values,
    /// optionally preceded by a header row of point labels. Validated with
    /// `validate_dissim` at the given tolerance.
    pub fn read_csv<R: Read>(mut r: R, tolerance: f64) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        let mut rows: Vec<Vec<&str>> = text
            .lines()
            .map(|l| l.trim())
            .filter(|l| !l.is_empty())
            .map(|l| l.split(',').map(|t| t.trim()).collect())
            .collect();
        if rows.is_empty() {
            return Err(Error::Csv("empty input".into()));
        }
        let labels = if rows[0].iter().any(|t| t.parse::<f64>().is_err()) {
            let header: Vec<String> = rows.remove(0).iter().map(|s| s.to_string()).collect();
            Some(header)
        } else {
            None
        };
        let raw: Vec<Vec<f64>> = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|_| Error::Csv(format!("non-numeric value {t:?}")))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let mut d = validate_dissim(&raw, tolerance)?;
        if let Some(labels) = labels {
            if labels.len() != d.n {
                return Err(Error::Csv(format!(
                    "header has {} labels but matrix has {} rows",
                    labels.len(),
                    d.n
                )));
            }
            d = d.with_labels(labels);
        }
        Ok(d)
    }

    pub fn read_csv_path(path: &Path, tolerance: f64) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f), tolerance)
    }
}

#[inline]
fn flatten(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

fn unflatten(n: usize, mut idx: usize) -> (usize, usize) {
    for i in 0..n {
        let row = n - i - 1;
        if idx < row {
            return (i, i + 1 + idx);
        }
        idx -= row;
    }
    unreachable!("index out of range");
}

/// Validate a raw square table as a dissimilarity matrix.
///
/// The diagonal is forced to 0 and off-diagonal entries are symmetrized as
/// the midpoint `(raw[i][j] + raw[j][i]) / 2` when the discrepancy is within
/// `tolerance`. Asymmetry beyond tolerance, negative entries, and nonzero
/// diagonals beyond tolerance are rejected, naming the worst offender.
pub fn validate_dissim(raw: &[Vec<f64>], tolerance: f64) -> Result<DissimMatrix> {
    let n = raw.len();
    for (row, r) in raw.iter().enumerate() {
        if r.len() != n {
            return Err(Error::NotSquare { rows: n, row, cols: r.len() });
        }
    }
    for (i, r) in raw.iter().enumerate() {
        if r[i].abs() > tolerance {
            return Err(Error::NonzeroDiagonal { i, value: r[i], tol: tolerance });
        }
    }
    // Find the worst asymmetric pair before rejecting, so the error names it.
    let mut worst: Option<(usize, usize, f64)> = None;
    for i in 0..n {
        for j in i + 1..n {
            let gap = (raw[i][j] - raw[j][i]).abs();
            if gap > tolerance && worst.map_or(true, |(_, _, g)| gap > g) {
                worst = Some((i, j, gap));
            }
        }
    }
    if let Some((i, j, _)) = worst {
        return Err(Error::Asymmetric { i, j, a: raw[i][j], b: raw[j][i], tol: tolerance });
    }
    let mut upper = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let v = (raw[i][j] + raw[j][i]) / 2.0;
            if v < 0.0 {
                return Err(Error::NegativeEntry { i, j, value: v });
            }
            upper.push(v);
        }
    }
    DissimMatrix::from_upper(n, upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_is_valid() {
        let raw = vec![vec![0.0; 3]; 3];
        let d = validate_dissim(&raw, 1e-9).unwrap();
        assert_eq!(d.n(), 3);
        for (_, _, v) in d.pairs() {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn symmetrization_takes_midpoint() {
        let mut raw = vec![vec![0.0; 3]; 3];
        raw[0][1] = 1.0;
        raw[1][0] = 1.0 + 1e-12;
        let d = validate_dissim(&raw, 1e-9).unwrap();
        assert!((d.get(0, 1) - (1.0 + 5e-13)).abs() < 1e-15);
    }

    #[test]
    fn asymmetry_names_worst_pair() {
        let mut raw = vec![vec![0.0; 3]; 3];
        raw[0][1] = 1.0;
        raw[1][0] = 2.0;
        match validate_dissim(&raw, 1e-9) {
            Err(Error::Asymmetric { i: 0, j: 1, .. }) => {}
            other => panic!("expected asymmetry at (0,1), got {other:?}"),
        }
    }

    #[test]
    fn rejects_negative_and_nonzero_diagonal() {
        let mut raw = vec![vec![0.0; 2]; 2];
        raw[0][1] = -1.0;
        raw[1][0] = -1.0;
        assert!(matches!(validate_dissim(&raw, 1e-9), Err(Error::NegativeEntry { .. })));

        let mut raw = vec![vec![0.0; 2]; 2];
        raw[0][0] = 0.5;
        assert!(matches!(validate_dissim(&raw, 1e-9), Err(Error::NonzeroDiagonal { .. })));
    }

    #[test]
    fn replicate_identity_and_structure() {
        let d = DissimMatrix::from_fn(3, |i, j| (i + j) as f64).unwrap();
        let (r1, origin) = d.replicate(1);
        assert_eq!(r1, d);
        assert_eq!(origin, vec![0, 1, 2]);

        // Three-body matrix, r=2: co-replicas at 0, cross groups inherit.
        let (r2, origin) = d.replicate(2);
        assert_eq!(r2.n(), 6);
        assert_eq!(r2.get(2, 3), 0.0); // two copies of point 1
        assert_eq!(r2.get(2, 4), d.get(1, 2)); // copy of 1 vs copy of 2
        assert_eq!(origin[3], 1);
    }

    #[test]
    fn replicate_three_on_two_points() {
        let d = DissimMatrix::from_fn(2, |_, _| 5.0).unwrap();
        let (r, origin) = d.replicate(3);
        assert_eq!(r.n(), 6);
        let mut fives = 0;
        for (i, j, v) in r.pairs() {
            if origin[i] == origin[j] {
                assert_eq!(v, 0.0);
            } else {
                assert_eq!(v, 5.0);
                fives += 1;
            }
        }
        assert_eq!(fives, 9);
    }

    #[test]
    fn restrict_recovers_original_after_replication() {
        let d = DissimMatrix::from_fn(4, |i, j| (1 + i * j) as f64).unwrap();
        let (rep, origin) = d.replicate(3);
        // one copy per origin: take the first copy of each point
        let keep: Vec<usize> = (0..4).map(|p| origin.iter().position(|&o| o == p).unwrap()).collect();
        assert_eq!(rep.restrict(&keep), d);
    }

    #[test]
    fn csv_round_trip_with_labels() {
        let d = DissimMatrix::from_fn(3, |i, j| (i + j) as f64)
            .unwrap()
            .with_labels(vec!["a".into(), "b".into(), "c".into()]);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = DissimMatrix::read_csv(&buf[..], 1e-9).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.labels().unwrap()[2], "c");
    }

    #[test]
    fn csv_without_header() {
        let text = "0,1,2\n1,0,3\n2,3,0\n";
        let d = DissimMatrix::read_csv(text.as_bytes(), 1e-9).unwrap();
        assert_eq!(d.get(1, 2), 3.0);
        assert!(d.labels().is_none());
    }
}
