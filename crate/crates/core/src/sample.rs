//! Empirical draws from a joint selection matrix.
//!
//! Draws use inverse-CDF lookup over the off-diagonal cells in row-major
//! order with a `ChaCha8Rng` seeded from the caller's seed, so results are
//! reproducible across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::JointSelectionMatrix;

/// Count of draws per `(arm of A, arm of B)` cell, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JointCounts {
    pub n: usize,
    pub draws: u64,
    pub counts: Vec<u64>,
}

impl JointCounts {
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.n + j]
    }

    pub fn diagonal_hits(&self) -> u64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Empirical selection frequency of each arm for player A.
    pub fn row_frequencies(&self) -> Vec<f64> {
        let d = self.draws.max(1) as f64;
        self.counts.chunks(self.n).map(|r| r.iter().sum::<u64>() as f64 / d).collect()
    }

    /// Empirical selection frequency of each arm for player B.
    pub fn col_frequencies(&self) -> Vec<f64> {
        let d = self.draws.max(1) as f64;
        (0..self.n).map(|j| (0..self.n).map(|i| self.get(i, j)).sum::<u64>() as f64 / d).collect()
    }
}

pub fn sample_joint(m: &JointSelectionMatrix, seed: u64, draws: u64) -> Result<JointCounts> {
    if (m.total() - 1.0).abs() > crate::SUM_RTOL {
        return Err(Error::TotalNotOne { total: m.total() });
    }
    let n = m.n();
    let mut cells = Vec::with_capacity(n * (n - 1));
    let mut cdf = Vec::with_capacity(n * (n - 1));
    let mut acc = 0.0;
    for (i, j, p) in m.off_diagonal() {
        acc += p;
        cells.push(i * n + j);
        cdf.push(acc);
    }
    // Rounding can leave u just above the last cumulative value.
    let last_positive = m
        .off_diagonal()
        .enumerate()
        .filter(|(_, (_, _, p))| *p > 0.0)
        .map(|(k, _)| k)
        .last()
        .ok_or(Error::TotalNotOne { total: 0.0 })?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; n * n];
    for _ in 0..draws {
        let u = rng.random::<f64>() * acc;
        let k = cdf.partition_point(|&c| c <= u).min(last_positive);
        counts[cells[k]] += 1;
    }
    Ok(JointCounts { n, draws, counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass() {
        let m = JointSelectionMatrix::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let c = sample_joint(&m, 3, 1000).unwrap();
        assert_eq!(c.get(0, 1), 1000);
        assert_eq!(c.diagonal_hits(), 0);
    }

    #[test]
    fn point_mass_last_cell() {
        let mut e = vec![0.0; 9];
        e[7] = 1.0;
        let m = JointSelectionMatrix::from_entries(3, e).unwrap();
        let c = sample_joint(&m, 11, 500).unwrap();
        assert_eq!(c.get(2, 1), 500);
    }

    #[test]
    fn uniform_counts_within_five_sigma() {
        let s = 1.0 / 6.0;
        let m = JointSelectionMatrix::from_rows(&[vec![0.0, s, s], vec![s, 0.0, s], vec![s, s, 0.0]]).unwrap();
        let n = 60_000u64;
        let c = sample_joint(&m, 42, n).unwrap();
        let sigma = (n as f64 * s * (1.0 - s)).sqrt();
        for (i, j, _) in m.off_diagonal() {
            let dev = (c.get(i, j) as f64 - 10_000.0).abs();
            assert!(dev <= 5.0 * sigma, "cell ({i},{j}) count {}", c.get(i, j));
        }
        assert_eq!(c.diagonal_hits(), 0);
    }

    #[test]
    fn deterministic_given_seed() {
        let s = 1.0 / 6.0;
        let m = JointSelectionMatrix::from_rows(&[vec![0.0, s, s], vec![s, 0.0, s], vec![s, s, 0.0]]).unwrap();
        assert_eq!(sample_joint(&m, 9, 1000).unwrap(), sample_joint(&m, 9, 1000).unwrap());
        assert_ne!(sample_joint(&m, 9, 1000).unwrap(), sample_joint(&m, 10, 1000).unwrap());
    }

    #[test]
    fn rejects_non_unit_total() {
        let m = JointSelectionMatrix::from_rows(&[vec![0.0, 0.3], vec![0.4, 0.0]]).unwrap();
        assert!(matches!(sample_joint(&m, 1, 10), Err(Error::TotalNotOne { .. })));
    }
}
