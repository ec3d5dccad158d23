use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::ProblemInstance;
use crate::{sum_tolerance, CLAMP_TOL};

/// `N x N` nonnegative matrix with an exactly zero diagonal. Entry `(i, j)`
/// is the probability (or, for sub-instances, the mass) of player A taking
/// arm `i` while player B takes arm `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix")]
pub struct JointSelectionMatrix {
    n: usize,
    total: f64,
    entries: Vec<f64>,
}

/// Wire form `{"n": N, "total": t, "entries": [row-major N*N]}`, validated
/// on the way in.
#[derive(Deserialize)]
struct RawMatrix {
    n: usize,
    total: f64,
    entries: Vec<f64>,
}

impl TryFrom<RawMatrix> for JointSelectionMatrix {
    type Error = Error;
    fn try_from(raw: RawMatrix) -> Result<Self> {
        Self::new(raw.n, raw.entries, raw.total)
    }
}

impl JointSelectionMatrix {
    /// Validates a row-major entry vector against the declared total.
    ///
    /// Diagonal entries must be zero up to [`CLAMP_TOL`]; off-diagonal
    /// entries in `[-CLAMP_TOL, 0)` are clamped to zero.
    pub fn new(n: usize, mut entries: Vec<f64>, total: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewArms { min: 2, got: n });
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: entries.len() });
        }
        for (idx, e) in entries.iter_mut().enumerate() {
            if !e.is_finite() {
                return Err(Error::NonFinite { index: idx });
            }
            let (i, j) = (idx / n, idx % n);
            if i == j {
                if e.abs() > CLAMP_TOL {
                    return Err(Error::NonZeroDiagonal { index: i, value: *e });
                }
                *e = 0.0;
            } else if *e < -CLAMP_TOL {
                return Err(Error::NegativeWeight { index: idx, value: *e });
            } else if *e < 0.0 {
                *e = 0.0;
            }
        }
        let sum: f64 = entries.iter().sum();
        if (sum - total).abs() > sum_tolerance(total) {
            return Err(Error::TotalMismatch { sum, total });
        }
        Ok(Self { n, total, entries })
    }

    /// Like [`JointSelectionMatrix::new`] with the total taken from the entries.
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        let total = entries.iter().sum();
        Self::new(n, entries, total)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            entries.extend_from_slice(row);
        }
        Self::from_entries(n, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.entries.chunks(self.n).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for row in self.entries.chunks(self.n) {
            for (c, v) in out.iter_mut().zip(row) {
                *c += v;
            }
        }
        out
    }

    /// `(i, j, p_ij)` over the off-diagonal cells in row-major order.
    pub fn off_diagonal(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n;
        self.entries
            .iter()
            .enumerate()
            .filter(move |(idx, _)| idx / n != idx % n)
            .map(move |(idx, &p)| (idx / n, idx % n, p))
    }

    /// Same matrix with players exchanged.
    pub fn transposed(&self) -> Self {
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j];
            }
        }
        Self { n, total: self.total, entries }
    }

    /// Checks the structural invariants: zero diagonal, nonnegative
    /// entries and entry sum equal to the declared total.
    pub fn check_invariants(&self) -> Result<()> {
        for i in 0..self.n {
            let d = self.get(i, i);
            if d != 0.0 {
                return Err(Error::NonZeroDiagonal { index: i, value: d });
            }
        }
        if let Some((index, &value)) = self.entries.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::NegativeWeight { index, value });
        }
        let sum: f64 = self.entries.iter().sum();
        if (sum - self.total).abs() > sum_tolerance(self.total) {
            return Err(Error::TotalMismatch { sum, total: self.total });
        }
        Ok(())
    }
}

/// Row and column sums of a joint selection matrix: the selection
/// probabilities each player ends up experiencing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SatisfiedPreferences {
    pub pi_a: Vec<f64>,
    pub pi_b: Vec<f64>,
}

pub fn satisfied_preferences(m: &JointSelectionMatrix) -> SatisfiedPreferences {
    SatisfiedPreferences { pi_a: m.row_sums(), pi_b: m.col_sums() }
}

fn check_dims(m: &JointSelectionMatrix, inst: &ProblemInstance) -> Result<()> {
    if m.n() != inst.n() {
        return Err(Error::DimensionMismatch { expected: inst.n(), got: m.n() });
    }
    Ok(())
}

/// Sum of squared gaps between the satisfied preferences and the stated
/// preferences of both players.
pub fn loss(m: &JointSelectionMatrix, inst: &ProblemInstance) -> Result<f64> {
    check_dims(m, inst)?;
    let sp = satisfied_preferences(m);
    Ok(squared_gap(&sp.pi_a, inst.a()) + squared_gap(&sp.pi_b, inst.b()))
}

pub(crate) fn squared_gap(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Gradient of [`loss`] with respect to each off-diagonal entry, row-major
/// `N x N`. Entry `(i, j)` is `2(pi_A(i) - A_i) + 2(pi_B(j) - B_j)`; the
/// diagonal is reported as zero.
pub fn loss_gradient(m: &JointSelectionMatrix, inst: &ProblemInstance) -> Result<Vec<f64>> {
    check_dims(m, inst)?;
    let sp = satisfied_preferences(m);
    Ok(gradient_from_marginals(&sp.pi_a, &sp.pi_b, inst.a(), inst.b()))
}

pub(crate) fn gradient_from_marginals(pi_a: &[f64], pi_b: &[f64], a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        let ga = 2.0 * (pi_a[i] - a[i]);
        for j in 0..n {
            if i != j {
                g[i * n + j] = ga + 2.0 * (pi_b[j] - b[j]);
            }
        }
    }
    g
}
