//! `M`-player generalization: loss over conflict-free joint distributions
//! on tuples of pairwise-distinct arms, and the zero-loss feasibility
//! verdict.
//!
//! Zero loss is impossible whenever some arm's popularity (summed over all
//! players) exceeds 1. For two players the converse is constructive. For
//! three or more players the converse is only conjectured, so the verdict
//! reports it as such and never as proven.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::JointSelectionMatrix;
use crate::oracle::{project_simplex, OracleOptions};
use crate::profile::PreferenceProfile;
use crate::{sum_tolerance, POPULARITY_RTOL};

/// Desk-scale limits for loss evaluation and the tuple-simplex oracle.
pub const MULTI_MAX_N: usize = 8;
pub const MULTI_MAX_M: usize = 4;

/// Preferences of `M` players over `N` arms, each row summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiPreferences {
    weights: Vec<Vec<f64>>,
    popularity: Vec<f64>,
}

impl MultiPreferences {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::TooFewPlayers(rows.len()));
        }
        let n = rows[0].len();
        let mut weights = Vec::with_capacity(rows.len());
        for row in rows {
            if row.len() != n {
                return Err(Error::LengthMismatch { a: n, b: row.len() });
            }
            weights.push(PreferenceProfile::probabilities(row)?.weights().to_vec());
        }
        let popularity = (0..n).map(|i| weights.iter().map(|w| w[i]).sum()).collect();
        Ok(Self { weights, popularity })
    }

    pub fn players(&self) -> usize {
        self.weights.len()
    }

    pub fn arms(&self) -> usize {
        self.popularity.len()
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn popularity(&self) -> &[f64] {
        &self.popularity
    }

    pub fn max_popularity(&self) -> f64 {
        self.popularity.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Distribution over `M`-tuples of pairwise-distinct arms; entry
/// `(d_1, ..., d_M)` is the probability that player `x` takes arm `d_x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointTensorSparse {
    players: usize,
    arms: usize,
    entries: BTreeMap<Vec<usize>, f64>,
}

fn is_distinct(t: &[usize]) -> bool {
    t.iter().enumerate().all(|(x, d)| !t[..x].contains(d))
}

impl JointTensorSparse {
    pub fn new(players: usize, arms: usize, entries: BTreeMap<Vec<usize>, f64>) -> Result<Self> {
        let mut clean = BTreeMap::new();
        for (key, value) in entries {
            if key.len() != players {
                return Err(Error::DimensionMismatch { expected: players, got: key.len() });
            }
            if let Some(&d) = key.iter().find(|&&d| d >= arms) {
                return Err(Error::DimensionMismatch { expected: arms, got: d + 1 });
            }
            if !is_distinct(&key) {
                return Err(Error::NonDistinctKey(key));
            }
            if !value.is_finite() || value < -crate::CLAMP_TOL {
                return Err(Error::NegativeWeight { index: 0, value });
            }
            clean.insert(key, value.max(0.0));
        }
        let sum: f64 = clean.values().sum();
        if (sum - 1.0).abs() > sum_tolerance(1.0) {
            return Err(Error::TotalMismatch { sum, total: 1.0 });
        }
        Ok(Self { players, arms, entries: clean })
    }

    /// Two-player tensor with the same cells as `m`.
    pub fn from_matrix(m: &JointSelectionMatrix) -> Result<Self> {
        let entries = m.off_diagonal().filter(|&(_, _, p)| p > 0.0).map(|(i, j, p)| (vec![i, j], p)).collect();
        Self::new(2, m.n(), entries)
    }

    /// Equal mass on every distinct tuple.
    pub fn uniform(players: usize, arms: usize) -> Result<Self> {
        let tuples = distinct_tuples(players, arms);
        if tuples.is_empty() {
            return Err(Error::TooFewArms { min: players, got: arms });
        }
        let p = 1.0 / tuples.len() as f64;
        Self::new(players, arms, tuples.into_iter().map(|t| (t, p)).collect())
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn entries(&self) -> &BTreeMap<Vec<usize>, f64> {
        &self.entries
    }

    /// `pi_x(i)`: probability that player `x` ends up on arm `i`.
    pub fn satisfied(&self) -> Vec<Vec<f64>> {
        let mut pi = vec![vec![0.0; self.arms]; self.players];
        for (key, &p) in &self.entries {
            for (x, &d) in key.iter().enumerate() {
                pi[x][d] += p;
            }
        }
        pi
    }
}

/// All `M`-tuples of distinct arms in lexicographic order;
/// `N! / (N - M)!` of them.
pub fn distinct_tuples(players: usize, arms: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, players: usize, arms: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == players {
            out.push(prefix.clone());
            return;
        }
        for d in 0..arms {
            if !prefix.contains(&d) {
                prefix.push(d);
                go(prefix, players, arms, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    if players <= arms {
        go(&mut Vec::with_capacity(players), players, arms, &mut out);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Some popularity exceeds 1: zero loss is impossible.
    Infeasible,
    /// Two players, all popularities at most 1: zero loss is constructible.
    Feasible,
    /// Three or more players, all popularities at most 1: zero loss is
    /// conjectured but unproven.
    ConjecturedFeasible,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Infeasible => "infeasible",
            Verdict::Feasible => "feasible",
            Verdict::ConjecturedFeasible => "conjectured_feasible",
        }
    }
}

pub fn feasibility_verdict(prefs: &MultiPreferences) -> Result<Verdict> {
    let (m, n) = (prefs.players(), prefs.arms());
    if n < m {
        return Err(Error::TooFewArms { min: m, got: n });
    }
    Ok(if prefs.max_popularity() > 1.0 + POPULARITY_RTOL {
        Verdict::Infeasible
    } else if m == 2 {
        Verdict::Feasible
    } else {
        Verdict::ConjecturedFeasible
    })
}

fn check_scale(players: usize, arms: usize) -> Result<()> {
    if arms > MULTI_MAX_N {
        return Err(Error::DimensionTooLarge { n: arms, max: MULTI_MAX_N });
    }
    if players > MULTI_MAX_M {
        return Err(Error::DimensionTooLarge { n: players, max: MULTI_MAX_M });
    }
    Ok(())
}

/// `sum_x sum_i (pi_x(i) - X_i)^2`.
pub fn multi_loss(prefs: &MultiPreferences, tensor: &JointTensorSparse) -> Result<f64> {
    if tensor.players() != prefs.players() {
        return Err(Error::DimensionMismatch { expected: prefs.players(), got: tensor.players() });
    }
    if tensor.arms() != prefs.arms() {
        return Err(Error::DimensionMismatch { expected: prefs.arms(), got: tensor.arms() });
    }
    check_scale(prefs.players(), prefs.arms())?;
    if let Some(key) = tensor.entries().keys().find(|k| !is_distinct(k)) {
        return Err(Error::NonDistinctKey(key.clone()));
    }
    Ok(loss_from_satisfied(&tensor.satisfied(), prefs.weights()))
}

fn loss_from_satisfied(pi: &[Vec<f64>], weights: &[Vec<f64>]) -> f64 {
    pi.iter().zip(weights).map(|(p, w)| crate::matrix::squared_gap(p, w)).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiOracleResult {
    pub tensor: JointTensorSparse,
    pub loss: f64,
    pub iterations: usize,
    pub gradient_mapping_norm: f64,
    pub converged: bool,
}

/// Projected gradient descent on the simplex over all distinct tuples.
///
/// The loss Hessian is `2 J^T J` with `J` the (player, arm) x tuple
/// incidence matrix; every tuple touches `M` rows and every row holds
/// `(N - 1)! / (N - M)!` tuples, which bounds the spectral norm and fixes
/// the step.
pub fn solve_multi_min_loss(prefs: &MultiPreferences, opts: OracleOptions) -> Result<MultiOracleResult> {
    let (m, n) = (prefs.players(), prefs.arms());
    if n < m {
        return Err(Error::TooFewArms { min: m, got: n });
    }
    check_scale(m, n)?;
    let tuples = distinct_tuples(m, n);
    let per_row = tuples.len() / n;
    let step = 1.0 / (2.0 * (m * per_row) as f64);
    let weights = prefs.weights();

    let satisfied = |x: &[f64]| {
        let mut pi = vec![vec![0.0; n]; m];
        for (t, &p) in tuples.iter().zip(x) {
            for (player, &d) in t.iter().enumerate() {
                pi[player][d] += p;
            }
        }
        pi
    };

    let mut x = vec![1.0 / tuples.len() as f64; tuples.len()];
    let mut gm = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let pi = satisfied(&x);
        let y: Vec<f64> = tuples
            .iter()
            .zip(&x)
            .map(|(t, &p)| {
                let g: f64 = t.iter().enumerate().map(|(player, &d)| 2.0 * (pi[player][d] - weights[player][d])).sum();
                p - step * g
            })
            .collect();
        let z = project_simplex(&y, 1.0);
        gm = x.iter().zip(&z).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        x = z;
        iterations += 1;
        if gm <= opts.tol {
            break;
        }
    }
    let loss = loss_from_satisfied(&satisfied(&x), weights);
    let entries = tuples.into_iter().zip(x).collect();
    let tensor = JointTensorSparse::new(m, n, entries)?;
    Ok(MultiOracleResult { tensor, loss, iterations, gradient_mapping_norm: gm, converged: gm <= opts.tol })
}
