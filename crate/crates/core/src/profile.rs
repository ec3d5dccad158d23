use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{sum_tolerance, CLAMP_TOL, POPULARITY_RTOL};

/// One player's nonnegative preference weights together with their total.
///
/// The total is 1 for ordinary probability vectors; the zero-loss recursion
/// works on sub-instances whose total is smaller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceProfile {
    weights: Vec<f64>,
    total: f64,
}

impl PreferenceProfile {
    pub fn new(mut weights: Vec<f64>, total: f64) -> Result<Self> {
        if !total.is_finite() || total < 0.0 {
            return Err(Error::TotalMismatch { sum: f64::NAN, total });
        }
        for (index, w) in weights.iter_mut().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if *w < -CLAMP_TOL {
                return Err(Error::NegativeWeight { index, value: *w });
            }
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - total).abs() > sum_tolerance(total) {
            return Err(Error::TotalMismatch { sum, total });
        }
        Ok(Self { weights, total })
    }

    /// Probability vector (total 1).
    pub fn probabilities(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights, 1.0)
    }

    pub(crate) fn from_clamped(weights: Vec<f64>, total: f64) -> Self {
        let weights = weights.into_iter().map(|w| w.max(0.0)).collect();
        Self { weights, total }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// A validated pair of preference profiles with their popularity vector
/// `S_i = A_i + B_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemInstance {
    a: PreferenceProfile,
    b: PreferenceProfile,
    popularity: Vec<f64>,
}

/// Validates raw preference vectors against a common total and builds the
/// instance. Negative weights within rounding noise are clamped to zero.
pub fn validate_instance(a: &[f64], b: &[f64], total: f64) -> Result<ProblemInstance> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch { a: a.len(), b: b.len() });
    }
    if a.len() < 2 {
        return Err(Error::TooFewArms { min: 2, got: a.len() });
    }
    let a = PreferenceProfile::new(a.to_vec(), total)?;
    let b = PreferenceProfile::new(b.to_vec(), total)?;
    Ok(ProblemInstance::from_profiles_unchecked(a, b))
}

impl ProblemInstance {
    /// Probability preferences (total 1).
    pub fn new(a: &[f64], b: &[f64]) -> Result<Self> {
        validate_instance(a, b, 1.0)
    }

    pub fn from_profiles(a: PreferenceProfile, b: PreferenceProfile) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch { a: a.len(), b: b.len() });
        }
        if a.len() < 2 {
            return Err(Error::TooFewArms { min: 2, got: a.len() });
        }
        let tol = sum_tolerance(a.total().max(b.total()));
        if (a.total() - b.total()).abs() > tol {
            return Err(Error::TotalMismatch { sum: b.total(), total: a.total() });
        }
        Ok(Self::from_profiles_unchecked(a, b))
    }

    fn from_profiles_unchecked(a: PreferenceProfile, b: PreferenceProfile) -> Self {
        let popularity = a.weights.iter().zip(&b.weights).map(|(x, y)| x + y).collect();
        Self { a, b, popularity }
    }

    /// Builds a sub-instance inside the zero-loss recursion, where the
    /// weights are known to be nonnegative up to rounding.
    pub(crate) fn from_parts_clamped(a: Vec<f64>, b: Vec<f64>, total: f64) -> Self {
        Self::from_profiles_unchecked(
            PreferenceProfile::from_clamped(a, total),
            PreferenceProfile::from_clamped(b, total),
        )
    }

    pub fn n(&self) -> usize {
        self.popularity.len()
    }

    pub fn total(&self) -> f64 {
        self.a.total
    }

    pub fn a(&self) -> &[f64] {
        &self.a.weights
    }

    pub fn b(&self) -> &[f64] {
        &self.b.weights
    }

    pub fn profile_a(&self) -> &PreferenceProfile {
        &self.a
    }

    pub fn profile_b(&self) -> &PreferenceProfile {
        &self.b
    }

    pub fn popularity(&self) -> &[f64] {
        &self.popularity
    }

    /// Instance with the two players' roles exchanged.
    pub fn swapped(&self) -> Self {
        Self::from_profiles_unchecked(self.b.clone(), self.a.clone())
    }

    /// Index of the most popular arm, lowest index on ties.
    pub fn argmax_popularity(&self) -> usize {
        argmax(&self.popularity)
    }

    /// Index of the least popular arm, lowest index on ties.
    pub fn argmin_popularity(&self) -> usize {
        let mut best = 0;
        for (i, &s) in self.popularity.iter().enumerate() {
            if s < self.popularity[best] {
                best = i;
            }
        }
        best
    }

    pub fn max_popularity(&self) -> f64 {
        self.popularity[self.argmax_popularity()]
    }

    /// True when every popularity is at most the total (within slack), i.e.
    /// a zero-loss matrix exists.
    pub fn is_zero_loss_feasible(&self) -> bool {
        self.max_popularity() <= self.total() * (1.0 + POPULARITY_RTOL)
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in v.iter().enumerate() {
        if s > v[best] {
            best = i;
        }
    }
    best
}
