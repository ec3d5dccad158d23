//! Reference mechanisms the optimal matrix is compared against.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::JointSelectionMatrix;
use crate::profile::ProblemInstance;
use crate::sum_tolerance;

/// Denominators at or below this are treated as zero remaining mass.
const DEGENERATE_MASS: f64 = 1e-12;

/// Every off-diagonal cell gets `1 / (N(N - 1))`.
pub fn uniform_random(n: usize) -> Result<JointSelectionMatrix> {
    if n < 2 {
        return Err(Error::TooFewArms { min: 2, got: n });
    }
    let p = 1.0 / (n * (n - 1)) as f64;
    let entries = (0..n * n).map(|idx| if idx / n == idx % n { 0.0 } else { p }).collect();
    JointSelectionMatrix::new(n, entries, 1.0)
}

/// Independent product `A_i B_j` with the diagonal removed and the rest
/// rescaled to sum to 1.
///
/// Fails with [`Error::DegenerateProduct`] when every off-diagonal product
/// vanishes (both players certain of the same arm).
pub fn simultaneous_renormalization(inst: &ProblemInstance) -> Result<JointSelectionMatrix> {
    let n = inst.n();
    let (a, b) = (inst.a(), inst.b());
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            entries[i * n + j] = a[i] * b[j];
        }
    }
    let z: f64 = entries.iter().sum();
    if z <= DEGENERATE_MASS {
        return Err(Error::DegenerateProduct);
    }
    entries.iter_mut().for_each(|e| *e /= z);
    JointSelectionMatrix::new(n, entries, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomOrder {
    pub matrix: JointSelectionMatrix,
    /// Set when the second mover had no preference mass left on any free
    /// arm for some first draw, and picked uniformly instead.
    pub degenerate: bool,
}

/// A fair coin picks who draws first; the second player then draws from
/// their own preferences restricted to the arms still free. The matrix is
/// the average over the two orders:
///
/// `p_ij = (A_i * B_j / (1 - B_i) + B_j * A_i / (1 - A_j)) / 2`.
///
/// If the second player's remaining mass is zero, they pick uniformly among
/// the other `N - 1` arms.
pub fn random_order(inst: &ProblemInstance) -> Result<RandomOrder> {
    if (inst.total() - 1.0).abs() > sum_tolerance(1.0) {
        return Err(Error::TotalMismatch { sum: inst.total(), total: 1.0 });
    }
    let n = inst.n();
    let (a, b) = (inst.a(), inst.b());
    let uniform = 1.0 / (n - 1) as f64;
    let mut degenerate = false;
    // Probability the second mover takes `pick` given the first took `taken`.
    let mut follow = |pref: &[f64], taken: usize, pick: usize, first_mass: f64| {
        let rest = 1.0 - pref[taken];
        if rest <= DEGENERATE_MASS {
            if first_mass > 0.0 {
                degenerate = true;
            }
            uniform
        } else {
            pref[pick] / rest
        }
    };
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let a_first = a[i] * follow(b, i, j, a[i]);
            let b_first = b[j] * follow(a, j, i, b[j]);
            entries[i * n + j] = 0.5 * (a_first + b_first);
        }
    }
    let matrix = JointSelectionMatrix::new(n, entries, 1.0)?;
    Ok(RandomOrder { matrix, degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate_instance;

    fn small_prefs() -> ProblemInstance {
        validate_instance(&[0.3, 0.25, 0.45], &[0.5, 0.2, 0.3], 1.0).unwrap()
    }

    fn assert_4dp(got: &JointSelectionMatrix, want: &[f64]) {
        for (g, w) in got.entries().iter().zip(want) {
            assert!((g - w).abs() <= 5e-5, "{:?}", got.entries());
        }
    }

    #[test]
    fn uniform_sizes() {
        let m = uniform_random(3).unwrap();
        assert!(m.off_diagonal().all(|(_, _, p)| (p - 1.0 / 6.0).abs() < 1e-16));
        assert_eq!(uniform_random(2).unwrap().entries(), &[0.0, 0.5, 0.5, 0.0]);
        let m = uniform_random(50).unwrap();
        assert!(m.off_diagonal().all(|(_, _, p)| p == 1.0 / 2450.0));
        assert!(uniform_random(1).is_err());
    }

    #[test]
    fn renorm_small_example() {
        let m = simultaneous_renormalization(&small_prefs()).unwrap();
        assert_4dp(&m, &[0.0, 0.0902, 0.1353, 0.1880, 0.0, 0.1128, 0.3383, 0.1353, 0.0]);
        assert!((m.get(0, 1) - 0.06 / 0.665).abs() < 1e-15);
    }

    #[test]
    fn renorm_degenerate_and_single_product() {
        let i = validate_instance(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(simultaneous_renormalization(&i), Err(Error::DegenerateProduct));
        let i = validate_instance(&[1.0, 0.0], &[0.0, 1.0], 1.0).unwrap();
        assert_eq!(simultaneous_renormalization(&i).unwrap().entries(), &[0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn random_order_small_example() {
        let r = random_order(&small_prefs()).unwrap();
        assert!(!r.degenerate);
        assert!((r.matrix.get(0, 1) - 0.1).abs() < 1e-15);
        assert_4dp(&r.matrix, &[0.0, 0.1, 0.1718, 0.1674, 0.0, 0.1151, 0.3214, 0.1243, 0.0]);
    }

    #[test]
    fn random_order_degenerate() {
        let i = validate_instance(&[1.0, 0.0], &[1.0, 0.0], 1.0).unwrap();
        let r = random_order(&i).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.matrix.entries(), &[0.0, 0.5, 0.5, 0.0]);
    }
}
