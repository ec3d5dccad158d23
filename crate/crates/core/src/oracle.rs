//! Independent minimum-loss solver: projected gradient descent on
//! `min L(p)` over the probability simplex of off-diagonal cells.
//!
//! The decision vector holds only the `N(N - 1)` off-diagonal entries, so
//! the zero diagonal holds exactly. The loss is a convex quadratic whose
//! Hessian has spectral norm `4(N - 1)`, so the fixed step `1 / (4(N - 1))`
//! gives monotone descent and convergence without line search.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{gradient_from_marginals, squared_gap, JointSelectionMatrix};
use crate::profile::ProblemInstance;
use crate::sum_tolerance;

pub const ORACLE_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Stop when `||p - Proj(p - step * grad)||_inf` falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub matrix: JointSelectionMatrix,
    pub loss: f64,
    pub iterations: usize,
    pub gradient_mapping_norm: f64,
    /// False when `max_iter` ran out first; the best iterate is returned.
    pub converged: bool,
}

/// Euclidean projection onto `{x >= 0, sum x = radius}` by sorting and
/// thresholding.
pub fn project_simplex(v: &[f64], radius: f64) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_unstable_by(|x, y| y.total_cmp(x));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumsum += uk;
        let t = (cumsum - radius) / (k + 1) as f64;
        if uk - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

pub fn solve_min_loss(inst: &ProblemInstance, opts: OracleOptions) -> Result<OracleResult> {
    run(inst, opts, None)
}

/// Same as [`solve_min_loss`], also returning the loss after every step.
pub fn solve_min_loss_with_trace(inst: &ProblemInstance, opts: OracleOptions) -> Result<(OracleResult, Vec<f64>)> {
    let mut trace = Vec::new();
    let r = run(inst, opts, Some(&mut trace))?;
    Ok((r, trace))
}

fn run(inst: &ProblemInstance, opts: OracleOptions, mut trace: Option<&mut Vec<f64>>) -> Result<OracleResult> {
    if (inst.total() - 1.0).abs() > sum_tolerance(1.0) {
        return Err(Error::TotalMismatch { sum: inst.total(), total: 1.0 });
    }
    let n = inst.n();
    if n > ORACLE_MAX_N {
        return Err(Error::DimensionTooLarge { n, max: ORACLE_MAX_N });
    }
    let coords: Vec<(usize, usize)> = crate::minloss::off_diagonal_coords(n);
    let d = coords.len();
    let step = 1.0 / (4.0 * (n - 1) as f64);
    let (a, b) = (inst.a(), inst.b());

    let marginals = |x: &[f64]| {
        let mut pi_a = vec![0.0; n];
        let mut pi_b = vec![0.0; n];
        for (&(i, j), &p) in coords.iter().zip(x) {
            pi_a[i] += p;
            pi_b[j] += p;
        }
        (pi_a, pi_b)
    };

    let mut x = vec![1.0 / d as f64; d];
    let mut gm = f64::INFINITY;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        let (pi_a, pi_b) = marginals(&x);
        let g = gradient_from_marginals(&pi_a, &pi_b, a, b);
        let y: Vec<f64> = coords.iter().zip(&x).map(|(&(i, j), &p)| p - step * g[i * n + j]).collect();
        let z = project_simplex(&y, 1.0);
        gm = x.iter().zip(&z).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        x = z;
        iterations += 1;
        if let Some(t) = trace.as_deref_mut() {
            let (pa, pb) = marginals(&x);
            t.push(squared_gap(&pa, a) + squared_gap(&pb, b));
        }
        if gm <= opts.tol {
            break;
        }
    }

    let (pi_a, pi_b) = marginals(&x);
    let loss = squared_gap(&pi_a, a) + squared_gap(&pi_b, b);
    let mut entries = vec![0.0; n * n];
    for (&(i, j), &p) in coords.iter().zip(&x) {
        entries[i * n + j] = p;
    }
    let matrix = JointSelectionMatrix::new(n, entries, 1.0)?;
    Ok(OracleResult { matrix, loss, iterations, gradient_mapping_norm: gm, converged: gm <= opts.tol })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validate_instance;
    use proptest::prelude::*;

    #[test]
    fn projection_basics() {
        assert_eq!(project_simplex(&[0.2, 0.3, 0.5], 1.0), vec![0.2, 0.3, 0.5]);
        let p = project_simplex(&[2.0, 0.0, 0.0], 1.0);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
        let p = project_simplex(&[0.0, 0.0], 1.0);
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn small_example_reaches_zero() {
        let i = validate_instance(&[0.3, 0.25, 0.45], &[0.5, 0.2, 0.3], 1.0).unwrap();
        let r = solve_min_loss(&i, OracleOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.loss <= 1e-10, "{}", r.loss);
    }

    #[test]
    fn ratio3_three_arms() {
        let w = [1.0 / 13.0, 3.0 / 13.0, 9.0 / 13.0];
        let i = validate_instance(&w, &w, 1.0).unwrap();
        let r = solve_min_loss(&i, OracleOptions::default()).unwrap();
        assert!((r.loss - 75.0 / 676.0).abs() <= 1e-8, "{}", r.loss);
    }

    #[test]
    fn same_arm_four() {
        let w = [0.0, 0.0, 0.0, 1.0];
        let i = validate_instance(&w, &w, 1.0).unwrap();
        let r = solve_min_loss(&i, OracleOptions::default()).unwrap();
        assert!((r.loss - 4.0 / 6.0).abs() <= 1e-8, "{}", r.loss);
        assert_eq!(r.matrix.entries().iter().step_by(5).sum::<f64>(), 0.0);
    }

    #[test]
    fn iteration_cap_is_flagged() {
        let i = validate_instance(&[0.1, 0.2, 0.3, 0.4], &[0.05, 0.05, 0.1, 0.8], 1.0).unwrap();
        let r = solve_min_loss(&i, OracleOptions { tol: 0.0, max_iter: 3 }).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }

    #[test]
    fn descent_is_monotone() {
        let i = validate_instance(&[0.1, 0.2, 0.3, 0.4], &[0.05, 0.05, 0.1, 0.8], 1.0).unwrap();
        let (r, trace) = solve_min_loss_with_trace(&i, OracleOptions::default()).unwrap();
        assert_eq!(trace.len(), r.iterations);
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "{} -> {}", w[0], w[1]);
        }
    }

    proptest! {
        #[test]
        fn projection_idempotent_on_simplex(v in proptest::collection::vec(-2.0f64..2.0, 1..40)) {
            let p = project_simplex(&v, 1.0);
            prop_assert!(p.iter().all(|&x| x >= 0.0));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let q = project_simplex(&p, 1.0);
            for (x, y) in p.iter().zip(&q) {
                prop_assert!((x - y).abs() < 1e-14);
            }
        }
    }
}
