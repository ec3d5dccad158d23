//! Minimum-loss matrices when zero loss is out of reach, plus the dispatch
//! that picks between the exact and the closed-form constructions.
//!
//! If some arm `h` has popularity `S_h > 1`, the players cannot both be
//! satisfied. The optimum routes every other arm's mass through `h`:
//! column `h` holds `A_i + eps`, row `h` holds `B_j + eps`, everything else
//! is zero, with `eps = (S_h - 1) / (2(N - 1))`. The loss is then
//! `N / (2(N - 1)) * (S_h - 1)^2`, and explicit multipliers certify
//! optimality since the loss is a convex quadratic.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{loss, loss_gradient, JointSelectionMatrix};
use crate::profile::ProblemInstance;
use crate::zeroloss::construct_zero_loss;
use crate::{sum_tolerance, POPULARITY_RTOL};

/// Residual threshold for a certificate to count as valid.
pub const KKT_TOL: f64 = 1e-9;

/// Which construction produced an [`OptimalOutcome`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// All popularities at most 1: exact marginals.
    ZeroLoss,
    /// One arm over 1: closed-form minimum.
    #[serde(rename = "theorem2")]
    ClosedForm,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::ZeroLoss => "zero-loss",
            Branch::ClosedForm => "theorem2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub slackness: f64,
    pub dual: f64,
    pub primal: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.slackness).max(self.dual).max(self.primal)
    }
}

/// Multipliers witnessing optimality of the closed-form matrix, with the
/// max-norm residual of each KKT condition evaluated on a given matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktCertificate {
    pub hot: usize,
    pub epsilon: f64,
    /// Multiplier of the sum-to-one constraint.
    pub mu: f64,
    /// Multipliers of `p_ij >= 0`, row-major `N x N`, zero on the diagonal.
    pub lambda: Vec<f64>,
    pub residuals: KktResiduals,
}

impl KktCertificate {
    pub fn is_valid(&self) -> bool {
        self.residuals.max() <= KKT_TOL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalOutcome {
    pub matrix: JointSelectionMatrix,
    pub loss: f64,
    pub branch: Branch,
    pub certificate: Option<KktCertificate>,
}

fn require_unit_total(inst: &ProblemInstance) -> Result<()> {
    if (inst.total() - 1.0).abs() > sum_tolerance(1.0) {
        return Err(Error::TotalMismatch { sum: inst.total(), total: 1.0 });
    }
    Ok(())
}

fn over_one(s: f64) -> bool {
    s > 1.0 + POPULARITY_RTOL
}

/// Loss-minimizing conflict-free matrix for probability preferences.
pub fn optimal_satisfaction_matrix(inst: &ProblemInstance) -> Result<OptimalOutcome> {
    require_unit_total(inst)?;
    let hot = inst.argmax_popularity();
    if !over_one(inst.popularity()[hot]) {
        let matrix = construct_zero_loss(inst)?;
        let loss = loss(&matrix, inst)?;
        return Ok(OptimalOutcome { matrix, loss, branch: Branch::ZeroLoss, certificate: None });
    }
    let matrix = closed_form_matrix(inst, hot)?;
    let loss = loss(&matrix, inst)?;
    let certificate = kkt_verify(inst, &matrix)?;
    Ok(OptimalOutcome { matrix, loss, branch: Branch::ClosedForm, certificate: Some(certificate) })
}

fn epsilon(inst: &ProblemInstance, hot: usize) -> f64 {
    (inst.popularity()[hot] - 1.0) / (2.0 * (inst.n() - 1) as f64)
}

/// Closed-form minimizer when arm `hot` has popularity above 1.
pub fn closed_form_matrix(inst: &ProblemInstance, hot: usize) -> Result<JointSelectionMatrix> {
    require_unit_total(inst)?;
    let n = inst.n();
    if hot >= n {
        return Err(Error::DimensionMismatch { expected: n, got: hot + 1 });
    }
    let s = inst.popularity();
    if !over_one(s[hot]) {
        return Err(Error::NotApplicable(format!("popularity of arm {hot} is {} <= 1", s[hot])));
    }
    if let Some(i) = (0..n).find(|&i| i != hot && s[i] > 1.0) {
        return Err(Error::Invariant(format!("arms {hot} and {i} both exceed popularity 1")));
    }
    let eps = epsilon(inst, hot);
    let mut entries = vec![0.0; n * n];
    for i in (0..n).filter(|&i| i != hot) {
        entries[i * n + hot] = inst.a()[i] + eps;
        entries[hot * n + i] = inst.b()[i] + eps;
    }
    JointSelectionMatrix::new(n, entries, 1.0)
}

/// `N / (2(N - 1)) * (S_max - 1)^2` when `S_max > 1`, else zero.
pub fn min_loss_value(inst: &ProblemInstance) -> f64 {
    let s = inst.max_popularity();
    if s <= 1.0 {
        return 0.0;
    }
    let n = inst.n() as f64;
    n / (2.0 * (n - 1.0)) * (s - 1.0) * (s - 1.0)
}

/// Builds the closed-form multipliers for the hottest arm and evaluates
/// all four KKT conditions on `m`.
pub fn kkt_verify(inst: &ProblemInstance, m: &JointSelectionMatrix) -> Result<KktCertificate> {
    require_unit_total(inst)?;
    let n = inst.n();
    if m.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: m.n() });
    }
    let hot = inst.argmax_popularity();
    if !over_one(inst.popularity()[hot]) {
        return Err(Error::NotApplicable("no arm has popularity above 1".into()));
    }
    let eps = epsilon(inst, hot);
    let mu = 2.0 * (n as f64 - 2.0) * eps;
    let mut lambda = vec![0.0; n * n];
    for i in (0..n).filter(|&i| i != hot) {
        for j in (0..n).filter(|&j| j != hot && j != i) {
            lambda[i * n + j] = 2.0 * n as f64 * eps;
        }
    }

    // grad L - lambda + mu * 1 = 0 on every off-diagonal coordinate
    // (the inequality constraints are -p_ij <= 0).
    let grad = loss_gradient(m, inst)?;
    let mut r = KktResiduals { stationarity: 0.0, slackness: 0.0, dual: 0.0, primal: 0.0 };
    let mut sum = 0.0;
    for (i, j, p) in m.off_diagonal() {
        let idx = i * n + j;
        r.stationarity = r.stationarity.max((grad[idx] - lambda[idx] + mu).abs());
        r.slackness = r.slackness.max((lambda[idx] * p).abs());
        r.dual = r.dual.max(-lambda[idx]);
        r.primal = r.primal.max(-p);
        sum += p;
    }
    r.primal = r.primal.max((sum - 1.0).abs());
    Ok(KktCertificate { hot, epsilon: eps, mu, lambda, residuals: r })
}

/// Off-diagonal coordinates `(i, j)` in row-major order.
pub fn off_diagonal_coords(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect()
}

/// Hessian of the loss over the off-diagonal coordinates:
/// `H[(i,j),(k,l)] = 2(delta_ik + delta_jl)`. Constant, since the loss is
/// quadratic.
pub fn loss_hessian(n: usize) -> DMatrix<f64> {
    let coords = off_diagonal_coords(n);
    let d = coords.len();
    DMatrix::from_fn(d, d, |r, c| {
        let ((i, j), (k, l)) = (coords[r], coords[c]);
        2.0 * ((i == k) as u8 + (j == l) as u8) as f64
    })
}

/// `x^T H x` for a direction over the off-diagonal coordinates.
pub fn hessian_quadratic_form(n: usize, x: &[f64]) -> Result<f64> {
    let d = n * (n - 1);
    if x.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    let h = loss_hessian(n);
    let v = nalgebra::DVector::from_column_slice(x);
    Ok(v.dot(&(&h * &v)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub n: usize,
    pub trials: usize,
    pub min_quadratic_form: f64,
    pub min_eigenvalue: Option<f64>,
    pub max_eigenvalue: Option<f64>,
    pub passed: bool,
}

pub const CONVEXITY_MAX_N: usize = 8;
const EIGEN_MAX_N: usize = 6;

/// Checks positive semidefiniteness of the loss Hessian: random quadratic
/// forms for every `n`, plus the full spectrum for `n <= 6`.
pub fn convexity_check(n: usize, trials: usize, seed: u64) -> Result<ConvexityReport> {
    if n < 2 {
        return Err(Error::TooFewArms { min: 2, got: n });
    }
    if n > CONVEXITY_MAX_N {
        return Err(Error::DimensionTooLarge { n, max: CONVEXITY_MAX_N });
    }
    let h = loss_hessian(n);
    let d = h.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_q = f64::INFINITY;
    for _ in 0..trials {
        let x = nalgebra::DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        min_q = min_q.min(x.dot(&(&h * &x)));
    }
    let (min_eig, max_eig) = if n <= EIGEN_MAX_N {
        let eig = SymmetricEigen::new(h).eigenvalues;
        (Some(eig.min()), Some(eig.max()))
    } else {
        (None, None)
    };
    let passed = min_q >= -1e-9 && min_eig.is_none_or(|e| e >= -1e-9);
    Ok(ConvexityReport {
        n,
        trials,
        min_quadratic_form: min_q,
        min_eigenvalue: min_eig,
        max_eigenvalue: max_eig,
        passed,
    })
}
