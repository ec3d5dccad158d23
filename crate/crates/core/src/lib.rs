//! Conflict-free joint selection for two players with probabilistic
//! preferences.
//!
//! Two players each hold a probability vector over `N` arms. A joint
//! selection matrix assigns probability to every ordered pair of *distinct*
//! arms, so the players never collide. The row and column sums of that
//! matrix are the selection probabilities the players actually experience,
//! and the loss is the squared distance between those marginals and the
//! stated preferences.
//!
//! * [`zeroloss`] builds an exact zero-loss matrix whenever every arm's
//!   popularity `A_i + B_i` is at most the total preference.
//! * [`minloss`] handles the remaining case with a closed-form optimum and
//!   an explicit KKT certificate, and dispatches between the two.
//! * [`baselines`] holds the comparison mechanisms, [`oracle`] an
//!   independent projected-gradient solver, [`multiplayer`] the `M`-player
//!   loss and feasibility verdict, and [`bench`] the family sweep.

pub mod baselines;
pub mod bench;
pub mod error;
pub mod io;
pub mod matrix;
pub mod minloss;
pub mod multiplayer;
pub mod oracle;
pub mod profile;
pub mod sample;
pub mod zeroloss;

pub use error::{Error, Result};
pub use matrix::{loss, loss_gradient, satisfied_preferences, JointSelectionMatrix, SatisfiedPreferences};
pub use minloss::{optimal_satisfaction_matrix, Branch, KktCertificate, OptimalOutcome};
pub use profile::{validate_instance, PreferenceProfile, ProblemInstance};
pub use zeroloss::construct_zero_loss;

/// Relative tolerance on sums (weights against their total, matrix entries
/// against the matrix total).
pub const SUM_RTOL: f64 = 1e-9;

/// Entries in `[-CLAMP_TOL, 0)` are rounding noise and are clamped to zero.
pub const CLAMP_TOL: f64 = 1e-12;

/// Slack used when comparing a popularity against the total preference.
pub const POPULARITY_RTOL: f64 = 1e-9;

pub(crate) fn sum_tolerance(total: f64) -> f64 {
    (SUM_RTOL * total.abs()).max(1e-15)
}
