#![allow(dead_code)]

use conflictfree::{validate_instance, ProblemInstance};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

/// Flat Dirichlet sample via normalized exponentials.
pub fn dirichlet(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let x: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = x.iter().sum();
    x.into_iter().map(|v| v / s).collect()
}

/// Half the mass of both players forced onto one arm, so its popularity
/// is at least 1.
pub fn hot_pair(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = rng.random_range(0..n);
    let mix = |mut w: Vec<f64>| {
        w.iter_mut().for_each(|v| *v *= 0.5);
        w[h] += 0.5;
        w
    };
    (mix(dirichlet(rng, n)), mix(dirichlet(rng, n)))
}

pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, hot: bool) -> ProblemInstance {
    let (a, b) = if hot { hot_pair(rng, n) } else { (dirichlet(rng, n), dirichlet(rng, n)) };
    validate_instance(&a, &b, 1.0).unwrap()
}

/// Random instance with every popularity at most 1, by rejection.
pub fn feasible_instance(rng: &mut ChaCha8Rng, n: usize) -> ProblemInstance {
    loop {
        let i = random_instance(rng, n, false);
        if i.is_zero_loss_feasible() {
            return i;
        }
    }
}
