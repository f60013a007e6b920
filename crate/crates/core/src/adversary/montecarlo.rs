//! Monte Carlo check of the two-stage guessing argument: first guess how
//! many relationship types a user has (uniform on `1..=n`), then guess the
//! type of a given secretary (uniform over the types).

use rand::Rng;
use rayon::prelude::*;

use super::AttackError;
use crate::seeding::sub_rng;

/// Fraction of `trials` in which both stages succeed. Each trial draws from
/// its own stream derived from `(seed, trial index)`.
pub fn simulate_two_stage_guess(n: u64, k: u64, trials: u64, seed: u64) -> Result<f64, AttackError> {
    if k == 0 || k > n {
        return Err(AttackError::Domain(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    if trials == 0 {
        return Err(AttackError::Domain("trials must be positive".into()));
    }
    let hits = (0..trials)
        .into_par_iter()
        .filter(|&i| {
            let mut rng = sub_rng(seed, i);
            let guessed_count = rng.random_range(1..=n);
            let truth = rng.random_range(0..k);
            let guessed_type = rng.random_range(0..k);
            guessed_count == k && guessed_type == truth
        })
        .count();
    Ok(hits as f64 / trials as f64)
}

/// Advanced scheme: the `k l` group instances act as `k'` distinct types.
pub fn simulate_two_stage_guess_advanced(
    n: u64,
    k: u64,
    l: u64,
    trials: u64,
    seed: u64,
) -> Result<f64, AttackError> {
    if l == 0 {
        return Err(AttackError::Domain("l must be positive".into()));
    }
    simulate_two_stage_guess(n, k * l, trials, seed)
}
