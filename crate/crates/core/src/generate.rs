//! Seeded benchmark instance generators.
//!
//! All generators draw from ChaCha8 seeded with the given `u64`; Gaussian
//! variates come from `rand_distr::StandardNormal` (Ziggurat). Output is
//! reproducible for a fixed seed within this implementation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::ising::{energy, IsingProblem, SpinConfig};
use crate::matrix::{dot, SymMatrix};

/// A problem with a known optimal configuration.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub problem: IsingProblem,
    pub planted: SpinConfig,
    pub alpha: f64,
    pub seed: u64,
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    Ok(())
}

/// Fully connected `J_ij = ±1` with equal probability (the K2000 family).
pub fn gen_random_pm1(n: usize, seed: u64) -> Result<IsingProblem> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j = SymMatrix::from_upper_fn(n, |_, _| if rng.random_bool(0.5) { 1.0 } else { -1.0 });
    IsingProblem::from_couplings(j)
}

/// Fully connected couplings drawn uniformly from `[low, high]`.
pub fn gen_uniform(n: usize, low: f64, high: f64, seed: u64) -> Result<IsingProblem> {
    check_n(n)?;
    if !(low <= high && low.is_finite() && high.is_finite()) {
        return Err(Error::InvalidParameter(format!("invalid coupling range [{low}, {high}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let j = SymMatrix::from_upper_fn(n, |_, _| rng.random_range(low..=high));
    IsingProblem::from_couplings(j)
}

/// Wishart planted ensemble.
///
/// Draws a planted `t ∈ {±1}ⁿ` and `m = round(alpha·n)` Gaussian columns,
/// each projected onto the hyperplane orthogonal to `t`. With `W` the
/// `n×m` matrix of columns, the couplings are `J = W·Wᵀ/n` with the
/// diagonal removed, so `sᵀJs = ‖Wᵀs‖²/n − const`. The constant part is
/// minimal exactly when `Wᵀs = 0`, which holds for `s = ±t`.
pub fn gen_wishart(n: usize, alpha: f64, seed: u64) -> Result<PlantedInstance> {
    check_n(n)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let m = (alpha * n as f64).round() as usize;
    if m == 0 {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} with n = {n} rounds to zero columns"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
        .collect();

    // column-major: columns[k] is the k-th column of W
    let columns: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let along = dot(&g, &planted) / n as f64;
            g.iter().zip(&planted).map(|(gi, ti)| gi - along * ti).collect()
        })
        .collect();

    // rows of W, so J_ij is a dot product of two contiguous rows
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    let scale = 1.0 / n as f64;
    let couplings = SymMatrix::from_upper_fn(n, |i, j| scale * dot(&rows[i], &rows[j]));
    let problem = IsingProblem::from_couplings(couplings)?;

    let planted = SpinConfig::from_signs(&planted);
    let ground = energy(&problem, &planted)?;
    Ok(PlantedInstance {
        problem: problem.with_ground_energy(Some(ground)),
        planted,
        alpha,
        seed,
    })
}
