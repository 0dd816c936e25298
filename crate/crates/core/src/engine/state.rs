//! The product-state cost, its gradient and the parameter updates.
//!
//! Each spin carries an angle `θ_i = (π/2)·tanh(w_i)`. The expectations of
//! `σ_z` and `σ_x` in that state are `z_i = sin θ_i` and `x_i = cos θ_i`, so
//! the annealed energy collapses to the classical function
//!
//! ```text
//! C(t, w) = tγ·zᵀJz − (1 − t)·Σ x_i
//! ∇C      = (π/2)·[tγ·(2Jz)∘x + (1 − t)·z] ∘ (1 − tanh²w)
//! ```

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::config::AdamParams;
use crate::error::{Error, Result};
use crate::ising::{IsingProblem, SpinConfig};
use crate::matrix::dot;

/// Optimiser state for one trial. `z` and `x` are always recomputed from
/// `w` after it changes.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    w: Vec<f64>,
    velocity: Vec<f64>,
    m1: Vec<f64>,
    m2: Vec<f64>,
    adam_steps: u32,
    z: Vec<f64>,
    x: Vec<f64>,
}

impl SolverState {
    pub fn new(w0: Vec<f64>) -> Self {
        let n = w0.len();
        let mut state = Self {
            w: w0,
            velocity: vec![0.0; n],
            m1: vec![0.0; n],
            m2: vec![0.0; n],
            adam_steps: 0,
            z: vec![0.0; n],
            x: vec![0.0; n],
        };
        state.refresh();
        state
    }

    fn refresh(&mut self) {
        for ((w, z), x) in self.w.iter().zip(&mut self.z).zip(&mut self.x) {
            let (s, c) = (FRAC_PI_2 * w.tanh()).sin_cos();
            *z = s;
            *x = c;
        }
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn velocity(&self) -> &[f64] {
        &self.velocity
    }

    /// `⟨σ_z⟩` per spin.
    pub fn z(&self) -> &[f64] {
        &self.z
    }

    /// `⟨σ_x⟩` per spin.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn spins(&self) -> SpinConfig {
        SpinConfig::from_signs(&self.w)
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().all(|v| v.is_finite())
    }

    /// `w ← w − η·g`.
    pub fn update_vanilla(&mut self, grad: &[f64], eta: f64) {
        assert_eq!(grad.len(), self.n());
        for (w, g) in self.w.iter_mut().zip(grad) {
            *w -= eta * g;
        }
        self.refresh();
    }

    /// `ν ← μν − η·g`, then `w ← w + ν`.
    pub fn update_momentum(&mut self, grad: &[f64], eta: f64, momentum: f64) {
        assert_eq!(grad.len(), self.n());
        for ((w, v), g) in self.w.iter_mut().zip(&mut self.velocity).zip(grad) {
            *v = momentum * *v - eta * g;
            *w += *v;
        }
        self.refresh();
    }

    /// Bias-corrected Adam step.
    pub fn update_adam(&mut self, grad: &[f64], eta: f64, params: &AdamParams) {
        assert_eq!(grad.len(), self.n());
        self.adam_steps += 1;
        let k = self.adam_steps as i32;
        let c1 = 1.0 - params.beta1.powi(k);
        let c2 = 1.0 - params.beta2.powi(k);
        for (((w, m1), m2), &g) in self
            .w
            .iter_mut()
            .zip(&mut self.m1)
            .zip(&mut self.m2)
            .zip(grad)
        {
            *m1 = params.beta1 * *m1 + (1.0 - params.beta1) * g;
            *m2 = params.beta2 * *m2 + (1.0 - params.beta2) * g * g;
            let m_hat = *m1 / c1;
            let v_hat = *m2 / c2;
            *w -= eta * m_hat / (v_hat.sqrt() + params.eps);
        }
        self.refresh();
    }
}

fn check_problem(p: &IsingProblem, state: &SolverState) -> Result<()> {
    if p.has_bias() {
        return Err(Error::BiasPresent);
    }
    if p.n() != state.n() {
        return Err(Error::DimensionMismatch {
            expected: p.n(),
            found: state.n(),
        });
    }
    Ok(())
}

/// `C(t, w)` given the precomputed local field `Jz`.
pub(crate) fn cost_from_field(field: &[f64], z: &[f64], x: &[f64], t: f64, gamma: f64) -> f64 {
    t * gamma * dot(z, field) - (1.0 - t) * x.iter().sum::<f64>()
}

/// `∇C` given the precomputed local field `Jz`, written into `out`.
pub(crate) fn gradient_from_field(
    field: &[f64],
    state: &SolverState,
    t: f64,
    gamma: f64,
    out: &mut [f64],
) {
    let problem_weight = 2.0 * t * gamma;
    let transverse_weight = 1.0 - t;
    for i in 0..out.len() {
        let th = state.w[i].tanh();
        let slope = 1.0 - th * th;
        out[i] = FRAC_PI_2
            * (problem_weight * field[i] * state.x[i] + transverse_weight * state.z[i])
            * slope;
    }
}

/// `C(t, w) = tγ·zᵀJz − (1 − t)·Σ x_i`.
pub fn cost(p: &IsingProblem, state: &SolverState, t: f64, gamma: f64) -> Result<f64> {
    check_problem(p, state)?;
    let field = p.couplings().matvec(&state.z);
    Ok(cost_from_field(&field, &state.z, &state.x, t, gamma))
}

/// Analytic gradient of [`cost`] with respect to `w`.
pub fn gradient(p: &IsingProblem, state: &SolverState, t: f64, gamma: f64) -> Result<Vec<f64>> {
    check_problem(p, state)?;
    let field = p.couplings().matvec(&state.z);
    let mut out = vec![0.0; state.n()];
    gradient_from_field(&field, state, t, gamma, &mut out);
    Ok(out)
}

/// `init_scale · U[-1, 1]ⁿ` drawn from a ChaCha8 stream seeded with `seed`.
pub fn init_weights(n: usize, init_scale: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| init_scale * rng.random_range(-1.0..=1.0))
        .collect()
}
