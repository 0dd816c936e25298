//! Exhaustive ground-state search and local-stability checks for small
//! instances.
//!
//! Enumeration walks a Gray code so consecutive configurations differ by a
//! single flip, updating the energy and local fields in O(n) per step. The
//! space is split on the top spins into independent chunks that run in
//! parallel; results merge deterministically.

use std::time::Duration;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ising::{IsingProblem, SpinConfig};

/// Default largest problem [`brute_force_ground`] accepts.
pub const MAX_SPINS: usize = 24;

/// Hard limit of the enumerator (configuration masks are `u64`).
const ABSOLUTE_MAX_SPINS: usize = 40;

/// Number of top spins fixed per chunk.
const PREFIX_BITS: usize = 4;

/// Exact energies are recomputed this often to stop incremental drift.
const RESYNC_PERIOD: u64 = 1 << 16;

/// Exact minimum of the objective and every configuration attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundStates {
    pub energy: f64,
    /// Sorted lexicographically with `-1 < +1`.
    pub minimisers: Vec<SpinConfig>,
}

/// Rough single-threaded wall time for enumerating `n` spins.
pub fn estimated_runtime(n: usize) -> Duration {
    // about one nanosecond per spin update per configuration
    Duration::from_secs_f64((n.max(1) as f64) * 2f64.powi(n as i32) * 1e-9)
}

/// Exhaustive search, limited to [`MAX_SPINS`].
pub fn brute_force_ground(p: &IsingProblem) -> Result<GroundStates> {
    brute_force_ground_capped(p, MAX_SPINS)
}

/// Exhaustive search with an explicit size cap.
pub fn brute_force_ground_capped(p: &IsingProblem, cap: usize) -> Result<GroundStates> {
    let n = p.n();
    let cap = cap.min(ABSOLUTE_MAX_SPINS);
    if n > cap {
        return Err(Error::OracleCap { n, cap });
    }
    if n == 0 {
        return Ok(GroundStates {
            energy: p.offset(),
            minimisers: vec![SpinConfig::all_up(0)],
        });
    }
    let tol = 1e-9 * p.magnitude();
    let prefix_bits = PREFIX_BITS.min(n);
    let low_bits = n - prefix_bits;

    let candidates: Vec<u64> = (0..1u64 << prefix_bits)
        .into_par_iter()
        .map(|prefix| enumerate_chunk(p, prefix << low_bits, low_bits, tol))
        .collect::<Vec<_>>()
        .concat();

    let exact: Vec<(u64, f64)> = candidates
        .into_iter()
        .map(|mask| {
            let e = p
                .objective(&SpinConfig::from_mask(mask, n))
                .expect("mask has n spins");
            (mask, e)
        })
        .collect();
    let energy = exact.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let mut minimisers: Vec<SpinConfig> = exact
        .into_iter()
        .filter(|c| c.1 <= energy + tol)
        .map(|c| SpinConfig::from_mask(c.0, n))
        .collect();
    minimisers.sort();
    Ok(GroundStates { energy, minimisers })
}

struct Walker<'a> {
    p: &'a IsingProblem,
    spins: Vec<f64>,
    /// `h_i = Σ_j J_ij s_j`
    field: Vec<f64>,
    energy: f64,
}

impl<'a> Walker<'a> {
    fn new(p: &'a IsingProblem, mask: u64) -> Self {
        let mut w = Self {
            p,
            spins: SpinConfig::from_mask(mask, p.n()).to_f64(),
            field: vec![0.0; p.n()],
            energy: 0.0,
        };
        w.resync();
        w
    }

    fn resync(&mut self) {
        self.p.couplings().matvec_into(&self.spins, &mut self.field);
        self.energy = self
            .spins
            .iter()
            .zip(&self.field)
            .zip(self.p.bias())
            .map(|((s, h), b)| s * h + s * b)
            .sum::<f64>()
            + self.p.offset();
    }

    fn flip(&mut self, k: usize) {
        let s = self.spins[k];
        self.energy += -4.0 * s * self.field[k] - 2.0 * s * self.p.bias()[k];
        let row = self.p.couplings().row(k);
        let d = -2.0 * s;
        for (h, j) in self.field.iter_mut().zip(row) {
            *h += d * j;
        }
        self.spins[k] = -s;
    }
}

/// Enumerates the `low_bits` lowest spins with the rest fixed by `base`.
/// Returns masks whose running energy came within `tol` of the chunk's
/// running best; the caller re-filters on exact energies.
fn enumerate_chunk(p: &IsingProblem, base: u64, low_bits: usize, tol: f64) -> Vec<u64> {
    let mut walker = Walker::new(p, base);
    let mut mask = base;
    let mut best = walker.energy;
    let mut keep = vec![mask];
    for step in 1..(1u64 << low_bits) {
        let k = step.trailing_zeros() as usize;
        walker.flip(k);
        mask ^= 1 << k;
        if step % RESYNC_PERIOD == 0 {
            walker.resync();
        }
        let e = walker.energy;
        if e < best - tol {
            best = e;
            keep.clear();
            keep.push(mask);
        } else if e <= best + tol {
            if e < best {
                best = e;
            }
            keep.push(mask);
        }
    }
    keep
}

/// Energy change from flipping each spin: `−4·s_i·h_i − 2·s_i·b_i`.
pub fn flip_deltas(p: &IsingProblem, s: &SpinConfig) -> Result<Vec<f64>> {
    if s.len() != p.n() {
        return Err(Error::DimensionMismatch {
            expected: p.n(),
            found: s.len(),
        });
    }
    let sf = s.to_f64();
    let h = p.couplings().matvec(&sf);
    Ok(sf
        .iter()
        .zip(&h)
        .zip(p.bias())
        .map(|((s, h), b)| -4.0 * s * h - 2.0 * s * b)
        .collect())
}

/// True iff no single flip lowers the objective by more than float noise
/// (`1e-9` scaled by the problem magnitude).
pub fn single_flip_stable(p: &IsingProblem, s: &SpinConfig) -> Result<bool> {
    let tol = 1e-9 * p.magnitude();
    Ok(flip_deltas(p, s)?.iter().all(|&d| d >= -tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::SymMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pair(j: f64) -> IsingProblem {
        IsingProblem::from_couplings(SymMatrix::from_rows(&[vec![0.0, j], vec![j, 0.0]]).unwrap())
            .unwrap()
    }

    fn spins(v: &[i8]) -> SpinConfig {
        SpinConfig::new(v.to_vec()).unwrap()
    }

    fn random_problem(n: usize, seed: u64, with_bias: bool) -> IsingProblem {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let j = SymMatrix::from_upper_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let b = (0..n)
            .map(|_| if with_bias { rng.random_range(-1.0..1.0) } else { 0.0 })
            .collect();
        IsingProblem::new(j, b).unwrap()
    }

    fn naive_ground(p: &IsingProblem) -> (f64, Vec<SpinConfig>) {
        let n = p.n();
        let all: Vec<(SpinConfig, f64)> = (0..1u64 << n)
            .map(|m| {
                let s = SpinConfig::from_mask(m, n);
                let e = p.objective(&s).unwrap();
                (s, e)
            })
            .collect();
        let best = all.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        let mut mins: Vec<SpinConfig> = all
            .into_iter()
            .filter(|c| c.1 <= best + 1e-9 * p.magnitude())
            .map(|c| c.0)
            .collect();
        mins.sort();
        (best, mins)
    }

    #[test]
    fn antiferromagnetic_pair() {
        let g = brute_force_ground(&pair(1.0)).unwrap();
        assert_eq!(g.energy, -2.0);
        assert_eq!(g.minimisers, vec![spins(&[-1, 1]), spins(&[1, -1])]);
    }

    #[test]
    fn ferromagnetic_pair() {
        let g = brute_force_ground(&pair(-1.0)).unwrap();
        assert_eq!(g.energy, -2.0);
        assert_eq!(g.minimisers, vec![spins(&[-1, -1]), spins(&[1, 1])]);
    }

    #[test]
    fn matches_naive_enumeration() {
        for (n, seed, bias) in [(1, 0, true), (3, 1, false), (5, 2, true), (9, 3, false), (12, 4, true)] {
            let p = random_problem(n, seed, bias);
            let g = brute_force_ground(&p).unwrap();
            let (e, mins) = naive_ground(&p);
            assert!((g.energy - e).abs() <= 1e-9 * p.magnitude());
            assert_eq!(g.minimisers, mins);
        }
    }

    #[test]
    fn degenerate_problem_returns_everything() {
        let p = IsingProblem::from_couplings(SymMatrix::zeros(6)).unwrap();
        let g = brute_force_ground(&p).unwrap();
        assert_eq!(g.energy, 0.0);
        assert_eq!(g.minimisers.len(), 64);
        assert!(g.minimisers.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn cap_is_enforced() {
        let p = IsingProblem::from_couplings(SymMatrix::zeros(25)).unwrap();
        assert!(matches!(
            brute_force_ground(&p),
            Err(Error::OracleCap { n: 25, cap: 24 })
        ));
        assert!(estimated_runtime(30) > estimated_runtime(24));
    }

    #[test]
    fn minimum_bounds_any_configuration() {
        let p = random_problem(14, 9, false);
        let g = brute_force_ground(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let s = SpinConfig::from_mask(rng.random(), 14);
            assert!(g.energy <= p.objective(&s).unwrap() + 1e-12);
        }
    }

    #[test]
    fn stability_examples() {
        let ferro = pair(-1.0);
        assert!(!single_flip_stable(&ferro, &spins(&[1, -1])).unwrap());
        assert!(single_flip_stable(&ferro, &spins(&[1, 1])).unwrap());
        for seed in 0..5 {
            let p = random_problem(10, seed, false);
            for s in brute_force_ground(&p).unwrap().minimisers {
                assert!(single_flip_stable(&p, &s).unwrap());
            }
        }
    }

    #[test]
    fn flip_deltas_match_reevaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for seed in 0..10 {
            let p = random_problem(10, seed, seed % 2 == 0);
            let s = SpinConfig::from_mask(rng.random(), 10);
            let base = p.objective(&s).unwrap();
            let deltas = flip_deltas(&p, &s).unwrap();
            let mut naive_stable = true;
            for (i, d) in deltas.iter().enumerate() {
                let mut t = s.clone();
                t.flip(i);
                let direct = p.objective(&t).unwrap() - base;
                assert!((direct - d).abs() <= 1e-9);
                naive_stable &= direct >= -1e-9 * p.magnitude();
            }
            assert_eq!(single_flip_stable(&p, &s).unwrap(), naive_stable);
        }
    }
}
