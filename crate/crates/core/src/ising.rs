//! Problem representations and the exact QUBO ⇄ Ising reductions.
//!
//! A QUBO instance minimises `xᵀQx + xᵀa` over `x ∈ {0,1}ⁿ`. Substituting
//! `s = 2x − 1` gives the Ising objective `sᵀJs + sᵀb + offset` with
//! `J = Q/4`, `b = (a + Q·1)/2` and `offset = 1ᵀQ1/4 + 1ᵀa/2`, which agrees
//! with the QUBO objective on every assignment. A bias can then be folded
//! into the couplings by adding an ancilla spin pinned to `+1`.

use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::{dot, SymMatrix};

/// A configuration of `±1` spins.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some((index, &value)) = spins.iter().enumerate().find(|(_, &v)| v != 1 && v != -1)
        {
            return Err(Error::InvalidSpin { index, value });
        }
        Ok(Self(spins))
    }

    pub fn all_up(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// `sign(w)` with the tie `sign(0) = +1`.
    pub fn from_signs(w: &[f64]) -> Self {
        Self(w.iter().map(|&v| if v < 0.0 { -1 } else { 1 }).collect())
    }

    /// Spin `i` is `-1` iff bit `i` of `mask` is set.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Self((0..n).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&v| f64::from(v)).collect()
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|&v| -v).collect())
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    /// Maps spins back to QUBO variables, `x = (s + 1)/2`.
    pub fn to_binary(&self) -> Vec<u8> {
        self.0.iter().map(|&v| u8::from(v > 0)).collect()
    }
}

impl fmt::Display for SpinConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &v in &self.0 {
            f.write_str(if v > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuboProblem {
    q: SymMatrix,
    a: Vec<f64>,
}

impl QuboProblem {
    pub fn new(q: SymMatrix, a: Vec<f64>) -> Result<Self> {
        q.validate()?;
        if a.len() != q.n() {
            return Err(Error::DimensionMismatch {
                expected: q.n(),
                found: a.len(),
            });
        }
        Ok(Self { q, a })
    }

    pub fn from_rows(q: &[Vec<f64>], a: Vec<f64>) -> Result<Self> {
        Self::new(SymMatrix::from_rows(q)?, a)
    }

    pub fn n(&self) -> usize {
        self.q.n()
    }

    pub fn quadratic(&self) -> &SymMatrix {
        &self.q
    }

    pub fn linear(&self) -> &[f64] {
        &self.a
    }

    /// `xᵀQx + xᵀa`.
    pub fn objective(&self, x: &[u8]) -> Result<f64> {
        check_len(self.n(), x.len())?;
        let xf: Vec<f64> = x.iter().map(|&v| f64::from(v)).collect();
        Ok(self.q.quad_form(&xf) + dot(&xf, &self.a))
    }
}

/// Ising problem `min sᵀJs + sᵀb + offset` over `s ∈ {±1}ⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingProblem {
    couplings: SymMatrix,
    bias: Vec<f64>,
    offset: f64,
    ground_energy: Option<f64>,
}

impl IsingProblem {
    pub fn new(couplings: SymMatrix, bias: Vec<f64>) -> Result<Self> {
        couplings.validate()?;
        check_len(couplings.n(), bias.len())?;
        Ok(Self {
            bias,
            couplings,
            offset: 0.0,
            ground_energy: None,
        })
    }

    /// A bias-free problem. The matrix must already be valid.
    pub fn from_couplings(couplings: SymMatrix) -> Result<Self> {
        let n = couplings.n();
        Self::new(couplings, vec![0.0; n])
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn with_ground_energy(mut self, ground_energy: Option<f64>) -> Self {
        self.ground_energy = ground_energy;
        self
    }

    pub fn n(&self) -> usize {
        self.couplings.n()
    }

    pub fn couplings(&self) -> &SymMatrix {
        &self.couplings
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn has_bias(&self) -> bool {
        self.bias.iter().any(|&b| b != 0.0)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn ground_energy(&self) -> Option<f64> {
        self.ground_energy
    }

    /// Full objective `sᵀJs + sᵀb + offset`, valid with or without bias.
    pub fn objective(&self, s: &SpinConfig) -> Result<f64> {
        check_len(self.n(), s.len())?;
        let sf = s.to_f64();
        Ok(self.couplings.quad_form(&sf) + dot(&sf, &self.bias) + self.offset)
    }

    /// Scale for float comparisons of objective values: entrywise L1 norm
    /// of the couplings plus the bias, floored at 1.
    pub fn magnitude(&self) -> f64 {
        (self.couplings.abs_sum() + self.bias.iter().map(|b| b.abs()).sum::<f64>()).max(1.0)
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Exact QUBO → Ising reduction with the constant carried as `offset`.
pub fn qubo_to_ising(q: &QuboProblem) -> Result<IsingProblem> {
    let qm = q.quadratic();
    qm.validate()?;
    let n = q.n();
    let ones = vec![1.0; n];
    let row_sums = qm.matvec(&ones);
    let bias: Vec<f64> = q
        .linear()
        .iter()
        .zip(&row_sums)
        .map(|(a, r)| (a + r) / 2.0)
        .collect();
    let offset = row_sums.iter().sum::<f64>() / 4.0 + q.linear().iter().sum::<f64>() / 2.0;
    Ok(IsingProblem::new(qm.scaled(0.25), bias)?.with_offset(offset))
}

/// Folds the bias into an extra ancilla spin at index `n`, coupled to spin
/// `i` with strength `b[i]/2`. With the ancilla at `+1` the objective is
/// unchanged; use [`strip_ancilla`] to read results back.
pub fn absorb_bias(p: &IsingProblem) -> IsingProblem {
    let n = p.n();
    let mut couplings = p.couplings().padded(1);
    for (i, &b) in p.bias().iter().enumerate() {
        if b != 0.0 {
            couplings.set_pair(i, n, b / 2.0);
        }
    }
    IsingProblem {
        couplings,
        bias: vec![0.0; n + 1],
        offset: p.offset(),
        ground_energy: p.ground_energy(),
    }
}

/// Normalises an ancilla-form configuration so the ancilla (last spin)
/// reads `+1`, then drops it.
pub fn strip_ancilla(extended: &SpinConfig) -> SpinConfig {
    let s = extended.as_slice();
    let (last, rest) = s.split_last().expect("extended configuration has an ancilla");
    SpinConfig(rest.iter().map(|&v| v * last).collect())
}

/// `sᵀJs`, both triangles counted. Requires a bias-free problem.
pub fn energy(p: &IsingProblem, s: &SpinConfig) -> Result<f64> {
    if p.has_bias() {
        return Err(Error::BiasPresent);
    }
    check_len(p.n(), s.len())?;
    Ok(p.couplings().quad_form(&s.to_f64()))
}

/// Cut weight of the partition `s` for a graph encoded with
/// `J[i][j] = w_ij / 2`, so that `sᵀJs = Σ_{i<j} w_ij s_i s_j`.
pub fn cut_value(p: &IsingProblem, s: &SpinConfig, total_edge_weight: f64) -> Result<f64> {
    Ok((total_edge_weight - energy(p, s)?) / 2.0)
}

/// Encodes a weighted graph (symmetric weight matrix, zero diagonal) as an
/// Ising problem for [`cut_value`], returning it with the total edge weight.
pub fn graph_to_ising(weights: &SymMatrix) -> Result<(IsingProblem, f64)> {
    weights.validate()?;
    let total = weights.upper_pairs().map(|(_, _, w)| w).sum();
    Ok((IsingProblem::from_couplings(weights.scaled(0.5))?, total))
}

/// `|C − C₀| / |C₀|`; falls back to the absolute gap when `C₀ = 0`.
pub fn relative_error(value: f64, reference: f64) -> f64 {
    let gap = (value - reference).abs();
    if reference == 0.0 {
        gap
    } else {
        gap / reference.abs()
    }
}
