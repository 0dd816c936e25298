//! Dense symmetric coupling matrices.
//!
//! Storage is row-major with both triangles populated. Every row-vector
//! product accumulates in the same fixed lane pattern, so it gives the same
//! bits whether it is computed alone or as part of a batch, and whichever
//! SIMD width the CPU offers.

use crate::error::{Error, Result};

const LANES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    /// Builds a matrix from its strict upper triangle; `f(i, j)` is called
    /// once per pair with `i < j` in row-major order.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in (i + 1)..n {
                m.set_pair(i, j, f(i, j));
            }
        }
        m
    }

    /// Validates squareness, exact symmetry and a zero diagonal.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NotSquare {
                    row,
                    len: r.len(),
                    expected: n,
                });
            }
            data.extend_from_slice(r);
        }
        let m = Self { n, data };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..self.n {
            let d = self.get(i, i);
            if d != 0.0 {
                return Err(Error::NonZeroDiagonal { index: i, value: d });
            }
            for j in (i + 1)..self.n {
                let (a, b) = (self.get(i, j), self.get(j, i));
                if a != b {
                    return Err(Error::NotSymmetric { i, j, a, b });
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set_pair(&mut self, i: usize, j: usize, value: f64) {
        assert_ne!(i, j, "diagonal entries are fixed at zero");
        self.data[i * self.n + j] = value;
        self.data[j * self.n + i] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Entrywise absolute sum over both triangles.
    pub fn abs_sum(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// Iterates `(i, j, value)` over the strict upper triangle.
    pub fn upper_pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).map(move |j| (i, j, self.get(i, j))))
    }

    /// Returns a copy grown by `extra` rows/columns of zeros.
    pub fn padded(&self, extra: usize) -> Self {
        let m = self.n + extra;
        let mut out = Self::zeros(m);
        for i in 0..self.n {
            out.data[i * m..i * m + self.n].copy_from_slice(self.row(i));
        }
        out
    }

    /// `out = self * x`.
    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(out.len(), self.n);
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.matvec_into(x, &mut out);
        out
    }

    /// Multiplies several vectors at once. The matrix is walked in tiles so
    /// each row is read from memory once per call and vector segments stay
    /// in cache across rows. Output `k` is bitwise identical to
    /// `matvec(xs[k])`.
    pub fn matvec_batch(&self, xs: &[&[f64]], outs: &mut [&mut [f64]]) {
        assert_eq!(xs.len(), outs.len());
        for x in xs {
            assert_eq!(x.len(), self.n);
        }
        for o in outs.iter() {
            assert_eq!(o.len(), self.n);
        }
        let (n, m) = (self.n, xs.len());
        if m == 0 {
            return;
        }
        let full = n - n % LANES;
        let kernels = Kernels::detect();
        let mut acc = vec![[0.0f64; LANES]; ROW_BLOCK * m];
        for r0 in (0..n).step_by(ROW_BLOCK) {
            let rows = r0..(r0 + ROW_BLOCK).min(n);
            acc.fill([0.0; LANES]);
            for c0 in (0..full).step_by(COL_BLOCK) {
                let cols = c0..(c0 + COL_BLOCK).min(full);
                let mut i = rows.start;
                while i < rows.end {
                    let pair = i + 1 < rows.end;
                    let height = if pair { 2 } else { 1 };
                    let block = &mut acc[(i - r0) * m..(i - r0 + height) * m];
                    let mut k = 0;
                    if pair {
                        let (acc0, acc1) = block.split_at_mut(m);
                        let r = [&self.row(i)[cols.clone()], &self.row(i + 1)[cols.clone()]];
                        while k + 4 <= m {
                            let seg = [k, k + 1, k + 2, k + 3].map(|l| &xs[l][cols.clone()]);
                            let q0: &mut Quad = (&mut acc0[k..k + 4]).try_into().unwrap();
                            let q1: &mut Quad = (&mut acc1[k..k + 4]).try_into().unwrap();
                            kernels.accumulate2x4(r, seg, [q0, q1]);
                            k += 4;
                        }
                    }
                    for h in 0..height {
                        let row = &self.row(i + h)[cols.clone()];
                        for l in k..m {
                            kernels.accumulate(row, &xs[l][cols.clone()], &mut block[h * m + l]);
                        }
                    }
                    i += height;
                }
            }
            for i in rows {
                let row = self.row(i);
                for l in 0..m {
                    outs[l][i] = reduce(acc[(i - r0) * m + l]) + tail(&row[full..], &xs[l][full..]);
                }
            }
        }
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let ax = self.matvec(x);
        dot(x, &ax)
    }
}

const ROW_BLOCK: usize = 32;
const COL_BLOCK: usize = 512;

#[inline(always)]
fn reduce(acc: [f64; LANES]) -> f64 {
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]))
}

#[inline(always)]
fn tail(a: &[f64], b: &[f64]) -> f64 {
    let mut t = 0.0;
    for (x, y) in a.iter().zip(b) {
        t = x.mul_add(*y, t);
    }
    t
}

/// `acc[l] = fma(a[c + l], b[c + l], acc[l])` for every chunk `c`, in
/// order. `a.len()` must be a multiple of [`LANES`].
fn accumulate_portable(a: &[f64], b: &[f64], acc: &mut [f64; LANES]) {
    for (x, y) in a.chunks_exact(LANES).zip(b.chunks_exact(LANES)) {
        for l in 0..LANES {
            acc[l] = x[l].mul_add(y[l], acc[l]);
        }
    }
}

type Quad = [[f64; LANES]; 4];

fn accumulate2x4_portable(rows: [&[f64]; 2], bs: [&[f64]; 4], acc: [&mut Quad; 2]) {
    for (row, quad) in rows.into_iter().zip(acc) {
        for (b, a) in bs.iter().zip(quad.iter_mut()) {
            accumulate_portable(row, b, a);
        }
    }
}

/// The widest accumulation kernels the CPU supports. Fused multiply-add is
/// correctly rounded, so every variant gives the same bits as the portable
/// one.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Kernels {
    Portable,
    #[cfg(target_arch = "x86_64")]
    Avx2,
    #[cfg(target_arch = "x86_64")]
    Avx512,
}

impl Kernels {
    fn detect() -> Self {
        #[cfg(target_arch = "x86_64")]
        {
            if std::is_x86_feature_detected!("avx512f") {
                return Kernels::Avx512;
            }
            if std::is_x86_feature_detected!("avx2") && std::is_x86_feature_detected!("fma") {
                return Kernels::Avx2;
            }
        }
        Kernels::Portable
    }

    #[inline]
    fn accumulate(self, a: &[f64], b: &[f64], acc: &mut [f64; LANES]) {
        assert_eq!(a.len(), b.len());
        assert_eq!(a.len() % LANES, 0);
        match self {
            Kernels::Portable => accumulate_portable(a, b, acc),
            // SAFETY: the features were detected at runtime and lengths are checked.
            #[cfg(target_arch = "x86_64")]
            Kernels::Avx2 => unsafe { simd::accumulate_avx2(a, b, acc) },
            #[cfg(target_arch = "x86_64")]
            Kernels::Avx512 => unsafe { simd::accumulate_avx512(a, b, acc) },
        }
    }

    /// Two rows against four vectors.
    #[inline]
    fn accumulate2x4(self, rows: [&[f64]; 2], bs: [&[f64]; 4], acc: [&mut Quad; 2]) {
        let len = rows[0].len();
        assert_eq!(len % LANES, 0);
        assert!(rows.iter().chain(&bs).all(|v| v.len() == len));
        match self {
            Kernels::Portable => accumulate2x4_portable(rows, bs, acc),
            // SAFETY: the features were detected at runtime and lengths are checked.
            #[cfg(target_arch = "x86_64")]
            Kernels::Avx2 => unsafe { simd::accumulate2x4_avx2(rows, bs, acc) },
            #[cfg(target_arch = "x86_64")]
            Kernels::Avx512 => unsafe { simd::accumulate2x4_avx512(rows, bs, acc) },
        }
    }
}

#[cfg(target_arch = "x86_64")]
mod simd {
    use std::arch::x86_64::*;

    use super::{Quad, LANES};

    // AVX2 keeps lanes 0..4 and 4..8 of an accumulator in two registers;
    // AVX-512 keeps all eight in one.

    #[target_feature(enable = "avx2,fma")]
    pub(super) unsafe fn accumulate_avx2(a: &[f64], b: &[f64], acc: &mut [f64; LANES]) {
        let (pa, pb, pc) = (a.as_ptr(), b.as_ptr(), acc.as_mut_ptr());
        let mut lo = _mm256_loadu_pd(pc);
        let mut hi = _mm256_loadu_pd(pc.add(4));
        for c in (0..a.len()).step_by(LANES) {
            lo = _mm256_fmadd_pd(_mm256_loadu_pd(pa.add(c)), _mm256_loadu_pd(pb.add(c)), lo);
            hi = _mm256_fmadd_pd(_mm256_loadu_pd(pa.add(c + 4)), _mm256_loadu_pd(pb.add(c + 4)), hi);
        }
        _mm256_storeu_pd(pc, lo);
        _mm256_storeu_pd(pc.add(4), hi);
    }

    #[target_feature(enable = "avx2,fma")]
    pub(super) unsafe fn accumulate2x4_avx2(rows: [&[f64]; 2], bs: [&[f64]; 4], acc: [&mut Quad; 2]) {
        // 16 live accumulators do not fit in 16 registers; go row by row.
        let pb = bs.map(|b| b.as_ptr());
        for (row, quad) in rows.into_iter().zip(acc) {
            let pa = row.as_ptr();
            let pc = [0, 1, 2, 3].map(|k| quad[k].as_mut_ptr());
            let mut lo = pc.map(|p| _mm256_loadu_pd(p));
            let mut hi = pc.map(|p| _mm256_loadu_pd(p.add(4)));
            for c in (0..row.len()).step_by(LANES) {
                let xl = _mm256_loadu_pd(pa.add(c));
                let xh = _mm256_loadu_pd(pa.add(c + 4));
                for k in 0..4 {
                    lo[k] = _mm256_fmadd_pd(xl, _mm256_loadu_pd(pb[k].add(c)), lo[k]);
                    hi[k] = _mm256_fmadd_pd(xh, _mm256_loadu_pd(pb[k].add(c + 4)), hi[k]);
                }
            }
            for k in 0..4 {
                _mm256_storeu_pd(pc[k], lo[k]);
                _mm256_storeu_pd(pc[k].add(4), hi[k]);
            }
        }
    }

    #[target_feature(enable = "avx512f")]
    pub(super) unsafe fn accumulate_avx512(a: &[f64], b: &[f64], acc: &mut [f64; LANES]) {
        let (pa, pb, pc) = (a.as_ptr(), b.as_ptr(), acc.as_mut_ptr());
        let mut v = _mm512_loadu_pd(pc);
        for c in (0..a.len()).step_by(LANES) {
            v = _mm512_fmadd_pd(_mm512_loadu_pd(pa.add(c)), _mm512_loadu_pd(pb.add(c)), v);
        }
        _mm512_storeu_pd(pc, v);
    }

    #[target_feature(enable = "avx512f")]
    pub(super) unsafe fn accumulate2x4_avx512(rows: [&[f64]; 2], bs: [&[f64]; 4], acc: [&mut Quad; 2]) {
        let (p0, p1) = (rows[0].as_ptr(), rows[1].as_ptr());
        let pb = bs.map(|b| b.as_ptr());
        let [q0, q1] = acc;
        let c0 = [0, 1, 2, 3].map(|k| q0[k].as_mut_ptr());
        let c1 = [0, 1, 2, 3].map(|k| q1[k].as_mut_ptr());
        let mut v0 = c0.map(|p| _mm512_loadu_pd(p));
        let mut v1 = c1.map(|p| _mm512_loadu_pd(p));
        for c in (0..rows[0].len()).step_by(LANES) {
            let x0 = _mm512_loadu_pd(p0.add(c));
            let x1 = _mm512_loadu_pd(p1.add(c));
            for k in 0..4 {
                let y = _mm512_loadu_pd(pb[k].add(c));
                v0[k] = _mm512_fmadd_pd(x0, y, v0[k]);
                v1[k] = _mm512_fmadd_pd(x1, y, v1[k]);
            }
        }
        for k in 0..4 {
            _mm512_storeu_pd(c0[k], v0[k]);
            _mm512_storeu_pd(c1[k], v1[k]);
        }
    }
}

/// Deterministic dot product: eight interleaved fused multiply-add chains
/// reduced as a balanced tree, plus the leftover elements in order.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let full = a.len() - a.len() % LANES;
    let mut acc = [0.0; LANES];
    Kernels::detect().accumulate(&a[..full], &b[..full], &mut acc);
    reduce(acc) + tail(&a[full..], &b[full..])
}
