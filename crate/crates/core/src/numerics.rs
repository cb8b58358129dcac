//! Dense complex/real vectors, the minimum-norm least-squares solver, seeded
//! random streams and the central-difference gradient oracle.
//!
//! Complex vectors map to real ones in the `[all real | all imag]` layout, so a
//! complex `N`-vector becomes a real `2N`-vector whose first half holds the
//! real parts.

use std::ops::{Deref, DerefMut};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Default relative singular-value cutoff for [`min_norm_lstsq`].
pub const DEFAULT_SVD_CUTOFF: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}

/// Complex column vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CVec(Vec<Complex64>);

impl CVec {
    pub fn new(data: Vec<Complex64>) -> Self {
        Self(data)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    /// Unit vector `e_index` of length `n`.
    pub fn basis(n: usize, index: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[index] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Hermitian inner product `selfᴴ · other`.
    pub fn dot_h(&self, other: &[Complex64]) -> Complex64 {
        self.0.iter().zip(other).map(|(a, b)| a.conj() * b).sum()
    }

    /// Plain transpose product `selfᵀ · other`.
    pub fn dot_t(&self, other: &[Complex64]) -> Complex64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&self, c: Complex64) -> CVec {
        CVec(self.0.iter().map(|z| z * c).collect())
    }

    pub fn conj(&self) -> CVec {
        CVec(self.0.iter().map(|z| z.conj()).collect())
    }

    pub fn sub(&self, other: &[Complex64]) -> CVec {
        CVec(self.0.iter().zip(other).map(|(a, b)| a - b).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Deref for CVec {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl DerefMut for CVec {
    fn deref_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }
}

impl From<Vec<Complex64>> for CVec {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

impl FromIterator<Complex64> for CVec {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_row_major(
        rows: usize,
        cols: usize,
        data: Vec<Complex64>,
    ) -> Result<Self, NumericsError> {
        if data.len() != rows * cols {
            return Err(NumericsError::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Result<CVec, NumericsError> {
        if x.len() != self.cols {
            return Err(NumericsError::DimensionMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Splits a complex vector into `[re_0..re_{n-1}, im_0..im_{n-1}]`.
pub fn complex_to_real(h: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * h.len());
    out.extend(h.iter().map(|z| z.re));
    out.extend(h.iter().map(|z| z.im));
    out
}

/// Inverse of [`complex_to_real`].
pub fn real_to_complex(x: &[f64]) -> Result<CVec, NumericsError> {
    if x.len() % 2 != 0 {
        return Err(NumericsError::InvalidArgument(format!(
            "real layout must have even length, got {}",
            x.len()
        )));
    }
    let n = x.len() / 2;
    Ok((0..n).map(|i| Complex64::new(x[i], x[n + i])).collect())
}

/// Solution of a minimum-norm least-squares problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LstsqSolution {
    pub x: CVec,
    /// Number of singular values kept above the cutoff.
    pub rank: usize,
}

/// Minimum-norm least-squares solve of `A·x ≈ y` through an SVD, dropping
/// singular values below `cutoff·σ_max`.
pub fn min_norm_lstsq(a: &CMat, y: &[Complex64], cutoff: f64) -> Result<LstsqSolution, NumericsError> {
    if a.rows == 0 || a.cols == 0 {
        return Err(NumericsError::InvalidArgument("empty system matrix".into()));
    }
    if y.len() != a.rows {
        return Err(NumericsError::DimensionMismatch {
            expected: a.rows,
            got: y.len(),
        });
    }
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(NumericsError::InvalidArgument(format!(
            "cutoff must lie in (0, 1), got {cutoff}"
        )));
    }
    if a.data.iter().chain(y).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(NumericsError::NonFinite("least-squares input".into()));
    }

    // Real embedding [[Re, -Im], [Im, Re]]: its SVD carries every complex
    // singular value twice and its pseudoinverse embeds the complex one.
    // nalgebra's complex SVD mis-factors some rank-deficient inputs.
    let (m, n) = (a.rows, a.cols);
    let emb = DMatrix::from_fn(2 * m, 2 * n, |r, c| {
        let z = a.data[(r % m) * n + c % n];
        match (r < m, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let y_emb: Vec<f64> = y.iter().map(|z| z.re).chain(y.iter().map(|z| z.im)).collect();
    let svd = emb.svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested Vᵀ");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let mut x_emb = vec![0.0; 2 * n];
    let mut kept = 0usize;
    if sigma_max == 0.0 {
        return Ok(LstsqSolution { x: CVec::zeros(n), rank: 0 });
    }
    let threshold = cutoff * sigma_max;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= threshold {
            continue;
        }
        kept += 1;
        let coef = (0..2 * m).map(|r| u[(r, i)] * y_emb[r]).sum::<f64>() / s;
        for (c, xc) in x_emb.iter_mut().enumerate() {
            *xc += v_t[(i, c)] * coef;
        }
    }
    let x = (0..n).map(|c| Complex64::new(x_emb[c], x_emb[n + c])).collect();
    let rank = kept.div_ceil(2);
    Ok(LstsqSolution { x, rank })
}

/// Central-difference gradient with a fixed step.
pub fn finite_diff_grad<F>(mut f: F, params: &[f64], eps: f64) -> Result<Vec<f64>, NumericsError>
where
    F: FnMut(&[f64]) -> f64,
{
    fd_impl(&mut f, params, |_| eps)
}

/// Central-difference gradient with step `eps·max(1, |p_i|)` per coordinate.
pub fn finite_diff_grad_scaled<F>(
    mut f: F,
    params: &[f64],
    eps: f64,
) -> Result<Vec<f64>, NumericsError>
where
    F: FnMut(&[f64]) -> f64,
{
    fd_impl(&mut f, params, |p| eps * p.abs().max(1.0))
}

fn fd_impl<F, S>(f: &mut F, params: &[f64], step: S) -> Result<Vec<f64>, NumericsError>
where
    F: FnMut(&[f64]) -> f64,
    S: Fn(f64) -> f64,
{
    let mut p = params.to_vec();
    let mut grad = Vec::with_capacity(p.len());
    for i in 0..p.len() {
        let orig = p[i];
        let h = step(orig);
        if !(h > 0.0) {
            return Err(NumericsError::InvalidArgument(format!("step must be positive, got {h}")));
        }
        p[i] = orig + h;
        let fp = f(&p);
        p[i] = orig - h;
        let fm = f(&p);
        p[i] = orig;
        if !fp.is_finite() || !fm.is_finite() {
            return Err(NumericsError::NonFinite(format!("objective at coordinate {i}")));
        }
        grad.push((fp - fm) / (2.0 * h));
    }
    Ok(grad)
}

/// Largest entrywise relative error between two gradients; magnitudes below
/// `1e-5` are compared absolutely.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-5))
        .fold(0.0, f64::max)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded random stream. Child streams are derived from the seed and an index,
/// so stream `i` is the same no matter which thread or order spawns it.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn spawn(&self, index: u64) -> SeededRng {
        SeededRng::new(splitmix64(self.seed ^ splitmix64(index.wrapping_add(1))))
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
