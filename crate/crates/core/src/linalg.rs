//! Dense complex linear algebra on bipartite-indexed spaces.
//!
//! Composite index convention, used by every module in this crate:
//!
//! ```text
//! composite = left_index * d_right + right_index
//! ```
//!
//! The left factor is the slow (major) index, so `A ⊗ B` in this convention is
//! exactly the Kronecker product `kron(A, B)`.

use std::fmt;
use std::ops::{Add, Index, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting NaN and infinities.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!("matrix dimensions must be positive, got {rows}x{cols}")));
        }
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(k) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite { row: k / cols, col: k % cols });
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!("matrix dimensions must be positive, got {rows}x{cols}")));
        }
        for c in 0..cols {
            for r in 0..rows {
                let z = m[(r, c)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: r, col: c });
                }
            }
        }
        Ok(Self(m))
    }

    /// Builds a matrix entry by entry. The closure must return finite values.
    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        let m = DMatrix::from_fn(rows, cols, f);
        debug_assert!(m.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        Self(m)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |r, c| if r == c { C64::new(diag[r], 0.0) } else { ZERO })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// The rank-one matrix `|v⟩⟨v|`.
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |r, c| v[r] * v[c].conj())
    }

    /// `|u⟩⟨v|`.
    pub fn outer_pair(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }

    pub fn column(v: &[C64]) -> Self {
        Self::from_fn(v.len(), 1, |r, _| v[r])
    }

    /// `|i⟩⟨j|` in dimension `n`.
    pub fn basis_unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.0[(i, j)] = C64::new(1.0, 0.0);
        m
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn row_major(&self) -> Vec<C64> {
        let (rows, cols) = self.0.shape();
        let mut out = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                out.push(self.0[(r, c)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖self − other‖_F`; panics when shapes differ.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape(), "distance between differently shaped matrices");
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖X − X†‖_F / ‖X‖_F`, or 0 for the zero matrix. Infinite for non-square input.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let norm = self.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        self.distance(&self.adjoint()) / norm
    }

    /// `(X + X†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    /// Rearranges the matrix so that `result[(r, c)] = self[(row_of(r, c), col_of(r, c))]`.
    pub(crate) fn gather(
        &self,
        rows: usize,
        cols: usize,
        mut source: impl FnMut(usize, usize) -> (usize, usize),
    ) -> Self {
        Self::from_fn(rows, cols, |r, c| self.0[source(r, c)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix {}x{} ", self.rows(), self.cols())?;
        f.debug_list().entries(self.row_major()).finish()
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Factor dimensions of a bipartite space `C^{d_left} ⊗ C^{d_right}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BipartiteLayout {
    pub d_left: usize,
    pub d_right: usize,
}

impl BipartiteLayout {
    pub fn new(d_left: usize, d_right: usize) -> Result<Self> {
        if d_left == 0 || d_right == 0 {
            return Err(Error::DimensionMismatch(format!(
                "bipartite factors must be positive, got ({d_left}, {d_right})"
            )));
        }
        Ok(Self { d_left, d_right })
    }

    pub fn dim(&self) -> usize {
        self.d_left * self.d_right
    }

    #[inline]
    pub fn index(&self, left: usize, right: usize) -> usize {
        left * self.d_right + right
    }

    pub fn swapped(&self) -> Self {
        Self { d_left: self.d_right, d_right: self.d_left }
    }

    fn check(&self, x: &ComplexMatrix) -> Result<()> {
        let n = self.dim();
        if x.rows() != n || x.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "layout ({}, {}) needs a {n}x{n} matrix, got {}x{}",
                self.d_left,
                self.d_right,
                x.rows(),
                x.cols()
            )));
        }
        Ok(())
    }
}

/// Which tensor factor an operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Numerical tolerances, all relative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Allowed negativity of `λ_min` relative to `max(1, λ_max)`.
    pub psd_tol: f64,
    /// Singular values at or below `rank_tol · σ_max · max(rows, cols)` count as zero.
    pub rank_tol: f64,
    /// Frobenius-relative matrix equality.
    pub equality_tol: f64,
}

impl ToleranceConfig {
    pub const DEFAULT_PSD_TOL: f64 = 1e-9;
    pub const DEFAULT_RANK_TOL: f64 = 1e-8;
    pub const DEFAULT_EQUALITY_TOL: f64 = 1e-9;

    pub fn new(psd_tol: f64, rank_tol: f64, equality_tol: f64) -> Result<Self> {
        let cfg = Self { psd_tol, rank_tol, equality_tol };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in
            [("psd_tol", self.psd_tol), ("rank_tol", self.rank_tol), ("equality_tol", self.equality_tol)]
        {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::InvalidTolerance { name, value });
            }
        }
        Ok(())
    }
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            psd_tol: Self::DEFAULT_PSD_TOL,
            rank_tol: Self::DEFAULT_RANK_TOL,
            equality_tol: Self::DEFAULT_EQUALITY_TOL,
        }
    }
}

/// Traces out the factor named by `side`.
///
/// `Side::Left` returns a `d_right`-dimensional matrix, `Side::Right` a
/// `d_left`-dimensional one.
pub fn partial_trace(x: &ComplexMatrix, layout: BipartiteLayout, side: Side) -> Result<ComplexMatrix> {
    layout.check(x)?;
    let (dl, dr) = (layout.d_left, layout.d_right);
    let out = match side {
        Side::Left => {
            ComplexMatrix::from_fn(dr, dr, |b, bp| (0..dl).map(|a| x[(layout.index(a, b), layout.index(a, bp))]).sum())
        }
        Side::Right => {
            ComplexMatrix::from_fn(dl, dl, |a, ap| (0..dr).map(|b| x[(layout.index(a, b), layout.index(ap, b))]).sum())
        }
    };
    Ok(out)
}

/// Transposes the factor named by `side` in the computational basis.
pub fn partial_transpose(x: &ComplexMatrix, layout: BipartiteLayout, side: Side) -> Result<ComplexMatrix> {
    layout.check(x)?;
    let n = layout.dim();
    let (dl, dr) = (layout.d_left, layout.d_right);
    let out = x.gather(n, n, |r, c| {
        let (a, b) = (r / dr, r % dr);
        let (ap, bp) = (c / dr, c % dr);
        debug_assert!(a < dl && ap < dl);
        match side {
            Side::Left => (layout.index(ap, b), layout.index(a, bp)),
            Side::Right => (layout.index(a, bp), layout.index(ap, b)),
        }
    });
    Ok(out)
}

/// Eigenvalues in descending order with the matching orthonormal eigenvectors
/// as columns.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigensystem {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.rows()).map(|r| self.vectors[(r, k)]).collect()
    }

    /// `V · diag(λ) · V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.vectors;
        let scaled = ComplexMatrix::from_fn(v.rows(), v.cols(), |r, c| v[(r, c)] * self.values[c]);
        &scaled * &v.adjoint()
    }
}

pub fn hermitian_eigensystem(x: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<Eigensystem> {
    if !x.is_square() {
        return Err(Error::DimensionMismatch(format!("eigensystem of a non-square {}x{} matrix", x.rows(), x.cols())));
    }
    let residual = x.hermitian_residual();
    if residual > cfg.equality_tol {
        return Err(Error::NotHermitian { residual });
    }
    hermitian_eigensystem_unchecked(&x.hermitian_part())
}

fn hermitian_eigensystem_unchecked(h: &ComplexMatrix) -> Result<Eigensystem> {
    let n = h.rows();
    let eig = SymmetricEigen::try_new(h.as_dmatrix().clone(), f64::EPSILON, 10_000 * n.max(1))
        .ok_or(Error::EigenFailure { dim: n })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Eigensystem { values, vectors })
}

/// Outcome of a tolerance-gapped rank decision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankInfo {
    pub rank: usize,
    pub sigma_max: f64,
    pub cutoff: f64,
    /// Smallest singular value counted in the rank.
    pub smallest_kept: Option<f64>,
    /// Largest singular value discarded as numerical zero.
    pub largest_discarded: Option<f64>,
    /// Some singular value lies within a factor 10 of the cutoff.
    pub fragile: bool,
}

impl RankInfo {
    /// `smallest_kept / largest_discarded`; infinite when nothing was discarded
    /// or the discarded values are exactly zero.
    pub fn gap(&self) -> f64 {
        match (self.smallest_kept, self.largest_discarded) {
            (Some(kept), Some(lost)) if lost > 0.0 => kept / lost,
            _ => f64::INFINITY,
        }
    }
}

/// Ranks a matrix by its singular values: `σ_k > rank_tol · σ_max · max(rows, cols)`.
pub fn rank_info(x: &ComplexMatrix, cfg: &ToleranceConfig) -> RankInfo {
    let sigma = x.as_dmatrix().singular_values();
    rank_from_singular_values(sigma.as_slice(), x.rows().max(x.cols()), cfg)
}

pub(crate) fn rank_from_singular_values(sigma: &[f64], max_dim: usize, cfg: &ToleranceConfig) -> RankInfo {
    let sigma_max = sigma.iter().copied().fold(0.0_f64, f64::max);
    if sigma_max == 0.0 {
        return RankInfo {
            rank: 0,
            sigma_max: 0.0,
            cutoff: 0.0,
            smallest_kept: None,
            largest_discarded: sigma.first().map(|_| 0.0),
            fragile: false,
        };
    }
    let cutoff = cfg.rank_tol * sigma_max * max_dim as f64;
    let mut rank = 0;
    let mut smallest_kept: Option<f64> = None;
    let mut largest_discarded: Option<f64> = None;
    let mut fragile = false;
    for &s in sigma {
        if s > cutoff {
            rank += 1;
            smallest_kept = Some(smallest_kept.map_or(s, |k| k.min(s)));
        } else {
            largest_discarded = Some(largest_discarded.map_or(s, |d| d.max(s)));
        }
        if s > cutoff / 10.0 && s <= cutoff * 10.0 {
            fragile = true;
        }
    }
    RankInfo { rank, sigma_max, cutoff, smallest_kept, largest_discarded, fragile }
}

pub fn numerical_rank(x: &ComplexMatrix, cfg: &ToleranceConfig) -> usize {
    rank_info(x, cfg).rank
}

/// Extremal spectrum of the Hermitian part of a square matrix, plus its
/// Hermiticity residual. Enough to re-derive a PSD decision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsdSpectrum {
    pub hermitian_residual: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl PsdSpectrum {
    pub fn of(x: &ComplexMatrix) -> Result<Self> {
        if !x.is_square() {
            return Err(Error::DimensionMismatch(format!("PSD test of a non-square {}x{} matrix", x.rows(), x.cols())));
        }
        let eig = hermitian_eigensystem_unchecked(&x.hermitian_part())?;
        Ok(Self {
            hermitian_residual: x.hermitian_residual(),
            lambda_min: *eig.values.last().expect("square matrix has eigenvalues"),
            lambda_max: eig.values[0],
        })
    }

    pub fn threshold(&self, cfg: &ToleranceConfig) -> f64 {
        -cfg.psd_tol * self.lambda_max.max(1.0)
    }

    pub fn is_hermitian(&self, cfg: &ToleranceConfig) -> bool {
        self.hermitian_residual <= cfg.equality_tol
    }

    pub fn is_psd(&self, cfg: &ToleranceConfig) -> bool {
        self.is_hermitian(cfg) && self.lambda_min >= self.threshold(cfg)
    }
}

/// Hermitian within `equality_tol` and `λ_min ≥ −psd_tol · max(1, λ_max)`.
pub fn is_psd(x: &ComplexMatrix, cfg: &ToleranceConfig) -> bool {
    if !x.is_square() || x.hermitian_residual() > cfg.equality_tol {
        return false;
    }
    PsdSpectrum::of(x).is_ok_and(|s| s.is_psd(cfg))
}

/// A purification `|L⟩ ∈ C^n ⊗ C^{d_env}`, stored with index `sys * d_env + env`.
#[derive(Clone, Debug)]
pub struct Purification {
    pub vector: Vec<C64>,
    pub d_env: usize,
}

/// Purifies a PSD matrix onto an environment of dimension `numerical_rank(X)`.
///
/// Eigenvalues at or below the rank cutoff are dropped. The zero matrix gets a
/// one-dimensional environment and the zero vector.
pub fn purify(x: &ComplexMatrix, cfg: &ToleranceConfig) -> Result<Purification> {
    let spectrum = PsdSpectrum::of(x)?;
    if !spectrum.is_psd(cfg) {
        if !spectrum.is_hermitian(cfg) {
            return Err(Error::NotHermitian { residual: spectrum.hermitian_residual });
        }
        return Err(Error::NotPsd { what: "matrix to purify".into(), lambda_min: spectrum.lambda_min });
    }
    let n = x.rows();
    let eig = hermitian_eigensystem(x, cfg)?;
    let sigma: Vec<f64> = eig.values.iter().map(|v| v.abs()).collect();
    let rank = rank_from_singular_values(&sigma, n, cfg).rank;
    if rank == 0 {
        return Ok(Purification { vector: vec![ZERO; n], d_env: 1 });
    }
    // Eigenvalues are sorted descending, so the kept ones are the first `rank`.
    let mut vector = vec![ZERO; n * rank];
    for k in 0..rank {
        let weight = eig.values[k].max(0.0).sqrt();
        for s in 0..n {
            vector[s * rank + k] = eig.vectors[(s, k)] * weight;
        }
    }
    Ok(Purification { vector, d_env: rank })
}
