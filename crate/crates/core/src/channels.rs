//! Choi, Kraus and Stinespring representations of linear maps `M_{d_in} → M_{d_out}`.
//!
//! The Choi matrix is `J = Σ_{ij} |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)` with the input factor on the
//! left, so `J[(i·d_out + b, j·d_out + b')] = Φ(|i⟩⟨j|)[b, b']`.
//!
//! Kraus operators are reshaped from weighted Choi eigenvectors with
//! `K[b, a] = w[a·d_out + b]`, where `w = √λ · v` for an eigenpair `(λ, v)`.
//! For the identity map on `C^2` the only nonzero eigenpair is `λ = 2`,
//! `v = (1, 0, 0, 1)/√2`, so `w = (1, 0, 0, 1)` and
//! `K[0,0] = w[0] = 1`, `K[1,0] = w[1] = 0`, `K[0,1] = w[2] = 0`,
//! `K[1,1] = w[3] = 1`, i.e. `K = I` (up to the eigenvector's phase).

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eigensystem, partial_trace, partial_transpose, rank_from_singular_values, BipartiteLayout, ComplexMatrix,
    PsdSpectrum, Side, ToleranceConfig, C64,
};

/// Choi matrix of a map `M_{d_in} → M_{d_out}` on the layout `(d_in, d_out)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    d_in: usize,
    d_out: usize,
    matrix: ComplexMatrix,
}

impl ChoiMatrix {
    pub fn new(d_in: usize, d_out: usize, matrix: ComplexMatrix) -> Result<Self> {
        let layout = BipartiteLayout::new(d_in, d_out)?;
        if matrix.rows() != layout.dim() || matrix.cols() != layout.dim() {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix of a map M_{d_in} -> M_{d_out} must be {n}x{n}, got {}x{}",
                matrix.rows(),
                matrix.cols(),
                n = layout.dim()
            )));
        }
        Ok(Self { d_in, d_out, matrix })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn layout(&self) -> BipartiteLayout {
        BipartiteLayout { d_left: self.d_in, d_right: self.d_out }
    }

    /// The block `Φ(|i⟩⟨j|)`.
    pub fn block(&self, i: usize, j: usize) -> ComplexMatrix {
        let d = self.d_out;
        self.matrix.gather(d, d, |b, bp| (i * d + b, j * d + bp))
    }

    /// Natural (transfer) representation acting on row-major vectorizations:
    /// `vec(Φ(X)) = T · vec(X)` with `vec(X)[i·d + j] = X[i, j]`.
    pub fn transfer_matrix(&self) -> ComplexMatrix {
        let (da, db) = (self.d_in, self.d_out);
        self.matrix.gather(db * db, da * da, |r, c| {
            let (b, bp) = (r / db, r % db);
            let (i, j) = (c / da, c % da);
            (i * db + b, j * db + bp)
        })
    }

    /// Inverse of [`ChoiMatrix::transfer_matrix`].
    pub fn from_transfer(d_in: usize, d_out: usize, transfer: &ComplexMatrix) -> Result<Self> {
        if transfer.rows() != d_out * d_out || transfer.cols() != d_in * d_in {
            return Err(Error::DimensionMismatch(format!(
                "transfer matrix of M_{d_in} -> M_{d_out} must be {}x{}, got {}x{}",
                d_out * d_out,
                d_in * d_in,
                transfer.rows(),
                transfer.cols()
            )));
        }
        let n = d_in * d_out;
        let matrix = transfer.gather(n, n, |r, c| {
            let (i, b) = (r / d_out, r % d_out);
            let (j, bp) = (c / d_out, c % d_out);
            (b * d_out + bp, i * d_in + j)
        });
        Self::new(d_in, d_out, matrix)
    }
}

/// Assembles `Σ_{ij} |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)` from the action on matrix units.
pub fn choi_from_map_action(
    d_in: usize,
    d_out: usize,
    mut action: impl FnMut(usize, usize) -> ComplexMatrix,
) -> Result<ChoiMatrix> {
    let layout = BipartiteLayout::new(d_in, d_out)?;
    let n = layout.dim();
    let mut entries = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..d_in {
        for j in 0..d_in {
            let block = action(i, j);
            if block.rows() != d_out || block.cols() != d_out {
                return Err(Error::DimensionMismatch(format!(
                    "action on |{i}><{j}| must be {d_out}x{d_out}, got {}x{}",
                    block.rows(),
                    block.cols()
                )));
            }
            for b in 0..d_out {
                for bp in 0..d_out {
                    entries[layout.index(i, b) * n + layout.index(j, bp)] = block[(b, bp)];
                }
            }
        }
    }
    ChoiMatrix::new(d_in, d_out, ComplexMatrix::from_row_major(n, n, entries)?)
}

/// `Φ(X) = Tr_in[(Xᵀ ⊗ I) J]`.
pub fn apply_channel(choi: &ChoiMatrix, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (da, db) = (choi.d_in, choi.d_out);
    if x.rows() != da || x.cols() != da {
        return Err(Error::DimensionMismatch(format!("map acts on {da}x{da} matrices, got {}x{}", x.rows(), x.cols())));
    }
    let j = &choi.matrix;
    Ok(ComplexMatrix::from_fn(db, db, |b, bp| {
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..da {
            for k in 0..da {
                acc += x[(i, k)] * j[(i * db + b, k * db + bp)];
            }
        }
        acc
    }))
}

/// Ordered Kraus operators `K_k : C^{d_in} → C^{d_out}`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausSet {
    d_in: usize,
    d_out: usize,
    operators: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(d_in: usize, d_out: usize, operators: Vec<ComplexMatrix>) -> Result<Self> {
        BipartiteLayout::new(d_in, d_out)?;
        if operators.is_empty() {
            return Err(Error::InvalidParameter("a Kraus set needs at least one operator".into()));
        }
        if let Some((k, op)) = operators.iter().enumerate().find(|(_, op)| op.rows() != d_out || op.cols() != d_in) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator {k} must be {d_out}x{d_in}, got {}x{}",
                op.rows(),
                op.cols()
            )));
        }
        Ok(Self { d_in, d_out, operators })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// `Σ_k K_k X K_k†`.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.d_in || x.cols() != self.d_in {
            return Err(Error::DimensionMismatch(format!(
                "Kraus set acts on {d}x{d} matrices, got {}x{}",
                x.rows(),
                x.cols(),
                d = self.d_in
            )));
        }
        let mut acc = ComplexMatrix::zeros(self.d_out, self.d_out);
        for k in &self.operators {
            acc = &acc + &(&(k * x) * &k.adjoint());
        }
        Ok(acc)
    }

    pub fn to_choi(&self) -> ChoiMatrix {
        choi_from_map_action(self.d_in, self.d_out, |i, j| {
            self.apply(&ComplexMatrix::basis_unit(self.d_in, i, j)).expect("matrix unit has the input dimension")
        })
        .expect("Kraus set dimensions are validated")
    }

    /// `Σ_k K_k† K_k`.
    pub fn completeness(&self) -> ComplexMatrix {
        self.operators.iter().fold(ComplexMatrix::zeros(self.d_in, self.d_in), |acc, k| &acc + &(&k.adjoint() * k))
    }
}

/// Kraus operators from the eigenpairs of a PSD Choi matrix above the rank cutoff.
///
/// The zero map yields a single zero operator.
pub fn kraus_from_choi(choi: &ChoiMatrix, cfg: &ToleranceConfig) -> Result<KrausSet> {
    let spectrum = PsdSpectrum::of(&choi.matrix)?;
    if !spectrum.is_psd(cfg) {
        if !spectrum.is_hermitian(cfg) {
            return Err(Error::NotHermitian { residual: spectrum.hermitian_residual });
        }
        return Err(Error::NotPsd { what: "Choi matrix (map is not CP)".into(), lambda_min: spectrum.lambda_min });
    }
    let eig = hermitian_eigensystem(&choi.matrix, cfg)?;
    let sigma: Vec<f64> = eig.values.iter().map(|v| v.abs()).collect();
    let rank = rank_from_singular_values(&sigma, choi.matrix.rows(), cfg).rank;
    let (da, db) = (choi.d_in, choi.d_out);
    if rank == 0 {
        return KrausSet::new(da, db, vec![ComplexMatrix::zeros(db, da)]);
    }
    let operators = (0..rank)
        .map(|k| {
            let weight = eig.values[k].max(0.0).sqrt();
            ComplexMatrix::from_fn(db, da, |b, a| eig.vectors[(a * db + b, k)] * weight)
        })
        .collect();
    KrausSet::new(da, db, operators)
}

/// Which output factor of a Stinespring operator is kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Output {
    B,
    C,
}

/// `L : C^{d_a} → C^{d_b} ⊗ C^{d_c}`, stored as a `(d_b·d_c) × d_a` matrix with
/// output index `b·d_c + c`.
#[derive(Clone, Debug, PartialEq)]
pub struct StinespringOperator {
    d_a: usize,
    d_b: usize,
    d_c: usize,
    matrix: ComplexMatrix,
}

impl StinespringOperator {
    pub fn new(d_a: usize, d_b: usize, d_c: usize, matrix: ComplexMatrix) -> Result<Self> {
        if d_a == 0 || d_b == 0 || d_c == 0 {
            return Err(Error::DimensionMismatch(format!(
                "Stinespring dimensions must be positive, got ({d_a}, {d_b}, {d_c})"
            )));
        }
        if matrix.rows() != d_b * d_c || matrix.cols() != d_a {
            return Err(Error::DimensionMismatch(format!(
                "Stinespring operator for ({d_a}, {d_b}, {d_c}) must be {}x{d_a}, got {}x{}",
                d_b * d_c,
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(Self { d_a, d_b, d_c, matrix })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.d_a, self.d_b, self.d_c)
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn d_c(&self) -> usize {
        self.d_c
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn output_layout(&self) -> BipartiteLayout {
        BipartiteLayout { d_left: self.d_b, d_right: self.d_c }
    }

    /// `L X L†` on `C^{d_b} ⊗ C^{d_c}`.
    pub fn conjugate(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.d_a || x.cols() != self.d_a {
            return Err(Error::DimensionMismatch(format!(
                "Stinespring operator acts on {d}x{d} matrices, got {}x{}",
                x.rows(),
                x.cols(),
                d = self.d_a
            )));
        }
        Ok(&(&self.matrix * x) * &self.matrix.adjoint())
    }

    /// `Tr_C(L X L†)` for `Output::B`, `Tr_B(L X L†)` for `Output::C`.
    pub fn apply_marginal(&self, x: &ComplexMatrix, keep: Output) -> Result<ComplexMatrix> {
        let full = self.conjugate(x)?;
        let side = match keep {
            Output::B => Side::Right,
            Output::C => Side::Left,
        };
        partial_trace(&full, self.output_layout(), side)
    }

    /// Choi matrix of the map onto the kept output.
    pub fn marginal_choi(&self, keep: Output) -> ChoiMatrix {
        let d_out = match keep {
            Output::B => self.d_b,
            Output::C => self.d_c,
        };
        choi_from_map_action(self.d_a, d_out, |i, j| {
            self.apply_marginal(&ComplexMatrix::basis_unit(self.d_a, i, j), keep)
                .expect("matrix unit has the input dimension")
        })
        .expect("Stinespring dimensions are validated")
    }

    /// Exchanges the two output factors, so the kept and traced outputs trade places.
    pub fn swap_outputs(&self) -> Self {
        let (db, dc) = (self.d_b, self.d_c);
        let matrix = self.matrix.gather(db * dc, self.d_a, |r, a| {
            let (c, b) = (r / db, r % db);
            (b * dc + c, a)
        });
        Self { d_a: self.d_a, d_b: dc, d_c: db, matrix }
    }
}

/// `L|x⟩ = Σ_k (K_k|x⟩) ⊗ |k⟩`, with one environment level per Kraus operator.
pub fn stinespring_from_kraus(kraus: &KrausSet) -> StinespringOperator {
    let (da, db, dc) = (kraus.d_in, kraus.d_out, kraus.len());
    let matrix = ComplexMatrix::from_fn(db * dc, da, |r, a| {
        let (b, k) = (r / dc, r % dc);
        kraus.operators[k][(b, a)]
    });
    StinespringOperator { d_a: da, d_b: db, d_c: dc, matrix }
}

/// Recovers the Kraus set from the environment slices of `L`.
pub fn kraus_from_stinespring(l: &StinespringOperator) -> KrausSet {
    let (da, db, dc) = l.dims();
    let operators = (0..dc).map(|k| ComplexMatrix::from_fn(db, da, |b, a| l.matrix[(b * dc + k, a)])).collect();
    KrausSet { d_in: da, d_out: db, operators }
}

/// Spectrum of the Choi matrix.
pub fn cp_spectrum(choi: &ChoiMatrix) -> Result<PsdSpectrum> {
    PsdSpectrum::of(&choi.matrix)
}

/// Spectrum of the Choi matrix partially transposed on the input factor.
pub fn cocp_spectrum(choi: &ChoiMatrix) -> Result<PsdSpectrum> {
    PsdSpectrum::of(&partial_transpose(&choi.matrix, choi.layout(), Side::Left)?)
}

pub fn is_cp(choi: &ChoiMatrix, cfg: &ToleranceConfig) -> bool {
    cp_spectrum(choi).is_ok_and(|s| s.is_psd(cfg))
}

/// Completely copositive: the input-side partial transpose of `J` is PSD.
pub fn is_cocp(choi: &ChoiMatrix, cfg: &ToleranceConfig) -> bool {
    cocp_spectrum(choi).is_ok_and(|s| s.is_psd(cfg))
}

pub fn is_ppt_map(choi: &ChoiMatrix, cfg: &ToleranceConfig) -> bool {
    is_cp(choi, cfg) && is_cocp(choi, cfg)
}

/// `‖Tr_out J − I‖_F / √d_in`.
pub fn trace_preservation_residual(choi: &ChoiMatrix) -> f64 {
    let reduced = partial_trace(&choi.matrix, choi.layout(), Side::Right).expect("Choi layout is consistent");
    reduced.distance(&ComplexMatrix::identity(choi.d_in)) / (choi.d_in as f64).sqrt()
}

/// `Tr_out J = I` within `equality_tol`, measured relative to `‖I‖_F`.
pub fn is_trace_preserving(choi: &ChoiMatrix, cfg: &ToleranceConfig) -> bool {
    trace_preservation_residual(choi) <= cfg.equality_tol
}
