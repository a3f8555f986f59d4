//! Complementary pairs `Φ = Tr_C(L · L†)`, `Ψ = Tr_B(L · L†)` built from one
//! Stinespring operator, and the rank data of their common purification.

use serde::{Deserialize, Serialize};

use crate::channels::{ChoiMatrix, Output, StinespringOperator};
use crate::error::{Error, Result};
use crate::linalg::{is_psd, rank_info, ComplexMatrix, RankInfo, ToleranceConfig, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct ComplementaryPair {
    stinespring: StinespringOperator,
    choi_phi: ChoiMatrix,
    choi_psi: ChoiMatrix,
}

impl ComplementaryPair {
    /// Assembles a pair without checking complementarity; see [`verify_complementarity`].
    pub fn from_parts(stinespring: StinespringOperator, choi_phi: ChoiMatrix, choi_psi: ChoiMatrix) -> Result<Self> {
        let (da, db, dc) = stinespring.dims();
        if (choi_phi.d_in(), choi_phi.d_out()) != (da, db) || (choi_psi.d_in(), choi_psi.d_out()) != (da, dc) {
            return Err(Error::DimensionMismatch(format!(
                "pair for L with dims ({da}, {db}, {dc}) needs Choi matrices for M_{da}->M_{db} and M_{da}->M_{dc}"
            )));
        }
        Ok(Self { stinespring, choi_phi, choi_psi })
    }

    pub fn stinespring(&self) -> &StinespringOperator {
        &self.stinespring
    }

    /// `J(Φ)` for `Φ(X) = Tr_C(L X L†)`.
    pub fn choi_phi(&self) -> &ChoiMatrix {
        &self.choi_phi
    }

    /// `J(Ψ)` for `Ψ(X) = Tr_B(L X L†)`.
    pub fn choi_psi(&self) -> &ChoiMatrix {
        &self.choi_psi
    }

    /// The same pair with the roles of `Φ` and `Ψ` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            stinespring: self.stinespring.swap_outputs(),
            choi_phi: self.choi_psi.clone(),
            choi_psi: self.choi_phi.clone(),
        }
    }
}

pub fn complementary_pair_from_stinespring(l: &StinespringOperator) -> ComplementaryPair {
    let choi_phi = l.marginal_choi(Output::B);
    let choi_psi = l.marginal_choi(Output::C);
    debug_assert!(is_psd(choi_phi.matrix(), &ToleranceConfig::default()));
    debug_assert!(is_psd(choi_psi.matrix(), &ToleranceConfig::default()));
    ComplementaryPair { stinespring: l.clone(), choi_phi, choi_psi }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Factor {
    A,
    B,
    C,
}

/// Vector in `C^{d_a} ⊗ C^{d_b} ⊗ C^{d_c}` with index `(a·d_b + b)·d_c + c`.
#[derive(Clone, Debug, PartialEq)]
pub struct TripartiteVector {
    dims: [usize; 3],
    amplitudes: Vec<C64>,
}

impl TripartiteVector {
    pub fn new(dims: [usize; 3], amplitudes: Vec<C64>) -> Result<Self> {
        if dims.contains(&0) || amplitudes.len() != dims.iter().product::<usize>() {
            return Err(Error::DimensionMismatch(format!(
                "tripartite vector with dims {dims:?} cannot hold {} amplitudes",
                amplitudes.len()
            )));
        }
        Ok(Self { dims, amplitudes })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Reduced matrix `Tr_{rest} |v⟩⟨v|` on the kept factors, taken in A, B, C order.
    pub fn marginal(&self, keep: &[Factor]) -> ComplexMatrix {
        let mut kept: Vec<usize> = keep.iter().map(|f| *f as usize).collect();
        kept.sort_unstable();
        kept.dedup();
        let traced: Vec<usize> = (0..3).filter(|k| !kept.contains(k)).collect();
        let rows: usize = kept.iter().map(|&k| self.dims[k]).product();
        let cols: usize = traced.iter().map(|&k| self.dims[k]).product();
        let [_, db, dc] = self.dims;
        let split = |mut composite: usize, factors: &[usize], digits: &mut [usize; 3]| {
            for &k in factors.iter().rev() {
                digits[k] = composite % self.dims[k];
                composite /= self.dims[k];
            }
        };
        // Schmidt matrix M[kept, traced]; the marginal is M M†.
        let schmidt = ComplexMatrix::from_fn(rows, cols, |r, c| {
            let mut digits = [0usize; 3];
            split(r, &kept, &mut digits);
            split(c, &traced, &mut digits);
            self.amplitudes[(digits[0] * db + digits[1]) * dc + digits[2]]
        });
        &schmidt * &schmidt.adjoint()
    }
}

/// `|L⟩ = (I_A ⊗ L) Σ_i |i⟩|i⟩`, whose AB and AC marginals are `J(Φ)` and `J(Ψ)`.
pub fn common_purification_vector(l: &StinespringOperator) -> TripartiteVector {
    let (da, db, dc) = l.dims();
    let m = l.matrix();
    let mut amplitudes = Vec::with_capacity(da * db * dc);
    for a in 0..da {
        for row in 0..db * dc {
            amplitudes.push(m[(row, a)]);
        }
    }
    TripartiteVector { dims: [da, db, dc], amplitudes }
}

/// Ranks of the marginals of `|L⟩⟨L|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankChain {
    pub ab: RankInfo,
    pub ac: RankInfo,
    pub a: RankInfo,
    pub b: RankInfo,
    pub c: RankInfo,
    pub fragile: bool,
}

impl RankChain {
    pub fn rank_lab(&self) -> usize {
        self.ab.rank
    }

    pub fn rank_lac(&self) -> usize {
        self.ac.rank
    }

    pub fn rank_la(&self) -> usize {
        self.a.rank
    }

    pub fn rank_lb(&self) -> usize {
        self.b.rank
    }

    pub fn rank_lc(&self) -> usize {
        self.c.rank
    }

    /// `(rank L_AB, rank L_B, rank L_C, rank L_AC)`.
    pub fn quadruple(&self) -> (usize, usize, usize, usize) {
        (self.ab.rank, self.b.rank, self.c.rank, self.ac.rank)
    }
}

/// Computes the five marginal ranks and checks `rank L_C = rank L_AB`,
/// `rank L_B = rank L_AC`.
///
/// A mismatch on a fragile chain is returned with `fragile = true`; on a
/// non-fragile chain it is an error.
pub fn rank_chain(l: &StinespringOperator, cfg: &ToleranceConfig) -> Result<RankChain> {
    let v = common_purification_vector(l);
    let info = |keep: &[Factor]| rank_info(&v.marginal(keep), cfg);
    let chain = RankChain {
        ab: info(&[Factor::A, Factor::B]),
        ac: info(&[Factor::A, Factor::C]),
        a: info(&[Factor::A]),
        b: info(&[Factor::B]),
        c: info(&[Factor::C]),
        fragile: false,
    };
    let fragile = [&chain.ab, &chain.ac, &chain.a, &chain.b, &chain.c].iter().any(|r| r.fragile);
    let chain = RankChain { fragile, ..chain };
    if !fragile {
        if chain.c.rank != chain.ab.rank {
            return Err(Error::PurityViolation {
                left: "L_C",
                left_rank: chain.c.rank,
                right: "L_AB",
                right_rank: chain.ab.rank,
            });
        }
        if chain.b.rank != chain.ac.rank {
            return Err(Error::PurityViolation {
                left: "L_B",
                left_rank: chain.b.rank,
                right: "L_AC",
                right_rank: chain.ac.rank,
            });
        }
    }
    Ok(chain)
}

/// Relative Frobenius residuals `(‖Tr_C|L⟩⟨L| − J(Φ)‖, ‖Tr_B|L⟩⟨L| − J(Ψ)‖)`.
pub fn purification_residuals(pair: &ComplementaryPair) -> (f64, f64) {
    let v = common_purification_vector(&pair.stinespring);
    let rel = |marginal: ComplexMatrix, choi: &ChoiMatrix| {
        let scale = marginal.frobenius_norm().max(choi.matrix().frobenius_norm());
        let diff = marginal.distance(choi.matrix());
        if scale == 0.0 {
            0.0
        } else {
            diff / scale
        }
    };
    (rel(v.marginal(&[Factor::A, Factor::B]), &pair.choi_phi), rel(v.marginal(&[Factor::A, Factor::C]), &pair.choi_psi))
}

/// Both Choi matrices of the pair are the AB and AC marginals of `|L⟩` for
/// the pair's own `L`.
pub fn verify_complementarity(pair: &ComplementaryPair, cfg: &ToleranceConfig) -> bool {
    let (phi, psi) = purification_residuals(pair);
    phi <= cfg.equality_tol && psi <= cfg.equality_tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{choi_from_map_action, stinespring_from_kraus, KrausSet};
    use crate::linalg::{partial_trace, BipartiteLayout, Side};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn test_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        ComplexMatrix::from_fn(rows, cols, |_, _| C64::new(next(), next()))
    }

    fn dephasing_dilation() -> StinespringOperator {
        let kraus =
            KrausSet::new(2, 2, vec![ComplexMatrix::basis_unit(2, 0, 0), ComplexMatrix::basis_unit(2, 1, 1)]).unwrap();
        stinespring_from_kraus(&kraus)
    }

    #[test]
    fn identity_dilation_pair() {
        let l = StinespringOperator::new(2, 2, 1, ComplexMatrix::identity(2)).unwrap();
        let pair = complementary_pair_from_stinespring(&l);
        let id = choi_from_map_action(2, 2, |i, j| ComplexMatrix::basis_unit(2, i, j)).unwrap();
        assert_eq!(pair.choi_phi(), &id);
        // Ψ(X) = trace(X): J(Ψ) = Σ_ij |i><j| δ_ij = I_2
        assert_eq!(pair.choi_psi().matrix(), &ComplexMatrix::identity(2));
    }

    #[test]
    fn dephasing_dilation_pair() {
        let pair = complementary_pair_from_stinespring(&dephasing_dilation());
        // [Ψ(X)]_ij = Tr(K_i X K_j†) = δ_ij X_ii, same as Φ.
        let dephasing = choi_from_map_action(2, 2, |i, j| {
            if i == j {
                ComplexMatrix::basis_unit(2, i, i)
            } else {
                ComplexMatrix::zeros(2, 2)
            }
        })
        .unwrap();
        assert_eq!(pair.choi_phi(), &dephasing);
        assert_eq!(pair.choi_psi(), &dephasing);
    }

    #[test]
    fn traces_match_hilbert_schmidt_norm() {
        for seed in 0..10 {
            let l = StinespringOperator::new(2, 2, 2, test_matrix(4, 2, seed)).unwrap();
            let pair = complementary_pair_from_stinespring(&l);
            let norm_sqr = l.matrix().frobenius_norm().powi(2);
            assert!((pair.choi_phi().matrix().trace().re - norm_sqr).abs() < 1e-12);
            assert!((pair.choi_psi().matrix().trace().re - norm_sqr).abs() < 1e-12);
        }
    }

    #[test]
    fn purification_vector_examples() {
        let l = StinespringOperator::new(2, 2, 1, ComplexMatrix::identity(2)).unwrap();
        let v = common_purification_vector(&l);
        assert_eq!(v.amplitudes(), &[c(1.0), c(0.0), c(0.0), c(1.0)]);

        let v = common_purification_vector(&dephasing_dilation());
        let mut expected = vec![c(0.0); 8];
        expected[0] = c(1.0);
        expected[7] = c(1.0);
        assert_eq!(v.amplitudes(), expected.as_slice());
    }

    #[test]
    fn marginals_agree_with_bipartite_partial_trace() {
        let v =
            TripartiteVector::new([2, 3, 2], (0..12).map(|k| C64::new(k as f64, -(k as f64) / 3.0)).collect()).unwrap();
        let full = ComplexMatrix::outer(v.amplitudes());
        let ab_c = BipartiteLayout::new(6, 2).unwrap();
        let a_bc = BipartiteLayout::new(2, 6).unwrap();
        let ab = partial_trace(&full, ab_c, Side::Right).unwrap();
        assert!(ab.distance(&v.marginal(&[Factor::A, Factor::B])) < 1e-12);
        let a = partial_trace(&full, a_bc, Side::Right).unwrap();
        assert!(a.distance(&v.marginal(&[Factor::A])) < 1e-12);
        let c_only = partial_trace(&full, ab_c, Side::Left).unwrap();
        assert!(c_only.distance(&v.marginal(&[Factor::C])) < 1e-12);
        let b = partial_trace(&ab, BipartiteLayout::new(2, 3).unwrap(), Side::Left).unwrap();
        assert!(b.distance(&v.marginal(&[Factor::B])) < 1e-12);
        // Reorder to (A, C, B) and trace out the last factor.
        let amps = v.amplitudes();
        let mut acb = vec![c(0.0); 12];
        for a in 0..2 {
            for b in 0..3 {
                for cc in 0..2 {
                    acb[(a * 2 + cc) * 3 + b] = amps[(a * 3 + b) * 2 + cc];
                }
            }
        }
        let ac = partial_trace(&ComplexMatrix::outer(&acb), BipartiteLayout::new(4, 3).unwrap(), Side::Right).unwrap();
        assert!(ac.distance(&v.marginal(&[Factor::C, Factor::A])) < 1e-12);
    }

    #[test]
    fn rank_chain_examples() {
        let cfg = ToleranceConfig::default();
        let l = StinespringOperator::new(2, 2, 1, ComplexMatrix::identity(2)).unwrap();
        let chain = rank_chain(&l, &cfg).unwrap();
        assert_eq!(chain.quadruple(), (1, 2, 1, 2));
        assert!(!chain.fragile);

        let chain = rank_chain(&dephasing_dilation(), &cfg).unwrap();
        assert_eq!(chain.quadruple(), (2, 2, 2, 2));
        assert_eq!(chain.rank_la(), 2);
    }

    #[test]
    fn verify_complementarity_cases() {
        let cfg = ToleranceConfig::default();
        let l = StinespringOperator::new(2, 3, 2, test_matrix(6, 2, 42)).unwrap();
        let pair = complementary_pair_from_stinespring(&l);
        assert!(verify_complementarity(&pair, &cfg));

        let zeroed = ComplementaryPair::from_parts(
            l.clone(),
            pair.choi_phi().clone(),
            ChoiMatrix::new(2, 2, ComplexMatrix::zeros(4, 4)).unwrap(),
        )
        .unwrap();
        assert!(!verify_complementarity(&zeroed, &cfg));

        // Conjugating the environment by a unitary gives an isometrically
        // equivalent complement, but it is not the complement for this L.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = ComplexMatrix::from_row_major(2, 2, vec![c(s), c(s), c(s), c(-s)]).unwrap();
        let w = ComplexMatrix::identity(2).kron(&u);
        let rotated = &(&w * pair.choi_psi().matrix()) * &w.adjoint();
        let rotated_pair =
            ComplementaryPair::from_parts(l, pair.choi_phi().clone(), ChoiMatrix::new(2, 2, rotated).unwrap()).unwrap();
        assert!(!verify_complementarity(&rotated_pair, &cfg));
    }

    #[test]
    fn from_parts_checks_dims() {
        let l = StinespringOperator::new(2, 3, 2, test_matrix(6, 2, 1)).unwrap();
        let pair = complementary_pair_from_stinespring(&l);
        assert!(ComplementaryPair::from_parts(l, pair.choi_psi().clone(), pair.choi_phi().clone()).is_err());
    }

    #[test]
    fn swapping_outputs_exchanges_the_pair() {
        let l = StinespringOperator::new(2, 3, 2, test_matrix(6, 2, 8)).unwrap();
        let pair = complementary_pair_from_stinespring(&l);
        let swapped = complementary_pair_from_stinespring(&l.swap_outputs());
        assert_eq!(swapped.choi_phi(), pair.choi_psi());
        assert_eq!(swapped.choi_psi(), pair.choi_phi());
        assert_eq!(pair.swapped(), swapped);
    }
}
