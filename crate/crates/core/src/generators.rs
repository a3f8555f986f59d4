//! Deterministic instance generators.
//!
//! Random instances use the `chacha20-boxmuller-v1` stream: a ChaCha20
//! generator seeded through `SeedableRng::seed_from_u64`, 53-bit uniforms
//! taken from the top bits of each `u64`, and Box–Muller normals evaluated
//! with the pure-Rust `libm` routines so the output is bit-identical across
//! platforms.

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::channels::{
    choi_from_map_action, kraus_from_choi, stinespring_from_kraus, ChoiMatrix, KrausSet, StinespringOperator,
};
use crate::complement::{complementary_pair_from_stinespring, ComplementaryPair};
use crate::error::{Error, Result};
use crate::linalg::{BipartiteLayout, ComplexMatrix, ToleranceConfig, C64};

/// Name of the random stream, embedded in reports.
pub const PRNG_NAME: &str = "chacha20-boxmuller-v1";

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th sample of a run: `splitmix64(seed + splitmix64(index))`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed.wrapping_add(splitmix64(index)))
}

pub struct Prng {
    rng: ChaCha20Rng,
}

impl Prng {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha20Rng::seed_from_u64(seed) }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `lo..=hi`.
    pub fn range_inclusive(&mut self, lo: usize, hi: usize) -> usize {
        debug_assert!(lo <= hi);
        lo + (self.uniform() * (hi - lo + 1) as f64) as usize
    }

    /// Two independent standard normals.
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = libm::sqrt(-2.0 * libm::log(u1));
        let angle = 2.0 * std::f64::consts::PI * u2;
        (radius * libm::cos(angle), radius * libm::sin(angle))
    }

    /// Standard complex Gaussian, `E|z|² = 1`.
    pub fn complex_gaussian(&mut self) -> C64 {
        let (x, y) = self.normal_pair();
        C64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Matrix of i.i.d. standard complex Gaussians, filled in row-major order.
    pub fn ginibre(&mut self, rows: usize, cols: usize) -> ComplexMatrix {
        let entries = (0..rows * cols).map(|_| self.complex_gaussian()).collect();
        ComplexMatrix::from_row_major(rows, cols, entries).expect("Gaussian samples are finite")
    }
}

/// Ginibre Stinespring operator, entries drawn in row-major order of the
/// `(d_b·d_c) × d_a` matrix. With `normalize`, each column is scaled to unit
/// norm, so `Tr Φ(|i⟩⟨i|) = Tr Ψ(|i⟩⟨i|) = 1` for every basis input.
pub fn random_stinespring(
    d_a: usize,
    d_b: usize,
    d_c: usize,
    seed: u64,
    normalize: bool,
) -> Result<StinespringOperator> {
    if d_a == 0 || d_b == 0 || d_c == 0 {
        return Err(Error::InvalidParameter(format!("dimensions must be at least 1, got ({d_a}, {d_b}, {d_c})")));
    }
    let mut rng = Prng::new(seed);
    let mut l = rng.ginibre(d_b * d_c, d_a);
    if normalize {
        let norms: Vec<f64> =
            (0..d_a).map(|a| (0..d_b * d_c).map(|r| l[(r, a)].norm_sqr()).sum::<f64>().sqrt()).collect();
        l = ComplexMatrix::from_fn(d_b * d_c, d_a, |r, a| l[(r, a)] / norms[a]);
    }
    StinespringOperator::new(d_a, d_b, d_c, l)
}

/// Random PSD Choi matrix `G G†` with `G` Ginibre of size `(d_in·d_out) × rank`.
pub fn random_psd_choi(d_in: usize, d_out: usize, rank: usize, seed: u64) -> Result<ChoiMatrix> {
    if d_in == 0 || d_out == 0 || rank == 0 {
        return Err(Error::InvalidParameter(format!("dimensions must be at least 1, got ({d_in}, {d_out}, {rank})")));
    }
    let g = Prng::new(seed).ginibre(d_in * d_out, rank);
    ChoiMatrix::new(d_in, d_out, &g * &g.adjoint())
}

/// The Schur multiplier `Ψ(X) = T ⊙ X` for `T = diag(t)` together with its
/// complement, on the dilation `|i⟩ ↦ √t_i |i⟩_B ⊗ |i⟩_C`.
///
/// `Ψ` is the `C` marginal (Kraus operators `√t_i |i⟩⟨i|`), `Φ` the `B`
/// marginal with `[Φ(X)]_{ij} = δ_ij t_i X_ii`.
pub fn schur_multiplier_pair(t: &[f64]) -> Result<ComplementaryPair> {
    Ok(complementary_pair_from_stinespring(&schur_multiplier_dilation(t)?))
}

pub fn schur_multiplier_dilation(t: &[f64]) -> Result<StinespringOperator> {
    if t.is_empty() {
        return Err(Error::InvalidParameter("Schur multiplier needs a nonempty diagonal".into()));
    }
    if let Some(bad) = t.iter().find(|&&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "Schur diagonal entries must be finite and nonnegative, got {bad}"
        )));
    }
    let d = t.len();
    let ops = t.iter().enumerate().map(|(i, &ti)| ComplexMatrix::basis_unit(d, i, i).scale_real(ti.sqrt())).collect();
    let kraus = KrausSet::new(d, d, ops)?;
    // stinespring_from_kraus puts Ψ's output on B; move it to C.
    Ok(stinespring_from_kraus(&kraus).swap_outputs())
}

/// Five product vectors of the 3 ⊗ 3 "tiles" unextendible product basis.
pub fn tiles_upb_vectors() -> [Vec<C64>; 5] {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let s3 = 1.0 / 3.0_f64.sqrt();
    let product = |left: [f64; 3], right: [f64; 3]| -> Vec<C64> {
        let mut v = Vec::with_capacity(9);
        for a in left {
            for b in right {
                v.push(C64::new(a * b, 0.0));
            }
        }
        v
    };
    [
        product([1.0, 0.0, 0.0], [s2, -s2, 0.0]),
        product([s2, -s2, 0.0], [0.0, 0.0, 1.0]),
        product([0.0, 0.0, 1.0], [0.0, s2, -s2]),
        product([0.0, s2, -s2], [1.0, 0.0, 0.0]),
        product([s3, s3, s3], [s3, s3, s3]),
    ]
}

/// `(I − Σ_k |ψ_k⟩⟨ψ_k|) / 4` for the tiles vectors: PPT, rank 4, trace 1,
/// treated as the Choi matrix of a CP map `M_3 → M_3`.
pub fn tiles_upb_choi() -> ChoiMatrix {
    let projector =
        tiles_upb_vectors().iter().fold(ComplexMatrix::zeros(9, 9), |acc, v| &acc + &ComplexMatrix::outer(v));
    let state = (&ComplexMatrix::identity(9) - &projector).scale_real(0.25);
    ChoiMatrix::new(3, 3, state).expect("9x9 on layout (3, 3)")
}

/// Minimal dilation of the tiles Choi matrix, with a 4-dimensional environment.
pub fn tiles_upb_stinespring(cfg: &ToleranceConfig) -> Result<StinespringOperator> {
    Ok(stinespring_from_kraus(&kraus_from_choi(&tiles_upb_choi(), cfg)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedChannel {
    Identity,
    Transpose,
    /// `X ↦ Σ_i X_ii |i⟩⟨i|`.
    Dephasing,
    /// `X ↦ Tr(X) · I/d`.
    Depolarizing,
}

pub fn named_channel(kind: NamedChannel, d: usize) -> Result<ChoiMatrix> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("named channels need d >= 2, got {d}")));
    }
    let zero = || ComplexMatrix::zeros(d, d);
    choi_from_map_action(d, d, |i, j| match kind {
        NamedChannel::Identity => ComplexMatrix::basis_unit(d, i, j),
        NamedChannel::Transpose => ComplexMatrix::basis_unit(d, j, i),
        NamedChannel::Dephasing if i == j => ComplexMatrix::basis_unit(d, i, i),
        NamedChannel::Depolarizing if i == j => ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
        _ => zero(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    RandomStinespring,
    #[serde(rename = "schur")]
    SchurDiagonal,
    Dephasing,
    Depolarizing,
    Identity,
    Transpose,
    #[serde(rename = "tiles")]
    TilesUpb,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 7] = [
        GeneratorKind::RandomStinespring,
        GeneratorKind::SchurDiagonal,
        GeneratorKind::Dephasing,
        GeneratorKind::Depolarizing,
        GeneratorKind::Identity,
        GeneratorKind::Transpose,
        GeneratorKind::TilesUpb,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            GeneratorKind::RandomStinespring => "random-stinespring",
            GeneratorKind::SchurDiagonal => "schur",
            GeneratorKind::Dephasing => "dephasing",
            GeneratorKind::Depolarizing => "depolarizing",
            GeneratorKind::Identity => "identity",
            GeneratorKind::Transpose => "transpose",
            GeneratorKind::TilesUpb => "tiles",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown generator kind {s:?}")))
    }
}

/// Everything needed to reproduce a generated object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    #[serde(default)]
    pub dims: Vec<usize>,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub normalize: bool,
}

#[derive(Clone, Debug)]
pub enum Generated {
    Choi(ChoiMatrix),
    State { matrix: ComplexMatrix, layout: BipartiteLayout },
    Stinespring(StinespringOperator),
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind) -> Self {
        Self { kind, dims: Vec::new(), params: Vec::new(), seed: 0, normalize: false }
    }

    fn single_dim(&self) -> Result<usize> {
        match self.dims.as_slice() {
            [d] => Ok(*d),
            other => Err(Error::InvalidParameter(format!("{} needs exactly one dimension, got {other:?}", self.kind))),
        }
    }

    pub fn generate(&self) -> Result<Generated> {
        let named = |kind| Ok(Generated::Choi(named_channel(kind, self.single_dim()?)?));
        match self.kind {
            GeneratorKind::RandomStinespring => match self.dims.as_slice() {
                &[a, b, c] => Ok(Generated::Stinespring(random_stinespring(a, b, c, self.seed, self.normalize)?)),
                other => Err(Error::InvalidParameter(format!("random-stinespring needs dims dA,dB,dC, got {other:?}"))),
            },
            GeneratorKind::SchurDiagonal => Ok(Generated::Stinespring(schur_multiplier_dilation(&self.params)?)),
            GeneratorKind::Identity => named(NamedChannel::Identity),
            GeneratorKind::Transpose => named(NamedChannel::Transpose),
            GeneratorKind::Dephasing => named(NamedChannel::Dephasing),
            GeneratorKind::Depolarizing => named(NamedChannel::Depolarizing),
            GeneratorKind::TilesUpb => {
                let choi = tiles_upb_choi();
                let layout = choi.layout();
                Ok(Generated::State { matrix: choi.into_matrix(), layout })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{apply_channel, is_ppt_map, is_trace_preserving};
    use crate::linalg::{is_psd, numerical_rank, partial_trace, Side};

    #[test]
    fn prng_is_deterministic() {
        let mut a = Prng::new(7);
        let mut b = Prng::new(7);
        for _ in 0..100 {
            assert_eq!(a.complex_gaussian(), b.complex_gaussian());
        }
        assert_ne!(Prng::new(7).uniform(), Prng::new(8).uniform());
    }

    #[test]
    fn gaussian_moments_are_plausible() {
        let mut rng = Prng::new(123);
        let n = 20_000;
        let samples: Vec<C64> = (0..n).map(|_| rng.complex_gaussian()).collect();
        let mean: C64 = samples.iter().sum::<C64>() / n as f64;
        let power: f64 = samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        assert!(mean.norm() < 0.03);
        assert!((power - 1.0).abs() < 0.05);
    }

    #[test]
    fn range_inclusive_covers_bounds() {
        let mut rng = Prng::new(5);
        let draws: Vec<usize> = (0..200).map(|_| rng.range_inclusive(1, 4)).collect();
        assert!(draws.iter().all(|&d| (1..=4).contains(&d)));
        for v in 1..=4 {
            assert!(draws.contains(&v));
        }
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::BTreeSet<u64> = (0..1000).map(|i| derive_seed(42, i)).collect();
        assert_eq!(seeds.len(), 1000);
    }

    #[test]
    fn random_stinespring_is_reproducible() {
        let a = random_stinespring(2, 3, 2, 99, false).unwrap();
        let b = random_stinespring(2, 3, 2, 99, false).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_stinespring(2, 3, 2, 100, false).unwrap());
        assert!(random_stinespring(0, 1, 1, 0, false).is_err());
    }

    #[test]
    fn normalized_columns() {
        let l = random_stinespring(3, 2, 2, 4, true).unwrap();
        for a in 0..3 {
            let norm: f64 = (0..4).map(|r| l.matrix()[(r, a)].norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn schur_pair_examples() {
        let cfg = ToleranceConfig::default();
        let ones = schur_multiplier_pair(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(ones.choi_psi(), &named_channel(NamedChannel::Dephasing, 3).unwrap());

        let zero = schur_multiplier_pair(&[0.0, 0.0]).unwrap();
        assert_eq!(zero.choi_phi().matrix().frobenius_norm(), 0.0);
        assert_eq!(zero.choi_psi().matrix().frobenius_norm(), 0.0);

        let pair = schur_multiplier_pair(&[1.0, 0.5]).unwrap();
        assert!(is_ppt_map(pair.choi_psi(), &cfg));
        assert!(!is_trace_preserving(pair.choi_psi(), &cfg));
        assert!(is_trace_preserving(ones.choi_psi(), &cfg));
        // Tr_out J(Ψ) = diag(t)
        let reduced = partial_trace(pair.choi_psi().matrix(), pair.choi_psi().layout(), Side::Right).unwrap();
        assert!(reduced.distance(&ComplexMatrix::from_real_diagonal(&[1.0, 0.5])) < 1e-15);

        assert!(schur_multiplier_pair(&[1.0, -0.1]).is_err());
        assert!(schur_multiplier_pair(&[]).is_err());
    }

    #[test]
    fn schur_psi_is_entrywise_product() {
        let t = [0.3, 1.0, 0.7];
        let pair = schur_multiplier_pair(&t).unwrap();
        let mut rng = Prng::new(11);
        for _ in 0..100 {
            let x = rng.ginibre(3, 3);
            let expected =
                ComplexMatrix::from_fn(3, 3, |i, j| if i == j { x[(i, j)] * t[i] } else { C64::new(0.0, 0.0) });
            let got = apply_channel(pair.choi_psi(), &x).unwrap();
            assert!(got.distance(&expected) < 1e-14);
        }
    }

    #[test]
    fn tiles_properties() {
        let cfg = ToleranceConfig::default();
        let choi = tiles_upb_choi();
        assert!((choi.matrix().trace() - C64::new(1.0, 0.0)).norm() < 1e-14);
        for v in tiles_upb_vectors() {
            let image = choi.matrix() * &ComplexMatrix::column(&v);
            assert!(image.frobenius_norm() <= 1e-12);
        }
        assert!(is_psd(choi.matrix(), &cfg));
        assert!(is_ppt_map(&choi, &cfg));
        assert_eq!(numerical_rank(choi.matrix(), &cfg), 4);
        let l = tiles_upb_stinespring(&cfg).unwrap();
        assert_eq!(l.dims(), (3, 3, 4));
    }

    #[test]
    fn named_channels() {
        let cfg = ToleranceConfig::default();
        let id = named_channel(NamedChannel::Identity, 2).unwrap();
        assert_eq!(numerical_rank(id.matrix(), &cfg), 1);
        assert!(!is_ppt_map(&id, &cfg));
        let dep = named_channel(NamedChannel::Depolarizing, 2).unwrap();
        assert_eq!(dep.matrix(), &ComplexMatrix::identity(4).scale_real(0.5));
        let deph = named_channel(NamedChannel::Dephasing, 3).unwrap();
        assert!(is_ppt_map(&deph, &cfg));
        assert!(named_channel(NamedChannel::Identity, 1).is_err());
    }

    #[test]
    fn generator_spec_dispatch() {
        let mut spec = GeneratorSpec::new(GeneratorKind::RandomStinespring);
        spec.dims = vec![2, 2, 1];
        spec.seed = 3;
        assert!(matches!(spec.generate().unwrap(), Generated::Stinespring(l) if l.dims() == (2, 2, 1)));
        spec.dims = vec![2];
        assert!(spec.generate().is_err());
        let tiles = GeneratorSpec::new(GeneratorKind::TilesUpb).generate().unwrap();
        assert!(matches!(tiles, Generated::State { layout, .. } if layout.dim() == 9));
        assert_eq!("schur".parse::<GeneratorKind>().unwrap(), GeneratorKind::SchurDiagonal);
        assert!("bogus".parse::<GeneratorKind>().is_err());
    }
}
