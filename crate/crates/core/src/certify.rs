//! Rank-based decision procedures for PPT and entanglement-breaking maps.
//!
//! Facts used here, for a PSD bipartite `X`:
//!
//! * if `rank X < max(rank Tr_A X, rank Tr_B X)` then `X` is distillable, so
//!   in particular not PPT;
//! * if `rank X ≤ max(rank Tr_A X, rank Tr_B X)` then `X` is separable iff it
//!   is PPT;
//! * a CP map is entanglement breaking iff its Choi matrix is separable.
//!
//! For a complementary pair `(Φ, Ψ)` with common purification `|L⟩`, purity
//! gives `rank L_C = rank L_AB` and `rank L_B = rank L_AC`. If `Φ` is PPT the
//! first fact forces `rank L_AB ≥ rank L_B`, hence `rank L_AC ≤ rank L_C`, and
//! the second fact decides `Ψ`: `Ψ` PPT ⟺ `Ψ` entanglement breaking ⟺ no rank
//! gap on `J(Ψ)`. [`complementary_equivalence_check`] verifies all of this on a
//! concrete `L` and treats any violation as a bug or numerical breakdown.

use nalgebra::SVD;

use crate::channels::{ChoiMatrix, StinespringOperator};
use crate::complement::{
    complementary_pair_from_stinespring, purification_residuals, rank_chain, ComplementaryPair, RankChain,
};
use crate::error::{Error, Result};
use crate::linalg::{BipartiteLayout, ComplexMatrix, PsdSpectrum, ToleranceConfig};
use crate::report::{
    degradability_verdict, BipartiteAnalysis, BranchRecord, CertificateReport, EquivalenceOutcome, Property, Verdict,
    VerdictValue,
};

const CHOI_PROPERTIES: [Property; 7] = Property::ALL;

const STATE_PROPERTIES: [Property; 5] = [
    Property::Psd,
    Property::PartialTransposePsd,
    Property::Ppt,
    Property::DistillabilityWitness,
    Property::LowRankSeparability,
];

/// `Yes` iff `rank X < max(rank Tr_A X, rank Tr_B X)`, else `Unknown`. Never `No`.
pub fn rank_gap_distillability_witness(
    x: &ComplexMatrix,
    layout: BipartiteLayout,
    cfg: &ToleranceConfig,
) -> Result<Verdict> {
    BipartiteAnalysis::of(x, layout, cfg)?.distillability_witness(cfg)
}

/// Separable iff PPT, decided only when `rank X ≤ max(marginal ranks)`.
pub fn low_rank_separability_decision(
    x: &ComplexMatrix,
    layout: BipartiteLayout,
    cfg: &ToleranceConfig,
) -> Result<Verdict> {
    BipartiteAnalysis::of(x, layout, cfg)?.low_rank_separability(cfg)
}

/// Entanglement-breaking certificate for a CP map. Never `Yes` outside the low-rank regime.
pub fn eb_certificate(choi: &ChoiMatrix, cfg: &ToleranceConfig) -> Result<Verdict> {
    BipartiteAnalysis::of_choi(choi, cfg)?.entanglement_breaking(cfg)
}

/// Full predicate suite for a single Choi matrix.
pub fn analyze_choi(choi: &ChoiMatrix, cfg: &ToleranceConfig) -> Result<CertificateReport> {
    let mut report = CertificateReport::new("choi", *cfg);
    report.record("map", BipartiteAnalysis::of_choi(choi, cfg)?, &CHOI_PROPERTIES);
    Ok(report)
}

/// Full predicate suite for a bipartite state.
pub fn analyze_state(x: &ComplexMatrix, layout: BipartiteLayout, cfg: &ToleranceConfig) -> Result<CertificateReport> {
    let mut report = CertificateReport::new("state", *cfg);
    report.record("state", BipartiteAnalysis::of(x, layout, cfg)?, &STATE_PROPERTIES);
    Ok(report)
}

/// Ranks seen from one map of the pair: its Choi matrix, its own output marginal,
/// the environment (the complement's output) and the complement's Choi matrix.
struct ChainView {
    choi: usize,
    input: usize,
    output: usize,
    env: usize,
    complement_choi: usize,
}

impl ChainView {
    fn phi(chain: &RankChain) -> Self {
        Self {
            choi: chain.ab.rank,
            input: chain.a.rank,
            output: chain.b.rank,
            env: chain.c.rank,
            complement_choi: chain.ac.rank,
        }
    }

    fn psi(chain: &RankChain) -> Self {
        Self {
            choi: chain.ac.rank,
            input: chain.a.rank,
            output: chain.c.rank,
            env: chain.b.rank,
            complement_choi: chain.ab.rank,
        }
    }
}

fn violation(name: &str, message: impl AsRef<str>) -> Error {
    Error::CounterexampleOrBug(format!("{name}: {}", message.as_ref()))
}

/// Checks everything implied by `this` map being PPT.
fn check_ppt_branch(
    name: &str,
    this: &BipartiteAnalysis,
    complement: &BipartiteAnalysis,
    ranks: ChainView,
    cfg: &ToleranceConfig,
) -> Result<BranchRecord> {
    // PPT forbids a rank gap on the map's own Choi matrix.
    if ranks.choi < ranks.input.max(ranks.output) {
        return Err(violation(
            name,
            format!("PPT Choi matrix has a rank gap: rank {} < max({}, {})", ranks.choi, ranks.input, ranks.output),
        ));
    }
    let self_eb = this.entanglement_breaking(cfg)?;
    if self_eb.is_no() {
        return Err(violation(name, "PPT map rejected as not entanglement breaking"));
    }

    // rank L_env = rank(own Choi) ≥ rank L_out = rank(complement Choi)
    if ranks.complement_choi > ranks.env.max(ranks.input) {
        return Err(violation(
            name,
            format!(
                "complement outside the low-rank regime: rank {} > max({}, {})",
                ranks.complement_choi, ranks.input, ranks.env
            ),
        ));
    }
    let complement_ppt = complement.is_ppt(cfg);
    let complement_eb = complement.entanglement_breaking(cfg)?;
    let complement_witness = complement.distillability_witness(cfg)?;
    if complement_eb.is_unknown() {
        return Err(violation(name, "complement entanglement-breaking decision is inconclusive"));
    }
    if complement_ppt != complement_eb.is_yes() {
        return Err(violation(
            name,
            format!("complement PPT = {complement_ppt} but entanglement-breaking verdict is {complement_eb}"),
        ));
    }
    if complement_eb.is_yes() == complement_witness.is_yes() {
        return Err(violation(
            name,
            format!(
                "complement entanglement breaking = {} while the rank-gap witness fired = {}",
                complement_eb.is_yes(),
                complement_witness.is_yes()
            ),
        ));
    }

    let strict_chain = ranks.env > ranks.complement_choi;
    if self_eb.is_unknown() {
        // Outside the low-rank regime on this side the chain is strict and the
        // complement is distillable.
        if !strict_chain {
            return Err(violation(
                name,
                format!("expected rank L_env {} > rank L_out {}", ranks.env, ranks.complement_choi),
            ));
        }
        if !complement_witness.is_yes() {
            return Err(violation(name, "strict rank chain but no rank-gap witness on the complement"));
        }
    }

    Ok(BranchRecord {
        self_low_rank: !self_eb.is_unknown(),
        complement_low_rank: complement.in_low_rank_regime(),
        complement_ppt,
        complement_eb: complement_eb.value,
        complement_witness_fired: complement_witness.is_yes(),
        strict_chain,
    })
}

/// Builds the complementary pair of `L`, its rank chain and all verdicts, and
/// checks the equivalences implied whenever either map is PPT.
///
/// Errors: [`Error::Fragile`] when a rank decision sits within a factor 10 of
/// its cutoff, [`Error::PurityViolation`] or [`Error::CounterexampleOrBug`]
/// when a proven relation fails.
pub fn complementary_equivalence_check(l: &StinespringOperator, cfg: &ToleranceConfig) -> Result<CertificateReport> {
    let pair = complementary_pair_from_stinespring(l);
    let chain = rank_chain(l, cfg)?;
    let phi = BipartiteAnalysis::of_choi(pair.choi_phi(), cfg)?;
    let psi = BipartiteAnalysis::of_choi(pair.choi_psi(), cfg)?;

    if chain.fragile || phi.rank_fragile() || psi.rank_fragile() {
        return Err(Error::Fragile(format!("rank decision near cutoff for L with dims {:?}", l.dims())));
    }

    let (res_phi, res_psi) = purification_residuals(&pair);
    if res_phi > cfg.equality_tol || res_psi > cfg.equality_tol {
        return Err(Error::CounterexampleOrBug(format!(
            "common purification marginals deviate from the Choi matrices ({res_phi:e}, {res_psi:e})"
        )));
    }

    let consistent = [
        ("rank J(Phi)", chain.ab.rank, phi.rank.rank),
        ("rank J(Psi)", chain.ac.rank, psi.rank.rank),
        ("rank L_A via Phi", chain.a.rank, phi.rank_left_marginal.rank),
        ("rank L_A via Psi", chain.a.rank, psi.rank_left_marginal.rank),
        ("rank L_B", chain.b.rank, phi.rank_right_marginal.rank),
        ("rank L_C", chain.c.rank, psi.rank_right_marginal.rank),
    ];
    if let Some((what, from_chain, from_choi)) = consistent.iter().find(|(_, x, y)| x != y) {
        return Err(Error::CounterexampleOrBug(format!(
            "{what} differs between purification ({from_chain}) and Choi matrix ({from_choi})"
        )));
    }

    let mut outcome = EquivalenceOutcome { phi_ppt: phi.is_ppt(cfg), psi_ppt: psi.is_ppt(cfg), ..Default::default() };
    if outcome.phi_ppt {
        outcome.phi_branch = Some(check_ppt_branch("Phi PPT", &phi, &psi, ChainView::phi(&chain), cfg)?);
    }
    if outcome.psi_ppt {
        outcome.psi_branch = Some(check_ppt_branch("Psi PPT", &psi, &phi, ChainView::psi(&chain), cfg)?);
    }
    if outcome.phi_ppt && outcome.psi_ppt {
        let both_eb = phi.entanglement_breaking(cfg)?.is_yes() && psi.entanglement_breaking(cfg)?.is_yes();
        if !both_eb {
            return Err(Error::CounterexampleOrBug(
                "both maps PPT but not both certified entanglement breaking".into(),
            ));
        }
    }

    let mut report = CertificateReport::new("complementary_pair", *cfg);
    report.record("phi", phi, &CHOI_PROPERTIES);
    report.record("psi", psi, &CHOI_PROPERTIES);
    report.measurements.insert("purification_residual_phi".into(), res_phi);
    report.measurements.insert("purification_residual_psi".into(), res_psi);
    if !outcome.phi_ppt && !outcome.psi_ppt {
        report.notes.push("neither map is PPT; the equivalences hold vacuously".into());
    }
    report.rank_chain = Some(chain);
    report.equivalence = Some(outcome);
    Ok(report)
}

/// A least-squares candidate `Ω` with `Ω ∘ Ψ ≈ Φ`.
#[derive(Clone, Debug)]
pub struct DegradingMap {
    pub choi_omega: ChoiMatrix,
    pub verdict: Verdict,
    /// `‖T_Ω T_Ψ − T_Φ‖_F / ‖T_Φ‖_F` on transfer matrices (absolute when `Φ = 0`).
    pub residual: f64,
    pub omega_spectrum: PsdSpectrum,
}

fn pseudo_inverse(m: &ComplexMatrix, cfg: &ToleranceConfig) -> ComplexMatrix {
    let (rows, cols) = (m.rows(), m.cols());
    let svd = SVD::new(m.as_dmatrix().clone(), true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0_f64, f64::max);
    if sigma_max == 0.0 {
        return ComplexMatrix::zeros(cols, rows);
    }
    let eps = cfg.rank_tol * sigma_max * rows.max(cols) as f64;
    let pinv = svd.pseudo_inverse(eps).expect("both singular vector sets were computed");
    ComplexMatrix::from_dmatrix(pinv).expect("pseudo-inverse of a finite matrix is finite")
}

/// Solves `Ω ∘ source = target` for `Ω` in the least-squares sense.
pub fn degrading_map_between(source: &ChoiMatrix, target: &ChoiMatrix, cfg: &ToleranceConfig) -> Result<DegradingMap> {
    if source.d_in() != target.d_in() {
        return Err(Error::DimensionMismatch(format!(
            "maps must share the input dimension, got {} and {}",
            source.d_in(),
            target.d_in()
        )));
    }
    let t_source = source.transfer_matrix();
    let t_target = target.transfer_matrix();
    let t_omega = &t_target * &pseudo_inverse(&t_source, cfg);
    let diff = (&t_omega * &t_source).distance(&t_target);
    let scale = t_target.frobenius_norm();
    let residual = if scale > 0.0 { diff / scale } else { diff };
    let choi_omega = ChoiMatrix::from_transfer(source.d_out(), target.d_out(), &t_omega)?;
    let omega_spectrum = PsdSpectrum::of(choi_omega.matrix())?;
    let verdict = degradability_verdict(residual, &omega_spectrum, cfg);
    Ok(DegradingMap { choi_omega, verdict, residual, omega_spectrum })
}

/// Candidate `Ω` with `Φ = Ω ∘ Ψ` for the pair's `(Φ, Ψ)`.
pub fn candidate_degrading_map(pair: &ComplementaryPair, cfg: &ToleranceConfig) -> Result<DegradingMap> {
    degrading_map_between(pair.choi_psi(), pair.choi_phi(), cfg)
}

/// If `Ψ` is PPT and degradable through a CP `Ω`, checks that `Ω ∘ Ψ` is PPT
/// and that both maps are certified entanglement breaking.
pub fn degradable_ppt_check(pair: &ComplementaryPair, cfg: &ToleranceConfig) -> Result<CertificateReport> {
    let phi = BipartiteAnalysis::of_choi(pair.choi_phi(), cfg)?;
    let psi = BipartiteAnalysis::of_choi(pair.choi_psi(), cfg)?;
    let degrading = candidate_degrading_map(pair, cfg)?;
    let omega = BipartiteAnalysis::of_choi(&degrading.choi_omega, cfg)?;
    let psi_ppt = psi.is_ppt(cfg);
    let fragile = phi.rank_fragile() || psi.rank_fragile();

    let mut report = CertificateReport::new("degradable_pair", *cfg);
    report.measurements.insert("degrading_residual".into(), degrading.residual);
    report.predicates.insert("pair.degradable".into(), degrading.verdict);

    if !psi_ppt {
        report.notes.push("Psi is not PPT; the degradable-PPT implication is vacuous".into());
    } else if !degrading.verdict.is_yes() {
        report.notes.push(format!("no CP degrading map certified ({:?})", degrading.verdict.reason));
    } else if fragile {
        return Err(Error::Fragile("rank decision near cutoff in the degradable pair".into()));
    } else {
        let composed_transfer = &degrading.choi_omega.transfer_matrix() * &pair.choi_psi().transfer_matrix();
        let composed = ChoiMatrix::from_transfer(pair.choi_phi().d_in(), pair.choi_phi().d_out(), &composed_transfer)?;
        let composed = BipartiteAnalysis::of_choi(&composed, cfg)?;
        if !composed.is_ppt(cfg) || !phi.is_ppt(cfg) {
            return Err(Error::CounterexampleOrBug("composition of a CP map with a PPT map is not PPT".into()));
        }
        let phi_eb = phi.entanglement_breaking(cfg)?;
        let psi_eb = psi.entanglement_breaking(cfg)?;
        if !(phi_eb.is_yes() && psi_eb.is_yes()) {
            return Err(Error::CounterexampleOrBug(format!(
                "degradable PPT pair not certified entanglement breaking (Phi: {phi_eb}, Psi: {psi_eb})"
            )));
        }
        report.record("composed", composed, &[Property::Ppt]);
    }

    report.record("phi", phi, &CHOI_PROPERTIES);
    report.record("psi", psi, &CHOI_PROPERTIES);
    report.record("omega", omega, &[Property::Psd]);
    Ok(report)
}

/// Convenience for reports: `Yes`/`No`/`Unknown` of a predicate, if present.
pub fn predicate_value(report: &CertificateReport, key: &str) -> Option<VerdictValue> {
    report.predicate(key).map(|v| v.value)
}
