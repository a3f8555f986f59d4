//! Tri-valued verdicts and self-certifying reports.
//!
//! Every verdict is a pure function of a [`BipartiteAnalysis`] (extremal
//! spectra and rank decisions) and the tolerances, so a report can be
//! re-checked from its recorded numbers alone with [`CertificateReport::recheck`].

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channels::{trace_preservation_residual, ChoiMatrix};
use crate::complement::RankChain;
use crate::error::{Error, Result};
use crate::linalg::{
    partial_trace, partial_transpose, rank_info, BipartiteLayout, ComplexMatrix, PsdSpectrum, RankInfo, Side,
    ToleranceConfig,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictValue {
    Yes,
    No,
    Unknown,
}

/// Why a verdict was reached. Each code names a check on recorded spectra or ranks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reason {
    PsdSpectrum,
    NegativeEigenvalue,
    NotHermitian,
    PptSpectrum,
    NotPpt,
    /// `rank X < max(rank Tr_A X, rank Tr_B X)`.
    RankGapWitness,
    NoRankGap,
    /// Low-rank regime and PPT, hence separable.
    LowRankPptSeparable,
    /// Low-rank regime and not PPT, hence entangled.
    LowRankNotPpt,
    NotPptHenceNotSeparable,
    OutsideLowRankRegime,
    TracePreserved,
    TraceNotPreserved,
    DegradingMapFound,
    LinearSystemInconsistent,
    LeastSquaresNotCp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub value: VerdictValue,
    pub reason: Reason,
    pub fragile: bool,
}

impl Verdict {
    pub fn yes(reason: Reason) -> Self {
        Self { value: VerdictValue::Yes, reason, fragile: false }
    }

    pub fn no(reason: Reason) -> Self {
        Self { value: VerdictValue::No, reason, fragile: false }
    }

    pub fn unknown(reason: Reason) -> Self {
        Self { value: VerdictValue::Unknown, reason, fragile: false }
    }

    fn with_fragility(self, fragile: bool) -> Self {
        Self { fragile, ..self }
    }

    pub fn is_yes(&self) -> bool {
        self.value == VerdictValue::Yes
    }

    pub fn is_no(&self) -> bool {
        self.value == VerdictValue::No
    }

    pub fn is_unknown(&self) -> bool {
        self.value == VerdictValue::Unknown
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} ({:?}{})", self.value, self.reason, if self.fragile { ", fragile" } else { "" })
    }
}

/// Predicates that can be evaluated on a [`BipartiteAnalysis`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    /// PSD matrix; for a Choi matrix this is complete positivity.
    Psd,
    /// PSD partial transpose; for a Choi matrix this is complete copositivity.
    PartialTransposePsd,
    Ppt,
    TracePreserving,
    DistillabilityWitness,
    LowRankSeparability,
    EntanglementBreaking,
}

impl Property {
    pub const ALL: [Property; 7] = [
        Property::Psd,
        Property::PartialTransposePsd,
        Property::Ppt,
        Property::TracePreserving,
        Property::DistillabilityWitness,
        Property::LowRankSeparability,
        Property::EntanglementBreaking,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Property::Psd => "psd",
            Property::PartialTransposePsd => "pt_psd",
            Property::Ppt => "ppt",
            Property::TracePreserving => "trace_preserving",
            Property::DistillabilityWitness => "distillability_witness",
            Property::LowRankSeparability => "low_rank_separability",
            Property::EntanglementBreaking => "entanglement_breaking",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

/// Spectral and rank data of a bipartite PSD candidate `X` on `(d_left, d_right)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BipartiteAnalysis {
    pub layout: BipartiteLayout,
    pub spectrum: PsdSpectrum,
    /// Spectrum of the left-side partial transpose.
    pub pt_spectrum: PsdSpectrum,
    pub rank: RankInfo,
    /// Rank of `Tr_right X`.
    pub rank_left_marginal: RankInfo,
    /// Rank of `Tr_left X`.
    pub rank_right_marginal: RankInfo,
    /// `‖Tr_right X − I‖_F / √d_left`, only recorded for Choi matrices.
    pub trace_preservation_residual: Option<f64>,
}

impl BipartiteAnalysis {
    pub fn of(x: &ComplexMatrix, layout: BipartiteLayout, cfg: &ToleranceConfig) -> Result<Self> {
        let pt = partial_transpose(x, layout, Side::Left)?;
        let left = partial_trace(x, layout, Side::Right)?;
        let right = partial_trace(x, layout, Side::Left)?;
        Ok(Self {
            layout,
            spectrum: PsdSpectrum::of(x)?,
            pt_spectrum: PsdSpectrum::of(&pt)?,
            rank: rank_info(x, cfg),
            rank_left_marginal: rank_info(&left, cfg),
            rank_right_marginal: rank_info(&right, cfg),
            trace_preservation_residual: None,
        })
    }

    pub fn of_choi(choi: &ChoiMatrix, cfg: &ToleranceConfig) -> Result<Self> {
        let mut analysis = Self::of(choi.matrix(), choi.layout(), cfg)?;
        analysis.trace_preservation_residual = Some(trace_preservation_residual(choi));
        Ok(analysis)
    }

    pub fn max_marginal_rank(&self) -> usize {
        self.rank_left_marginal.rank.max(self.rank_right_marginal.rank)
    }

    pub fn rank_fragile(&self) -> bool {
        self.rank.fragile || self.rank_left_marginal.fragile || self.rank_right_marginal.fragile
    }

    pub fn is_psd(&self, cfg: &ToleranceConfig) -> bool {
        self.spectrum.is_psd(cfg)
    }

    pub fn is_ppt(&self, cfg: &ToleranceConfig) -> bool {
        self.spectrum.is_psd(cfg) && self.pt_spectrum.is_psd(cfg)
    }

    /// `rank X ≤ max(marginal ranks)`.
    pub fn in_low_rank_regime(&self) -> bool {
        self.rank.rank <= self.max_marginal_rank()
    }

    /// `rank X < max(marginal ranks)`.
    pub fn has_rank_gap(&self) -> bool {
        self.rank.rank < self.max_marginal_rank()
    }

    fn require_psd(&self, cfg: &ToleranceConfig) -> Result<()> {
        if !self.spectrum.is_hermitian(cfg) {
            return Err(Error::NotHermitian { residual: self.spectrum.hermitian_residual });
        }
        if !self.spectrum.is_psd(cfg) {
            return Err(Error::NotPsd { what: "bipartite matrix".into(), lambda_min: self.spectrum.lambda_min });
        }
        Ok(())
    }

    fn psd_verdict(spectrum: &PsdSpectrum, cfg: &ToleranceConfig) -> Verdict {
        if !spectrum.is_hermitian(cfg) {
            Verdict::no(Reason::NotHermitian)
        } else if spectrum.is_psd(cfg) {
            Verdict::yes(Reason::PsdSpectrum)
        } else {
            Verdict::no(Reason::NegativeEigenvalue)
        }
    }

    /// One-sided: `Yes` when the rank-gap condition holds, `Unknown` otherwise.
    pub fn distillability_witness(&self, cfg: &ToleranceConfig) -> Result<Verdict> {
        self.require_psd(cfg)?;
        let verdict = if self.has_rank_gap() {
            Verdict::yes(Reason::RankGapWitness)
        } else {
            Verdict::unknown(Reason::NoRankGap)
        };
        Ok(verdict.with_fragility(self.rank_fragile()))
    }

    /// In the low-rank regime separability is decided by the partial transpose.
    pub fn low_rank_separability(&self, cfg: &ToleranceConfig) -> Result<Verdict> {
        self.require_psd(cfg)?;
        let verdict = if !self.in_low_rank_regime() {
            Verdict::unknown(Reason::OutsideLowRankRegime)
        } else if self.pt_spectrum.is_psd(cfg) {
            Verdict::yes(Reason::LowRankPptSeparable)
        } else {
            Verdict::no(Reason::LowRankNotPpt)
        };
        Ok(verdict.with_fragility(self.rank_fragile()))
    }

    /// Separability of the Choi matrix: `No` without PPT, otherwise the low-rank decision.
    pub fn entanglement_breaking(&self, cfg: &ToleranceConfig) -> Result<Verdict> {
        self.require_psd(cfg)?;
        if !self.pt_spectrum.is_psd(cfg) {
            return Ok(Verdict::no(Reason::NotPptHenceNotSeparable));
        }
        self.low_rank_separability(cfg)
    }

    pub fn verdict(&self, property: Property, cfg: &ToleranceConfig) -> Result<Verdict> {
        match property {
            Property::Psd => Ok(Self::psd_verdict(&self.spectrum, cfg)),
            Property::PartialTransposePsd => Ok(Self::psd_verdict(&self.pt_spectrum, cfg)),
            Property::Ppt => {
                Ok(if self.is_ppt(cfg) { Verdict::yes(Reason::PptSpectrum) } else { Verdict::no(Reason::NotPpt) })
            }
            Property::TracePreserving => match self.trace_preservation_residual {
                Some(r) if r <= cfg.equality_tol => Ok(Verdict::yes(Reason::TracePreserved)),
                Some(_) => Ok(Verdict::no(Reason::TraceNotPreserved)),
                None => Err(Error::InvalidParameter("trace preservation is only defined for Choi matrices".into())),
            },
            Property::DistillabilityWitness => self.distillability_witness(cfg),
            Property::LowRankSeparability => self.low_rank_separability(cfg),
            Property::EntanglementBreaking => self.entanglement_breaking(cfg),
        }
    }
}

/// Per-branch record of the complementary equivalence check, taken from the
/// PPT map's side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchRecord {
    /// The low-rank separability decision applied to the PPT map's own Choi matrix.
    pub self_low_rank: bool,
    /// The low-rank separability decision applied to the complement's Choi matrix.
    pub complement_low_rank: bool,
    pub complement_ppt: bool,
    pub complement_eb: VerdictValue,
    pub complement_witness_fired: bool,
    /// `rank L_env > rank L_out`, the strict form of the rank chain.
    pub strict_chain: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceOutcome {
    pub phi_ppt: bool,
    pub psi_ppt: bool,
    /// Present when `Φ` is PPT.
    pub phi_branch: Option<BranchRecord>,
    /// Present when `Ψ` is PPT.
    pub psi_branch: Option<BranchRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub subject: String,
    pub tolerances: ToleranceConfig,
    /// Keyed `"<object>.<property>"`, e.g. `"phi.ppt"`.
    pub predicates: BTreeMap<String, Verdict>,
    pub analyses: BTreeMap<String, BipartiteAnalysis>,
    pub rank_chain: Option<RankChain>,
    pub equivalence: Option<EquivalenceOutcome>,
    /// Scalar diagnostics such as residuals.
    pub measurements: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl CertificateReport {
    pub fn new(subject: impl Into<String>, tolerances: ToleranceConfig) -> Self {
        Self {
            subject: subject.into(),
            tolerances,
            predicates: BTreeMap::new(),
            analyses: BTreeMap::new(),
            rank_chain: None,
            equivalence: None,
            measurements: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    /// Records an analysis and evaluates the given properties on it. Properties
    /// whose preconditions fail are skipped with a note.
    pub fn record(&mut self, object: &str, analysis: BipartiteAnalysis, properties: &[Property]) {
        for &property in properties {
            match analysis.verdict(property, &self.tolerances) {
                Ok(v) => {
                    self.predicates.insert(format!("{object}.{}", property.name()), v);
                }
                Err(e) => self.notes.push(format!("{object}.{} not evaluated: {e}", property.name())),
            }
        }
        self.analyses.insert(object.to_string(), analysis);
    }

    pub fn predicate(&self, key: &str) -> Option<&Verdict> {
        self.predicates.get(key)
    }

    pub fn is_fragile(&self) -> bool {
        self.predicates.values().any(|v| v.fragile) || self.rank_chain.as_ref().is_some_and(|c| c.fragile)
    }

    /// Re-derives every recorded verdict from the recorded spectra, ranks and
    /// measurements. Returns the keys that fail to reproduce.
    pub fn recheck(&self) -> std::result::Result<(), Vec<String>> {
        let cfg = &self.tolerances;
        let mut mismatched = Vec::new();
        for (key, recorded) in &self.predicates {
            let rederived = key.split_once('.').and_then(|(object, prop)| {
                if let (Some(analysis), Some(property)) = (self.analyses.get(object), Property::from_name(prop)) {
                    return analysis.verdict(property, cfg).ok();
                }
                if key == "pair.degradable" {
                    let residual = *self.measurements.get("degrading_residual")?;
                    let omega = self.analyses.get("omega")?;
                    return Some(degradability_verdict(residual, &omega.spectrum, cfg));
                }
                None
            });
            if rederived.as_ref() != Some(recorded) {
                mismatched.push(key.clone());
            }
        }
        if mismatched.is_empty() {
            Ok(())
        } else {
            Err(mismatched)
        }
    }
}

/// `No` when the linear system has no solution within tolerance, `Yes` when
/// its least-squares solution is CP, `Unknown` otherwise.
pub fn degradability_verdict(relative_residual: f64, omega: &PsdSpectrum, cfg: &ToleranceConfig) -> Verdict {
    if relative_residual > cfg.equality_tol {
        Verdict::no(Reason::LinearSystemInconsistent)
    } else if omega.is_psd(cfg) {
        Verdict::yes(Reason::DegradingMapFound)
    } else {
        Verdict::unknown(Reason::LeastSquaresNotCp)
    }
}
