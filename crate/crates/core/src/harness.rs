//! Monte-Carlo driver for [`complementary_equivalence_check`] on Ginibre
//! Stinespring operators.
//!
//! Sample `i` of a run with base seed `s` uses `derive_seed(s, i)`. Samples are
//! evaluated in parallel; the summary only holds counts, maxima and per-sample
//! records sorted by index, so it does not depend on scheduling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certify::complementary_equivalence_check;
use crate::error::Error;
use crate::generators::{derive_seed, random_stinespring, PRNG_NAME};
use crate::linalg::ToleranceConfig;
use crate::report::{CertificateReport, VerdictValue};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub dims: [usize; 3],
    pub normalize: bool,
    /// Seeds for each sample, in order.
    pub sample_seeds: Vec<u64>,
}

impl HarnessConfig {
    /// `trials` samples with seeds derived from `seed`.
    pub fn derived(dims: [usize; 3], trials: usize, seed: u64) -> Self {
        Self { dims, normalize: false, sample_seeds: (0..trials as u64).map(|i| derive_seed(seed, i)).collect() }
    }

    /// A single sample replayed from its recorded seed.
    pub fn replay(dims: [usize; 3], sample_seed: u64) -> Self {
        Self { dims, normalize: false, sample_seeds: vec![sample_seed] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleStatus {
    Checked,
    Fragile,
    CounterexampleOrBug,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub seed: u64,
    pub status: SampleStatus,
    pub phi_ppt: Option<bool>,
    pub psi_ppt: Option<bool>,
    pub phi_eb: Option<VerdictValue>,
    pub psi_eb: Option<VerdictValue>,
    pub psi_witness: Option<VerdictValue>,
    pub rank_chain: Option<[usize; 4]>,
    pub message: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HarnessSummary {
    pub dims: [usize; 3],
    pub prng: String,
    pub trials: usize,
    pub checked: usize,
    pub fragile_discards: usize,
    pub counterexamples: usize,
    pub phi_ppt: usize,
    pub psi_ppt: usize,
    pub both_ppt: usize,
    /// Samples with `Φ` PPT where the low-rank decision applied to `J(Φ)`.
    pub phi_ppt_self_low_rank: usize,
    /// Samples with `Φ` PPT where the low-rank decision applied to `J(Ψ)`.
    pub phi_ppt_complement_low_rank: usize,
    pub phi_ppt_strict_chain: usize,
    pub phi_ppt_psi_eb: usize,
    /// Rank-gap witness firings on `J(Ψ)` over all checked samples.
    pub psi_witness_fired: usize,
    pub max_purification_residual: f64,
    /// Failing samples with their seeds, for exact replay.
    pub failures: Vec<SampleRecord>,
    /// Every sample, when requested.
    pub samples: Option<Vec<SampleRecord>>,
}

impl HarnessSummary {
    pub fn passed(&self) -> bool {
        self.counterexamples == 0
    }
}

fn check_sample(
    dims: [usize; 3],
    normalize: bool,
    index: usize,
    seed: u64,
    cfg: &ToleranceConfig,
) -> (SampleRecord, Option<CertificateReport>) {
    let mut record = SampleRecord {
        index,
        seed,
        status: SampleStatus::Checked,
        phi_ppt: None,
        psi_ppt: None,
        phi_eb: None,
        psi_eb: None,
        psi_witness: None,
        rank_chain: None,
        message: None,
    };
    let [a, b, c] = dims;
    let outcome = random_stinespring(a, b, c, seed, normalize).and_then(|l| complementary_equivalence_check(&l, cfg));
    match outcome {
        Ok(report) => {
            let value = |key: &str| report.predicate(key).map(|v| v.value);
            record.phi_ppt = report.equivalence.as_ref().map(|e| e.phi_ppt);
            record.psi_ppt = report.equivalence.as_ref().map(|e| e.psi_ppt);
            record.phi_eb = value("phi.entanglement_breaking");
            record.psi_eb = value("psi.entanglement_breaking");
            record.psi_witness = value("psi.distillability_witness");
            record.rank_chain = report.rank_chain.as_ref().map(|ch| {
                let (ab, b, c, ac) = ch.quadruple();
                [ab, b, c, ac]
            });
            (record, Some(report))
        }
        Err(Error::Fragile(msg)) => {
            record.status = SampleStatus::Fragile;
            record.message = Some(msg);
            (record, None)
        }
        Err(e) => {
            record.status = SampleStatus::CounterexampleOrBug;
            record.message = Some(e.to_string());
            (record, None)
        }
    }
}

pub fn run_theorem_harness(config: &HarnessConfig, cfg: &ToleranceConfig, keep_samples: bool) -> HarnessSummary {
    let results: Vec<(SampleRecord, Option<CertificateReport>)> = config
        .sample_seeds
        .par_iter()
        .enumerate()
        .map(|(i, &seed)| check_sample(config.dims, config.normalize, i, seed, cfg))
        .collect();

    let mut summary = HarnessSummary {
        dims: config.dims,
        prng: PRNG_NAME.to_string(),
        trials: config.sample_seeds.len(),
        ..Default::default()
    };
    let mut samples = Vec::with_capacity(results.len());
    for (record, report) in results {
        match record.status {
            SampleStatus::Fragile => summary.fragile_discards += 1,
            SampleStatus::CounterexampleOrBug => {
                summary.counterexamples += 1;
                summary.failures.push(record.clone());
            }
            SampleStatus::Checked => {
                summary.checked += 1;
                let report = report.expect("checked samples carry a report");
                let eq = report.equivalence.clone().unwrap_or_default();
                summary.phi_ppt += eq.phi_ppt as usize;
                summary.psi_ppt += eq.psi_ppt as usize;
                summary.both_ppt += (eq.phi_ppt && eq.psi_ppt) as usize;
                if let Some(branch) = &eq.phi_branch {
                    summary.phi_ppt_self_low_rank += branch.self_low_rank as usize;
                    summary.phi_ppt_complement_low_rank += branch.complement_low_rank as usize;
                    summary.phi_ppt_strict_chain += branch.strict_chain as usize;
                    summary.phi_ppt_psi_eb += (branch.complement_eb == VerdictValue::Yes) as usize;
                }
                summary.psi_witness_fired += (record.psi_witness == Some(VerdictValue::Yes)) as usize;
                for key in ["purification_residual_phi", "purification_residual_psi"] {
                    if let Some(&r) = report.measurements.get(key) {
                        summary.max_purification_residual = summary.max_purification_residual.max(r);
                    }
                }
            }
        }
        samples.push(record);
    }
    if keep_samples {
        summary.samples = Some(samples);
    }
    summary
}
