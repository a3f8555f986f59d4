//! Subcommand implementations. Each returns the bytes to write so callers
//! decide where they go.

use ebcert_core::generators::{Generated, PRNG_NAME};
use ebcert_core::harness::{run_theorem_harness, HarnessConfig};
use ebcert_core::{
    analyze_choi, analyze_state, complementary_equivalence_check, complementary_pair_from_stinespring,
    degradable_ppt_check, kraus_from_choi, kraus_from_stinespring, stinespring_from_kraus, ChoiMatrix, GeneratorKind,
    GeneratorSpec, KrausSet, Output, StinespringOperator, ToleranceConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::files::{parse_json, sha256_hex, to_json_bytes, GeneratorRecord, KrausFile, MatrixFile, ReportFile, Role};

/// Environment variables consulted for default tolerances.
pub const ENV_PSD_TOL: &str = "EBCERT_PSD_TOL";
pub const ENV_RANK_TOL: &str = "EBCERT_RANK_TOL";
pub const ENV_EQUALITY_TOL: &str = "EBCERT_EQUALITY_TOL";

fn parse_tol(name: &str, text: &str) -> Result<f64, CliError> {
    text.trim().parse::<f64>().map_err(|_| CliError::Parse(format!("{name}: cannot parse {text:?} as a number")))
}

/// Built-in defaults, then environment variables, then `key=value` overrides
/// (`psd`, `rank`, `equality`, with or without a `_tol` suffix).
pub fn resolve_tolerances(
    env: impl Fn(&str) -> Option<String>,
    overrides: &[String],
) -> Result<ToleranceConfig, CliError> {
    let mut cfg = ToleranceConfig::default();
    for (var, slot) in
        [(ENV_PSD_TOL, &mut cfg.psd_tol), (ENV_RANK_TOL, &mut cfg.rank_tol), (ENV_EQUALITY_TOL, &mut cfg.equality_tol)]
    {
        if let Some(text) = env(var) {
            *slot = parse_tol(var, &text)?;
        }
    }
    for item in overrides {
        let (key, value) =
            item.split_once('=').ok_or_else(|| CliError::Parse(format!("--tol expects key=value, got {item:?}")))?;
        let value = parse_tol(key, value)?;
        match key.trim().trim_end_matches("_tol") {
            "psd" => cfg.psd_tol = value,
            "rank" => cfg.rank_tol = value,
            "equality" => cfg.equality_tol = value,
            other => return Err(CliError::Parse(format!("unknown tolerance {other:?}; use psd, rank or equality"))),
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_matrix_file(bytes: &[u8]) -> Result<MatrixFile, CliError> {
    parse_json(bytes, "matrix file")
}

/// Runs the predicate suite for the input's role.
pub fn analyze(input: &[u8], role: Option<Role>, cfg: &ToleranceConfig) -> Result<ReportFile, CliError> {
    let file = parse_matrix_file(input)?;
    let role = role
        .or(file.role)
        .ok_or_else(|| CliError::Precondition("input has no role; pass --as choi|state|stinespring".into()))?;
    let mut out = ReportFile::new("analyze", sha256_hex(input), *cfg);
    match role {
        Role::Choi => out.report = Some(analyze_choi(&file.to_choi()?, cfg)?),
        Role::State => {
            let (x, layout) = file.to_state()?;
            out.report = Some(analyze_state(&x, layout, cfg)?);
        }
        Role::Stinespring => {
            let l = file.to_stinespring()?;
            out.report = Some(complementary_equivalence_check(&l, cfg)?);
            out.degradability = Some(degradable_ppt_check(&complementary_pair_from_stinespring(&l), cfg)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyParams {
    pub dims: [usize; 3],
    pub trials: usize,
    pub seed: u64,
    /// Replays one sample from its recorded per-sample seed instead of deriving seeds.
    pub replay: Option<u64>,
    pub per_sample: bool,
    pub normalize: bool,
}

/// Runs the complementary equivalence harness. The report is returned even
/// when samples fail; `passed` is false in that case.
pub fn verify_theorem(params: &VerifyParams, cfg: &ToleranceConfig) -> Result<(ReportFile, bool), CliError> {
    if params.dims.contains(&0) {
        return Err(CliError::Precondition(format!("dimensions must be at least 1, got {:?}", params.dims)));
    }
    if params.replay.is_none() && params.trials == 0 {
        return Err(CliError::Precondition("--trials must be at least 1".into()));
    }
    let mut config = match params.replay {
        Some(sample_seed) => HarnessConfig::replay(params.dims, sample_seed),
        None => HarnessConfig::derived(params.dims, params.trials, params.seed),
    };
    config.normalize = params.normalize;
    let summary = run_theorem_harness(&config, cfg, params.per_sample);
    let passed = summary.passed();

    let mut out = ReportFile::new("verify-theorem", sha256_hex(&to_json_bytes(params)), *cfg);
    out.generator = Some(GeneratorRecord {
        spec: GeneratorSpec {
            kind: GeneratorKind::RandomStinespring,
            dims: params.dims.to_vec(),
            params: Vec::new(),
            seed: params.replay.unwrap_or(params.seed),
            normalize: params.normalize,
        },
        prng: PRNG_NAME.into(),
    });
    out.aggregate = Some(summary);
    Ok((out, passed))
}

/// Generates an object as a matrix file. With `dilate`, Choi matrices and
/// states are replaced by a minimal Stinespring operator.
pub fn generate(spec: &GeneratorSpec, dilate: bool, cfg: &ToleranceConfig) -> Result<MatrixFile, CliError> {
    let generated = spec.generate()?;
    let file = match (generated, dilate) {
        (Generated::Stinespring(l), _) => MatrixFile::from_stinespring(&l),
        (Generated::Choi(choi), false) => MatrixFile::from_choi(&choi),
        (Generated::State { matrix, layout }, false) => MatrixFile::from_state(&matrix, layout),
        (Generated::Choi(choi), true) => MatrixFile::from_stinespring(&dilate_choi(&choi, cfg)?),
        (Generated::State { matrix, layout }, true) => {
            let choi = ChoiMatrix::new(layout.d_left, layout.d_right, matrix)?;
            MatrixFile::from_stinespring(&dilate_choi(&choi, cfg)?)
        }
    };
    Ok(file)
}

fn dilate_choi(choi: &ChoiMatrix, cfg: &ToleranceConfig) -> Result<StinespringOperator, CliError> {
    Ok(stinespring_from_kraus(&kraus_from_choi(choi, cfg)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Representation {
    Choi,
    Kraus,
    Stinespring,
}

/// Converts between representations. A Stinespring operator is read as the
/// map onto its `B` output.
pub fn convert(
    input: &[u8],
    from: Representation,
    to: Representation,
    cfg: &ToleranceConfig,
) -> Result<Vec<u8>, CliError> {
    let kraus: KrausSet = match from {
        Representation::Kraus => parse_json::<KrausFile>(input, "kraus file")?.to_kraus()?,
        Representation::Choi => {
            let choi = parse_matrix_file(input)?.to_choi()?;
            if to == Representation::Choi {
                return Ok(to_json_bytes(&MatrixFile::from_choi(&choi)));
            }
            kraus_from_choi(&choi, cfg)?
        }
        Representation::Stinespring => {
            let l = parse_matrix_file(input)?.to_stinespring()?;
            match to {
                Representation::Stinespring => return Ok(to_json_bytes(&MatrixFile::from_stinespring(&l))),
                Representation::Choi => return Ok(to_json_bytes(&MatrixFile::from_choi(&l.marginal_choi(Output::B)))),
                Representation::Kraus => kraus_from_stinespring(&l),
            }
        }
    };
    Ok(match to {
        Representation::Kraus => to_json_bytes(&KrausFile::from_kraus(&kraus)),
        Representation::Choi => to_json_bytes(&MatrixFile::from_choi(&kraus.to_choi())),
        Representation::Stinespring => to_json_bytes(&MatrixFile::from_stinespring(&stinespring_from_kraus(&kraus))),
    })
}
