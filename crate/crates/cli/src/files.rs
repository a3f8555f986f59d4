//! On-disk JSON formats: matrices, Kraus lists and reports.

use std::path::Path;

use ebcert_core::harness::HarnessSummary;
use ebcert_core::{
    BipartiteLayout, CertificateReport, ChoiMatrix, ComplexMatrix, GeneratorSpec, KrausSet, StinespringOperator,
    ToleranceConfig, C64,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Choi,
    State,
    Stinespring,
}

/// Row-major split real/imaginary storage shared by the matrix formats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixData {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let row = |f: fn(&C64) -> f64, r: usize| (0..m.cols()).map(|c| f(&m[(r, c)])).collect();
        Self {
            rows: m.rows(),
            cols: m.cols(),
            re: (0..m.rows()).map(|r| row(|z| z.re, r)).collect(),
            im: (0..m.rows()).map(|r| row(|z| z.im, r)).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix, CliError> {
        let shape_ok = |a: &Vec<Vec<f64>>| a.len() == self.rows && a.iter().all(|row| row.len() == self.cols);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(CliError::Parse(format!(
                "re/im arrays do not match the declared {}x{} shape",
                self.rows, self.cols
            )));
        }
        let entries =
            self.re.iter().flatten().zip(self.im.iter().flatten()).map(|(&re, &im)| C64::new(re, im)).collect();
        ComplexMatrix::from_row_major(self.rows, self.cols, entries).map_err(|e| CliError::Parse(e.to_string()))
    }
}

/// A matrix with its role. `dims` is `[d_in, d_out]` for Choi matrices and
/// `[d_A, d_B, d_C]` for Stinespring operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub schema_version: String,
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<Role>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dims: Option<Vec<usize>>,
}

impl MatrixFile {
    fn with_matrix(m: &ComplexMatrix) -> Self {
        let MatrixData { rows, cols, re, im } = MatrixData::from_matrix(m);
        Self { schema_version: SCHEMA_VERSION.into(), rows, cols, re, im, layout: None, role: None, dims: None }
    }

    pub fn from_choi(choi: &ChoiMatrix) -> Self {
        Self {
            layout: Some([choi.d_in(), choi.d_out()]),
            role: Some(Role::Choi),
            dims: Some(vec![choi.d_in(), choi.d_out()]),
            ..Self::with_matrix(choi.matrix())
        }
    }

    pub fn from_state(x: &ComplexMatrix, layout: BipartiteLayout) -> Self {
        Self { layout: Some([layout.d_left, layout.d_right]), role: Some(Role::State), ..Self::with_matrix(x) }
    }

    pub fn from_stinespring(l: &StinespringOperator) -> Self {
        let (a, b, c) = l.dims();
        Self { role: Some(Role::Stinespring), dims: Some(vec![a, b, c]), ..Self::with_matrix(l.matrix()) }
    }

    pub fn matrix(&self) -> Result<ComplexMatrix, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Parse(format!("unsupported schema_version {:?}", self.schema_version)));
        }
        let m =
            MatrixData { rows: self.rows, cols: self.cols, re: self.re.clone(), im: self.im.clone() }.to_matrix()?;
        if let Some([l, r]) = self.layout {
            if l * r != self.rows || l * r != self.cols {
                return Err(CliError::Parse(format!(
                    "layout {l}x{r} inconsistent with a {}x{} matrix",
                    self.rows, self.cols
                )));
            }
        }
        Ok(m)
    }

    fn bipartite_dims(&self) -> Option<[usize; 2]> {
        match (self.layout, self.dims.as_deref()) {
            (Some(layout), _) => Some(layout),
            (None, Some(&[a, b])) => Some([a, b]),
            _ => None,
        }
    }

    pub fn to_choi(&self) -> Result<ChoiMatrix, CliError> {
        let m = self.matrix()?;
        let [d_in, d_out] = self
            .bipartite_dims()
            .ok_or_else(|| CliError::Precondition("a Choi matrix needs `layout` or `dims` = [d_in, d_out]".into()))?;
        Ok(ChoiMatrix::new(d_in, d_out, m)?)
    }

    pub fn to_state(&self) -> Result<(ComplexMatrix, BipartiteLayout), CliError> {
        let m = self.matrix()?;
        let [l, r] = self
            .bipartite_dims()
            .ok_or_else(|| CliError::Precondition("a state needs `layout` = [d_left, d_right]".into()))?;
        Ok((m, BipartiteLayout::new(l, r)?))
    }

    pub fn to_stinespring(&self) -> Result<StinespringOperator, CliError> {
        let m = self.matrix()?;
        match self.dims.as_deref() {
            Some(&[a, b, c]) => Ok(StinespringOperator::new(a, b, c, m)?),
            _ => Err(CliError::Precondition("a Stinespring operator needs `dims` = [d_A, d_B, d_C]".into())),
        }
    }
}

/// A list of Kraus operators `K_k : C^{d_in} → C^{d_out}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KrausFile {
    pub schema_version: String,
    pub role: String,
    pub dims: [usize; 2],
    pub operators: Vec<MatrixData>,
}

impl KrausFile {
    pub const ROLE: &'static str = "kraus";

    pub fn from_kraus(kraus: &KrausSet) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.into(),
            role: Self::ROLE.into(),
            dims: [kraus.d_in(), kraus.d_out()],
            operators: kraus.operators().iter().map(MatrixData::from_matrix).collect(),
        }
    }

    pub fn to_kraus(&self) -> Result<KrausSet, CliError> {
        if self.schema_version != SCHEMA_VERSION || self.role != Self::ROLE {
            return Err(CliError::Parse(format!(
                "expected a schema {SCHEMA_VERSION} kraus file, got role {:?}",
                self.role
            )));
        }
        let ops = self.operators.iter().map(MatrixData::to_matrix).collect::<Result<Vec<_>, _>>()?;
        Ok(KrausSet::new(self.dims[0], self.dims[1], ops)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorRecord {
    pub spec: GeneratorSpec,
    pub prng: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema_version: String,
    pub tool_version: String,
    pub command: String,
    /// Hex SHA-256 of the input file bytes, or of the canonical parameter JSON
    /// for commands without an input file.
    pub input_digest: String,
    pub tolerances: ToleranceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<CertificateReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degradability: Option<CertificateReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<HarnessSummary>,
    /// Seconds since the Unix epoch when the report was written.
    pub timestamp: u64,
}

impl ReportFile {
    pub fn new(command: &str, input_digest: String, tolerances: ToleranceConfig) -> Self {
        let timestamp =
            std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self {
            schema_version: SCHEMA_VERSION.into(),
            tool_version: TOOL_VERSION.into(),
            command: command.into(),
            input_digest,
            tolerances,
            generator: None,
            report: None,
            degradability: None,
            aggregate: None,
            timestamp,
        }
    }

    /// Serialized bytes with the timestamp zeroed, for reproducibility checks.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut copy = self.clone();
        copy.timestamp = 0;
        to_json_bytes(&copy)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report types serialize to JSON");
    bytes.push(b'\n');
    bytes
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(bytes: &[u8], what: &str) -> Result<T, CliError> {
    serde_json::from_slice(bytes).map_err(|e| CliError::Parse(format!("{what}: {e}")))
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    use std::io::Write;
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(bytes).map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ebcert_core::generators::Prng;

    #[test]
    fn floats_round_trip_bit_exactly() {
        let mut rng = Prng::new(9);
        let mut m = rng.ginibre(5, 4);
        m = &m + &ComplexMatrix::from_fn(5, 4, |r, c| C64::new(1e-300 * r as f64, 0.1 + 3.0 * c as f64 / 7.0));
        let file = MatrixFile::with_matrix(&m);
        let bytes = to_json_bytes(&file);
        let back: MatrixFile = parse_json(&bytes, "matrix").unwrap();
        let m2 = back.matrix().unwrap();
        for (a, b) in m.row_major().iter().zip(m2.row_major()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn shape_mismatch_is_a_parse_error() {
        let mut file = MatrixFile::with_matrix(&ComplexMatrix::identity(2));
        file.im.pop();
        assert!(matches!(file.matrix(), Err(CliError::Parse(_))));
        let mut file = MatrixFile::with_matrix(&ComplexMatrix::identity(4));
        file.layout = Some([2, 3]);
        assert!(matches!(file.matrix(), Err(CliError::Parse(_))));
    }

    #[test]
    fn kraus_file_round_trip() {
        let k = KrausSet::new(2, 2, vec![ComplexMatrix::identity(2)]).unwrap();
        let file = KrausFile::from_kraus(&k);
        let back: KrausFile = parse_json(&to_json_bytes(&file), "kraus").unwrap();
        assert_eq!(back.to_kraus().unwrap(), k);
    }
}
