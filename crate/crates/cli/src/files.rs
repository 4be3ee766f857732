//! On-disk formats. Every file is UTF-8 JSON; complex entries are
//! `[re, im]` pairs written with 17 significant digits.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use qop_core::matrix::partial_trace;
use qop_core::{eig_hermitian, Channel, ChoiMatrix, Complex64, ComplexMatrix, DensityMatrix, KrausSet};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

pub const FORMAT_VERSION: u32 = 1;

/// Trace-preservation slack for matrices read back from decimal text.
pub const FILE_TP_TOLERANCE: f64 = 1e-8;

/// A real number that serializes with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(transparent)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom(format!("cannot write non-finite value {}", self.0)));
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

pub type Entry = [Real; 2];
pub type MatrixRows = Vec<Vec<Entry>>;

pub fn reals(v: &[f64]) -> Vec<Real> {
    v.iter().copied().map(Real).collect()
}

pub fn matrix_to_rows(m: &ComplexMatrix) -> MatrixRows {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| [Real(m[(r, c)].re), Real(m[(r, c)].im)]).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &MatrixRows, n_rows: usize, n_cols: usize, what: &str) -> Result<ComplexMatrix> {
    ensure!(rows.len() == n_rows, "{what}: expected {n_rows} rows, found {}", rows.len());
    let mut data = Vec::with_capacity(n_rows * n_cols);
    for (r, row) in rows.iter().enumerate() {
        ensure!(row.len() == n_cols, "{what}: row {r} has {} entries, expected {n_cols}", row.len());
        for [re, im] in row {
            ensure!(re.0.is_finite() && im.0.is_finite(), "{what}: non-finite entry in row {r}");
            data.push(Complex64::new(re.0, im.0));
        }
    }
    Ok(ComplexMatrix::from_row_major(n_rows, n_cols, data)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Kraus,
    Choi,
}

/// A channel in either representation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub format_version: u32,
    #[serde(default = "default_representation")]
    pub representation: Representation,
    pub d_in: usize,
    pub d_out: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<MatrixRows>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choi: Option<MatrixRows>,
}

fn default_representation() -> Representation {
    Representation::Kraus
}

impl ChannelFile {
    pub fn from_channel(ch: &Channel, to: Representation) -> Self {
        let (kraus, choi) = match to {
            Representation::Kraus => (Some(ch.kraus().operators().iter().map(matrix_to_rows).collect()), None),
            Representation::Choi => (None, Some(matrix_to_rows(ch.choi().matrix()))),
        };
        Self {
            format_version: FORMAT_VERSION,
            representation: to,
            d_in: ch.d_in(),
            d_out: ch.d_out(),
            kraus,
            choi,
        }
    }

    /// Validates and converts to a [`Channel`]. Deviations from trace
    /// preservation up to [`FILE_TP_TOLERANCE`] are accepted and then
    /// removed by renormalizing with `S^{-1/2}`, `S = Σ E†E`.
    pub fn to_channel(&self) -> Result<Channel> {
        ensure!(
            self.format_version == FORMAT_VERSION,
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            self.format_version
        );
        ensure!(self.d_in > 0 && self.d_out > 0, "dimensions must be positive");
        match self.representation {
            Representation::Kraus => {
                let Some(ops) = &self.kraus else { bail!("kraus representation without a \"kraus\" field") };
                ensure!(self.choi.is_none(), "kraus file must not carry a \"choi\" field");
                let ops = ops
                    .iter()
                    .enumerate()
                    .map(|(k, rows)| rows_to_matrix(rows, self.d_out, self.d_in, &format!("kraus[{k}]")))
                    .collect::<Result<Vec<_>>>()?;
                let k = KrausSet::with_tolerance(self.d_in, self.d_out, ops, FILE_TP_TOLERANCE)?;
                let s = k
                    .operators()
                    .iter()
                    .fold(ComplexMatrix::zeros(self.d_in, self.d_in), |acc, e| &acc + &e.adjoint().matmul(e));
                let fix = inverse_sqrt(&s)?;
                let ops = k.operators().iter().map(|e| e.matmul(&fix)).collect();
                Ok(Channel::from_kraus(KrausSet::new(self.d_in, self.d_out, ops)?)?)
            }
            Representation::Choi => {
                let Some(rows) = &self.choi else { bail!("choi representation without a \"choi\" field") };
                ensure!(self.kraus.is_none(), "choi file must not carry a \"kraus\" field");
                let n = self.d_in * self.d_out;
                let c = rows_to_matrix(rows, n, n, "choi")?;
                let reduced = partial_trace(&c, &[self.d_in, self.d_out], &[0])?;
                let dev = (&reduced - &ComplexMatrix::identity(self.d_in)).max_abs();
                ensure!(dev <= FILE_TP_TOLERANCE, "not trace preserving (deviation {dev:.3e})");
                let fix = qop_core::tensor(&inverse_sqrt(&reduced)?, &ComplexMatrix::identity(self.d_out))?;
                let fixed = fix.matmul(&c).matmul(&fix).hermitian_part();
                Ok(Channel::from_choi(ChoiMatrix::new(self.d_in, self.d_out, fixed)?)?)
            }
        }
    }
}

fn inverse_sqrt(s: &ComplexMatrix) -> Result<ComplexMatrix> {
    let e = eig_hermitian(&s.hermitian_part())?;
    let n = s.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &lambda) in e.values.iter().enumerate() {
        ensure!(lambda > 0.5, "operator sum is far from the identity");
        let v = e.vector(k);
        out = &out + &ComplexMatrix::outer(&v, &v).scale_real(lambda.sqrt().recip());
    }
    Ok(out)
}

/// A density matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub format_version: u32,
    pub dim: usize,
    pub rho: MatrixRows,
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            dim: rho.dim(),
            rho: matrix_to_rows(rho.matrix()),
        }
    }

    pub fn to_state(&self) -> Result<DensityMatrix> {
        ensure!(
            self.format_version == FORMAT_VERSION,
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            self.format_version
        );
        Ok(DensityMatrix::new(rows_to_matrix(&self.rho, self.dim, self.dim, "rho")?)?)
    }
}

/// Output of the analysis commands.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile<T> {
    pub format_version: u32,
    /// Arguments after the program name.
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub results: T,
    pub duration_seconds: f64,
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes `text` to `path` via a temporary sibling and a rename, or to
/// standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
        Some(p) => {
            let name = p.file_name().context("output path has no file name")?.to_string_lossy();
            let tmp = p.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
            fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
            fs::rename(&tmp, p).with_context(|| format!("renaming onto {}", p.display()))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use qop_core::random::{random_channel, stream_rng};

    #[test]
    fn reals_use_seventeen_digits() {
        let s = serde_json::to_string(&Real(0.1)).unwrap();
        assert_eq!(s, "1.0000000000000001e-1");
        let back: Real = serde_json::from_str(&s).unwrap();
        assert_eq!(back.0, 0.1);
        assert!(serde_json::to_string(&Real(f64::NAN)).is_err());
    }

    #[test]
    fn channel_file_round_trip_is_exact() {
        let mut rng = stream_rng(1, 0);
        let ch = random_channel(2, 3, &mut rng);
        for rep in [Representation::Kraus, Representation::Choi] {
            let text = to_json(&ChannelFile::from_channel(&ch, rep)).unwrap();
            let back: ChannelFile = serde_json::from_str(&text).unwrap();
            let ch2 = back.to_channel().unwrap();
            assert!(qop_core::distance(&ch, &ch2).unwrap() < 1e-12);
        }
    }

    #[test]
    fn slightly_off_kraus_is_repaired() {
        let mut file = ChannelFile::from_channel(&Channel::identity(2), Representation::Kraus);
        file.kraus.as_mut().unwrap()[0][0][0][0].0 += 2e-9;
        let ch = file.to_channel().unwrap();
        assert!(ch.kraus().trace_preservation_error() < 1e-12);
        file.kraus.as_mut().unwrap()[0][0][0][0].0 += 1e-6;
        assert!(file.to_channel().is_err());
    }

    #[test]
    fn malformed_files_are_rejected() {
        let mut file = ChannelFile::from_channel(&Channel::identity(2), Representation::Kraus);
        file.format_version = 2;
        assert!(file.to_channel().is_err());
        let mut file = ChannelFile::from_channel(&Channel::identity(2), Representation::Kraus);
        file.d_out = 3;
        assert!(file.to_channel().is_err());
    }
}
