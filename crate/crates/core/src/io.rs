//! JSON file formats for states, density matrices and reports.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, Matrix4, Vector4};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::FockDensity;
use crate::gaussian::{CorrelationMatrix, GaussianState};

/// A two-mode Gaussian state on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub correlation_matrix: [[f64; 4]; 4],
    #[serde(default)]
    pub displacement: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl StateFile {
    pub fn from_matrix(m: &CorrelationMatrix, label: Option<String>) -> Self {
        Self { correlation_matrix: m.to_rows(), displacement: [0.0; 4], label }
    }

    pub fn from_state(s: &GaussianState, label: Option<String>) -> Self {
        let d = s.displacement();
        Self { correlation_matrix: s.cm().to_rows(), displacement: [d[0], d[1], d[2], d[3]], label }
    }

    /// Validates symmetry and physicality.
    pub fn to_state(&self) -> Result<GaussianState> {
        let m = CorrelationMatrix::from_rows(self.correlation_matrix)?;
        GaussianState::new(m, Vector4::from(self.displacement))
    }

    pub fn matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.correlation_matrix[i][j])
    }
}

/// A truncated density matrix on disk, entries as `[re, im]` pairs in the
/// `|n_a, n_b⟩` basis with `n_b` fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityFile {
    pub cutoff: usize,
    pub entries: Vec<Vec<[f64; 2]>>,
}

impl DensityFile {
    pub fn from_density(rho: &FockDensity) -> Self {
        let m = rho.matrix();
        let entries = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
        Self { cutoff: rho.cutoff(), entries }
    }

    pub fn to_density(&self) -> Result<FockDensity> {
        let d = (self.cutoff + 1) * (self.cutoff + 1);
        if self.entries.len() != d || self.entries.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch(format!("cutoff {} needs a {d}×{d} matrix", self.cutoff)));
        }
        let m = DMatrix::from_fn(d, d, |i, j| Complex64::new(self.entries[i][j][0], self.entries[i][j][1]));
        FockDensity::new(self.cutoff, m)
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_state(path: &Path) -> Result<GaussianState> {
    read_json::<StateFile>(path)?.to_state()
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}
