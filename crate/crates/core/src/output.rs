//! Deterministic file output: CSV tables with full precision and a JSON
//! summary carrying run metadata and a checksummed manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::oracle::ReducedMoments;
use crate::propagator::Observables;

pub const TRAJECTORY_HEADER: [&str; 10] =
    ["t_s", "trace", "q_mean", "p_mean", "q_var", "p_var", "qp_sym", "purity", "min_eig", "energy"];

/// `{:.16e}` (17 significant digits); `None` is an empty field.
pub fn format_value(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.16e}"),
        None => String::new(),
    }
}

pub fn csv_string(header: &[&str], rows: &[Vec<Option<f64>>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        let fields: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
        let _ = writeln!(s, "{}", fields.join(","));
    }
    s
}

pub fn trajectory_row(o: &Observables) -> Vec<Option<f64>> {
    vec![
        Some(o.t_s),
        Some(o.trace),
        Some(o.q_mean),
        Some(o.p_mean),
        Some(o.q_var()),
        Some(o.p_var()),
        Some(o.qp_sym),
        Some(o.purity),
        o.min_eig,
        o.energy,
    ]
}

/// Oracle moments in the trajectory schema. `energy` is the system energy
/// `⟨p²⟩/2 + ω²⟨(q − d)²⟩/2` when the potential is given.
pub fn reduced_row(t_s: f64, m: &ReducedMoments, potential: Option<(f64, f64)>) -> Vec<Option<f64>> {
    let det = m.q_var() * m.p_var() - m.qp_cov().powi(2);
    let energy = potential.map(|(w, d)| 0.5 * m.p2 + 0.5 * w * w * (m.q2 - 2.0 * d * m.q_mean + d * d));
    vec![
        Some(t_s),
        Some(1.0),
        Some(m.q_mean),
        Some(m.p_mean),
        Some(m.q_var()),
        Some(m.p_var()),
        Some(m.qp_sym),
        Some(0.5 / det.sqrt()),
        None,
        energy,
    ]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub program: &'static str,
    pub version: &'static str,
    pub command: String,
    pub timestamp_unix: u64,
    pub config: serde_json::Value,
}

/// Collects the files of one run in an output directory.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    manifest: Vec<ManifestEntry>,
}

impl OutputDir {
    pub fn create(root: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(root.as_ref())?;
        Ok(Self { root: root.as_ref().to_path_buf(), manifest: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &[ManifestEntry] {
        &self.manifest
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        fs::write(self.root.join(name), contents)?;
        let digest = Sha256::digest(contents.as_bytes());
        let sha256 = digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        self.manifest.retain(|e| e.file != name);
        self.manifest.push(ManifestEntry { file: name.to_string(), bytes: contents.len(), sha256 });
        Ok(())
    }

    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<Option<f64>>]) -> Result<()> {
        self.write(name, &csv_string(header, rows))
    }

    /// Writes `name` as `{metadata, manifest, summary}`; the summary file
    /// itself is not part of the manifest.
    pub fn write_summary<T: Serialize, C: Serialize>(
        &self,
        name: &str,
        command: &str,
        config: &C,
        summary: &T,
    ) -> Result<()> {
        let metadata = Metadata {
            program: "gqfpe",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            config: serde_json::to_value(config).map_err(std::io::Error::other)?,
        };
        let doc = serde_json::json!({
            "metadata": metadata,
            "manifest": self.manifest,
            "summary": serde_json::to_value(summary).map_err(std::io::Error::other)?,
        });
        let text = serde_json::to_string_pretty(&doc).map_err(std::io::Error::other)?;
        fs::write(self.root.join(name), text + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_round_trip_exactly() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(format_value(Some(x)).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_value(None), "");
    }

    #[test]
    fn csv_layout() {
        let s = csv_string(&["a", "b"], &[vec![Some(1.0), None]]);
        assert_eq!(s, "a,b\n1.0000000000000000e0,\n");
    }

    #[test]
    fn manifest_checksums() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        out.write("x.csv", "abc").unwrap();
        assert_eq!(out.manifest()[0].sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        out.write_summary("s.json", "test", &1, &2).unwrap();
        let doc: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
        assert_eq!(doc["manifest"][0]["file"], "x.csv");
        assert_eq!(doc["metadata"]["version"], env!("CARGO_PKG_VERSION"));
    }
}
