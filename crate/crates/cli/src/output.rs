//! File formats: `x1,x2,value` CSV, binary PGM, and the run manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use dsmdot_core::dsm::{BoundaryData, IndexMap};
use dsmdot_core::geometry::BoundaryMesh;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const CSV_HEADER: &str = "x1,x2,value";

/// Nine significant digits.
pub fn number(v: f64) -> String {
    format!("{v:.8e}")
}

pub fn boundary_csv(data: &BoundaryData) -> String {
    let mut s = String::with_capacity(48 * data.values.len());
    s.push_str(CSV_HEADER);
    s.push('\n');
    for (n, v) in data.mesh.nodes.iter().zip(&data.values) {
        let _ = writeln!(s, "{},{},{}", number(n.pos[0]), number(n.pos[1]), number(*v));
    }
    s
}

/// Every grid node in index order, inactive nodes as zero.
pub fn grid_csv(map: &IndexMap) -> String {
    let mut s = String::with_capacity(48 * map.values.len());
    s.push_str(CSV_HEADER);
    s.push('\n');
    for (k, v) in map.values.iter().enumerate() {
        let p = map.grid.node(k);
        let _ = writeln!(s, "{},{},{}", number(p[0]), number(p[1]), number(*v));
    }
    s
}

/// P5 grayscale, maxval 255, top row first.
pub fn pgm(map: &IndexMap) -> Vec<u8> {
    let g = &map.grid;
    let mut out = format!("P5\n{} {}\n255\n", g.nx, g.ny).into_bytes();
    for j in (0..g.ny).rev() {
        for i in 0..g.nx {
            let v = map.values[g.index(i, j)].clamp(0.0, 1.0);
            out.push((v * 255.0).round() as u8);
        }
    }
    out
}

/// Values of a boundary CSV, checked node by node against `mesh`.
pub fn read_boundary_csv(path: &Path, mesh: &Arc<BoundaryMesh>) -> Result<BoundaryData, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |line: usize, message: String| CliError::Config { path: path.into(), line, column: 1, message };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(bad(1, format!("expected header {CSV_HEADER:?}"))),
    }
    let mut values = Vec::with_capacity(mesh.len());
    for (i, line) in lines.filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(i + 1, e.to_string()))?;
        if fields.len() != 3 {
            return Err(bad(i + 1, format!("expected 3 fields, found {}", fields.len())));
        }
        let node = mesh.nodes.get(values.len()).ok_or_else(|| bad(i + 1, "more rows than boundary nodes".into()))?;
        let tol = 1e-7 * (1.0 + node.pos[0].abs().max(node.pos[1].abs()));
        if (fields[0] - node.pos[0]).abs() > tol || (fields[1] - node.pos[1]).abs() > tol {
            return Err(bad(i + 1, format!("node ({}, {}) does not match the expected boundary mesh", fields[0], fields[1])));
        }
        values.push(fields[2]);
    }
    if values.len() != mesh.len() {
        return Err(bad(text.lines().count(), format!("expected {} rows, found {}", mesh.len(), values.len())));
    }
    Ok(BoundaryData::new(mesh.clone(), values)?)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FileEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
    /// Seconds per stage.
    pub timings: BTreeMap<String, f64>,
    pub files: Vec<FileEntry>,
    #[serde(default)]
    pub details: serde_json::Map<String, serde_json::Value>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            tool: "dsmdot".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: None,
            seed: None,
            rng: None,
            timings: BTreeMap::new(),
            files: Vec::new(),
            details: serde_json::Map::new(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Output directory that records every file it writes.
pub struct OutDir {
    pub path: PathBuf,
    pub manifest: RunManifest,
}

pub const MANIFEST: &str = "manifest.json";

impl OutDir {
    pub fn create(path: &Path, manifest: RunManifest) -> Result<Self, CliError> {
        fs::create_dir_all(path).map_err(|e| CliError::io(path, e))?;
        Ok(OutDir { path: path.to_path_buf(), manifest })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let p = self.path.join(name);
        fs::write(&p, bytes).map_err(|e| CliError::io(&p, e))?;
        self.manifest.files.push(FileEntry { name: name.into(), bytes: bytes.len(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn finish(self) -> Result<PathBuf, CliError> {
        let p = self.path.join(MANIFEST);
        let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        fs::write(&p, text + "\n").map_err(|e| CliError::io(&p, e))?;
        Ok(p)
    }
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest, CliError> {
    let p = dir.join(MANIFEST);
    let text = fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config {
        path: p.clone(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}
