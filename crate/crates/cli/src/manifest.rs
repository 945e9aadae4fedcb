use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::Path;

use orbitrips::io::to_json;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Failure;

/// Everything that determines a run's output. Wall time is reported on
/// stderr so that equal manifests give byte-identical artifacts.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub argv: Vec<String>,
    /// Input path as given on the command line -> sha256 of its bytes.
    pub inputs: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: &'static str,
}

impl RunManifest {
    pub fn new(subcommand: &'static str) -> Self {
        RunManifest {
            subcommand,
            argv: std::env::args().skip(1).collect(),
            inputs: BTreeMap::new(),
            seed: None,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn record_input(&mut self, path: &Path) -> Result<(), Failure> {
        let bytes = std::fs::read(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        self.inputs
            .insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        Ok(())
    }

    /// One-line form for comment headers in text artifacts.
    pub fn comment(&self) -> String {
        format!(
            "# manifest {}\n",
            serde_json::to_string(self).expect("manifest serializes")
        )
    }
}

#[derive(Serialize)]
struct Artifact<'a, T: Serialize> {
    manifest: &'a RunManifest,
    #[serde(flatten)]
    body: &'a T,
}

/// Writes `body` as JSON with the manifest embedded under `"manifest"`.
pub fn write_json<T: Serialize>(out: Option<&Path>, manifest: &RunManifest, body: &T) -> Result<(), Failure> {
    let text = to_json(&Artifact { manifest, body }).map_err(Failure::from)?;
    write_text(out, &text)
}

pub fn write_text(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(e.to_string())),
    }
}
