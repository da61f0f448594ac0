use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use rydpol_core::units::ExperimentConfig;

use crate::{commands, Command, Failure};

pub const MANIFEST_FILE: &str = "manifest.json";

/// One output file, named relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn json<T: Serialize>(name: &str, value: &T) -> Result<Self, Failure> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Failure::Computation(format!("{name}: {e}")))?;
        bytes.push(b'\n');
        Ok(Artifact { name: name.into(), bytes })
    }
}

/// Everything needed to reproduce a run. Contains no timestamps or paths
/// outside the command itself, so it is byte-identical across re-runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub command: Command,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub version: String,
    /// Input path → SHA-256.
    pub inputs: BTreeMap<String, String>,
    /// Artifact name → SHA-256.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), Failure> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(|e| Failure::Computation(format!("{}: {e}", path.display())))
}

/// Runs `command`, writes its artifacts and the manifest into `dir`.
pub(crate) fn execute(command: &Command, config: &ExperimentConfig, seed: u64, dir: &Path) -> Result<RunManifest, Failure> {
    let outcome = commands::run(command, config, seed)?;
    std::fs::create_dir_all(dir).map_err(|e| Failure::Computation(format!("{}: {e}", dir.display())))?;
    let mut outputs = BTreeMap::new();
    for artifact in &outcome.artifacts {
        write(dir, &artifact.name, &artifact.bytes)?;
        outputs.insert(artifact.name.clone(), sha256_hex(&artifact.bytes));
    }
    let manifest = RunManifest {
        subcommand: command.name().into(),
        command: command.clone(),
        config: config.clone(),
        seed,
        version: env!("CARGO_PKG_VERSION").into(),
        inputs: outcome.inputs,
        outputs,
    };
    write(dir, MANIFEST_FILE, &Artifact::json(MANIFEST_FILE, &manifest)?.bytes)?;
    print!("{}", outcome.summary);
    Ok(manifest)
}

/// Re-runs a manifest into `dir` and fails if any checksum differs.
pub(crate) fn replay(path: &Path, dir: &Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let recorded: RunManifest = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    recorded
        .config
        .validate()
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let fresh = execute(&recorded.command, &recorded.config, recorded.seed, dir)?;
    let mut mismatched: Vec<&str> = recorded
        .outputs
        .iter()
        .filter(|(name, sum)| fresh.outputs.get(*name) != Some(sum))
        .map(|(name, _)| name.as_str())
        .collect();
    mismatched.extend(
        recorded
            .inputs
            .iter()
            .filter(|(name, sum)| fresh.inputs.get(*name) != Some(sum))
            .map(|(name, _)| name.as_str()),
    );
    if mismatched.is_empty() {
        Ok(())
    } else {
        Err(Failure::Computation(format!("replay differs in {}", mismatched.join(", "))))
    }
}
