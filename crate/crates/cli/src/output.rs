use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use shortcut_audit::report::{to_json, InputDigest, RunManifest};

use crate::{CliError, CliResult};

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn with_input(mut manifest: RunManifest, role: &str, path: &Path) -> CliResult<RunManifest> {
    manifest.inputs.push(InputDigest {
        role: role.into(),
        path: path.display().to_string(),
        sha256: sha256_file(path)?,
    });
    Ok(manifest)
}

pub fn ensure_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> CliResult {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|()| w.flush())
        .map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<String> {
    let text = to_json(value)?;
    write_text(path, &text)?;
    Ok(text)
}

/// Runs a CSV writer into `path`.
pub fn write_with<F>(path: &Path, f: F) -> CliResult
where
    F: FnOnce(&mut BufWriter<File>) -> shortcut_audit::Result<()>,
{
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush().map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

/// `weights.csv` -> `weights.json`.
pub fn sidecar_path(out: &Path) -> CliResult<PathBuf> {
    if out.extension().is_some_and(|e| e == "json") {
        return Err(CliError::Invalid(format!(
            "{}: output must not have a .json extension, the sidecar uses it",
            out.display()
        )));
    }
    Ok(out.with_extension("json"))
}
