use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::CliError;

/// A file produced by a command, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub path: PathBuf,
    pub contents: Vec<u8>,
}

impl Artifact {
    pub fn new(path: impl Into<PathBuf>, contents: impl Into<Vec<u8>>) -> Self {
        Self { path: path.into(), contents: contents.into() }
    }

    pub fn json<T: Serialize>(path: impl Into<PathBuf>, value: &T) -> Result<Self, CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Compute(e.to_string()))?;
        text.push('\n');
        Ok(Self::new(path, text))
    }

    /// Same artifact placed under `dir`.
    pub fn nested(self, dir: &str) -> Self {
        Self { path: Path::new(dir).join(self.path), contents: self.contents }
    }
}

/// Writes every artifact through a temporary file and an atomic rename, so
/// readers never see a half-written file.
pub fn write_artifacts(out: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    for a in artifacts {
        let target = out.join(&a.path);
        let parent = target.parent().unwrap_or(out);
        fs::create_dir_all(parent)?;
        let mut tmp = NamedTempFile::new_in(parent)?;
        tmp.write_all(&a.contents)?;
        tmp.flush()?;
        #[cfg(unix)]
        {
            use std::os::unix::fs::PermissionsExt;
            tmp.as_file().set_permissions(fs::Permissions::from_mode(0o644))?;
        }
        tmp.persist(&target).map_err(|e| CliError::Io(e.error))?;
    }
    Ok(())
}
