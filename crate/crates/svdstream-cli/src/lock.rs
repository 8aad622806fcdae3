//! Advisory locking for state files: one process owns one state file while
//! writing. The lock lives on a sidecar path so it also covers creation.

use crate::CliError;
use fs2::FileExt;
use std::fs::File;
use std::path::{Path, PathBuf};

pub struct StateLock {
    file: File,
    path: PathBuf,
}

impl StateLock {
    /// Take an exclusive advisory lock for writing `state_path`. Fails fast
    /// if another process already holds it.
    pub fn acquire(state_path: &Path) -> Result<Self, CliError> {
        let path = lock_path(state_path);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        file.try_lock_exclusive().map_err(|_| {
            CliError::Usage(format!(
                "state file {} is locked by another process",
                state_path.display()
            ))
        })?;
        Ok(Self { file, path })
    }
}

impl Drop for StateLock {
    fn drop(&mut self) {
        let _ = fs2::FileExt::unlock(&self.file);
        let _ = std::fs::remove_file(&self.path);
    }
}

fn lock_path(state_path: &Path) -> PathBuf {
    let mut os = state_path.as_os_str().to_os_string();
    os.push(".lock");
    PathBuf::from(os)
}
