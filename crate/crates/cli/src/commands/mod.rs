pub mod compress;
pub mod evaluate;
pub mod export;
pub mod generate;
pub mod separation;
pub mod train;

use std::path::Path;

use crate::error::CliError;

/// The output directory must already exist and be a directory.
pub(crate) fn require_dir(path: &Path) -> Result<(), CliError> {
    if !path.is_dir() {
        return Err(CliError::io(
            path,
            "output directory does not exist",
            std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        ));
    }
    Ok(())
}

pub(crate) fn unix_time() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
