//! Build checkpoints: the whole ensemble builder state goes to disk between
//! work units so a killed run restarts where it stopped. The file is a
//! magic tag, a format version, and the serialized builder; saves go
//! through a temporary file and an atomic rename so an interrupted save
//! never destroys the previous checkpoint.

use std::fs;
use std::path::Path;

use crate::ensemble::HiveCoteBuilder;
use crate::error::CheckpointError;

const MAGIC: &[u8; 8] = b"HCBLD\0v\0";
pub const FORMAT_VERSION: u32 = 1;

fn io_err(path: &Path, source: std::io::Error) -> CheckpointError {
    CheckpointError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn save_builder(path: impl AsRef<Path>, builder: &HiveCoteBuilder) -> Result<(), CheckpointError> {
    let path = path.as_ref();
    let payload = bincode::serialize(builder).map_err(|_| CheckpointError::Corrupted {
        path: path.to_path_buf(),
    })?;
    let mut bytes = Vec::with_capacity(MAGIC.len() + 4 + payload.len());
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&payload);
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| io_err(path, e))?;
        }
    }
    let temp = path.with_extension("tmp");
    fs::write(&temp, &bytes).map_err(|e| io_err(&temp, e))?;
    fs::rename(&temp, path).map_err(|e| io_err(path, e))?;
    Ok(())
}

pub fn load_builder(path: impl AsRef<Path>) -> Result<HiveCoteBuilder, CheckpointError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    if bytes.len() < MAGIC.len() + 4 {
        return Err(CheckpointError::Corrupted {
            path: path.to_path_buf(),
        });
    }
    if &bytes[..MAGIC.len()] != MAGIC {
        return Err(CheckpointError::BadMagic {
            path: path.to_path_buf(),
        });
    }
    let version = u32::from_le_bytes(bytes[MAGIC.len()..MAGIC.len() + 4].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(CheckpointError::VersionMismatch {
            path: path.to_path_buf(),
            expected: FORMAT_VERSION,
            found: version,
        });
    }
    bincode::deserialize(&bytes[MAGIC.len() + 4..]).map_err(|_| CheckpointError::Corrupted {
        path: path.to_path_buf(),
    })
}
