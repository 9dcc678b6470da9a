use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LOCK_FILE: &str = "catalog.lock";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LockOwner {
    pub pid: u32,
    pub at: DateTime<Utc>,
}

/// Exclusive writer lock, released on drop.
#[derive(Debug)]
pub struct LockGuard {
    path: PathBuf,
    owner: LockOwner,
}

impl LockGuard {
    pub fn acquire(root: &Path) -> Result<Self> {
        let path = root.join(LOCK_FILE);
        for _ in 0..2 {
            let owner = LockOwner {
                pid: std::process::id(),
                at: Utc::now(),
            };
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut file) => {
                    let body = serde_json::to_vec(&owner).map_err(io::Error::other)?;
                    file.write_all(&body)?;
                    file.sync_all()?;
                    return Ok(Self { path, owner });
                }
                Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                    let existing = read_owner(&path);
                    match existing {
                        Some(o) if !process_alive(o.pid) => {
                            // stale lock from a dead process
                            let _ = fs::remove_file(&path);
                        }
                        Some(o) => {
                            return Err(Error::LockHeld {
                                path: root.to_path_buf(),
                                owner: format!("pid {} since {}", o.pid, o.at.to_rfc3339()),
                            })
                        }
                        None => {
                            return Err(Error::LockHeld {
                                path: root.to_path_buf(),
                                owner: "an unknown process".into(),
                            })
                        }
                    }
                }
                Err(e) => return Err(e.into()),
            }
        }
        Err(Error::LockHeld {
            path: root.to_path_buf(),
            owner: "a concurrent opener".into(),
        })
    }

    pub fn owner(&self) -> &LockOwner {
        &self.owner
    }
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        // only remove the file if it is still ours
        if let Some(o) = read_owner(&self.path) {
            if o.pid == self.owner.pid && o.at == self.owner.at {
                let _ = fs::remove_file(&self.path);
            }
        }
    }
}

pub fn read_owner(path: &Path) -> Option<LockOwner> {
    fs::read(path)
        .ok()
        .and_then(|b| serde_json::from_slice(&b).ok())
}

fn process_alive(pid: u32) -> bool {
    if pid == std::process::id() {
        return true;
    }
    if cfg!(target_os = "linux") {
        Path::new("/proc").join(pid.to_string()).exists()
    } else {
        true
    }
}
