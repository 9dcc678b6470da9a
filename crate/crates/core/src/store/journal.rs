use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::storage::{replace_file, tmp_path, Storage};

pub const JOURNAL_FILE: &str = "journal.json";

/// One file mutation, with a path relative to the catalog root.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum JournalOp {
    Replace { path: String, content: String },
    Append { path: String, offset: u64, content: String },
}

/// Redo record for one catalog operation. Renaming the journal into place is
/// the commit point; applying it is idempotent, so recovery simply re-applies.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Journal {
    pub ops: Vec<JournalOp>,
}

#[derive(Debug)]
pub enum CommitError {
    /// Nothing became visible.
    NotCommitted(io::Error),
    /// The journal is durable but applying it failed; recovery will finish it.
    Incomplete(io::Error),
}

impl Journal {
    pub fn commit(&self, storage: &dyn Storage, root: &Path) -> Result<(), CommitError> {
        let bytes = serde_json::to_vec(self).map_err(|e| CommitError::NotCommitted(e.into()))?;
        let path = root.join(JOURNAL_FILE);
        let tmp = tmp_path(&path);
        storage
            .write_file(&tmp, &bytes)
            .map_err(CommitError::NotCommitted)?;
        storage
            .rename(&tmp, &path)
            .map_err(CommitError::NotCommitted)?;
        self.apply(storage, root)
            .and_then(|_| finish(storage, root))
            .map_err(CommitError::Incomplete)
    }

    pub fn apply(&self, storage: &dyn Storage, root: &Path) -> io::Result<()> {
        storage.sync_dir(root)?;
        for op in &self.ops {
            match op {
                JournalOp::Replace { path, content } => {
                    replace_file(storage, &root.join(path), content.as_bytes())?
                }
                JournalOp::Append {
                    path,
                    offset,
                    content,
                } => storage.append_at(&root.join(path), *offset, content.as_bytes())?,
            }
        }
        Ok(())
    }

    pub fn read(root: &Path) -> io::Result<Option<Journal>> {
        match fs::read(root.join(JOURNAL_FILE)) {
            Ok(bytes) => serde_json::from_slice(&bytes)
                .map(Some)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// File contents as they will be once the journal is applied, for the
    /// paths it touches.
    pub fn overlay(&self, root: &Path) -> io::Result<BTreeMap<String, Vec<u8>>> {
        let mut out: BTreeMap<String, Vec<u8>> = BTreeMap::new();
        for op in &self.ops {
            match op {
                JournalOp::Replace { path, content } => {
                    out.insert(path.clone(), content.clone().into_bytes());
                }
                JournalOp::Append {
                    path,
                    offset,
                    content,
                } => {
                    let mut base = match out.remove(path) {
                        Some(b) => b,
                        None => match fs::read(root.join(path)) {
                            Ok(b) => b,
                            Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
                            Err(e) => return Err(e),
                        },
                    };
                    base.resize(*offset as usize, 0);
                    base.extend_from_slice(content.as_bytes());
                    out.insert(path.clone(), base);
                }
            }
        }
        Ok(out)
    }
}

pub fn finish(storage: &dyn Storage, root: &Path) -> io::Result<()> {
    storage.remove_file(&root.join(JOURNAL_FILE))?;
    storage.sync_dir(root)
}
