use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::{self, Seek, SeekFrom, Write};
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

/// Write primitives used by the catalog. Reads go straight to the filesystem;
/// every mutation goes through this trait so a test shim can cut it short.
pub trait Storage: Send + Sync + fmt::Debug {
    /// Creates or truncates `path` and writes `bytes`.
    fn write_file(&self, path: &Path, bytes: &[u8]) -> io::Result<()>;
    /// Truncates `path` to `offset` (creating it if needed) and writes `bytes` there.
    fn append_at(&self, path: &Path, offset: u64, bytes: &[u8]) -> io::Result<()>;
    fn rename(&self, from: &Path, to: &Path) -> io::Result<()>;
    fn remove_file(&self, path: &Path) -> io::Result<()>;
    fn create_dir_all(&self, path: &Path) -> io::Result<()>;
    /// Makes directory entries (renames, creations) durable.
    fn sync_dir(&self, path: &Path) -> io::Result<()>;
}

/// Plain filesystem storage. With `durable` set, file contents and directory
/// entries are fsynced.
#[derive(Debug, Clone, Copy)]
pub struct FsStorage {
    pub durable: bool,
}

impl Default for FsStorage {
    fn default() -> Self {
        Self { durable: true }
    }
}

impl Storage for FsStorage {
    fn write_file(&self, path: &Path, bytes: &[u8]) -> io::Result<()> {
        let mut file = fs::File::create(path)?;
        file.write_all(bytes)?;
        if self.durable {
            file.sync_all()?;
        }
        Ok(())
    }

    fn append_at(&self, path: &Path, offset: u64, bytes: &[u8]) -> io::Result<()> {
        let mut file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(path)?;
        file.set_len(offset)?;
        file.seek(SeekFrom::Start(offset))?;
        file.write_all(bytes)?;
        if self.durable {
            file.sync_all()?;
        }
        Ok(())
    }

    fn rename(&self, from: &Path, to: &Path) -> io::Result<()> {
        fs::rename(from, to)
    }

    fn remove_file(&self, path: &Path) -> io::Result<()> {
        match fs::remove_file(path) {
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(()),
            other => other,
        }
    }

    fn create_dir_all(&self, path: &Path) -> io::Result<()> {
        fs::create_dir_all(path)
    }

    fn sync_dir(&self, path: &Path) -> io::Result<()> {
        if self.durable {
            #[cfg(unix)]
            fs::File::open(path)?.sync_all()?;
        }
        Ok(())
    }
}

/// Storage that simulates a crash: after `budget` successful write steps,
/// the next step fails (optionally after writing half of its bytes) and
/// every later step fails too.
#[derive(Debug)]
pub struct FaultyStorage {
    inner: FsStorage,
    remaining: AtomicUsize,
    torn_writes: bool,
    crashed: AtomicBool,
}

impl FaultyStorage {
    pub fn new(budget: usize, torn_writes: bool) -> Self {
        Self {
            inner: FsStorage { durable: false },
            remaining: AtomicUsize::new(budget),
            torn_writes,
            crashed: AtomicBool::new(false),
        }
    }

    pub fn crashed(&self) -> bool {
        self.crashed.load(Ordering::SeqCst)
    }

    fn step(&self) -> io::Result<()> {
        if self.crashed() {
            return Err(io::Error::other("storage is down after injected crash"));
        }
        let ok = self
            .remaining
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |r| r.checked_sub(1))
            .is_ok();
        if ok {
            Ok(())
        } else {
            self.crashed.store(true, Ordering::SeqCst);
            Err(io::Error::other("injected crash"))
        }
    }

    fn torn<F: FnOnce(&[u8]) -> io::Result<()>>(&self, bytes: &[u8], write: F) -> io::Result<()> {
        match self.step() {
            Ok(()) => write(bytes),
            Err(e) => {
                if self.torn_writes && !bytes.is_empty() && self.crashed() {
                    let _ = write(&bytes[..bytes.len() / 2]);
                }
                Err(e)
            }
        }
    }
}

impl Storage for FaultyStorage {
    fn write_file(&self, path: &Path, bytes: &[u8]) -> io::Result<()> {
        self.torn(bytes, |b| self.inner.write_file(path, b))
    }

    fn append_at(&self, path: &Path, offset: u64, bytes: &[u8]) -> io::Result<()> {
        self.torn(bytes, |b| self.inner.append_at(path, offset, b))
    }

    fn rename(&self, from: &Path, to: &Path) -> io::Result<()> {
        self.step()?;
        self.inner.rename(from, to)
    }

    fn remove_file(&self, path: &Path) -> io::Result<()> {
        self.step()?;
        self.inner.remove_file(path)
    }

    fn create_dir_all(&self, path: &Path) -> io::Result<()> {
        self.step()?;
        self.inner.create_dir_all(path)
    }

    fn sync_dir(&self, path: &Path) -> io::Result<()> {
        self.step()?;
        self.inner.sync_dir(path)
    }
}

/// Write-temp-then-rename inside the target's directory.
pub(crate) fn replace_file(storage: &dyn Storage, path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = tmp_path(path);
    storage.write_file(&tmp, bytes)?;
    storage.rename(&tmp, path)?;
    if let Some(dir) = path.parent() {
        storage.sync_dir(dir)?;
    }
    Ok(())
}

pub(crate) fn tmp_path(path: &Path) -> std::path::PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}
