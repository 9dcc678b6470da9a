//! Durable catalog storage.
//!
//! A catalog is one directory:
//!
//! ```text
//! manifest.json        catalog metadata, counters, committed byte lengths, checksum
//! objects/<id>.json    one hypernode per file
//! links.jsonl          append-only similarity/parenthood records
//! groupings/<key>.json one grouping per parameter
//! index/terms.json     inverted index snapshot
//! log.jsonl            append-only event log
//! resources/<name>.txt semantic resources
//! catalog.lock         single-writer lock
//! ```
//!
//! Every mutation is described as a [`Journal`] of file writes. Renaming the
//! journal into place commits the operation; the writes are then applied and
//! the journal removed. Opening a catalog re-applies a leftover journal, so
//! an operation is either entirely visible or not at all.

mod export;
mod journal;
mod lock;
mod storage;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::auditlog::{detail, Action, EventRecord, PendingEvent, Target};
use crate::error::{Error, Result};
use crate::index::{self, IndexFile, InvertedIndex, Tokenizer};
use crate::inter::MetricRegistry;
use crate::model::{
    graph_advisories, validate_catalog_graph, validate_hypernode, AttrValue, Attributes, Grouping, Hypernode, InterLinks, MetaNode, NodeId,
    ObjectId, ParenthoodLink, SimilarityLink, Violation,
};
use crate::semantic::Thesaurus;

pub use export::CatalogExport;
pub use journal::{Journal, JournalOp, JOURNAL_FILE};
pub use lock::{LockGuard, LockOwner, LOCK_FILE};
pub use storage::{FaultyStorage, FsStorage, Storage};

use journal::CommitError;
use storage::replace_file;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const LINKS_FILE: &str = "links.jsonl";
pub const LOG_FILE: &str = "log.jsonl";
pub const INDEX_FILE: &str = "index/terms.json";
const OBJECTS_DIR: &str = "objects";
const GROUPINGS_DIR: &str = "groupings";
const INDEX_DIR: &str = "index";
const RESOURCES_DIR: &str = "resources";
const FORMAT_NAME: &str = "medal-catalog";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counters {
    pub objects: u64,
    pub similarity_links: u64,
    pub parenthood_links: u64,
    pub groupings: u64,
    pub resources: u64,
    /// Sequence number of the last logged event.
    pub events: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub version: u32,
    pub created_at: DateTime<Utc>,
    pub counters: Counters,
    /// Committed length of `log.jsonl`.
    pub log_bytes: u64,
    /// Committed length of `links.jsonl`.
    pub links_bytes: u64,
    #[serde(default)]
    pub stopwords: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestFile {
    manifest: Manifest,
    sha256: String,
}

impl Manifest {
    fn new() -> Self {
        Self {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            created_at: Utc::now(),
            counters: Counters::default(),
            log_bytes: 0,
            links_bytes: 0,
            stopwords: Vec::new(),
        }
    }

    fn checksum(&self) -> String {
        let body = serde_json::to_vec(self).expect("manifest serializes");
        hex::encode(Sha256::digest(&body))
    }

    fn to_file_string(&self) -> String {
        let file = ManifestFile {
            manifest: self.clone(),
            sha256: self.checksum(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("manifest serializes");
        s.push('\n');
        s
    }

    fn parse(bytes: &[u8]) -> Result<Self> {
        let file: ManifestFile = serde_json::from_slice(bytes)
            .map_err(|e| Error::corrupt(format!("{MANIFEST_FILE}: {e}")))?;
        if file.manifest.checksum() != file.sha256 {
            return Err(Error::corrupt(format!("{MANIFEST_FILE}: checksum mismatch")));
        }
        if file.manifest.format != FORMAT_NAME || file.manifest.version != FORMAT_VERSION {
            return Err(Error::corrupt(format!(
                "{MANIFEST_FILE}: unsupported format {} v{}",
                file.manifest.format, file.manifest.version
            )));
        }
        Ok(file.manifest)
    }
}

/// Line record of `links.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LinkRecord {
    Similarity(SimilarityLink),
    Parenthood(ParenthoodLink),
}

/// A loaded semantic resource and its source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resource {
    pub thesaurus: Thesaurus,
    pub text: String,
}

/// Changes making up one catalog operation.
#[derive(Debug, Default)]
pub(crate) struct Txn {
    pub objects: Vec<Hypernode>,
    pub links: Vec<LinkRecord>,
    pub groupings: Vec<Grouping>,
    pub resources: Vec<(String, Resource)>,
    pub events: Vec<PendingEvent>,
    pub reindex: BTreeSet<ObjectId>,
    pub stopwords: Option<Vec<String>>,
}

impl Txn {
    pub fn event(&mut self, event: PendingEvent) {
        self.events.push(event);
    }

    /// Writes `h` and re-indexes it.
    pub fn object(&mut self, h: Hypernode) {
        self.reindex.insert(h.id.clone());
        self.objects.push(h);
    }
}

#[derive(Debug, Clone, Default)]
pub struct OpenOptions {
    pub create_if_missing: bool,
    pub read_only: bool,
    pub storage: Option<Arc<dyn Storage>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub advisories: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Equality constraint used by [`Catalog::list_objects`].
#[derive(Debug, Clone, PartialEq)]
pub struct AttrFilter {
    pub label: String,
    pub value: AttrValue,
}

impl AttrFilter {
    pub fn new(label: impl Into<String>, value: impl Into<AttrValue>) -> Self {
        Self {
            label: label.into(),
            value: value.into(),
        }
    }

    /// Text filters also match non-text values with the same rendering.
    pub fn matches(&self, attrs: &Attributes) -> bool {
        match attrs.get(&self.label) {
            None => false,
            Some(v) if v == &self.value => true,
            Some(v) => match &self.value {
                AttrValue::Text(t) => &v.to_string() == t,
                _ => false,
            },
        }
    }
}

/// A data lake catalog: data references plus intra-object, inter-object and
/// global metadata, persisted under one directory.
pub struct Catalog {
    root: PathBuf,
    storage: Arc<dyn Storage>,
    lock: Option<LockGuard>,
    manifest: Manifest,
    objects: BTreeMap<ObjectId, Hypernode>,
    links: InterLinks,
    log: Vec<EventRecord>,
    resources: BTreeMap<String, Resource>,
    index: InvertedIndex,
    tokenizer: Tokenizer,
    index_dirty: bool,
    pending_recovery: bool,
    actor: String,
    metrics: MetricRegistry,
}

impl std::fmt::Debug for Catalog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Catalog")
            .field("root", &self.root)
            .field("objects", &self.objects.len())
            .field("events", &self.log.len())
            .field("writable", &self.lock.is_some())
            .finish()
    }
}

fn default_actor() -> String {
    std::env::var("USER")
        .or_else(|_| std::env::var("USERNAME"))
        .ok()
        .filter(|u| !u.trim().is_empty())
        .unwrap_or_else(|| "system".into())
}

/// File name token: ASCII alphanumerics plus `_`, `-`, `.`, not starting with `.`.
pub(crate) fn is_file_token(s: &str) -> bool {
    !s.is_empty()
        && !s.starts_with('.')
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn encode_key(key: &str) -> String {
    let mut out = String::with_capacity(key.len());
    for b in key.bytes() {
        if b.is_ascii_alphanumeric() || b == b'_' || b == b'-' {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

fn object_path(id: &ObjectId) -> String {
    format!("{OBJECTS_DIR}/{id}.json")
}

fn grouping_path(key: &str) -> String {
    format!("{GROUPINGS_DIR}/{}.json", encode_key(key))
}

fn resource_path(name: &str) -> String {
    format!("{RESOURCES_DIR}/{name}.txt")
}

fn to_lines<T: Serialize>(items: &[T]) -> Result<String> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).map_err(io::Error::other)?);
        out.push('\n');
    }
    Ok(out)
}

fn pretty<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    s.push('\n');
    Ok(s)
}

/// Reads files as they are on disk, or as a pending journal will leave them.
struct Snapshot<'a> {
    root: &'a Path,
    overlay: &'a BTreeMap<String, Vec<u8>>,
}

impl Snapshot<'_> {
    fn read(&self, rel: &str) -> Result<Option<Vec<u8>>> {
        if let Some(bytes) = self.overlay.get(rel) {
            return Ok(Some(bytes.clone()));
        }
        match fs::read(self.root.join(rel)) {
            Ok(b) => Ok(Some(b)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    /// Relative paths of `dir/*.ext`, sorted.
    fn list(&self, dir: &str, ext: &str) -> Result<Vec<String>> {
        let suffix = format!(".{ext}");
        let mut out = BTreeSet::new();
        match fs::read_dir(self.root.join(dir)) {
            Ok(entries) => {
                for entry in entries {
                    let name = entry?.file_name().to_string_lossy().into_owned();
                    if name.ends_with(&suffix) && !name.starts_with('.') {
                        out.insert(format!("{dir}/{name}"));
                    }
                }
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(e.into()),
        }
        let prefix = format!("{dir}/");
        for path in self.overlay.keys() {
            if path.starts_with(&prefix) && path.ends_with(&suffix) {
                out.insert(path.clone());
            }
        }
        Ok(out.into_iter().collect())
    }
}

fn stem<'a>(rel: &'a str, ext: &str) -> &'a str {
    let name = rel.rsplit('/').next().unwrap_or(rel);
    name.strip_suffix(&format!(".{ext}")).unwrap_or(name)
}

fn committed_prefix(bytes: Vec<u8>, len: u64, file: &str) -> Result<Vec<u8>> {
    let len = len as usize;
    if bytes.len() < len {
        return Err(Error::corrupt(format!(
            "{file} is shorter ({} bytes) than its committed length {len}",
            bytes.len()
        )));
    }
    let mut bytes = bytes;
    bytes.truncate(len);
    Ok(bytes)
}

struct LoadedState {
    manifest: Manifest,
    objects: BTreeMap<ObjectId, Hypernode>,
    links: InterLinks,
    log: Vec<EventRecord>,
    resources: BTreeMap<String, Resource>,
    index_file: Option<IndexFile>,
}

fn load_state(snap: &Snapshot<'_>) -> Result<LoadedState> {
    let manifest = match snap.read(MANIFEST_FILE)? {
        Some(bytes) => Manifest::parse(&bytes)?,
        None => return Err(Error::not_found("catalog", snap.root.display())),
    };

    let mut objects = BTreeMap::new();
    for rel in snap.list(OBJECTS_DIR, "json")? {
        let bytes = snap.read(&rel)?.unwrap_or_default();
        let h: Hypernode = serde_json::from_slice(&bytes)
            .map_err(|e| Error::corrupt(format!("{rel}: {e}")))?;
        if h.id.as_str() != stem(&rel, "json") {
            return Err(Error::corrupt(format!("{rel} holds object {}", h.id)));
        }
        objects.insert(h.id.clone(), h);
    }
    if objects.len() as u64 != manifest.counters.objects {
        return Err(Error::corrupt(format!(
            "manifest counts {} objects, found {}",
            manifest.counters.objects,
            objects.len()
        )));
    }

    let mut links = InterLinks::default();
    let link_bytes = committed_prefix(
        snap.read(LINKS_FILE)?.unwrap_or_default(),
        manifest.links_bytes,
        LINKS_FILE,
    )?;
    for (n, line) in link_bytes.split(|b| *b == b'\n').enumerate() {
        if line.is_empty() {
            continue;
        }
        let record: LinkRecord = serde_json::from_slice(line)
            .map_err(|e| Error::corrupt(format!("{LINKS_FILE}:{}: {e}", n + 1)))?;
        match record {
            LinkRecord::Similarity(l) => {
                links.similarity.insert(l.id.clone(), l);
            }
            LinkRecord::Parenthood(l) => {
                links.parenthood.insert(l.id.clone(), l);
            }
        }
    }
    for rel in snap.list(GROUPINGS_DIR, "json")? {
        let bytes = snap.read(&rel)?.unwrap_or_default();
        let g: Grouping = serde_json::from_slice(&bytes)
            .map_err(|e| Error::corrupt(format!("{rel}: {e}")))?;
        links.groupings.insert(g.key(), g);
    }

    let log_bytes = committed_prefix(
        snap.read(LOG_FILE)?.unwrap_or_default(),
        manifest.log_bytes,
        LOG_FILE,
    )?;
    let mut log = Vec::new();
    for (n, line) in log_bytes.split(|b| *b == b'\n').enumerate() {
        if line.is_empty() {
            continue;
        }
        let record: EventRecord = serde_json::from_slice(line)
            .map_err(|e| Error::corrupt(format!("{LOG_FILE}:{}: {e}", n + 1)))?;
        if record.seq != log.len() as u64 + 1 {
            return Err(Error::corrupt(format!(
                "{LOG_FILE}:{}: expected seq {}, found {}",
                n + 1,
                log.len() + 1,
                record.seq
            )));
        }
        log.push(record);
    }
    if log.len() as u64 != manifest.counters.events {
        return Err(Error::corrupt(format!(
            "manifest counts {} events, log holds {}",
            manifest.counters.events,
            log.len()
        )));
    }

    let mut resources = BTreeMap::new();
    for rel in snap.list(RESOURCES_DIR, "txt")? {
        let name = stem(&rel, "txt").to_owned();
        let bytes = snap.read(&rel)?.unwrap_or_default();
        let text = String::from_utf8(bytes).map_err(|e| Error::corrupt(format!("{rel}: {e}")))?;
        let thesaurus =
            Thesaurus::parse(&name, &text).map_err(|e| Error::corrupt(e.to_string()))?;
        resources.insert(name, Resource { thesaurus, text });
    }

    // The index is derived data; an unreadable snapshot is rebuilt.
    let index_file = snap
        .read(INDEX_FILE)?
        .and_then(|b| serde_json::from_slice::<IndexFile>(&b).ok());

    Ok(LoadedState {
        manifest,
        objects,
        links,
        log,
        resources,
        index_file,
    })
}

fn remove_stray_temps(storage: &dyn Storage, root: &Path) -> io::Result<()> {
    for dir in ["", OBJECTS_DIR, GROUPINGS_DIR, INDEX_DIR, RESOURCES_DIR] {
        let dir = root.join(dir);
        let Ok(entries) = fs::read_dir(&dir) else {
            continue;
        };
        for entry in entries {
            let entry = entry?;
            if entry.file_name().to_string_lossy().ends_with(".tmp") {
                storage.remove_file(&entry.path())?;
            }
        }
    }
    Ok(())
}

/// Finishes a committed journal and trims uncommitted tails of the append-only files.
fn recover(storage: &dyn Storage, root: &Path) -> Result<()> {
    remove_stray_temps(storage, root)?;
    match Journal::read(root) {
        Ok(Some(journal)) => {
            journal.apply(storage, root)?;
            journal::finish(storage, root)?;
        }
        Ok(None) => {}
        Err(e) if e.kind() == io::ErrorKind::InvalidData => {
            return Err(Error::corrupt(format!("{JOURNAL_FILE}: {e}")))
        }
        Err(e) => return Err(e.into()),
    }
    if let Ok(bytes) = fs::read(root.join(MANIFEST_FILE)) {
        let manifest = Manifest::parse(&bytes)?;
        for (file, len) in [(LOG_FILE, manifest.log_bytes), (LINKS_FILE, manifest.links_bytes)] {
            let path = root.join(file);
            if fs::metadata(&path).map(|m| m.len() > len).unwrap_or(false) {
                storage.append_at(&path, len, b"")?;
            }
        }
    }
    Ok(())
}

fn initialize(storage: &dyn Storage, root: &Path) -> Result<()> {
    for dir in [OBJECTS_DIR, GROUPINGS_DIR, INDEX_DIR, RESOURCES_DIR] {
        storage.create_dir_all(&root.join(dir))?;
    }
    replace_file(
        storage,
        &root.join(MANIFEST_FILE),
        Manifest::new().to_file_string().as_bytes(),
    )?;
    Ok(())
}

impl Catalog {
    /// Opens the catalog at `path` for writing, creating an empty one when
    /// `create_if_missing` is set.
    pub fn open(path: impl AsRef<Path>, create_if_missing: bool) -> Result<Self> {
        Self::open_with(
            path,
            OpenOptions {
                create_if_missing,
                ..OpenOptions::default()
            },
        )
    }

    /// Opens a consistent read-only snapshot without taking the writer lock.
    pub fn open_read_only(path: impl AsRef<Path>) -> Result<Self> {
        Self::open_with(
            path,
            OpenOptions {
                read_only: true,
                ..OpenOptions::default()
            },
        )
    }

    pub fn open_with(path: impl AsRef<Path>, opts: OpenOptions) -> Result<Self> {
        let root = path.as_ref().to_path_buf();
        let storage: Arc<dyn Storage> = opts
            .storage
            .unwrap_or_else(|| Arc::new(FsStorage::default()));
        if opts.read_only {
            return Self::open_snapshot(root, storage);
        }

        if !root.exists() {
            if !opts.create_if_missing {
                return Err(Error::not_found("catalog", root.display()));
            }
            fs::create_dir_all(&root)?;
        }
        let lock = LockGuard::acquire(&root)?;
        if !root.join(MANIFEST_FILE).exists() {
            if !opts.create_if_missing {
                return Err(Error::not_found("catalog", root.display()));
            }
            initialize(storage.as_ref(), &root)?;
        }
        recover(storage.as_ref(), &root)?;
        let state = load_state(&Snapshot {
            root: &root,
            overlay: &BTreeMap::new(),
        })?;
        let mut catalog = Self::from_state(root, storage, Some(lock), state);
        if catalog.index_dirty {
            // a stale snapshot was rebuilt in memory; persist it
            let _ = catalog.flush_index();
        }
        Ok(catalog)
    }

    fn open_snapshot(root: PathBuf, storage: Arc<dyn Storage>) -> Result<Self> {
        let manifest_path = root.join(MANIFEST_FILE);
        let mut last_err = None;
        for _ in 0..50 {
            let before = fs::read(&manifest_path).ok();
            let overlay = match Journal::read(&root) {
                Ok(Some(j)) => j.overlay(&root)?,
                Ok(None) => BTreeMap::new(),
                Err(e) => return Err(Error::corrupt(format!("{JOURNAL_FILE}: {e}"))),
            };
            let result = load_state(&Snapshot {
                root: &root,
                overlay: &overlay,
            });
            let after = fs::read(&manifest_path).ok();
            let settled = before == after && Journal::read(&root).ok().flatten().is_none()
                || !overlay.is_empty();
            match result {
                Ok(state) if settled => {
                    let mut c = Self::from_state(root, storage, None, state);
                    c.index_dirty = false;
                    return Ok(c);
                }
                Ok(_) => {}
                Err(e @ Error::NotFound { .. }) => return Err(e),
                Err(e) => last_err = Some(e),
            }
            std::thread::sleep(Duration::from_millis(10));
        }
        Err(last_err.unwrap_or_else(|| Error::corrupt("catalog kept changing while reading")))
    }

    fn from_state(
        root: PathBuf,
        storage: Arc<dyn Storage>,
        lock: Option<LockGuard>,
        state: LoadedState,
    ) -> Self {
        let tokenizer = Tokenizer::new(&state.manifest.stopwords);
        let mut catalog = Self {
            root,
            storage,
            lock,
            manifest: state.manifest,
            objects: state.objects,
            links: state.links,
            log: state.log,
            resources: state.resources,
            index: InvertedIndex::new(),
            tokenizer,
            index_dirty: false,
            pending_recovery: false,
            actor: default_actor(),
            metrics: MetricRegistry::with_builtins(),
        };
        match state.index_file {
            Some(file)
                if file.generation == catalog.manifest.counters.events
                    && file.stopwords == catalog.manifest.stopwords =>
            {
                catalog.index = InvertedIndex::from_file(file);
            }
            _ => {
                catalog.rebuild_index_in_memory();
                catalog.index_dirty = true;
            }
        }
        catalog
    }

    /// Persists the index snapshot and releases the writer lock.
    pub fn close(mut self) -> Result<()> {
        self.flush_index()
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn is_writable(&self) -> bool {
        self.lock.is_some()
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn actor(&self) -> &str {
        &self.actor
    }

    /// Actor recorded on subsequent events.
    pub fn set_actor(&mut self, actor: impl Into<String>) -> Result<()> {
        let actor = actor.into();
        if actor.trim().is_empty() {
            return Err(Error::InvalidArgument("actor must not be empty".into()));
        }
        self.actor = actor;
        Ok(())
    }

    pub fn objects(&self) -> impl Iterator<Item = &Hypernode> {
        self.objects.values()
    }

    pub fn object_ids(&self) -> BTreeSet<ObjectId> {
        self.objects.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// Every violation across all objects and inter-object metadata, then
    /// the advisories.
    pub fn validate(&self) -> ValidationReport {
        let mut violations: Vec<Violation> =
            self.objects.values().flat_map(validate_hypernode).collect();
        violations.extend(validate_catalog_graph(&self.links, &self.object_ids()));
        ValidationReport {
            violations,
            advisories: graph_advisories(&self.links),
        }
    }

    pub fn links(&self) -> &InterLinks {
        &self.links
    }

    pub fn resources(&self) -> &BTreeMap<String, Resource> {
        &self.resources
    }

    pub fn thesaurus(&self, name: &str) -> Result<&Thesaurus> {
        self.resources
            .get(name)
            .map(|r| &r.thesaurus)
            .ok_or_else(|| Error::UnknownThesaurus(name.to_owned()))
    }

    pub fn index(&self) -> &InvertedIndex {
        &self.index
    }

    pub fn tokenizer(&self) -> &Tokenizer {
        &self.tokenizer
    }

    pub fn metrics(&self) -> &MetricRegistry {
        &self.metrics
    }

    pub fn metrics_mut(&mut self) -> &mut MetricRegistry {
        &mut self.metrics
    }

    pub(crate) fn log_records(&self) -> &[EventRecord] {
        &self.log
    }

    /// Raw data references: object → locators of its nodes.
    pub fn data_refs(&self) -> BTreeMap<ObjectId, Vec<String>> {
        self.objects
            .values()
            .map(|h| {
                let locs = h
                    .nodes
                    .values()
                    .filter_map(MetaNode::locator)
                    .map(str::to_owned)
                    .collect();
                (h.id.clone(), locs)
            })
            .collect()
    }

    pub fn object(&self, id: &ObjectId) -> Result<&Hypernode> {
        self.objects
            .get(id)
            .ok_or_else(|| Error::not_found("object", id))
    }

    /// Fetches a hypernode, optionally logging an `Access` event.
    pub fn get_object(&mut self, id: &ObjectId, record_access: bool) -> Result<Hypernode> {
        let h = self.object(id)?.clone();
        if record_access {
            let mut txn = Txn::default();
            txn.event(self.pending(Action::Access, Target::Object(id.clone()), Default::default()));
            self.apply(txn)?;
        }
        Ok(h)
    }

    /// Objects whose attributes satisfy every filter, ordered by id.
    pub fn list_objects(&self, filters: &[AttrFilter]) -> Vec<(ObjectId, Attributes)> {
        self.objects
            .values()
            .filter(|h| filters.iter().all(|f| f.matches(&h.attributes)))
            .map(|h| (h.id.clone(), h.attributes.clone()))
            .collect()
    }

    /// Stores a validated hypernode, inserting it or replacing the stored one.
    pub fn put_object(&mut self, h: Hypernode) -> Result<ObjectId> {
        if !is_file_token(h.id.as_str()) {
            return Err(Error::InvalidArgument(format!(
                "object id `{}` must be alphanumeric with `_`, `-` or `.`",
                h.id
            )));
        }
        let violations = validate_hypernode(&h);
        if !violations.is_empty() {
            return Err(Error::ValidationFailed(violations));
        }
        let action = if self.objects.contains_key(&h.id) {
            Action::Update
        } else {
            Action::Create
        };
        let agg = h.recount();
        let detail = [
            (detail::OP.to_owned(), "put".to_owned()),
            (detail::N_VERSIONS.to_owned(), agg.n_versions.to_string()),
            (detail::N_REPRESENTATIONS.to_owned(), agg.n_representations.to_string()),
        ]
        .into();
        let id = h.id.clone();
        let mut txn = Txn::default();
        txn.event(self.pending(action, Target::Object(id.clone()), detail));
        txn.object(h);
        self.apply(txn)?;
        Ok(id)
    }

    /// Resolves a full object id or an unambiguous prefix of one.
    pub fn resolve_object(&self, prefix: &str) -> Result<ObjectId> {
        let exact = ObjectId::new(prefix);
        if self.objects.contains_key(&exact) {
            return Ok(exact);
        }
        let matches: Vec<&ObjectId> = self
            .objects
            .range(exact.clone()..)
            .take_while(|(k, _)| k.as_str().starts_with(prefix))
            .map(|(k, _)| k)
            .collect();
        match matches.as_slice() {
            [one] => Ok((*one).clone()),
            [] => Err(Error::not_found("object", prefix)),
            many => Err(Error::Ambiguous {
                kind: "object",
                prefix: prefix.to_owned(),
                candidates: many.len(),
            }),
        }
    }

    /// Resolves a node id or unambiguous prefix within one object.
    pub fn resolve_node(&self, obj: &ObjectId, prefix: &str) -> Result<NodeId> {
        let h = self.object(obj)?;
        let exact = NodeId::new(prefix);
        if h.nodes.contains_key(&exact) {
            return Ok(exact);
        }
        let matches: Vec<&NodeId> = h
            .nodes
            .keys()
            .filter(|k| k.as_str().starts_with(prefix))
            .collect();
        match matches.as_slice() {
            [one] => Ok((*one).clone()),
            [] => Err(Error::not_found("node", prefix)),
            many => Err(Error::Ambiguous {
                kind: "node",
                prefix: prefix.to_owned(),
                candidates: many.len(),
            }),
        }
    }

    pub(crate) fn pending(
        &self,
        action: Action,
        target: Target,
        detail: crate::auditlog::Detail,
    ) -> PendingEvent {
        PendingEvent {
            actor: self.actor.clone(),
            action,
            target,
            detail,
        }
    }

    fn ensure_writable(&mut self) -> Result<()> {
        if self.lock.is_none() {
            return Err(Error::ReadOnly);
        }
        if self.pending_recovery {
            recover(self.storage.as_ref(), &self.root)?;
            self.pending_recovery = false;
        }
        Ok(())
    }

    fn commit(&mut self, journal: Journal) -> Result<()> {
        match journal.commit(self.storage.as_ref(), &self.root) {
            Ok(()) => Ok(()),
            Err(CommitError::NotCommitted(e)) => Err(e.into()),
            Err(CommitError::Incomplete(_)) => {
                // durable already; the next operation or open finishes it
                self.pending_recovery = true;
                Ok(())
            }
        }
    }

    /// Commits a transaction and mirrors it in memory. Returns the sequence
    /// numbers assigned to its events.
    pub(crate) fn apply(&mut self, txn: Txn) -> Result<Vec<u64>> {
        self.ensure_writable()?;
        let now = Utc::now();
        let mut manifest = self.manifest.clone();

        let records: Vec<EventRecord> = txn
            .events
            .into_iter()
            .enumerate()
            .map(|(i, e)| EventRecord {
                seq: manifest.counters.events + 1 + i as u64,
                at: now,
                actor: e.actor,
                action: e.action,
                target: e.target,
                detail: e.detail,
            })
            .collect();
        manifest.counters.events += records.len() as u64;

        let new_objects: BTreeSet<&ObjectId> = txn
            .objects
            .iter()
            .map(|h| &h.id)
            .filter(|id| !self.objects.contains_key(*id))
            .collect();
        manifest.counters.objects += new_objects.len() as u64;
        let mut new_sim = BTreeSet::new();
        let mut new_par = BTreeSet::new();
        for l in &txn.links {
            match l {
                LinkRecord::Similarity(s) if !self.links.similarity.contains_key(&s.id) => {
                    new_sim.insert(&s.id);
                }
                LinkRecord::Parenthood(p) if !self.links.parenthood.contains_key(&p.id) => {
                    new_par.insert(&p.id);
                }
                _ => {}
            }
        }
        manifest.counters.similarity_links += new_sim.len() as u64;
        manifest.counters.parenthood_links += new_par.len() as u64;
        manifest.counters.groupings += txn
            .groupings
            .iter()
            .map(Grouping::key)
            .filter(|k| !self.links.groupings.contains_key(k))
            .collect::<BTreeSet<_>>()
            .len() as u64;
        manifest.counters.resources += txn
            .resources
            .iter()
            .filter(|(n, _)| !self.resources.contains_key(n))
            .count() as u64;
        if let Some(sw) = &txn.stopwords {
            manifest.stopwords = sw.clone();
        }

        let mut ops = Vec::new();
        let link_text = to_lines(&txn.links)?;
        if !link_text.is_empty() {
            ops.push(JournalOp::Append {
                path: LINKS_FILE.into(),
                offset: manifest.links_bytes,
                content: link_text.clone(),
            });
            manifest.links_bytes += link_text.len() as u64;
        }
        let log_text = to_lines(&records)?;
        if !log_text.is_empty() {
            ops.push(JournalOp::Append {
                path: LOG_FILE.into(),
                offset: manifest.log_bytes,
                content: log_text.clone(),
            });
            manifest.log_bytes += log_text.len() as u64;
        }
        for h in &txn.objects {
            ops.push(JournalOp::Replace {
                path: object_path(&h.id),
                content: pretty(h)?,
            });
        }
        for g in &txn.groupings {
            ops.push(JournalOp::Replace {
                path: grouping_path(&g.key()),
                content: pretty(g)?,
            });
        }
        for (name, r) in &txn.resources {
            ops.push(JournalOp::Replace {
                path: resource_path(name),
                content: r.text.clone(),
            });
        }
        ops.push(JournalOp::Replace {
            path: MANIFEST_FILE.into(),
            content: manifest.to_file_string(),
        });

        self.commit(Journal { ops })?;

        let seqs = records.iter().map(|r| r.seq).collect();
        self.manifest = manifest;
        self.log.extend(records);
        for h in txn.objects {
            self.objects.insert(h.id.clone(), h);
        }
        for l in txn.links {
            match l {
                LinkRecord::Similarity(s) => {
                    self.links.similarity.insert(s.id.clone(), s);
                }
                LinkRecord::Parenthood(p) => {
                    self.links.parenthood.insert(p.id.clone(), p);
                }
            }
        }
        for g in txn.groupings {
            self.links.groupings.insert(g.key(), g);
        }
        for (name, r) in txn.resources {
            self.resources.insert(name, r);
        }
        if txn.stopwords.is_some() {
            self.tokenizer = Tokenizer::new(&self.manifest.stopwords);
            self.rebuild_index_in_memory();
        } else {
            for id in &txn.reindex {
                self.reindex_in_memory(id);
            }
        }
        self.index_dirty = true;
        Ok(seqs)
    }

    pub(crate) fn mark_index_dirty(&mut self) {
        self.index_dirty = true;
    }

    pub(crate) fn reindex_in_memory(&mut self, id: &ObjectId) {
        match self.objects.get(id) {
            Some(h) => {
                let entries = index::object_entries(h, &self.tokenizer);
                self.index.replace_object(id, entries);
            }
            None => {
                self.index.remove_object(id);
            }
        }
    }

    pub(crate) fn rebuild_index_in_memory(&mut self) {
        self.index = index::build_index(self.objects.values(), &self.tokenizer);
    }

    /// Writes the index snapshot if it changed since the last flush.
    pub fn flush_index(&mut self) -> Result<()> {
        if !self.index_dirty || self.lock.is_none() {
            return Ok(());
        }
        let mut file = self.index.to_file(self.manifest.counters.events);
        file.stopwords = self.manifest.stopwords.clone();
        let body = serde_json::to_vec(&file).map_err(io::Error::other)?;
        self.storage.create_dir_all(&self.root.join(INDEX_DIR))?;
        replace_file(self.storage.as_ref(), &self.root.join(INDEX_FILE), &body)?;
        self.index_dirty = false;
        Ok(())
    }

    /// Replaces the stopword list and rebuilds the index with it.
    pub fn set_stopwords(&mut self, stopwords: Vec<String>) -> Result<()> {
        let normalized: Vec<String> = Tokenizer::new(&stopwords).stopwords().iter().cloned().collect();
        if normalized == self.manifest.stopwords {
            return Ok(());
        }
        self.apply(Txn {
            stopwords: Some(normalized),
            ..Txn::default()
        })?;
        Ok(())
    }
}

impl Drop for Catalog {
    fn drop(&mut self) {
        let _ = self.flush_index();
    }
}
