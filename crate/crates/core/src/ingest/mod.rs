//! File profiling, summaries and ingestion.
//!
//! Raw data stays where it is: an ingested object's root version points at
//! the file's absolute path. CSV, JSON and XML files get a schema summary,
//! text files a word cloud, anything else no summary.

mod profile;
mod schema;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::auditlog::{detail, Detail};
use crate::error::{Error, Result};
use crate::index::Tokenizer;
use crate::intra::{add_tags, build_object, TransformationSpec};
use crate::model::{
    attr, AttrValue, Attributes, NodeId, ObjectId, Summary, TagSource, TermFrequency,
};
use crate::store::Catalog;

pub use profile::{profile_file, sniff, DetectedFormat, FileProfile, FormatClass};
pub use schema::{infer_scalar, schema_from_bytes};

/// Word-cloud size used at ingestion.
pub const WORD_CLOUD_TERMS: usize = 20;

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Unreadable {
        path: path.to_path_buf(),
        source,
    })
}

/// Schema summary of a CSV, JSON or XML file.
pub fn extract_schema(path: &Path, format: DetectedFormat) -> Result<Summary> {
    if format.class() == FormatClass::Unstructured {
        return Err(Error::InvalidArgument(format!(
            "schema extraction needs csv, json or xml, not {format}"
        )));
    }
    let bytes = read(path)?;
    schema_from_bytes(&bytes, format, &path.display().to_string())
}

/// The `k` most frequent terms, ties in lexicographic order.
pub fn top_terms(text: &str, k: usize, tokenizer: &Tokenizer) -> Vec<TermFrequency> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for t in tokenizer.tokenize(text) {
        *counts.entry(t).or_default() += 1;
    }
    let mut terms: Vec<TermFrequency> = counts
        .into_iter()
        .map(|(term, frequency)| TermFrequency { term, frequency })
        .collect();
    // stable sort keeps the lexicographic order among equal counts
    terms.sort_by_key(|t| std::cmp::Reverse(t.frequency));
    terms.truncate(k);
    terms
}

/// Word-cloud summary of a UTF-8 text file.
pub fn word_cloud(path: &Path, k: usize) -> Result<Summary> {
    word_cloud_with(path, k, &Tokenizer::default())
}

pub fn word_cloud_with(path: &Path, k: usize, tokenizer: &Tokenizer) -> Result<Summary> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let bytes = read(path)?;
    let text = String::from_utf8(bytes).map_err(|_| Error::NotText(path.to_path_buf()))?;
    Ok(Summary::WordCloud {
        terms: top_terms(&text, k, tokenizer),
    })
}

/// The summary ingestion attaches for a format, if any. Files that do not
/// parse as their detected format get no summary.
pub fn default_summary(path: &Path, format: DetectedFormat, tokenizer: &Tokenizer) -> Option<Summary> {
    match format.class() {
        FormatClass::Structured | FormatClass::SemiStructured => extract_schema(path, format).ok(),
        FormatClass::Unstructured if format == DetectedFormat::Text => {
            word_cloud_with(path, WORD_CLOUD_TERMS, tokenizer).ok()
        }
        FormatClass::Unstructured => None,
    }
}

impl Catalog {
    /// Profiles `path` and creates an object for it in a single operation:
    /// properties, summary and tags are stored and indexed together and one
    /// `Create` event is logged. Ingesting a file twice yields two objects.
    pub fn ingest_file(
        &mut self,
        path: &Path,
        origin: &str,
        tags: &[String],
    ) -> Result<ObjectId> {
        if origin.trim().is_empty() {
            return Err(Error::MissingProperty(attr::ORIGIN.into()));
        }
        let profile = profile_file(path)?;
        let locator = profile.path.display().to_string();
        let properties = Attributes::from([
            (attr::TITLE.into(), AttrValue::text(&profile.title)),
            (attr::ORIGIN.into(), AttrValue::text(origin)),
            (
                attr::INGEST_FORMAT.into(),
                AttrValue::text(profile.detected_format.as_str()),
            ),
            (
                attr::FORMAT_CLASS.into(),
                AttrValue::text(profile.format_class.as_str()),
            ),
            (attr::ACCESS_PATH.into(), AttrValue::text(&locator)),
            (attr::MODIFIED_AT.into(), AttrValue::Timestamp(profile.modified_at)),
            (
                attr::SIZE_BYTES.into(),
                AttrValue::Integer(profile.size_bytes as i64),
            ),
        ]);
        let mut h = build_object(&locator, properties)?;
        h.summary = default_summary(&profile.path, profile.detected_format, self.tokenizer());
        add_tags(&mut h, tags, TagSource::Manual);
        let extra = Detail::from([
            (detail::OP.into(), "ingest".into()),
            ("path".into(), locator),
        ]);
        self.commit_new_object(h, extra)
    }

    /// Extracts the schema of `parent`'s data as an on-demand representation
    /// under it. The schema also becomes the object's summary.
    pub fn represent_schema(
        &mut self,
        obj: &ObjectId,
        parent: &NodeId,
        description: Option<&str>,
    ) -> Result<NodeId> {
        let node = self
            .object(obj)?
            .nodes
            .get(parent)
            .ok_or_else(|| Error::not_found("node", parent))?;
        let format: DetectedFormat = node
            .format()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| Error::InvalidArgument(format!("node {parent} has no data format")))?;
        let locator = node
            .locator()
            .ok_or_else(|| Error::InvalidArgument(format!("node {parent} has no stored data")))?
            .to_owned();
        let summary = extract_schema(Path::new(&locator), format)?;
        let spec = TransformationSpec::new(description.unwrap_or("extract schema"))
            .script(format!("extract-schema {format}"));
        let attrs = Attributes::from([(attr::FORMAT.into(), AttrValue::text(SCHEMA_FORMAT))]);
        self.add_representation_with_summary(obj, parent, spec, attrs, Some(summary))
    }
}

/// Format label of schema representations.
pub const SCHEMA_FORMAT: &str = "schema";
