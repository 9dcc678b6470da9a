use std::collections::{BTreeMap, BTreeSet};
use std::io;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{
    grouping_path, object_path, pretty, resource_path, to_lines, Catalog, Counters, Journal,
    JournalOp, LinkRecord, Manifest, Resource, LINKS_FILE, LOG_FILE, MANIFEST_FILE,
};
use crate::auditlog::EventRecord;
use crate::error::{Error, Result};
use crate::index::Posting;
use crate::model::{
    validate_catalog_graph, validate_hypernode, Grouping, Hypernode, ObjectId, ParenthoodLink,
    SimilarityLink,
};
use crate::semantic::Thesaurus;

/// The full logical content of a catalog as one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogExport {
    pub format: String,
    pub version: u32,
    pub created_at: DateTime<Utc>,
    pub counters: Counters,
    #[serde(default)]
    pub stopwords: Vec<String>,
    pub objects: Vec<Hypernode>,
    pub similarity: Vec<SimilarityLink>,
    pub parenthood: Vec<ParenthoodLink>,
    pub groupings: Vec<Grouping>,
    pub resources: BTreeMap<String, String>,
    pub events: Vec<EventRecord>,
    pub index: BTreeMap<String, BTreeSet<Posting>>,
}

impl Catalog {
    pub fn export(&self) -> CatalogExport {
        CatalogExport {
            format: self.manifest.format.clone(),
            version: self.manifest.version,
            created_at: self.manifest.created_at,
            counters: self.manifest.counters,
            stopwords: self.manifest.stopwords.clone(),
            objects: self.objects.values().cloned().collect(),
            similarity: self.links.similarity.values().cloned().collect(),
            parenthood: self.links.parenthood.values().cloned().collect(),
            groupings: self.links.groupings.values().cloned().collect(),
            resources: self
                .resources
                .iter()
                .map(|(n, r)| (n.clone(), r.text.clone()))
                .collect(),
            events: self.log.clone(),
            index: self.index.terms().clone(),
        }
    }

    /// Loads an export into this catalog, which must be empty. Events keep
    /// their original sequence numbers; the index is rebuilt.
    pub fn import(&mut self, export: CatalogExport) -> Result<()> {
        self.ensure_writable()?;
        if !self.objects.is_empty() || !self.log.is_empty() || !self.resources.is_empty() {
            return Err(Error::InvalidArgument(
                "import requires an empty catalog".into(),
            ));
        }

        let mut violations = Vec::new();
        let mut ids = BTreeSet::new();
        for h in &export.objects {
            if !super::is_file_token(h.id.as_str()) || !ids.insert(h.id.clone()) {
                return Err(Error::InvalidArgument(format!("bad or duplicate object id `{}`", h.id)));
            }
            violations.extend(validate_hypernode(h));
        }
        let mut links = crate::model::InterLinks::default();
        for l in &export.similarity {
            links.similarity.insert(l.id.clone(), l.clone());
        }
        for l in &export.parenthood {
            links.parenthood.insert(l.id.clone(), l.clone());
        }
        for g in &export.groupings {
            links.groupings.insert(g.key(), g.clone());
        }
        violations.extend(validate_catalog_graph(&links, &ids));
        if !violations.is_empty() {
            return Err(Error::ValidationFailed(violations));
        }
        for (i, e) in export.events.iter().enumerate() {
            if e.seq != i as u64 + 1 {
                return Err(Error::InvalidArgument(format!(
                    "event {} has seq {}; expected {}",
                    i + 1,
                    e.seq,
                    i + 1
                )));
            }
        }
        let mut resources = BTreeMap::new();
        for (name, text) in &export.resources {
            if !super::is_file_token(name) {
                return Err(Error::InvalidArgument(format!("bad resource name `{name}`")));
            }
            let thesaurus = Thesaurus::parse(name, text)?;
            resources.insert(
                name.clone(),
                Resource {
                    thesaurus,
                    text: text.clone(),
                },
            );
        }

        let records: Vec<LinkRecord> = export
            .similarity
            .iter()
            .cloned()
            .map(LinkRecord::Similarity)
            .chain(export.parenthood.iter().cloned().map(LinkRecord::Parenthood))
            .collect();
        let link_text = to_lines(&records)?;
        let log_text = to_lines(&export.events)?;
        let manifest = Manifest {
            format: self.manifest.format.clone(),
            version: self.manifest.version,
            created_at: export.created_at,
            counters: Counters {
                objects: export.objects.len() as u64,
                similarity_links: links.similarity.len() as u64,
                parenthood_links: links.parenthood.len() as u64,
                groupings: links.groupings.len() as u64,
                resources: resources.len() as u64,
                events: export.events.len() as u64,
            },
            log_bytes: log_text.len() as u64,
            links_bytes: link_text.len() as u64,
            stopwords: crate::index::Tokenizer::new(&export.stopwords)
                .stopwords()
                .iter()
                .cloned()
                .collect(),
        };

        let mut ops = vec![
            JournalOp::Append {
                path: LINKS_FILE.into(),
                offset: 0,
                content: link_text,
            },
            JournalOp::Append {
                path: LOG_FILE.into(),
                offset: 0,
                content: log_text,
            },
        ];
        for h in &export.objects {
            ops.push(JournalOp::Replace {
                path: object_path(&h.id),
                content: pretty(h)?,
            });
        }
        for g in links.groupings.values() {
            ops.push(JournalOp::Replace {
                path: grouping_path(&g.key()),
                content: pretty(g)?,
            });
        }
        for (name, r) in &resources {
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

        self.tokenizer = crate::index::Tokenizer::new(&manifest.stopwords);
        self.manifest = manifest;
        self.objects = export
            .objects
            .into_iter()
            .map(|h| (h.id.clone(), h))
            .collect::<BTreeMap<ObjectId, Hypernode>>();
        self.links = links;
        self.log = export.events;
        self.resources = resources;
        self.rebuild_index_in_memory();
        self.index_dirty = true;
        Ok(())
    }
}

impl CatalogExport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self).map_err(io::Error::other)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::Parse(
                crate::ParseError::new("export", e.to_string())
                    .at_line(e.line() as u64, e.column() as u64),
            )
        })
    }
}
