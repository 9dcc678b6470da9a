//! Global inverted index from normalized terms to `(object, node)` postings.
//!
//! The index is kept fully in memory and persisted as one JSON document.
//! Object-level metadata (title, description, tags, word cloud) is posted
//! without a node; content read from a textual node is posted with that node.

mod search;
mod tokenize;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;

use serde::{Deserialize, Serialize};

use crate::auditlog::{Action, Target};
use crate::error::Result;
use crate::model::{Hypernode, NodeId, ObjectId, Summary};
use crate::store::{Catalog, Txn};

pub use search::{search_index, SearchHit, SearchMode};
pub use tokenize::{tokenize, Tokenizer};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Posting {
    pub object: ObjectId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeId>,
}

/// Everything one object contributes to the index.
pub type ObjectEntries = BTreeSet<(String, Option<NodeId>)>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IndexStats {
    pub objects: usize,
    pub terms: usize,
    pub postings: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InvertedIndex {
    terms: BTreeMap<String, BTreeSet<Posting>>,
    by_object: BTreeMap<ObjectId, ObjectEntries>,
}

/// On-disk form of the index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexFile {
    /// Sequence number of the last logged event reflected in this index.
    pub generation: u64,
    pub terms: BTreeMap<String, BTreeSet<Posting>>,
    pub doc_count: BTreeMap<String, usize>,
    /// Stopwords in force when the index was built.
    #[serde(default)]
    pub stopwords: Vec<String>,
}

impl InvertedIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replaces every posting of `obj` and returns the previous entries.
    pub fn replace_object(&mut self, obj: &ObjectId, entries: ObjectEntries) -> ObjectEntries {
        let old = self.remove_object(obj);
        for (term, node) in &entries {
            self.terms.entry(term.clone()).or_default().insert(Posting {
                object: obj.clone(),
                node: node.clone(),
            });
        }
        if !entries.is_empty() {
            self.by_object.insert(obj.clone(), entries);
        }
        old
    }

    pub fn remove_object(&mut self, obj: &ObjectId) -> ObjectEntries {
        let old = self.by_object.remove(obj).unwrap_or_default();
        for (term, node) in &old {
            if let Some(postings) = self.terms.get_mut(term) {
                postings.remove(&Posting {
                    object: obj.clone(),
                    node: node.clone(),
                });
                if postings.is_empty() {
                    self.terms.remove(term);
                }
            }
        }
        old
    }

    pub fn postings(&self, term: &str) -> Option<&BTreeSet<Posting>> {
        self.terms.get(term)
    }

    /// Distinct objects carrying `term`.
    pub fn objects_for(&self, term: &str) -> BTreeSet<&ObjectId> {
        self.terms
            .get(term)
            .map(|p| p.iter().map(|p| &p.object).collect())
            .unwrap_or_default()
    }

    pub fn doc_count(&self, term: &str) -> usize {
        self.objects_for(term).len()
    }

    pub fn entries_for(&self, obj: &ObjectId) -> Option<&ObjectEntries> {
        self.by_object.get(obj)
    }

    pub fn terms(&self) -> &BTreeMap<String, BTreeSet<Posting>> {
        &self.terms
    }

    pub fn stats(&self) -> IndexStats {
        IndexStats {
            objects: self.by_object.len(),
            terms: self.terms.len(),
            postings: self.terms.values().map(BTreeSet::len).sum(),
        }
    }

    pub fn to_file(&self, generation: u64) -> IndexFile {
        IndexFile {
            generation,
            terms: self.terms.clone(),
            doc_count: self
                .terms
                .keys()
                .map(|t| (t.clone(), self.doc_count(t)))
                .collect(),
            stopwords: Vec::new(),
        }
    }

    pub fn from_file(file: IndexFile) -> Self {
        let mut by_object: BTreeMap<ObjectId, ObjectEntries> = BTreeMap::new();
        for (term, postings) in &file.terms {
            for p in postings {
                by_object
                    .entry(p.object.clone())
                    .or_default()
                    .insert((term.clone(), p.node.clone()));
            }
        }
        Self {
            terms: file.terms,
            by_object,
        }
    }
}

/// Terms contributed by `h`: title, description and tags at object level,
/// word-cloud terms, and the content of nodes with format `text`.
pub fn object_entries(h: &Hypernode, tokenizer: &Tokenizer) -> ObjectEntries {
    let mut out = ObjectEntries::new();
    let mut object_text = |text: &str| {
        for t in tokenizer.tokenize(text) {
            out.insert((t, None));
        }
    };
    object_text(h.title());
    if let Some(d) = &h.description {
        object_text(d);
    }
    for tag in h.tags.keys() {
        object_text(tag);
    }
    if let Some(Summary::WordCloud { terms }) = &h.summary {
        for t in terms {
            object_text(&t.term);
        }
    }
    for node in h.nodes.values() {
        if node.format() != Some(TEXT_FORMAT) {
            continue;
        }
        let Some(loc) = node.locator() else {
            continue;
        };
        // unreadable content simply contributes nothing
        if let Ok(bytes) = fs::read(loc) {
            for t in tokenizer.tokenize(&String::from_utf8_lossy(&bytes)) {
                out.insert((t, Some(node.id.clone())));
            }
        }
    }
    out
}

/// Node format whose content is indexed.
pub const TEXT_FORMAT: &str = "text";

pub fn build_index<'a>(
    objects: impl IntoIterator<Item = &'a Hypernode>,
    tokenizer: &Tokenizer,
) -> InvertedIndex {
    let mut idx = InvertedIndex::new();
    for h in objects {
        idx.replace_object(&h.id, object_entries(h, tokenizer));
    }
    idx
}

impl Catalog {
    /// Re-indexes one object and returns the number of distinct terms it now has.
    pub fn index_object(&mut self, obj: &ObjectId) -> Result<usize> {
        self.object(obj)?;
        self.reindex_in_memory(obj);
        Ok(self
            .index()
            .entries_for(obj)
            .map(|e| e.iter().map(|(t, _)| t).collect::<BTreeSet<_>>().len())
            .unwrap_or(0))
    }

    /// Keyword search. `expand_with` names a loaded thesaurus. With
    /// `record_access`, one `Access` event is logged per returned object.
    pub fn search(
        &mut self,
        query: &str,
        mode: SearchMode,
        expand_with: Option<&str>,
        record_access: bool,
    ) -> Result<Vec<SearchHit>> {
        let thesaurus = expand_with.map(|n| self.thesaurus(n)).transpose()?;
        let hits = search_index(self.index(), self.tokenizer(), query, mode, thesaurus)?;
        if record_access && !hits.is_empty() {
            let mut txn = Txn::default();
            for h in &hits {
                txn.event(self.pending(
                    Action::Access,
                    Target::Object(h.object.clone()),
                    [("query".to_owned(), query.to_owned())].into(),
                ));
            }
            self.apply(txn)?;
        }
        Ok(hits)
    }

    /// Rebuilds the index from every stored object.
    pub fn rebuild_index(&mut self) -> IndexStats {
        self.rebuild_index_in_memory();
        self.mark_index_dirty();
        self.index().stats()
    }
}
