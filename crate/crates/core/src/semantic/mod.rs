//! Tags, descriptions, tag groupings and thesaurus resources.
//!
//! A thesaurus file holds one synonym class per line (comma-separated
//! terms) and optional `narrower > broader` lines. `#` starts a comment.

mod thesaurus;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use chrono::Utc;

use crate::auditlog::{detail, Action, Detail, Target};
use crate::error::{Error, Result};
use crate::model::{
    attr, normalize_tag, AttrValue, Grouping, GroupingBasis, ObjectId, Summary, TagSource,
};
use crate::store::{Catalog, Resource, Txn};

pub use thesaurus::Thesaurus;

/// Number of word-cloud terms offered as derived tags.
pub const PROPOSED_TAGS: usize = 5;

/// Normalized, de-duplicated tag labels; blank labels are dropped.
pub fn normalize_tags<I, S>(tags: I) -> BTreeSet<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    tags.into_iter()
        .map(|t| normalize_tag(t.as_ref()))
        .filter(|t| !t.is_empty())
        .collect()
}

impl Catalog {
    /// Merges `tags` into the object's tag set and returns the full set.
    /// Tags already present keep their original source.
    pub fn tag_object<I, S>(
        &mut self,
        obj: &ObjectId,
        tags: I,
        source: TagSource,
    ) -> Result<BTreeSet<String>>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let tags = normalize_tags(tags);
        if tags.is_empty() {
            return Err(Error::EmptyTagSet);
        }
        let mut h = self.object(obj)?.clone();
        for t in &tags {
            h.tags.entry(t.clone()).or_insert(source);
        }
        let all = h.tags.keys().cloned().collect();
        let detail = Detail::from([
            (detail::OP.into(), "tag".into()),
            ("tags".into(), tags.into_iter().collect::<Vec<_>>().join(",")),
            ("source".into(), source.as_str().into()),
        ]);
        let mut txn = Txn::default();
        txn.event(self.pending(Action::Tag, Target::Object(obj.clone()), detail));
        txn.object(h);
        self.apply(txn)?;
        Ok(all)
    }

    /// Sets the description; every value ever set is kept, in order, in the
    /// `description_history` attribute.
    pub fn describe_object(&mut self, obj: &ObjectId, text: &str) -> Result<()> {
        let mut h = self.object(obj)?.clone();
        let mut history = match h.attributes.remove(attr::DESCRIPTION_HISTORY) {
            Some(AttrValue::TextList(items)) => items,
            _ => Vec::new(),
        };
        history.push(text.to_owned());
        h.attributes
            .insert(attr::DESCRIPTION_HISTORY.into(), AttrValue::TextList(history));
        h.description = Some(text.to_owned());
        let detail = Detail::from([(detail::OP.into(), "describe".into())]);
        let mut txn = Txn::default();
        txn.event(self.pending(Action::Tag, Target::Object(obj.clone()), detail));
        txn.object(h);
        self.apply(txn)?;
        Ok(())
    }

    /// One collection per tag. With a thesaurus, synonymous tags share one
    /// collection keyed by their canonical term. Collections may overlap.
    pub fn group_by_tags(&mut self, thesaurus: Option<&str>) -> Result<Grouping> {
        let th = thesaurus.map(|n| self.thesaurus(n)).transpose()?;
        let mut collections: BTreeMap<String, BTreeSet<ObjectId>> = BTreeMap::new();
        for h in self.objects() {
            for tag in h.tags.keys() {
                let key = match th {
                    Some(th) => th.canonical(tag),
                    None => tag.clone(),
                };
                collections.entry(key).or_default().insert(h.id.clone());
            }
        }
        let grouping = Grouping {
            parameter: "tags".into(),
            basis: GroupingBasis::Tags,
            thesaurus: thesaurus.map(str::to_owned),
            collections,
            computed_at: Utc::now(),
        };
        self.store_grouping(grouping.clone(), "group-by-tags")?;
        Ok(grouping)
    }

    pub fn expand_terms<I, S>(&self, terms: I, thesaurus: &str) -> Result<BTreeSet<String>>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let th = self.thesaurus(thesaurus)?;
        let terms: Vec<S> = terms.into_iter().collect();
        Ok(th.expand(terms.iter().map(AsRef::as_ref)))
    }

    pub fn canonical_term(&self, term: &str, thesaurus: &str) -> Result<String> {
        Ok(self.thesaurus(thesaurus)?.canonical(term))
    }

    /// Loads a thesaurus file; the resource is named after the file stem.
    pub fn load_resource(&mut self, path: &Path) -> Result<String> {
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_owned();
        let text = fs::read_to_string(path).map_err(|source| Error::Unreadable {
            path: path.to_path_buf(),
            source,
        })?;
        self.load_resource_text(&name, &text)
    }

    pub fn load_resource_text(&mut self, name: &str, text: &str) -> Result<String> {
        if !crate::store::is_file_token(name) {
            return Err(Error::InvalidArgument(format!(
                "resource name `{name}` must be alphanumeric with `_`, `-` or `.`"
            )));
        }
        if self.resources().contains_key(name) {
            return Err(Error::DuplicateName(name.to_owned()));
        }
        let thesaurus = Thesaurus::parse(name, text)?;
        let detail = Detail::from([
            (detail::OP.into(), "load-resource".into()),
            ("classes".into(), thesaurus.classes().len().to_string()),
        ]);
        let mut txn = Txn::default();
        txn.event(self.pending(Action::Tag, Target::Query(name.to_owned()), detail));
        txn.resources.push((
            name.to_owned(),
            Resource {
                thesaurus,
                text: text.to_owned(),
            },
        ));
        self.apply(txn)?;
        Ok(name.to_owned())
    }

    /// Top word-cloud terms of the object that are not already tags.
    pub fn proposed_tags(&self, obj: &ObjectId) -> Result<Vec<String>> {
        let h = self.object(obj)?;
        Ok(match &h.summary {
            Some(Summary::WordCloud { terms }) => terms
                .iter()
                .map(|t| normalize_tag(&t.term))
                .filter(|t| !t.is_empty() && !h.tags.contains_key(t))
                .take(PROPOSED_TAGS)
                .collect(),
            _ => Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_dedups() {
        assert_eq!(
            normalize_tags(["Sales", "sales ", "  "]),
            BTreeSet::from(["sales".to_string()])
        );
    }
}
