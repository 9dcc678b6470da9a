//! Representations and versions inside one hypernode.
//!
//! Transformations derive representation nodes from any node; updates derive
//! version nodes from versions only. Every operation re-validates the tree
//! and logs exactly one event.

use std::fmt;
use std::str::FromStr;

use chrono::Utc;
use serde::{Deserialize, Serialize};

use crate::auditlog::{detail, Action, Detail, Target};
use crate::error::{Error, Result};
use crate::ingest::DetectedFormat;
use crate::model::{
    attr, validate_hypernode, AttrValue, Attributes, Content, EdgeKind, Hypernode, MetaEdge,
    MetaNode, NodeId, NodeKind, ObjectId, Summary, TagSource,
};
use crate::store::{Catalog, Txn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    #[default]
    NewVersion,
    OverwriteInPlace,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::NewVersion => "new-version",
            Strategy::OverwriteInPlace => "overwrite-in-place",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "new-version" => Ok(Strategy::NewVersion),
            "overwrite-in-place" => Ok(Strategy::OverwriteInPlace),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

/// How a representation was produced.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TransformationSpec {
    pub description: String,
    pub script: Option<String>,
    /// Empty means the catalog's current actor.
    pub actor: String,
    pub produces_locator: Option<String>,
}

impl TransformationSpec {
    pub fn new(description: impl Into<String>) -> Self {
        Self {
            description: description.into(),
            ..Self::default()
        }
    }

    pub fn locator(mut self, locator: impl Into<String>) -> Self {
        self.produces_locator = Some(locator.into());
        self
    }

    pub fn script(mut self, script: impl Into<String>) -> Self {
        self.script = Some(script.into());
        self
    }
}

/// How a version was produced.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UpdateSpec {
    pub description: String,
    /// Empty means the catalog's current actor.
    pub actor: String,
    pub strategy: Strategy,
    pub produces_locator: String,
}

impl UpdateSpec {
    pub fn new(description: impl Into<String>, locator: impl Into<String>) -> Self {
        Self {
            description: description.into(),
            produces_locator: locator.into(),
            ..Self::default()
        }
    }

    pub fn in_place(mut self) -> Self {
        self.strategy = Strategy::OverwriteInPlace;
        self
    }
}

/// One line of a tree listing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEntry {
    pub depth: usize,
    pub node: MetaNode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge: Option<MetaEdge>,
}

/// Preorder listing of a hypernode's tree, root first, children by creation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeView {
    pub object: ObjectId,
    pub entries: Vec<TreeEntry>,
}

impl TreeView {
    pub fn node_count(&self) -> usize {
        self.entries.len()
    }

    pub fn edge_count(&self) -> usize {
        self.entries.iter().filter(|e| e.edge.is_some()).count()
    }
}

const REQUIRED: [&str; 3] = [attr::TITLE, attr::ORIGIN, attr::INGEST_FORMAT];

/// Builds a fresh hypernode whose root version holds `raw_locator`.
///
/// A `size_bytes` property moves onto the root node so the size aggregate
/// covers it; the root's `format` is the ingest format.
pub(crate) fn build_object(raw_locator: &str, mut properties: Attributes) -> Result<Hypernode> {
    for label in REQUIRED {
        match properties.get(label) {
            Some(v) if !v.to_string().trim().is_empty() => {}
            _ => return Err(Error::MissingProperty(label.into())),
        }
    }
    let format = properties[attr::INGEST_FORMAT].to_string().to_lowercase();
    if !properties.contains_key(attr::FORMAT_CLASS) {
        if let Ok(f) = format.parse::<DetectedFormat>() {
            properties.insert(attr::FORMAT_CLASS.into(), AttrValue::text(f.class().as_str()));
        }
    }
    let mut node_attrs = Attributes::from([(attr::FORMAT.into(), AttrValue::text(format))]);
    if let Some(size) = properties.remove(attr::SIZE_BYTES) {
        node_attrs.insert(attr::SIZE_BYTES.into(), size);
    }
    let root = MetaNode::new(
        NodeKind::Version,
        Some(Content::Locator(raw_locator.to_owned())),
        node_attrs,
    );
    Ok(Hypernode::new(ObjectId::generate(), root, properties))
}

fn validated(h: Hypernode) -> Result<Hypernode> {
    let violations = validate_hypernode(&h);
    if violations.is_empty() {
        Ok(h)
    } else {
        Err(Error::ValidationFailed(violations))
    }
}

fn require_description(description: &str) -> Result<()> {
    if description.trim().is_empty() {
        Err(Error::InvalidArgument("description must not be empty".into()))
    } else {
        Ok(())
    }
}

impl Catalog {
    /// Creates an object whose root version references `raw_locator`.
    /// `properties` must include `title`, `origin` and `ingest_format`.
    pub fn create_object(&mut self, raw_locator: &str, properties: Attributes) -> Result<ObjectId> {
        let h = build_object(raw_locator, properties)?;
        self.commit_new_object(h, Detail::new())
    }

    pub(crate) fn commit_new_object(&mut self, h: Hypernode, mut extra: Detail) -> Result<ObjectId> {
        let h = validated(h)?;
        let agg = h.recount();
        extra.insert(detail::N_VERSIONS.into(), agg.n_versions.to_string());
        extra.insert(
            detail::N_REPRESENTATIONS.into(),
            agg.n_representations.to_string(),
        );
        if !h.tags.is_empty() {
            let tags: Vec<&str> = h.tags.keys().map(String::as_str).collect();
            extra.insert("tags".into(), tags.join(","));
        }
        let id = h.id.clone();
        let mut txn = Txn::default();
        txn.event(self.pending(Action::Create, Target::Object(id.clone()), extra));
        txn.object(h);
        self.apply(txn)?;
        Ok(id)
    }

    fn edge_attrs(&self, description: &str, actor: &str) -> Attributes {
        let actor = if actor.trim().is_empty() {
            self.actor()
        } else {
            actor
        };
        Attributes::from([
            (attr::DESCRIPTION.into(), AttrValue::text(description)),
            (attr::ACTOR.into(), AttrValue::text(actor)),
            (attr::AT.into(), AttrValue::Timestamp(Utc::now())),
        ])
    }

    /// Adds a representation under `parent` (a version or a representation).
    ///
    /// Without a produced locator the representation is an on-demand view;
    /// its `recompute` attribute defaults to the transformation script or
    /// description.
    pub fn add_representation(
        &mut self,
        obj: &ObjectId,
        parent: &NodeId,
        t: TransformationSpec,
        attrs: Attributes,
    ) -> Result<NodeId> {
        self.add_representation_with_summary(obj, parent, t, attrs, None)
    }

    pub(crate) fn add_representation_with_summary(
        &mut self,
        obj: &ObjectId,
        parent: &NodeId,
        t: TransformationSpec,
        mut attrs: Attributes,
        summary: Option<Summary>,
    ) -> Result<NodeId> {
        require_description(&t.description)?;
        let mut h = self.object(obj)?.clone();
        if !h.nodes.contains_key(parent) {
            return Err(Error::not_found("node", parent));
        }
        let content = match &t.produces_locator {
            Some(loc) => Content::Locator(loc.clone()),
            None => {
                attrs.entry(attr::RECOMPUTE.into()).or_insert_with(|| {
                    AttrValue::text(t.script.clone().unwrap_or_else(|| t.description.clone()))
                });
                Content::OnDemandView
            }
        };
        let node = MetaNode::new(NodeKind::Representation, Some(content), attrs);
        let mut edge_attrs = self.edge_attrs(&t.description, &t.actor);
        if let Some(script) = &t.script {
            edge_attrs.insert(attr::SCRIPT.into(), AttrValue::text(script));
        }
        let edge = MetaEdge::new(
            EdgeKind::Transformation,
            parent.clone(),
            node.id.clone(),
            edge_attrs,
        );
        let node_id = node.id.clone();
        h.nodes.insert(node_id.clone(), node);
        h.edges.insert(edge.id.clone(), edge);
        if summary.is_some() {
            h.summary = summary;
        }
        h.refresh_aggregates();
        let h = validated(h)?;

        let detail = Detail::from([
            (detail::OP.into(), "represent".into()),
            (detail::NODE.into(), node_id.to_string()),
            ("parent".into(), parent.to_string()),
        ]);
        let mut txn = Txn::default();
        txn.event(self.pending(Action::Transform, Target::Object(obj.clone()), detail));
        txn.object(h);
        self.apply(txn)?;
        Ok(node_id)
    }

    /// Records an update of `parent_version`. `NewVersion` adds a child
    /// version; `OverwriteInPlace` replaces the parent's locator and
    /// attributes, keeping a change note, and returns the parent's id.
    pub fn add_version(
        &mut self,
        obj: &ObjectId,
        parent_version: &NodeId,
        u: UpdateSpec,
        attrs: Attributes,
    ) -> Result<NodeId> {
        require_description(&u.description)?;
        let mut h = self.object(obj)?.clone();
        let parent = h
            .nodes
            .get(parent_version)
            .ok_or_else(|| Error::not_found("node", parent_version))?;
        if parent.kind() != NodeKind::Version {
            return Err(Error::KindMismatch {
                node: parent_version.to_string(),
                expected: NodeKind::Version.as_str(),
                actual: parent.kind().as_str(),
            });
        }
        let inherited_format = parent.attributes.get(attr::FORMAT).cloned();

        let result = match u.strategy {
            Strategy::NewVersion => {
                let mut attrs = attrs;
                if let Some(f) = inherited_format {
                    attrs.entry(attr::FORMAT.into()).or_insert(f);
                }
                let node = MetaNode::new(
                    NodeKind::Version,
                    Some(Content::Locator(u.produces_locator.clone())),
                    attrs,
                );
                let mut edge_attrs = self.edge_attrs(&u.description, &u.actor);
                edge_attrs.insert(attr::STRATEGY.into(), AttrValue::text(u.strategy.as_str()));
                let edge = MetaEdge::new(
                    EdgeKind::Update,
                    parent_version.clone(),
                    node.id.clone(),
                    edge_attrs,
                );
                let id = node.id.clone();
                h.nodes.insert(id.clone(), node);
                h.edges.insert(edge.id.clone(), edge);
                id
            }
            Strategy::OverwriteInPlace => {
                let note = format!(
                    "{} {}: {}",
                    Utc::now().to_rfc3339(),
                    if u.actor.trim().is_empty() { self.actor() } else { &u.actor },
                    u.description
                );
                let node = h.nodes.get_mut(parent_version).expect("checked above");
                let mut notes = match node.attributes.remove(attr::CHANGE_NOTES) {
                    Some(AttrValue::TextList(n)) => n,
                    _ => Vec::new(),
                };
                notes.push(note);
                let mut attrs = attrs;
                if let Some(f) = inherited_format {
                    attrs.entry(attr::FORMAT.into()).or_insert(f);
                }
                attrs.insert(attr::CHANGE_NOTES.into(), AttrValue::TextList(notes));
                node.attributes = attrs;
                node.content = Some(Content::Locator(u.produces_locator.clone()));
                parent_version.clone()
            }
        };
        h.refresh_aggregates();
        let h = validated(h)?;

        let detail = Detail::from([
            (detail::OP.into(), "update".into()),
            (detail::STRATEGY.into(), u.strategy.as_str().into()),
            (detail::NODE.into(), result.to_string()),
        ]);
        let mut txn = Txn::default();
        txn.event(self.pending(Action::Update, Target::Object(obj.clone()), detail));
        txn.object(h);
        self.apply(txn)?;
        Ok(result)
    }

    pub fn get_tree(&self, obj: &ObjectId) -> Result<TreeView> {
        let h = self.object(obj)?;
        Ok(TreeView {
            object: obj.clone(),
            entries: h
                .preorder()
                .into_iter()
                .map(|(depth, node, edge)| TreeEntry {
                    depth,
                    node: node.clone(),
                    edge: edge.cloned(),
                })
                .collect(),
        })
    }

    /// The root-to-`node` path; each node is paired with the edge that produced it.
    pub fn derivation_path(
        &self,
        obj: &ObjectId,
        node: &NodeId,
    ) -> Result<Vec<(MetaNode, Option<MetaEdge>)>> {
        let h = self.object(obj)?;
        if !h.nodes.contains_key(node) {
            return Err(Error::not_found("node", node));
        }
        let mut path = Vec::new();
        let mut current = node.clone();
        loop {
            let n = h.nodes[&current].clone();
            let edge = h.parent_edge(&current).cloned();
            let next = edge.as_ref().map(|e| e.from.clone());
            path.push((n, edge));
            match next {
                Some(prev) if path.len() <= h.nodes.len() && h.nodes.contains_key(&prev) => {
                    current = prev
                }
                Some(_) => return Err(Error::corrupt(format!("object {obj} has a broken tree"))),
                None => break,
            }
        }
        path.reverse();
        Ok(path)
    }
}

/// Helper for building a tagged hypernode before it is committed.
pub(crate) fn add_tags(h: &mut Hypernode, tags: &[String], source: TagSource) {
    for t in tags {
        let norm = crate::model::normalize_tag(t);
        if !norm.is_empty() {
            h.tags.entry(norm).or_insert(source);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn props(title: &str) -> Attributes {
        Attributes::from([
            (attr::TITLE.into(), AttrValue::text(title)),
            (attr::ORIGIN.into(), AttrValue::text("internal source")),
            (attr::INGEST_FORMAT.into(), AttrValue::text("xml")),
        ])
    }

    #[test]
    fn build_requires_properties() {
        let mut p = props("x");
        p.remove(attr::ORIGIN);
        assert!(matches!(
            build_object("/x", p),
            Err(Error::MissingProperty(l)) if l == "origin"
        ));
        let h = build_object("/x", props("x")).unwrap();
        assert_eq!(h.recount().n_versions, 1);
        assert_eq!(h.attr_text(attr::FORMAT_CLASS), Some("semi-structured"));
    }

    #[test]
    fn strategy_round_trips() {
        for s in [Strategy::NewVersion, Strategy::OverwriteInPlace] {
            assert_eq!(s.as_str().parse::<Strategy>(), Ok(s));
        }
    }
}
