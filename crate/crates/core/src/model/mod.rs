//! Domain types of the catalog: hypernodes with their version/representation
//! trees, inter-object links and groupings, and the structural validator.
//!
//! Everything here is a plain value. Persistence lives in [`crate::store`],
//! metric computation in [`crate::inter`].

mod ids;
mod validate;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use ids::{EdgeId, LinkId, NodeId, ObjectId};
pub use validate::{
    graph_advisories, validate_catalog_graph, validate_hypernode, Rule, Violation,
};

/// Well-known attribute labels.
pub mod attr {
    pub const TITLE: &str = "title";
    pub const ORIGIN: &str = "origin";
    pub const INGEST_FORMAT: &str = "ingest_format";
    pub const FORMAT_CLASS: &str = "format_class";
    pub const ACCESS_PATH: &str = "access_path";
    pub const MODIFIED_AT: &str = "modified_at";
    pub const N_VERSIONS: &str = "n_versions";
    pub const N_REPRESENTATIONS: &str = "n_representations";
    pub const TOTAL_SIZE_BYTES: &str = "total_size_bytes";
    pub const DESCRIPTION_HISTORY: &str = "description_history";
    pub const RETIRED: &str = "retired";

    pub const FORMAT: &str = "format";
    pub const SIZE_BYTES: &str = "size_bytes";
    pub const RECOMPUTE: &str = "recompute";
    pub const CHANGE_NOTES: &str = "change_notes";

    pub const DESCRIPTION: &str = "description";
    pub const SCRIPT: &str = "script";
    pub const ACTOR: &str = "actor";
    pub const AT: &str = "at";
    pub const STRATEGY: &str = "strategy";
}

/// A single attribute value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttrValue {
    Text(String),
    Integer(i64),
    Real(f64),
    Boolean(bool),
    Timestamp(DateTime<Utc>),
    TextList(Vec<String>),
}

impl AttrValue {
    /// Builds a real value, rejecting NaN and infinities.
    pub fn real(value: f64) -> Option<Self> {
        value.is_finite().then_some(AttrValue::Real(value))
    }

    pub fn text(value: impl Into<String>) -> Self {
        AttrValue::Text(value.into())
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            AttrValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self {
            AttrValue::Integer(i) => Some(*i),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, AttrValue::Real(r) if !r.is_finite())
    }

    /// Parses a command-line style value: integers, reals and booleans are
    /// recognized, RFC 3339 strings become timestamps, everything else is text.
    pub fn parse_loose(raw: &str) -> Self {
        if let Ok(i) = raw.parse::<i64>() {
            return AttrValue::Integer(i);
        }
        if let Some(r) = raw.parse::<f64>().ok().and_then(AttrValue::real) {
            return r;
        }
        match raw {
            "true" => return AttrValue::Boolean(true),
            "false" => return AttrValue::Boolean(false),
            _ => {}
        }
        if let Ok(ts) = DateTime::parse_from_rfc3339(raw) {
            return AttrValue::Timestamp(ts.with_timezone(&Utc));
        }
        AttrValue::Text(raw.to_owned())
    }
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Text(s) => f.write_str(s),
            AttrValue::Integer(i) => write!(f, "{i}"),
            AttrValue::Real(r) => write!(f, "{r}"),
            AttrValue::Boolean(b) => write!(f, "{b}"),
            AttrValue::Timestamp(t) => f.write_str(&t.to_rfc3339()),
            AttrValue::TextList(items) => f.write_str(&items.join(",")),
        }
    }
}

impl From<&str> for AttrValue {
    fn from(s: &str) -> Self {
        AttrValue::Text(s.to_owned())
    }
}

impl From<String> for AttrValue {
    fn from(s: String) -> Self {
        AttrValue::Text(s)
    }
}

impl From<i64> for AttrValue {
    fn from(i: i64) -> Self {
        AttrValue::Integer(i)
    }
}

impl From<bool> for AttrValue {
    fn from(b: bool) -> Self {
        AttrValue::Boolean(b)
    }
}

impl From<DateTime<Utc>> for AttrValue {
    fn from(t: DateTime<Utc>) -> Self {
        AttrValue::Timestamp(t)
    }
}

pub type Attributes = BTreeMap<String, AttrValue>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Version,
    Representation,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Version => "version",
            NodeKind::Representation => "representation",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Update,
    Transformation,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Update => "update",
            EdgeKind::Transformation => "transformation",
        }
    }

    /// The admissible (from, to, edge) triples.
    pub fn admits(self, from: NodeKind, to: NodeKind) -> bool {
        matches!(
            (from, to, self),
            (NodeKind::Version, NodeKind::Version, EdgeKind::Update)
                | (NodeKind::Version, NodeKind::Representation, EdgeKind::Transformation)
                | (NodeKind::Representation, NodeKind::Representation, EdgeKind::Transformation)
        )
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a node's data lives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Content {
    /// A path or URI in the lake.
    Locator(String),
    /// Not materialized; recomputed from the `recompute` attribute when needed.
    OnDemandView,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaNode {
    pub id: NodeId,
    kind: NodeKind,
    pub attributes: Attributes,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content: Option<Content>,
    pub created_at: DateTime<Utc>,
}

impl MetaNode {
    pub fn new(kind: NodeKind, content: Option<Content>, attributes: Attributes) -> Self {
        Self::with_id(NodeId::generate(), kind, content, attributes, Utc::now())
    }

    pub fn with_id(
        id: NodeId,
        kind: NodeKind,
        content: Option<Content>,
        attributes: Attributes,
        created_at: DateTime<Utc>,
    ) -> Self {
        Self {
            id,
            kind,
            attributes,
            content,
            created_at,
        }
    }

    pub fn kind(&self) -> NodeKind {
        self.kind
    }

    pub fn format(&self) -> Option<&str> {
        self.attributes.get(attr::FORMAT).and_then(AttrValue::as_text)
    }

    pub fn locator(&self) -> Option<&str> {
        match &self.content {
            Some(Content::Locator(loc)) => Some(loc),
            _ => None,
        }
    }

    pub fn size_bytes(&self) -> Option<i64> {
        self.attributes.get(attr::SIZE_BYTES).and_then(AttrValue::as_integer)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaEdge {
    pub id: EdgeId,
    pub kind: EdgeKind,
    pub from: NodeId,
    pub to: NodeId,
    pub attributes: Attributes,
}

impl MetaEdge {
    pub fn new(kind: EdgeKind, from: NodeId, to: NodeId, attributes: Attributes) -> Self {
        Self {
            id: EdgeId::generate(),
            kind,
            from,
            to,
            attributes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TagSource {
    Manual,
    Derived,
    ResourceName,
    Business,
}

impl TagSource {
    pub fn as_str(self) -> &'static str {
        match self {
            TagSource::Manual => "manual",
            TagSource::Derived => "derived",
            TagSource::ResourceName => "resource-name",
            TagSource::Business => "business",
        }
    }
}

impl FromStr for TagSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "manual" => Ok(TagSource::Manual),
            "derived" => Ok(TagSource::Derived),
            "resource-name" | "resource" => Ok(TagSource::ResourceName),
            "business" => Ok(TagSource::Business),
            other => Err(format!("unknown tag source `{other}`")),
        }
    }
}

/// A normalized tag label with its provenance.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Tag {
    label: String,
    pub source: TagSource,
}

impl Tag {
    /// Returns `None` when the label is empty after normalization.
    pub fn new(label: &str, source: TagSource) -> Option<Self> {
        let label = normalize_tag(label);
        (!label.is_empty()).then_some(Self { label, source })
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Trim and lowercase.
pub fn normalize_tag(raw: &str) -> String {
    raw.trim().to_lowercase()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueType {
    Null,
    Boolean,
    Integer,
    Real,
    Text,
    Object,
    Array,
    Mixed,
}

impl ValueType {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueType::Null => "null",
            ValueType::Boolean => "boolean",
            ValueType::Integer => "integer",
            ValueType::Real => "real",
            ValueType::Text => "text",
            ValueType::Object => "object",
            ValueType::Array => "array",
            ValueType::Mixed => "mixed",
        }
    }

    /// Combines the types observed for one path across occurrences.
    pub fn merge(self, other: ValueType) -> ValueType {
        use ValueType::*;
        match (self, other) {
            (a, b) if a == b => a,
            (Null, x) | (x, Null) => x,
            (Integer, Real) | (Real, Integer) => Real,
            _ => Mixed,
        }
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaField {
    pub path: String,
    pub value_type: ValueType,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermFrequency {
    pub term: String,
    pub frequency: u64,
}

/// Overview of an object's structure or content.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Summary {
    Schema {
        fields: Vec<SchemaField>,
        /// Row count for tabular sources, top-level value count for JSON.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        records: Option<u64>,
    },
    WordCloud {
        terms: Vec<TermFrequency>,
    },
}

impl Summary {
    pub fn schema_paths(&self) -> BTreeSet<&str> {
        match self {
            Summary::Schema { fields, .. } => fields.iter().map(|f| f.path.as_str()).collect(),
            Summary::WordCloud { .. } => BTreeSet::new(),
        }
    }
}

/// Recounted aggregate attributes of a hypernode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Aggregates {
    pub n_versions: i64,
    pub n_representations: i64,
    pub total_size_bytes: i64,
}

/// Metadata container for one object: a tree of version and representation
/// nodes plus object-level attributes, tags, description and summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypernode {
    pub id: ObjectId,
    #[serde(with = "node_list")]
    pub nodes: BTreeMap<NodeId, MetaNode>,
    #[serde(with = "edge_list")]
    pub edges: BTreeMap<EdgeId, MetaEdge>,
    pub attributes: Attributes,
    #[serde(default)]
    pub tags: BTreeMap<String, TagSource>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<Summary>,
}

impl Hypernode {
    /// A hypernode holding a single root version.
    pub fn new(id: ObjectId, root: MetaNode, attributes: Attributes) -> Self {
        let mut h = Self {
            id,
            nodes: BTreeMap::from([(root.id.clone(), root)]),
            edges: BTreeMap::new(),
            attributes,
            tags: BTreeMap::new(),
            description: None,
            summary: None,
        };
        h.refresh_aggregates();
        h
    }

    pub fn attr_text(&self, label: &str) -> Option<&str> {
        self.attributes.get(label).and_then(AttrValue::as_text)
    }

    pub fn title(&self) -> &str {
        self.attr_text(attr::TITLE).unwrap_or("")
    }

    pub fn recount(&self) -> Aggregates {
        let mut agg = Aggregates::default();
        for node in self.nodes.values() {
            match node.kind() {
                NodeKind::Version => agg.n_versions += 1,
                NodeKind::Representation => agg.n_representations += 1,
            }
            agg.total_size_bytes += node.size_bytes().unwrap_or(0);
        }
        agg
    }

    pub fn refresh_aggregates(&mut self) {
        let agg = self.recount();
        self.attributes
            .insert(attr::N_VERSIONS.into(), agg.n_versions.into());
        self.attributes
            .insert(attr::N_REPRESENTATIONS.into(), agg.n_representations.into());
        self.attributes
            .insert(attr::TOTAL_SIZE_BYTES.into(), agg.total_size_bytes.into());
    }

    /// Incoming edge of a node, if any. Ambiguous on malformed trees.
    pub fn parent_edge(&self, node: &NodeId) -> Option<&MetaEdge> {
        self.edges.values().find(|e| &e.to == node)
    }

    /// The unique node with no incoming edge. `None` when there are zero or
    /// several such nodes.
    pub fn root(&self) -> Option<&MetaNode> {
        let targets: BTreeSet<&NodeId> = self.edges.values().map(|e| &e.to).collect();
        let mut roots = self.nodes.values().filter(|n| !targets.contains(&n.id));
        match (roots.next(), roots.next()) {
            (Some(root), None) => Some(root),
            _ => None,
        }
    }

    /// Outgoing edges of `node` ordered by the child's creation time, then id.
    pub fn child_edges(&self, node: &NodeId) -> Vec<&MetaEdge> {
        let mut out: Vec<&MetaEdge> = self.edges.values().filter(|e| &e.from == node).collect();
        out.sort_by(|a, b| {
            let ka = self.nodes.get(&a.to).map(|n| n.created_at);
            let kb = self.nodes.get(&b.to).map(|n| n.created_at);
            ka.cmp(&kb).then_with(|| a.to.cmp(&b.to))
        });
        out
    }

    /// Preorder walk from the root: `(depth, node, incoming edge)`.
    pub fn preorder(&self) -> Vec<(usize, &MetaNode, Option<&MetaEdge>)> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let Some(root) = self.root() else {
            return out;
        };
        let mut stack = vec![(0usize, root, None)];
        let mut seen = BTreeSet::new();
        while let Some((depth, node, edge)) = stack.pop() {
            if !seen.insert(&node.id) {
                continue;
            }
            out.push((depth, node, edge));
            for child in self.child_edges(&node.id).into_iter().rev() {
                if let Some(target) = self.nodes.get(&child.to) {
                    stack.push((depth + 1, target, Some(child)));
                }
            }
        }
        out
    }

    /// The most recently created version node.
    pub fn latest_version(&self) -> Option<&MetaNode> {
        self.nodes
            .values()
            .filter(|n| n.kind() == NodeKind::Version)
            .max_by(|a, b| a.created_at.cmp(&b.created_at).then_with(|| a.id.cmp(&b.id)))
    }

    /// Depth of a node measured in edges from the root (BFS).
    pub fn depth_of(&self, node: &NodeId) -> Option<usize> {
        let root = self.root()?;
        let mut queue = VecDeque::from([(&root.id, 0usize)]);
        let mut seen = BTreeSet::new();
        while let Some((current, depth)) = queue.pop_front() {
            if current == node {
                return Some(depth);
            }
            if !seen.insert(current) {
                continue;
            }
            for edge in self.edges.values().filter(|e| &e.from == current) {
                queue.push_back((&edge.to, depth + 1));
            }
        }
        None
    }
}

macro_rules! keyed_list {
    ($module:ident, $key:ty, $value:ty) => {
        mod $module {
            use super::*;
            use serde::de::Error as _;
            use serde::{Deserializer, Serializer};

            pub fn serialize<S: Serializer>(
                map: &BTreeMap<$key, $value>,
                ser: S,
            ) -> Result<S::Ok, S::Error> {
                ser.collect_seq(map.values())
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(
                de: D,
            ) -> Result<BTreeMap<$key, $value>, D::Error> {
                let items = Vec::<$value>::deserialize(de)?;
                let mut map = BTreeMap::new();
                for item in items {
                    let id = item.id.clone();
                    if map.insert(id.clone(), item).is_some() {
                        return Err(D::Error::custom(format!("duplicate id {id}")));
                    }
                }
                Ok(map)
            }
        }
    };
}

keyed_list!(node_list, NodeId, MetaNode);
keyed_list!(edge_list, EdgeId, MetaEdge);

/// Undirected weighted edge between two comparable objects. Endpoints are
/// stored in ascending order; `compared_nodes` follows the same order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityLink {
    pub id: LinkId,
    pub endpoints: (ObjectId, ObjectId),
    pub metric: String,
    pub value: f64,
    pub computed_at: DateTime<Utc>,
    pub compared_nodes: (NodeId, NodeId),
}

impl SimilarityLink {
    pub fn new(
        a: (ObjectId, NodeId),
        b: (ObjectId, NodeId),
        metric: impl Into<String>,
        value: f64,
        computed_at: DateTime<Utc>,
    ) -> Self {
        let (a, b) = if a.0 <= b.0 { (a, b) } else { (b, a) };
        Self {
            id: LinkId::generate(),
            endpoints: (a.0, b.0),
            metric: metric.into(),
            value,
            computed_at,
            compared_nodes: (a.1, b.1),
        }
    }

    pub fn involves(&self, obj: &ObjectId) -> bool {
        &self.endpoints.0 == obj || &self.endpoints.1 == obj
    }

    pub fn other(&self, obj: &ObjectId) -> Option<&ObjectId> {
        if &self.endpoints.0 == obj {
            Some(&self.endpoints.1)
        } else if &self.endpoints.1 == obj {
            Some(&self.endpoints.0)
        } else {
            None
        }
    }
}

/// Directed hyperedge from two or more parents to the object derived from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParenthoodLink {
    pub id: LinkId,
    pub parents: BTreeSet<ObjectId>,
    pub child: ObjectId,
    pub attributes: Attributes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupingBasis {
    /// Partition by the value of a hypernode attribute.
    Attribute,
    /// Possibly overlapping collections, one per tag.
    Tags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grouping {
    pub parameter: String,
    pub basis: GroupingBasis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thesaurus: Option<String>,
    pub collections: BTreeMap<String, BTreeSet<ObjectId>>,
    pub computed_at: DateTime<Utc>,
}

impl Grouping {
    /// Storage key: the parameter, qualified by the thesaurus for tag groupings.
    pub fn key(&self) -> String {
        match &self.thesaurus {
            Some(t) => format!("{}@{}", self.parameter, t),
            None => self.parameter.clone(),
        }
    }
}

/// Inter-object metadata: similarity edges, parenthood hyperedges, groupings.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InterLinks {
    pub similarity: BTreeMap<LinkId, SimilarityLink>,
    pub parenthood: BTreeMap<LinkId, ParenthoodLink>,
    pub groupings: BTreeMap<String, Grouping>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_kind_matrix_is_exactly_three_triples() {
        let kinds = [NodeKind::Version, NodeKind::Representation];
        let edges = [EdgeKind::Update, EdgeKind::Transformation];
        let mut admitted = Vec::new();
        for from in kinds {
            for to in kinds {
                for e in edges {
                    if e.admits(from, to) {
                        admitted.push((from, to, e));
                    }
                }
            }
        }
        assert_eq!(
            admitted,
            vec![
                (NodeKind::Version, NodeKind::Version, EdgeKind::Update),
                (NodeKind::Version, NodeKind::Representation, EdgeKind::Transformation),
                (
                    NodeKind::Representation,
                    NodeKind::Representation,
                    EdgeKind::Transformation
                ),
            ]
        );
    }

    #[test]
    fn tags_normalize() {
        let t = Tag::new("  Sales ", TagSource::Manual).unwrap();
        assert_eq!(t.label(), "sales");
        assert!(Tag::new("   ", TagSource::Manual).is_none());
        assert_eq!(normalize_tag(&normalize_tag(" ÉtÉ ")), normalize_tag(" ÉtÉ "));
    }

    #[test]
    fn real_rejects_non_finite() {
        assert!(AttrValue::real(f64::NAN).is_none());
        assert!(AttrValue::real(f64::INFINITY).is_none());
        assert_eq!(AttrValue::real(1.5), Some(AttrValue::Real(1.5)));
    }

    #[test]
    fn loose_parsing() {
        assert_eq!(AttrValue::parse_loose("12"), AttrValue::Integer(12));
        assert_eq!(AttrValue::parse_loose("1.5"), AttrValue::Real(1.5));
        assert_eq!(AttrValue::parse_loose("true"), AttrValue::Boolean(true));
        assert_eq!(AttrValue::parse_loose("nan"), AttrValue::text("nan"));
        assert!(matches!(
            AttrValue::parse_loose("2024-01-02T03:04:05Z"),
            AttrValue::Timestamp(_)
        ));
    }

    #[test]
    fn value_type_merge() {
        assert_eq!(ValueType::Integer.merge(ValueType::Real), ValueType::Real);
        assert_eq!(ValueType::Null.merge(ValueType::Text), ValueType::Text);
        assert_eq!(ValueType::Text.merge(ValueType::Integer), ValueType::Mixed);
    }

    #[test]
    fn hypernode_serde_round_trip() {
        let root = MetaNode::new(
            NodeKind::Version,
            Some(Content::Locator("/lake/a.xml".into())),
            Attributes::from([(attr::SIZE_BYTES.into(), AttrValue::Integer(10))]),
        );
        let mut h = Hypernode::new(ObjectId::generate(), root, Attributes::new());
        h.tags.insert("sales".into(), TagSource::Manual);
        let json = serde_json::to_string(&h).unwrap();
        let back: Hypernode = serde_json::from_str(&json).unwrap();
        assert_eq!(back, h);
        assert_eq!(h.recount().total_size_bytes, 10);
    }
}
