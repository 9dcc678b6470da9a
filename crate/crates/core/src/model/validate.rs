use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{
    attr, AttrValue, Content, EdgeKind, GroupingBasis, Hypernode, InterLinks, NodeId, NodeKind,
    ObjectId, Summary,
};

/// Catalog of structural rules checked by the validators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    // hypernode rules
    NoRoot,
    MultipleRoots,
    RootNotVersion,
    MultipleParents,
    Cycle,
    VersionFromRepresentation,
    EdgeKindMatrix,
    DanglingEdge,
    UnreachableVersion,
    StaleAggregate,
    MissingEdgeAttribute,
    OnDemandWithoutRecipe,
    NonFiniteReal,
    InvalidSummary,
    // catalog graph rules
    DanglingReference,
    ParenthoodCycle,
    ValueOutOfRange,
    SelfSimilarity,
    TooFewParents,
    ChildIsParent,
    NonPartitionGrouping,
    EmptyCollection,
    // advisories
    RepeatedChild,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::NoRoot => "no root",
            Rule::MultipleRoots => "multiple roots",
            Rule::RootNotVersion => "root is not a version",
            Rule::MultipleParents => "node has several parents",
            Rule::Cycle => "cycle",
            Rule::VersionFromRepresentation => "version derived from representation",
            Rule::EdgeKindMatrix => "edge kind mismatch",
            Rule::DanglingEdge => "dangling edge endpoint",
            Rule::UnreachableVersion => "version unreachable by updates",
            Rule::StaleAggregate => "stale aggregate",
            Rule::MissingEdgeAttribute => "missing edge attribute",
            Rule::OnDemandWithoutRecipe => "on-demand view without recomputation",
            Rule::NonFiniteReal => "non-finite real",
            Rule::InvalidSummary => "invalid summary",
            Rule::DanglingReference => "dangling object reference",
            Rule::ParenthoodCycle => "parenthood cycle",
            Rule::ValueOutOfRange => "value out of range",
            Rule::SelfSimilarity => "similarity endpoints not distinct",
            Rule::TooFewParents => "too few parents",
            Rule::ChildIsParent => "child among its parents",
            Rule::NonPartitionGrouping => "attribute grouping is not a partition",
            Rule::EmptyCollection => "empty collection",
            Rule::RepeatedChild => "child derived by several parenthood links",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One broken rule and the ids involved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub ids: Vec<String>,
    pub message: String,
}

impl Violation {
    fn new(rule: Rule, ids: Vec<String>, message: impl Into<String>) -> Self {
        Self {
            rule,
            ids,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.rule, self.message)?;
        if !self.ids.is_empty() {
            write!(f, " [{}]", self.ids.join(", "))?;
        }
        Ok(())
    }
}

fn ids<I, T>(items: I) -> Vec<String>
where
    I: IntoIterator<Item = T>,
    T: ToString,
{
    items.into_iter().map(|i| i.to_string()).collect()
}

/// Checks every structural invariant of a hypernode. Returns an empty list
/// iff the hypernode is well formed.
pub fn validate_hypernode(h: &Hypernode) -> Vec<Violation> {
    let mut out = Vec::new();

    // Edges whose endpoints both exist take part in the graph checks.
    let mut live_edges = Vec::new();
    for edge in h.edges.values() {
        let from = h.nodes.get(&edge.from);
        let to = h.nodes.get(&edge.to);
        let (Some(from), Some(to)) = (from, to) else {
            let missing: Vec<&NodeId> = [&edge.from, &edge.to]
                .into_iter()
                .filter(|n| !h.nodes.contains_key(*n))
                .collect();
            out.push(Violation::new(
                Rule::DanglingEdge,
                ids(std::iter::once(edge.id.to_string()).chain(missing.iter().map(|n| n.to_string()))),
                format!("edge {} references a missing node", edge.id),
            ));
            continue;
        };
        live_edges.push(edge);

        if to.kind() == NodeKind::Version && from.kind() == NodeKind::Representation {
            out.push(Violation::new(
                Rule::VersionFromRepresentation,
                ids([&edge.id.to_string(), &from.id.to_string(), &to.id.to_string()]),
                format!("version {} derives from representation {}", to.id, from.id),
            ));
        } else if !edge.kind.admits(from.kind(), to.kind()) {
            out.push(Violation::new(
                Rule::EdgeKindMatrix,
                ids([edge.id.as_str()]),
                format!(
                    "{} edge from {} to {} is not admissible",
                    edge.kind,
                    from.kind(),
                    to.kind()
                ),
            ));
        }

        let has_how = edge.attributes.contains_key(attr::DESCRIPTION)
            || edge.attributes.contains_key(attr::SCRIPT);
        for (ok, label) in [
            (has_how, "description|script"),
            (edge.attributes.contains_key(attr::ACTOR), attr::ACTOR),
            (edge.attributes.contains_key(attr::AT), attr::AT),
        ] {
            if !ok {
                out.push(Violation::new(
                    Rule::MissingEdgeAttribute,
                    ids([edge.id.as_str()]),
                    format!("edge lacks `{label}`"),
                ));
            }
        }
    }

    // In-degrees and roots.
    let mut in_degree: BTreeMap<&NodeId, usize> = h.nodes.keys().map(|id| (id, 0)).collect();
    for edge in &live_edges {
        *in_degree.entry(&edge.to).or_default() += 1;
    }
    let roots: Vec<&NodeId> = in_degree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(id, _)| *id)
        .collect();
    match roots.len() {
        0 => out.push(Violation::new(
            Rule::NoRoot,
            Vec::new(),
            "every node has an incoming edge",
        )),
        1 => {}
        _ => out.push(Violation::new(
            Rule::MultipleRoots,
            ids(&roots),
            format!("{} nodes have no incoming edge", roots.len()),
        )),
    }
    for (id, degree) in &in_degree {
        if *degree > 1 {
            out.push(Violation::new(
                Rule::MultipleParents,
                ids([id]),
                format!("in-degree {degree}"),
            ));
        }
    }
    if let [root] = roots.as_slice() {
        if h.nodes[*root].kind() != NodeKind::Version {
            out.push(Violation::new(
                Rule::RootNotVersion,
                ids([root]),
                "the root must be the initial raw version",
            ));
        }
    }

    // Cycles.
    let mut adjacency: BTreeMap<&NodeId, Vec<&NodeId>> = BTreeMap::new();
    for edge in &live_edges {
        adjacency.entry(&edge.from).or_default().push(&edge.to);
    }
    for cycle in find_cycles(h.nodes.keys(), &adjacency) {
        out.push(Violation::new(
            Rule::Cycle,
            ids(&cycle),
            format!("{} nodes form a cycle", cycle.len()),
        ));
    }

    // Versions must hang off the root through update edges only.
    if let [root] = roots.as_slice() {
        let mut reached = BTreeSet::from([*root]);
        let mut queue = VecDeque::from([*root]);
        while let Some(current) = queue.pop_front() {
            for edge in live_edges
                .iter()
                .filter(|e| &e.from == current && e.kind == EdgeKind::Update)
            {
                if reached.insert(&edge.to) {
                    queue.push_back(&edge.to);
                }
            }
        }
        let unreachable: Vec<&NodeId> = h
            .nodes
            .values()
            .filter(|n| n.kind() == NodeKind::Version && !reached.contains(&n.id))
            .map(|n| &n.id)
            .collect();
        if !unreachable.is_empty() {
            out.push(Violation::new(
                Rule::UnreachableVersion,
                ids(&unreachable),
                "version not reachable from the root via updates",
            ));
        }
    }

    // Aggregates.
    let agg = h.recount();
    for (label, expected) in [
        (attr::N_VERSIONS, agg.n_versions),
        (attr::N_REPRESENTATIONS, agg.n_representations),
        (attr::TOTAL_SIZE_BYTES, agg.total_size_bytes),
    ] {
        let stored = h.attributes.get(label).and_then(AttrValue::as_integer);
        if stored != Some(expected) {
            out.push(Violation::new(
                Rule::StaleAggregate,
                ids([h.id.as_str()]),
                format!(
                    "`{label}` is {}, recount gives {expected}",
                    stored.map_or("missing".to_owned(), |v| v.to_string())
                ),
            ));
        }
    }

    for node in h.nodes.values() {
        if node.content == Some(Content::OnDemandView) {
            let recipe = node
                .attributes
                .get(attr::RECOMPUTE)
                .and_then(AttrValue::as_text)
                .map(str::trim)
                .unwrap_or("");
            if recipe.is_empty() {
                out.push(Violation::new(
                    Rule::OnDemandWithoutRecipe,
                    ids([node.id.as_str()]),
                    "on-demand view needs a non-empty `recompute` attribute",
                ));
            }
        }
    }

    let attribute_maps = std::iter::once((h.id.as_str(), &h.attributes))
        .chain(h.nodes.values().map(|n| (n.id.as_str(), &n.attributes)))
        .chain(h.edges.values().map(|e| (e.id.as_str(), &e.attributes)));
    for (owner, attrs) in attribute_maps {
        for (label, value) in attrs {
            if !value.is_finite() {
                out.push(Violation::new(
                    Rule::NonFiniteReal,
                    ids([owner]),
                    format!("attribute `{label}` is not finite"),
                ));
            }
        }
    }

    if let Some(summary) = &h.summary {
        if let Some(problem) = summary_problem(summary) {
            out.push(Violation::new(Rule::InvalidSummary, ids([h.id.as_str()]), problem));
        }
    }

    out
}

fn summary_problem(summary: &Summary) -> Option<String> {
    match summary {
        Summary::Schema { fields, .. } => {
            let mut seen = BTreeSet::new();
            fields
                .iter()
                .find(|f| !seen.insert(f.path.as_str()))
                .map(|f| format!("schema path `{}` appears twice", f.path))
        }
        Summary::WordCloud { terms } => {
            if let Some(t) = terms.iter().find(|t| t.frequency == 0) {
                return Some(format!("term `{}` has zero frequency", t.term));
            }
            terms
                .windows(2)
                .any(|w| w[0].frequency < w[1].frequency)
                .then(|| "word cloud is not sorted by descending frequency".to_owned())
        }
    }
}

/// Returns one representative cycle per back edge found by a depth-first walk.
fn find_cycles<'a, K: Ord + Clone>(
    vertices: impl Iterator<Item = &'a K>,
    adjacency: &BTreeMap<&'a K, Vec<&'a K>>,
) -> Vec<Vec<&'a K>>
where
    K: 'a,
{
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Gray,
        Black,
    }
    let vertices: Vec<&K> = vertices.collect();
    let mut mark: BTreeMap<&K, Mark> = vertices.iter().map(|v| (*v, Mark::White)).collect();
    let mut cycles = Vec::new();
    let empty = Vec::new();

    for &start in &vertices {
        if mark[start] != Mark::White {
            continue;
        }
        // (vertex, next child index)
        let mut stack: Vec<(&K, usize)> = vec![(start, 0)];
        mark.insert(start, Mark::Gray);
        while let Some(&mut (v, ref mut idx)) = stack.last_mut() {
            let children = adjacency.get(v).unwrap_or(&empty);
            if *idx < children.len() {
                let child = children[*idx];
                *idx += 1;
                match mark.get(child).copied().unwrap_or(Mark::Black) {
                    Mark::White => {
                        mark.insert(child, Mark::Gray);
                        stack.push((child, 0));
                    }
                    Mark::Gray => {
                        let pos = stack.iter().position(|(s, _)| *s == child).unwrap_or(0);
                        cycles.push(stack[pos..].iter().map(|(s, _)| *s).collect());
                    }
                    Mark::Black => {}
                }
            } else {
                mark.insert(v, Mark::Black);
                stack.pop();
            }
        }
    }
    cycles
}

/// Checks inter-object metadata against the set of known objects: dangling
/// references, parenthood cycles, similarity ranges and attribute partitions.
pub fn validate_catalog_graph(links: &InterLinks, objects: &BTreeSet<ObjectId>) -> Vec<Violation> {
    let mut out = Vec::new();
    let dangling = |out: &mut Vec<Violation>, link: &str, obj: &ObjectId| {
        if !objects.contains(obj) {
            out.push(Violation::new(
                Rule::DanglingReference,
                ids([link, obj.as_str()]),
                format!("{link} references unknown object {obj}"),
            ));
        }
    };

    for link in links.similarity.values() {
        dangling(&mut out, link.id.as_str(), &link.endpoints.0);
        dangling(&mut out, link.id.as_str(), &link.endpoints.1);
        if link.endpoints.0 == link.endpoints.1 {
            out.push(Violation::new(
                Rule::SelfSimilarity,
                ids([link.id.as_str()]),
                "similarity link joins an object to itself",
            ));
        }
        if !(0.0..=1.0).contains(&link.value) {
            out.push(Violation::new(
                Rule::ValueOutOfRange,
                ids([link.id.as_str()]),
                format!("similarity value {} outside [0, 1]", link.value),
            ));
        }
    }

    let mut adjacency: BTreeMap<&ObjectId, Vec<&ObjectId>> = BTreeMap::new();
    let mut vertices = BTreeSet::new();
    for link in links.parenthood.values() {
        for parent in &link.parents {
            dangling(&mut out, link.id.as_str(), parent);
            adjacency.entry(parent).or_default().push(&link.child);
            vertices.insert(parent);
        }
        dangling(&mut out, link.id.as_str(), &link.child);
        vertices.insert(&link.child);
        if link.parents.len() < 2 {
            out.push(Violation::new(
                Rule::TooFewParents,
                ids([link.id.as_str()]),
                format!("{} parent(s)", link.parents.len()),
            ));
        }
        if link.parents.contains(&link.child) {
            out.push(Violation::new(
                Rule::ChildIsParent,
                ids([link.id.as_str(), link.child.as_str()]),
                "child is listed among its parents",
            ));
        }
    }
    for cycle in find_cycles(vertices.into_iter(), &adjacency) {
        if cycle.len() > 1 {
            out.push(Violation::new(
                Rule::ParenthoodCycle,
                ids(&cycle),
                format!("{} objects derive from each other", cycle.len()),
            ));
        }
    }

    for grouping in links.groupings.values() {
        let key = grouping.key();
        let mut owner: BTreeMap<&ObjectId, &str> = BTreeMap::new();
        for (value, members) in &grouping.collections {
            if members.is_empty() {
                out.push(Violation::new(
                    Rule::EmptyCollection,
                    ids([key.as_str()]),
                    format!("collection `{value}` is empty"),
                ));
            }
            for obj in members {
                dangling(&mut out, &key, obj);
                if grouping.basis == GroupingBasis::Attribute {
                    if let Some(previous) = owner.insert(obj, value) {
                        out.push(Violation::new(
                            Rule::NonPartitionGrouping,
                            ids([key.as_str(), obj.as_str()]),
                            format!("object is in both `{previous}` and `{value}`"),
                        ));
                    }
                }
            }
        }
    }

    out
}

/// Non-fatal observations about inter-object metadata.
pub fn graph_advisories(links: &InterLinks) -> Vec<Violation> {
    let mut by_child: BTreeMap<&ObjectId, Vec<&str>> = BTreeMap::new();
    for link in links.parenthood.values() {
        by_child.entry(&link.child).or_default().push(link.id.as_str());
    }
    by_child
        .into_iter()
        .filter(|(_, l)| l.len() > 1)
        .map(|(child, l)| {
            Violation::new(
                Rule::RepeatedChild,
                ids(std::iter::once(child.as_str()).chain(l.iter().copied())),
                format!("{child} is the child of {} parenthood links", l.len()),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        Attributes, Grouping, MetaEdge, MetaNode, ParenthoodLink, SimilarityLink, TermFrequency,
    };
    use chrono::Utc;

    fn edge_attrs() -> Attributes {
        Attributes::from([
            (attr::DESCRIPTION.into(), "d".into()),
            (attr::ACTOR.into(), "tester".into()),
            (attr::AT.into(), AttrValue::Timestamp(Utc::now())),
        ])
    }

    fn version() -> MetaNode {
        MetaNode::new(NodeKind::Version, None, Attributes::new())
    }

    fn representation() -> MetaNode {
        MetaNode::new(NodeKind::Representation, None, Attributes::new())
    }

    fn rules(v: &[Violation]) -> BTreeSet<Rule> {
        v.iter().map(|v| v.rule).collect()
    }

    /// v1 -> r1 (transformation), v1 -> v2 (update), v2 -> r2 (transformation)
    fn products_tree() -> (Hypernode, [NodeId; 4]) {
        let (v1, r1, v2, r2) = (version(), representation(), version(), representation());
        let ids = [v1.id.clone(), r1.id.clone(), v2.id.clone(), r2.id.clone()];
        let mut h = Hypernode::new(ObjectId::generate(), v1, Attributes::new());
        for n in [r1, v2, r2] {
            h.nodes.insert(n.id.clone(), n);
        }
        for (kind, from, to) in [
            (EdgeKind::Transformation, 0, 1),
            (EdgeKind::Update, 0, 2),
            (EdgeKind::Transformation, 2, 3),
        ] {
            let e = MetaEdge::new(kind, ids[from].clone(), ids[to].clone(), edge_attrs());
            h.edges.insert(e.id.clone(), e);
        }
        h.refresh_aggregates();
        (h, ids)
    }

    #[test]
    fn minimal_hypernode_is_valid() {
        let h = Hypernode::new(ObjectId::generate(), version(), Attributes::new());
        assert_eq!(validate_hypernode(&h), vec![]);
    }

    #[test]
    fn products_tree_is_valid() {
        let (h, _) = products_tree();
        assert_eq!(validate_hypernode(&h), vec![]);
        assert_eq!(h.nodes.len(), h.edges.len() + 1);
    }

    #[test]
    fn update_from_representation_is_flagged() {
        let (mut h, ids) = products_tree();
        // re-route v1 -> v2 as r1 -> v2
        let update = h
            .edges
            .values_mut()
            .find(|e| e.kind == EdgeKind::Update)
            .unwrap();
        update.from = ids[1].clone();
        let v = validate_hypernode(&h);
        assert!(rules(&v).contains(&Rule::VersionFromRepresentation), "{v:?}");
        assert_eq!(Rule::VersionFromRepresentation.name(), "version derived from representation");
    }

    #[test]
    fn two_roots_are_flagged() {
        let (mut h, _) = products_tree();
        let extra = version();
        h.nodes.insert(extra.id.clone(), extra);
        h.refresh_aggregates();
        let v = validate_hypernode(&h);
        assert_eq!(rules(&v), BTreeSet::from([Rule::MultipleRoots]));

        // brute-force in-degree count agrees
        let zero_in = h
            .nodes
            .keys()
            .filter(|n| !h.edges.values().any(|e| &e.to == *n))
            .count();
        assert_eq!(zero_in, 2);
    }

    #[test]
    fn root_kind_flip_is_flagged() {
        let root = representation();
        let h = Hypernode::new(ObjectId::generate(), root, Attributes::new());
        assert!(rules(&validate_hypernode(&h)).contains(&Rule::RootNotVersion));
    }

    #[test]
    fn cycle_is_flagged() {
        let (mut h, ids) = products_tree();
        let e = MetaEdge::new(EdgeKind::Update, ids[2].clone(), ids[2].clone(), edge_attrs());
        h.edges.insert(e.id.clone(), e);
        let r = rules(&validate_hypernode(&h));
        assert!(r.contains(&Rule::Cycle));
        assert!(r.contains(&Rule::MultipleParents));
    }

    #[test]
    fn dangling_and_stale_and_attrs() {
        let (mut h, ids) = products_tree();
        let e = MetaEdge::new(
            EdgeKind::Transformation,
            ids[0].clone(),
            NodeId::new("n_missing"),
            Attributes::new(),
        );
        h.edges.insert(e.id.clone(), e);
        h.attributes.insert(attr::N_VERSIONS.into(), AttrValue::Integer(7));
        let r = rules(&validate_hypernode(&h));
        assert!(r.contains(&Rule::DanglingEdge));
        assert!(r.contains(&Rule::StaleAggregate));
        // the dangling edge is skipped, so its missing attributes are not reported
        assert!(!r.contains(&Rule::MissingEdgeAttribute));
    }

    #[test]
    fn on_demand_view_needs_recipe() {
        let mut root = version();
        root.content = Some(Content::OnDemandView);
        let mut h = Hypernode::new(ObjectId::generate(), root.clone(), Attributes::new());
        assert!(rules(&validate_hypernode(&h)).contains(&Rule::OnDemandWithoutRecipe));
        h.nodes.get_mut(&root.id).unwrap().attributes.insert(
            attr::RECOMPUTE.into(),
            "SELECT * FROM x".into(),
        );
        assert_eq!(validate_hypernode(&h), vec![]);
    }

    #[test]
    fn unsorted_word_cloud_is_invalid() {
        let mut h = Hypernode::new(ObjectId::generate(), version(), Attributes::new());
        h.summary = Some(Summary::WordCloud {
            terms: vec![
                TermFrequency { term: "a".into(), frequency: 1 },
                TermFrequency { term: "b".into(), frequency: 2 },
            ],
        });
        assert!(rules(&validate_hypernode(&h)).contains(&Rule::InvalidSummary));
    }

    #[test]
    fn validation_is_idempotent() {
        let (mut h, _) = products_tree();
        h.attributes.insert(attr::N_REPRESENTATIONS.into(), AttrValue::Integer(0));
        let before = h.clone();
        assert_eq!(validate_hypernode(&h), validate_hypernode(&h));
        assert_eq!(h, before);
    }

    fn obj(s: &str) -> ObjectId {
        ObjectId::new(s)
    }

    fn parenthood(parents: &[&str], child: &str) -> ParenthoodLink {
        ParenthoodLink {
            id: crate::model::LinkId::generate(),
            parents: parents.iter().map(|p| obj(p)).collect(),
            child: obj(child),
            attributes: Attributes::new(),
        }
    }

    #[test]
    fn empty_catalog_graph_is_valid() {
        assert!(validate_catalog_graph(&InterLinks::default(), &BTreeSet::new()).is_empty());
    }

    #[test]
    fn parenthood_cycle_is_flagged() {
        let objects: BTreeSet<ObjectId> = ["A", "B", "C", "D"].iter().map(|s| obj(s)).collect();
        let mut links = InterLinks::default();
        for l in [parenthood(&["A", "B"], "C"), parenthood(&["C", "D"], "A")] {
            links.parenthood.insert(l.id.clone(), l);
        }
        let v = validate_catalog_graph(&links, &objects);
        assert_eq!(rules(&v), BTreeSet::from([Rule::ParenthoodCycle]));
        let members: BTreeSet<&str> = v[0].ids.iter().map(String::as_str).collect();
        assert_eq!(members, BTreeSet::from(["A", "C"]));
    }

    #[test]
    fn out_of_range_similarity_is_flagged() {
        let objects: BTreeSet<ObjectId> = [obj("A"), obj("B")].into();
        let mut links = InterLinks::default();
        let l = SimilarityLink::new(
            (obj("A"), NodeId::new("n1")),
            (obj("B"), NodeId::new("n2")),
            "token-jaccard",
            1.3,
            Utc::now(),
        );
        links.similarity.insert(l.id.clone(), l);
        let v = validate_catalog_graph(&links, &objects);
        assert_eq!(rules(&v), BTreeSet::from([Rule::ValueOutOfRange]));
    }

    #[test]
    fn overlapping_attribute_grouping_is_flagged() {
        let objects: BTreeSet<ObjectId> = [obj("A"), obj("B")].into();
        let mut links = InterLinks::default();
        let mut g = Grouping {
            parameter: "origin".into(),
            basis: GroupingBasis::Attribute,
            thesaurus: None,
            collections: BTreeMap::from([
                ("x".into(), BTreeSet::from([obj("A")])),
                ("y".into(), BTreeSet::from([obj("A"), obj("B"), obj("Z")])),
            ]),
            computed_at: Utc::now(),
        };
        links.groupings.insert(g.key(), g.clone());
        let r = rules(&validate_catalog_graph(&links, &objects));
        assert_eq!(
            r,
            BTreeSet::from([Rule::NonPartitionGrouping, Rule::DanglingReference])
        );

        g.basis = GroupingBasis::Tags;
        links.groupings.insert(g.key(), g);
        let r = rules(&validate_catalog_graph(&links, &objects));
        assert_eq!(r, BTreeSet::from([Rule::DanglingReference]));
    }

    #[test]
    fn repeated_child_is_only_advisory() {
        let objects: BTreeSet<ObjectId> = ["A", "B", "C", "D"].iter().map(|s| obj(s)).collect();
        let mut links = InterLinks::default();
        for l in [parenthood(&["A", "B"], "C"), parenthood(&["A", "D"], "C")] {
            links.parenthood.insert(l.id.clone(), l);
        }
        assert!(validate_catalog_graph(&links, &objects).is_empty());
        let adv = graph_advisories(&links);
        assert_eq!(adv.len(), 1);
        assert_eq!(adv[0].rule, Rule::RepeatedChild);
    }
}
