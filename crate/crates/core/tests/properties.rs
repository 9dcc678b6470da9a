mod common;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use chrono::Utc;
use common::*;
use medal_core::index::{build_index, search_index, tokenize, SearchMode, Tokenizer};
use medal_core::ingest::{schema_from_bytes, DetectedFormat};
use medal_core::inter::{components, lineage_of, token_jaccard, Direction};
use medal_core::intra::{TransformationSpec, UpdateSpec};
use medal_core::model::{
    attr, normalize_tag, validate_hypernode, AttrValue, Attributes, Content, EdgeKind, Hypernode,
    InterLinks, LinkId, MetaEdge, MetaNode, NodeId, NodeKind, ObjectId, ParenthoodLink, Rule,
};
use medal_core::semantic::Thesaurus;
use proptest::prelude::*;

fn edge_attrs() -> Attributes {
    Attributes::from([
        (attr::DESCRIPTION.into(), AttrValue::text("step")),
        (attr::ACTOR.into(), AttrValue::text("tester")),
        (attr::AT.into(), AttrValue::Timestamp(Utc::now())),
    ])
}

/// Grows a tree: each step picks a parent by index and either updates it
/// (versions only) or transforms it.
fn build_tree(steps: &[(usize, bool)]) -> Hypernode {
    let root = MetaNode::new(NodeKind::Version, Some(Content::Locator("/raw".into())), Attributes::new());
    let mut h = Hypernode::new(ObjectId::generate(), root, Attributes::new());
    let mut order: Vec<NodeId> = h.nodes.keys().cloned().collect();
    for &(pick, update) in steps {
        let parent = order[pick % order.len()].clone();
        let parent_kind = h.nodes[&parent].kind();
        let (kind, edge) = if update && parent_kind == NodeKind::Version {
            (NodeKind::Version, EdgeKind::Update)
        } else {
            (NodeKind::Representation, EdgeKind::Transformation)
        };
        let node = MetaNode::new(kind, Some(Content::Locator("/derived".into())), Attributes::new());
        let e = MetaEdge::new(edge, parent, node.id.clone(), edge_attrs());
        order.push(node.id.clone());
        h.nodes.insert(node.id.clone(), node);
        h.edges.insert(e.id.clone(), e);
    }
    h.refresh_aggregates();
    h
}

#[derive(Debug, Clone, Copy)]
enum Fault {
    RootKind,
    ExtraRoot,
    CycleEdge,
    KindMatrix,
    DanglingEndpoint,
    StaleAggregate,
}

impl Fault {
    fn rule(self) -> Rule {
        match self {
            Fault::RootKind => Rule::RootNotVersion,
            Fault::ExtraRoot => Rule::MultipleRoots,
            Fault::CycleEdge => Rule::Cycle,
            Fault::KindMatrix => Rule::EdgeKindMatrix,
            Fault::DanglingEndpoint => Rule::DanglingEdge,
            Fault::StaleAggregate => Rule::StaleAggregate,
        }
    }
}

fn inject(h: &mut Hypernode, fault: Fault, pick: usize) {
    let root = h.root().unwrap().clone();
    let edge_ids: Vec<_> = h.edges.keys().cloned().collect();
    match fault {
        Fault::RootKind => {
            let flipped = MetaNode::with_id(
                root.id.clone(),
                NodeKind::Representation,
                root.content.clone(),
                root.attributes.clone(),
                root.created_at,
            );
            h.nodes.insert(root.id, flipped);
        }
        Fault::ExtraRoot => {
            let n = MetaNode::new(NodeKind::Version, None, Attributes::new());
            h.nodes.insert(n.id.clone(), n);
            h.refresh_aggregates();
        }
        Fault::CycleEdge => {
            let versions: Vec<NodeId> = h
                .nodes
                .values()
                .filter(|n| n.kind() == NodeKind::Version)
                .map(|n| n.id.clone())
                .collect();
            let from = versions[pick % versions.len()].clone();
            let e = MetaEdge::new(EdgeKind::Update, from, root.id, edge_attrs());
            h.edges.insert(e.id.clone(), e);
        }
        Fault::KindMatrix => {
            let e = h.edges.get_mut(&edge_ids[pick % edge_ids.len()]).unwrap();
            e.kind = match e.kind {
                EdgeKind::Update => EdgeKind::Transformation,
                EdgeKind::Transformation => EdgeKind::Update,
            };
        }
        Fault::DanglingEndpoint => {
            let e = h.edges.get_mut(&edge_ids[pick % edge_ids.len()]).unwrap();
            e.to = NodeId::generate();
        }
        Fault::StaleAggregate => {
            let n = h.recount().n_versions;
            h.attributes.insert(attr::N_VERSIONS.into(), AttrValue::Integer(n + 1));
        }
    }
}

fn steps() -> impl Strategy<Value = Vec<(usize, bool)>> {
    prop::collection::vec((0usize..64, any::<bool>()), 1..16)
}

fn fault() -> impl Strategy<Value = Fault> {
    prop_oneof![
        Just(Fault::RootKind),
        Just(Fault::ExtraRoot),
        Just(Fault::CycleEdge),
        Just(Fault::KindMatrix),
        Just(Fault::DanglingEndpoint),
        Just(Fault::StaleAggregate),
    ]
}

proptest! {
    #[test]
    fn generated_trees_are_valid(steps in steps()) {
        let h = build_tree(&steps);
        prop_assert!(validate_hypernode(&h).is_empty());
        prop_assert_eq!(h.nodes.len(), h.edges.len() + 1);
        prop_assert_eq!(validate_hypernode(&h), validate_hypernode(&h));
        for (depth, node, _) in h.preorder() {
            prop_assert_eq!(h.depth_of(&node.id), Some(depth));
        }
    }

    #[test]
    fn every_injected_fault_is_named(steps in steps(), fault in fault(), pick in 0usize..64) {
        let mut h = build_tree(&steps);
        inject(&mut h, fault, pick);
        let rules: BTreeSet<Rule> = validate_hypernode(&h).iter().map(|v| v.rule).collect();
        prop_assert!(rules.contains(&fault.rule()), "{:?} gave {:?}", fault, rules);
    }

    #[test]
    fn tag_normalization_is_idempotent(raw in "\\PC{0,12}") {
        let once = normalize_tag(&raw);
        prop_assert_eq!(normalize_tag(&once), once);
    }

    #[test]
    fn token_jaccard_matches_set_oracle(a in "[a-e ]{0,20}", b in "[a-e ]{0,20}") {
        let sa: BTreeSet<String> = a.split(' ').filter(|t| !t.is_empty()).map(str::to_owned).collect();
        let sb: BTreeSet<String> = b.split(' ').filter(|t| !t.is_empty()).map(str::to_owned).collect();
        let union = sa.union(&sb).count();
        let expected = if union == 0 { 0.0 } else { sa.intersection(&sb).count() as f64 / union as f64 };
        prop_assert_eq!(token_jaccard(&a, &b), expected);
        prop_assert_eq!(token_jaccard(&a, &b), token_jaccard(&b, &a));
        if !sa.is_empty() {
            prop_assert_eq!(token_jaccard(&a, &a), 1.0);
        }
    }

    #[test]
    fn thesaurus_expansion_laws(
        classes in prop::collection::vec(prop::collection::btree_set("[a-h]", 1..4), 0..4),
        terms in prop::collection::btree_set("[a-j]", 0..5),
    ) {
        // keep classes disjoint
        let mut seen = BTreeSet::new();
        let mut lines = Vec::new();
        for class in classes {
            let fresh: Vec<String> = class.into_iter().filter(|t| seen.insert(t.clone())).collect();
            if !fresh.is_empty() {
                lines.push(fresh.join(", "));
            }
        }
        let th = Thesaurus::parse("t", &lines.join("\n")).unwrap();
        let once = th.expand(terms.iter().map(String::as_str));
        prop_assert!(once.is_superset(&terms));
        prop_assert_eq!(th.expand(once.iter().map(String::as_str)), once.clone());
        for class in th.classes() {
            let canon: BTreeSet<String> = class.iter().map(|t| th.canonical(t)).collect();
            prop_assert_eq!(canon.len(), 1);
        }
    }

    #[test]
    fn search_matches_naive_scan(
        docs in prop::collection::vec(prop::collection::vec("[a-f]", 0..6), 1..20),
        query in prop::collection::vec("[a-g]", 1..4),
        all in any::<bool>(),
        expand in any::<bool>(),
    ) {
        let th = Thesaurus::parse("t", "a, b\nc, d, e\n").unwrap();
        let objects: Vec<Hypernode> = docs
            .iter()
            .map(|words| {
                let mut h = build_tree(&[]);
                h.attributes.insert(attr::TITLE.into(), AttrValue::text(words.join(" ")));
                h
            })
            .collect();
        let tk = Tokenizer::default();
        let idx = build_index(&objects, &tk);
        let mode = if all { SearchMode::AllTerms } else { SearchMode::AnyTerm };
        let q = query.join(" ");
        let hits = search_index(&idx, &tk, &q, mode, expand.then_some(&th)).unwrap();
        let got: BTreeSet<&ObjectId> = hits.iter().map(|h| &h.object).collect();

        let groups: Vec<BTreeSet<String>> = query
            .iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(|t| if expand { th.expand([t.as_str()]) } else { BTreeSet::from([t.clone()]) })
            .collect();
        let expected: BTreeSet<&ObjectId> = objects
            .iter()
            .zip(&docs)
            .filter(|(_, words)| {
                let hit = |g: &BTreeSet<String>| words.iter().any(|w| g.contains(w));
                if all { groups.iter().all(hit) } else { groups.iter().any(hit) }
            })
            .map(|(h, _)| &h.id)
            .collect();
        prop_assert_eq!(got, expected);
        for w in hits.windows(2) {
            prop_assert!((w[0].score, &w[1].object) >= (w[1].score, &w[0].object));
        }
    }

    #[test]
    fn components_match_bfs_oracle(
        n in 1usize..30,
        edges in prop::collection::vec((0usize..30, 0usize..30), 0..40),
    ) {
        let ids: Vec<ObjectId> = (0..n).map(|i| ObjectId::new(format!("o{i:02}"))).collect();
        let edges: Vec<(usize, usize)> = edges.into_iter().map(|(a, b)| (a % n, b % n)).collect();
        let got = components(&ids, edges.iter().map(|&(a, b)| (&ids[a], &ids[b])));

        let mut expected: BTreeSet<BTreeSet<ObjectId>> = BTreeSet::new();
        let mut seen = BTreeSet::new();
        for start in 0..n {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = BTreeSet::from([ids[start].clone()]);
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for &(a, b) in &edges {
                    let next = if a == x { b } else if b == x { a } else { continue };
                    if seen.insert(next) {
                        comp.insert(ids[next].clone());
                        queue.push_back(next);
                    }
                }
            }
            expected.insert(comp);
        }
        prop_assert_eq!(got.iter().cloned().collect::<BTreeSet<_>>(), expected);
        let firsts: Vec<&ObjectId> = got.iter().map(|c| c.first().unwrap()).collect();
        prop_assert!(firsts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn lineage_directions_are_converse(
        links in prop::collection::vec((prop::collection::btree_set(0usize..12, 2..4), 0usize..12), 0..10),
    ) {
        let ids: Vec<ObjectId> = (0..12).map(|i| ObjectId::new(format!("o{i:02}"))).collect();
        let mut graph = InterLinks::default();
        for (parents, child) in links {
            // only keep edges pointing forward so the graph stays acyclic
            let parents: BTreeSet<ObjectId> =
                parents.into_iter().filter(|p| *p < child).map(|p| ids[p].clone()).collect();
            if parents.len() >= 2 {
                let l = ParenthoodLink {
                    id: LinkId::generate(),
                    parents,
                    child: ids[child].clone(),
                    attributes: Attributes::new(),
                };
                graph.parenthood.insert(l.id.clone(), l);
            }
        }
        for a in &ids {
            for b in lineage_of(&graph, a, Direction::Ancestors) {
                prop_assert!(lineage_of(&graph, &b, Direction::Descendants).contains(a));
            }
        }
    }

    #[test]
    fn json_schema_paths_match_traversal(value in json_value()) {
        let text = serde_json::to_vec(&value).unwrap();
        let summary = schema_from_bytes(&text, DetectedFormat::Json, "p.json").unwrap();
        let got: BTreeSet<String> = summary.schema_paths().into_iter().map(str::to_owned).collect();
        let mut expected = BTreeSet::new();
        json_paths(&value, String::new(), &mut expected);
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn tokenize_is_lowercase_alphanumeric(text in "\\PC{0,40}") {
        for t in tokenize(&text) {
            prop_assert!(!t.is_empty());
            prop_assert!(t.chars().all(char::is_alphanumeric));
            prop_assert_eq!(t.to_lowercase(), t.clone());
        }
    }
}

fn json_value() -> impl Strategy<Value = serde_json::Value> {
    use serde_json::Value;
    let leaf = prop_oneof![
        Just(Value::Null),
        any::<bool>().prop_map(Value::Bool),
        (-100i64..100).prop_map(Value::from),
        "[a-z]{0,3}".prop_map(Value::from),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..3).prop_map(Value::Array),
            prop::collection::btree_map("[a-c]", inner, 0..3)
                .prop_map(|m| Value::Object(m.into_iter().collect())),
        ]
    })
}

/// Independent flattening used as the oracle: leaves and empty containers
/// are the paths.
fn json_paths(v: &serde_json::Value, path: String, out: &mut BTreeSet<String>) {
    use serde_json::Value;
    let join = |p: &str, k: &str| if p.is_empty() { k.to_owned() } else { format!("{p}.{k}") };
    match v {
        Value::Object(m) if !m.is_empty() => {
            for (k, child) in m {
                json_paths(child, join(&path, k), out);
            }
        }
        Value::Array(items) if !items.is_empty() => {
            for child in items {
                json_paths(child, format!("{path}[]"), out);
            }
        }
        _ => {
            out.insert(if path.is_empty() { "$".to_owned() } else { path });
        }
    }
}

#[derive(Debug, Clone)]
enum Op {
    Create(u8),
    Represent(usize, usize),
    Version(usize, usize, bool),
    Tag(usize, u8),
    Describe(usize, u8),
    Access(usize),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        any::<u8>().prop_map(Op::Create),
        (any::<usize>(), any::<usize>()).prop_map(|(a, b)| Op::Represent(a, b)),
        (any::<usize>(), any::<usize>(), any::<bool>()).prop_map(|(a, b, c)| Op::Version(a, b, c)),
        (any::<usize>(), any::<u8>()).prop_map(|(a, b)| Op::Tag(a, b)),
        (any::<usize>(), any::<u8>()).prop_map(|(a, b)| Op::Describe(a, b)),
        any::<usize>().prop_map(Op::Access),
    ]
}

const WORDS: [&str; 8] = ["lake", "sales", "price", "tweet", "video", "stock", "order", "meta"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn catalog_stays_consistent_under_random_ops(ops in prop::collection::vec(op(), 1..40)) {
        let lake = Lake::new();
        let mut c = lake.open();
        let mut ids: Vec<ObjectId> = Vec::new();
        for op in ops {
            let nodes = |c: &medal_core::Catalog, o: &ObjectId| -> Vec<NodeId> {
                c.object(o).unwrap().nodes.keys().cloned().collect()
            };
            match op {
                Op::Create(w) => {
                    let title = WORDS[w as usize % WORDS.len()];
                    ids.push(c.create_object("/raw", props(title, "gen", "text")).unwrap());
                }
                _ if ids.is_empty() => {}
                Op::Represent(o, n) => {
                    let o = &ids[o % ids.len()];
                    let ns = nodes(&c, o);
                    c.add_representation(o, &ns[n % ns.len()], TransformationSpec::new("t"), Attributes::new()).unwrap();
                }
                Op::Version(o, n, in_place) => {
                    let o = &ids[o % ids.len()];
                    let h = c.object(o).unwrap();
                    let vs: Vec<NodeId> = h.nodes.values().filter(|n| n.kind() == NodeKind::Version).map(|n| n.id.clone()).collect();
                    let mut u = UpdateSpec::new("u", "/next");
                    if in_place {
                        u = u.in_place();
                    }
                    c.add_version(o, &vs[n % vs.len()], u, Attributes::new()).unwrap();
                }
                Op::Tag(o, w) => {
                    let o = ids[o % ids.len()].clone();
                    c.tag_object(&o, [WORDS[w as usize % WORDS.len()]], medal_core::model::TagSource::Manual).unwrap();
                }
                Op::Describe(o, w) => {
                    let o = ids[o % ids.len()].clone();
                    c.describe_object(&o, WORDS[w as usize % WORDS.len()]).unwrap();
                }
                Op::Access(o) => {
                    let o = ids[o % ids.len()].clone();
                    c.get_object(&o, true).unwrap();
                }
            }
        }
        for h in c.objects() {
            prop_assert!(validate_hypernode(h).is_empty());
            prop_assert_eq!(h.nodes.len(), h.edges.len() + 1);
        }
        let seqs: Vec<u64> = c.events().iter().map(|e| e.seq).collect();
        prop_assert_eq!(seqs, (1..=c.events().len() as u64).collect::<Vec<_>>());
        prop_assert_eq!(c.replay_counts(), c.live_counts());
        let live = c.index().clone();
        c.rebuild_index();
        prop_assert_eq!(c.index(), &live);

        let export = c.export();
        drop(c);
        let reopened = open_fast(&lake.catalog_path());
        prop_assert_eq!(reopened.export(), export);
    }
}

#[test]
fn attribute_groupings_partition_their_carriers() {
    let lake = Lake::new();
    let mut c = lake.open();
    for i in 0..12 {
        let mut p = props(&format!("o{i}"), ["a", "b", "c"][i % 3], "csv");
        if i % 4 == 0 {
            p.insert("owner".into(), AttrValue::text(["x", "y"][i % 2]));
        }
        c.create_object("/raw", p).unwrap();
    }
    for param in [attr::ORIGIN, "owner"] {
        let g = c.group_by(param).unwrap();
        let carriers: BTreeSet<ObjectId> =
            c.objects().filter(|h| h.attributes.contains_key(param)).map(|h| h.id.clone()).collect();
        let mut union = BTreeSet::new();
        for members in g.collections.values() {
            for m in members {
                assert!(union.insert(m.clone()), "collections overlap");
            }
        }
        assert_eq!(union, carriers);
    }
    let _: BTreeMap<(), ()> = BTreeMap::new();
}
