//! Links between objects: similarity edges, attribute groupings, parenthood
//! hyperedges, and the traversals built on them.

mod metric;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fs;
use std::str::FromStr;

use chrono::Utc;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::auditlog::{detail, Action, Detail, Target};
use crate::error::{Error, Result};
use crate::model::{
    attr, AttrValue, Attributes, Grouping, GroupingBasis, Hypernode, InterLinks, LinkId, MetaNode,
    NodeId, NodeKind, ObjectId, ParenthoodLink, SimilarityLink,
};
use crate::store::{Catalog, LinkRecord, Txn};

pub use metric::{
    jaccard, token_jaccard, Content, MetricRegistry, SchemaOverlap, SimilarityMetric, TokenJaccard,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Ancestors,
    Descendants,
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ancestors" | "up" => Ok(Direction::Ancestors),
            "descendants" | "down" => Ok(Direction::Descendants),
            other => Err(format!("unknown direction `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub object: ObjectId,
    /// Highest stored similarity with the query object; 0 when only tags are shared.
    pub score: f64,
    pub shared_tags: usize,
}

/// The node a metric is applied to: the most recent applicable version,
/// otherwise the most recent applicable representation.
pub fn select_node<'a>(h: &'a Hypernode, metric: &dyn SimilarityMetric) -> Option<&'a MetaNode> {
    let applicable = |n: &&MetaNode| {
        n.locator().is_some() && n.format().is_some_and(|f| metric.applies_to(f))
    };
    let newest = |a: &&MetaNode, b: &&MetaNode| {
        a.created_at.cmp(&b.created_at).then_with(|| a.id.cmp(&b.id))
    };
    h.nodes
        .values()
        .filter(|n| n.kind() == NodeKind::Version)
        .filter(applicable)
        .max_by(newest)
        .or_else(|| h.nodes.values().filter(applicable).max_by(newest))
}

struct Side {
    object: ObjectId,
    node: NodeId,
    format: String,
    bytes: Vec<u8>,
}

impl Side {
    fn content(&self) -> Content<'_> {
        Content {
            format: &self.format,
            bytes: &self.bytes,
        }
    }
}

fn load_side(h: &Hypernode, metric: &dyn SimilarityMetric) -> Result<Option<Side>> {
    let Some(node) = select_node(h, metric) else {
        return Ok(None);
    };
    let loc = node.locator().expect("selected nodes have a locator");
    let bytes = fs::read(loc).map_err(|source| Error::Unreadable {
        path: loc.into(),
        source,
    })?;
    Ok(Some(Side {
        object: h.id.clone(),
        node: node.id.clone(),
        format: node.format().unwrap_or_default().to_owned(),
        bytes,
    }))
}

fn check_value(metric: &str, value: f64) -> Result<f64> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidArgument(format!(
            "metric `{metric}` returned {value}, outside [0, 1]"
        )))
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if (0.0..=1.0).contains(&threshold) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "threshold {threshold} is outside [0, 1]"
        )))
    }
}

/// Connected components of `nodes` under `edges`, each sorted, ordered by
/// their smallest member.
pub fn components<'a>(
    nodes: impl IntoIterator<Item = &'a ObjectId>,
    edges: impl IntoIterator<Item = (&'a ObjectId, &'a ObjectId)>,
) -> Vec<BTreeSet<ObjectId>> {
    let ids: Vec<&ObjectId> = nodes.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    let pos: BTreeMap<&ObjectId, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (a, b) in edges {
        let (Some(&a), Some(&b)) = (pos.get(a), pos.get(b)) else {
            continue;
        };
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            // smaller index stays root so component order is stable
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            parent[hi] = lo;
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<ObjectId>> = BTreeMap::new();
    for i in 0..ids.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().insert(ids[i].clone());
    }
    groups.into_values().collect()
}

/// Transitive closure over parenthood hyperedges from `obj`, excluding `obj`.
pub fn lineage_of(links: &InterLinks, obj: &ObjectId, direction: Direction) -> BTreeSet<ObjectId> {
    let mut out = BTreeSet::new();
    let mut queue = VecDeque::from([obj.clone()]);
    while let Some(current) = queue.pop_front() {
        for link in links.parenthood.values() {
            let next: Vec<&ObjectId> = match direction {
                Direction::Ancestors if link.child == current => link.parents.iter().collect(),
                Direction::Descendants if link.parents.contains(&current) => vec![&link.child],
                _ => continue,
            };
            for n in next {
                if n != obj && out.insert(n.clone()) {
                    queue.push_back(n.clone());
                }
            }
        }
    }
    out
}

impl Catalog {
    fn existing_similarity(&self, a: &ObjectId, b: &ObjectId, metric: &str) -> Option<LinkId> {
        let key = if a <= b { (a, b) } else { (b, a) };
        self.links()
            .similarity
            .values()
            .find(|l| (&l.endpoints.0, &l.endpoints.1) == key && l.metric == metric)
            .map(|l| l.id.clone())
    }

    fn similarity_link(&self, a: &Side, b: &Side, metric: &str, value: f64) -> SimilarityLink {
        let mut link = SimilarityLink::new(
            (a.object.clone(), a.node.clone()),
            (b.object.clone(), b.node.clone()),
            metric,
            value,
            Utc::now(),
        );
        if let Some(id) = self.existing_similarity(&a.object, &b.object, metric) {
            link.id = id;
        }
        link
    }

    /// Computes and stores the similarity of two objects. A previous link
    /// for the same pair and metric is replaced.
    pub fn compute_similarity(
        &mut self,
        a: &ObjectId,
        b: &ObjectId,
        metric: &str,
    ) -> Result<SimilarityLink> {
        if a == b {
            return Err(Error::InvalidArgument(
                "an object cannot be linked to itself".into(),
            ));
        }
        let m = self.metrics().get(metric)?;
        let not_comparable = || Error::NotComparable {
            a: a.to_string(),
            b: b.to_string(),
            metric: metric.to_owned(),
        };
        let side_a = load_side(self.object(a)?, m.as_ref())?.ok_or_else(not_comparable)?;
        let side_b = load_side(self.object(b)?, m.as_ref())?.ok_or_else(not_comparable)?;
        let value = check_value(metric, m.compute(side_a.content(), side_b.content())?)?;
        let link = self.similarity_link(&side_a, &side_b, metric, value);

        let detail = Detail::from([
            (detail::OP.into(), "similarity".into()),
            ("metric".into(), metric.to_owned()),
            ("other".into(), b.to_string()),
            ("value".into(), value.to_string()),
        ]);
        let mut txn = Txn::default();
        txn.event(self.pending(Action::Link, Target::Object(a.clone()), detail));
        txn.links.push(LinkRecord::Similarity(link.clone()));
        self.apply(txn)?;
        Ok(link)
    }

    /// Computes `metric` over every comparable pair and stores the links
    /// whose value reaches `threshold`. Returns the number stored.
    pub fn link_all(&mut self, metric: &str, threshold: f64) -> Result<usize> {
        check_threshold(threshold)?;
        let m = self.metrics().get(metric)?;
        let mut sides = Vec::new();
        for h in self.objects() {
            // objects whose content cannot be read are skipped like non-comparable ones
            if let Ok(Some(side)) = load_side(h, m.as_ref()) {
                sides.push(side);
            }
        }
        let pairs: Vec<(usize, usize)> = (0..sides.len())
            .flat_map(|i| (i + 1..sides.len()).map(move |j| (i, j)))
            .collect();
        let values: Vec<Option<f64>> = pairs
            .par_iter()
            .map(|&(i, j)| {
                m.compute(sides[i].content(), sides[j].content())
                    .ok()
                    .and_then(|v| check_value(metric, v).ok())
            })
            .collect();

        let mut txn = Txn::default();
        for (&(i, j), value) in pairs.iter().zip(values) {
            if let Some(v) = value.filter(|v| *v >= threshold) {
                let link = self.similarity_link(&sides[i], &sides[j], metric, v);
                txn.links.push(LinkRecord::Similarity(link));
            }
        }
        let stored = txn.links.len();
        let detail = Detail::from([
            (detail::OP.into(), "link-all".into()),
            ("metric".into(), metric.to_owned()),
            ("threshold".into(), threshold.to_string()),
            ("links".into(), stored.to_string()),
        ]);
        txn.event(self.pending(Action::Link, Target::Query(format!("link-all {metric}")), detail));
        self.apply(txn)?;
        Ok(stored)
    }

    /// Connected components over stored similarity links with value at or
    /// above `threshold`, optionally restricted to one metric. Unlinked
    /// objects form singletons.
    pub fn clusters(&self, threshold: f64, metric: Option<&str>) -> Vec<BTreeSet<ObjectId>> {
        let edges = self
            .links()
            .similarity
            .values()
            .filter(|l| l.value >= threshold && metric.is_none_or(|m| l.metric == m))
            .map(|l| (&l.endpoints.0, &l.endpoints.1));
        let ids: Vec<&ObjectId> = self.objects().map(|h| &h.id).collect();
        components(ids, edges)
    }

    /// Partitions the objects carrying attribute `parameter` by its value and
    /// stores the grouping under the parameter name.
    pub fn group_by(&mut self, parameter: &str) -> Result<Grouping> {
        if parameter.trim().is_empty() {
            return Err(Error::InvalidArgument("grouping parameter is empty".into()));
        }
        let mut collections: BTreeMap<String, BTreeSet<ObjectId>> = BTreeMap::new();
        for h in self.objects() {
            if let Some(v) = h.attributes.get(parameter) {
                collections.entry(v.to_string()).or_default().insert(h.id.clone());
            }
        }
        let grouping = Grouping {
            parameter: parameter.to_owned(),
            basis: GroupingBasis::Attribute,
            thesaurus: None,
            collections,
            computed_at: Utc::now(),
        };
        self.store_grouping(grouping.clone(), "group-by")?;
        Ok(grouping)
    }

    pub(crate) fn store_grouping(&mut self, grouping: Grouping, op: &str) -> Result<()> {
        let mut detail = Detail::from([
            (detail::OP.into(), op.to_owned()),
            ("collections".into(), grouping.collections.len().to_string()),
        ]);
        if let Some(t) = &grouping.thesaurus {
            detail.insert("thesaurus".into(), t.clone());
        }
        let mut txn = Txn::default();
        txn.event(self.pending(Action::Link, Target::Query(grouping.key()), detail));
        txn.groupings.push(grouping);
        self.apply(txn)?;
        Ok(())
    }

    /// Records that `child` was produced from `parents` (at least two).
    pub fn add_parenthood(
        &mut self,
        parents: impl IntoIterator<Item = ObjectId>,
        child: &ObjectId,
        attrs: Attributes,
    ) -> Result<LinkId> {
        let parents: BTreeSet<ObjectId> = parents.into_iter().collect();
        if parents.len() < 2 {
            return Err(Error::TooFewParents(parents.len()));
        }
        self.object(child)?;
        for p in &parents {
            self.object(p)?;
        }
        if parents.contains(child) {
            return Err(Error::CycleDetected(child.to_string()));
        }
        let below = lineage_of(self.links(), child, Direction::Descendants);
        if let Some(p) = parents.iter().find(|p| below.contains(*p)) {
            return Err(Error::CycleDetected(p.to_string()));
        }

        let mut attributes = attrs;
        attributes
            .entry(attr::ACTOR.into())
            .or_insert_with(|| AttrValue::text(self.actor()));
        attributes
            .entry(attr::AT.into())
            .or_insert_with(|| AttrValue::Timestamp(Utc::now()));
        let link = ParenthoodLink {
            id: LinkId::generate(),
            parents: parents.clone(),
            child: child.clone(),
            attributes,
        };
        let id = link.id.clone();
        let detail = Detail::from([
            (detail::OP.into(), "parenthood".into()),
            (
                "parents".into(),
                parents.iter().map(ObjectId::as_str).collect::<Vec<_>>().join(","),
            ),
        ]);
        let mut txn = Txn::default();
        txn.event(self.pending(Action::Link, Target::Object(child.clone()), detail));
        txn.links.push(LinkRecord::Parenthood(link));
        self.apply(txn)?;
        Ok(id)
    }

    pub fn lineage(&self, obj: &ObjectId, direction: Direction) -> Result<BTreeSet<ObjectId>> {
        self.object(obj)?;
        Ok(lineage_of(self.links(), obj, direction))
    }

    /// Objects that share a parenthood hyperedge with `obj` as fellow parents.
    pub fn co_parents(&self, obj: &ObjectId) -> Result<BTreeSet<ObjectId>> {
        self.object(obj)?;
        Ok(self
            .links()
            .parenthood
            .values()
            .filter(|l| l.parents.contains(obj))
            .flat_map(|l| l.parents.iter())
            .filter(|p| *p != obj)
            .cloned()
            .collect())
    }

    /// Up to `k` related objects ranked by highest stored similarity, then by
    /// number of shared tags, then by id.
    pub fn recommend(&self, obj: &ObjectId, k: usize) -> Result<Vec<Recommendation>> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        let me = self.object(obj)?;
        let mut best: BTreeMap<&ObjectId, f64> = BTreeMap::new();
        for l in self.links().similarity.values() {
            if let Some(other) = l.other(obj) {
                let e = best.entry(other).or_insert(0.0);
                *e = e.max(l.value);
            }
        }
        let mut shared: BTreeMap<&ObjectId, usize> = BTreeMap::new();
        for h in self.objects() {
            if &h.id == obj {
                continue;
            }
            let n = h.tags.keys().filter(|t| me.tags.contains_key(*t)).count();
            if n > 0 {
                shared.insert(&h.id, n);
            }
        }
        let candidates: BTreeSet<&ObjectId> = best.keys().chain(shared.keys()).copied().collect();
        let mut out: Vec<Recommendation> = candidates
            .into_iter()
            .map(|id| Recommendation {
                object: id.clone(),
                score: best.get(id).copied().unwrap_or(0.0),
                shared_tags: shared.get(id).copied().unwrap_or(0),
            })
            .collect();
        out.sort_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then_with(|| b.shared_tags.cmp(&a.shared_tags))
                .then_with(|| a.object.cmp(&b.object))
        });
        out.truncate(k);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(names: &[&str]) -> Vec<ObjectId> {
        names.iter().map(|n| ObjectId::new(*n)).collect()
    }

    #[test]
    fn components_include_singletons() {
        let n = ids(&["a", "b", "c", "d"]);
        let comps = components(&n, [(&n[0], &n[1]), (&n[1], &n[2])]);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].len(), 3);
        assert_eq!(comps[1], BTreeSet::from([n[3].clone()]));
    }

    #[test]
    fn lineage_follows_hyperedges() {
        let n = ids(&["a", "b", "c", "d", "e"]);
        let mut links = InterLinks::default();
        for (parents, child) in [(vec![0, 1], 2), (vec![2, 3], 4)] {
            let l = ParenthoodLink {
                id: LinkId::generate(),
                parents: parents.iter().map(|&i| n[i].clone()).collect(),
                child: n[child].clone(),
                attributes: Attributes::new(),
            };
            links.parenthood.insert(l.id.clone(), l);
        }
        assert_eq!(
            lineage_of(&links, &n[4], Direction::Ancestors),
            BTreeSet::from([n[0].clone(), n[1].clone(), n[2].clone(), n[3].clone()])
        );
        assert_eq!(
            lineage_of(&links, &n[0], Direction::Descendants),
            BTreeSet::from([n[2].clone(), n[4].clone()])
        );
    }
}
