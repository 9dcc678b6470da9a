use std::collections::BTreeSet;
use std::io::{self, Write};

use medal_core::auditlog::EventRecord;
use medal_core::index::{IndexStats, SearchHit};
use medal_core::inter::Recommendation;
use medal_core::intra::TreeView;
use medal_core::model::{
    Attributes, Content, Grouping, Hypernode, LinkId, MetaNode, NodeId, ObjectId,
    SimilarityLink, Summary,
};
use medal_core::store::ValidationReport;
use medal_core::Catalog;
use serde::Serialize;
use serde_json::json;

/// Node ids are shown by this many leading characters.
pub const SHORT: usize = 8;

pub struct Printer<'a> {
    out: &'a mut dyn Write,
    json: bool,
}

fn title(c: &Catalog, id: &ObjectId) -> String {
    c.object(id).map(|h| h.title().to_owned()).unwrap_or_default()
}

fn content(node: &MetaNode) -> String {
    match &node.content {
        Some(Content::Locator(l)) => l.clone(),
        Some(Content::OnDemandView) => "(on demand)".into(),
        None => "-".into(),
    }
}

impl<'a> Printer<'a> {
    pub fn new(out: &'a mut dyn Write, json: bool) -> Self {
        Self { out, json }
    }

    fn json<T: Serialize + ?Sized>(&mut self, value: &T) -> io::Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
        writeln!(self.out, "{text}")
    }

    pub fn raw(&mut self, text: &str) -> io::Result<()> {
        writeln!(self.out, "{text}")
    }

    pub fn init(&mut self, c: &Catalog) -> io::Result<()> {
        if self.json {
            return self.json(&json!({ "catalog": c.root(), "objects": c.len() }));
        }
        writeln!(self.out, "catalog ready at {} ({} objects)", c.root().display(), c.len())
    }

    pub fn ingested(
        &mut self,
        c: &Catalog,
        items: &[(ObjectId, Vec<String>)],
        accepted: bool,
    ) -> io::Result<()> {
        if self.json {
            let v: Vec<_> = items
                .iter()
                .map(|(id, proposed)| {
                    json!({
                        "object": id,
                        "title": title(c, id),
                        "proposed_tags": proposed,
                        "accepted": accepted,
                    })
                })
                .collect();
            return self.json(&v);
        }
        for (id, proposed) in items {
            writeln!(self.out, "{id}\t{}", title(c, id))?;
            if !proposed.is_empty() && !accepted {
                writeln!(self.out, "  proposed tags: {}", proposed.join(", "))?;
            }
        }
        Ok(())
    }

    pub fn object(&mut self, h: &Hypernode) -> io::Result<()> {
        if self.json {
            return self.json(h);
        }
        writeln!(self.out, "object      {}", h.id)?;
        writeln!(self.out, "title       {}", h.title())?;
        if let Some(d) = &h.description {
            writeln!(self.out, "description {d}")?;
        }
        if !h.tags.is_empty() {
            let tags: Vec<String> = h
                .tags
                .iter()
                .map(|(t, s)| format!("{t} ({})", s.as_str()))
                .collect();
            writeln!(self.out, "tags        {}", tags.join(", "))?;
        }
        self.attributes(&h.attributes, "")?;
        match &h.summary {
            Some(Summary::Schema { fields, records }) => {
                write!(self.out, "schema      {} fields", fields.len())?;
                match records {
                    Some(n) => writeln!(self.out, ", {n} records")?,
                    None => writeln!(self.out)?,
                }
                for f in fields {
                    writeln!(self.out, "  {}\t{}\t{}", f.path, f.value_type.as_str(), f.count)?;
                }
            }
            Some(Summary::WordCloud { terms }) => {
                let t: Vec<String> = terms.iter().map(|t| format!("{}:{}", t.term, t.frequency)).collect();
                writeln!(self.out, "word cloud  {}", t.join(" "))?;
            }
            None => {}
        }
        writeln!(self.out, "nodes       {}", h.nodes.len())?;
        Ok(())
    }

    fn attributes(&mut self, attrs: &Attributes, indent: &str) -> io::Result<()> {
        for (k, v) in attrs {
            writeln!(self.out, "{indent}  {k} = {v}")?;
        }
        Ok(())
    }

    pub fn tree(&mut self, tree: &TreeView) -> io::Result<()> {
        if self.json {
            return self.json(tree);
        }
        writeln!(self.out, "{}", tree.object)?;
        for e in &tree.entries {
            let indent = "  ".repeat(e.depth);
            let via = e
                .edge
                .as_ref()
                .map(|edge| format!("{} ", edge.kind))
                .unwrap_or_default();
            let format = e.node.format().map(|f| format!(" [{f}]")).unwrap_or_default();
            writeln!(
                self.out,
                "{indent}{via}{} {} {}{format}",
                e.node.id.short(SHORT),
                e.node.kind(),
                content(&e.node),
            )?;
        }
        Ok(())
    }

    pub fn node(&mut self, obj: &ObjectId, node: &NodeId) -> io::Result<()> {
        if self.json {
            return self.json(&json!({ "object": obj, "node": node }));
        }
        writeln!(self.out, "{}", node.short(SHORT))
    }

    pub fn tags(&mut self, obj: &ObjectId, tags: &BTreeSet<String>) -> io::Result<()> {
        if self.json {
            return self.json(&json!({ "object": obj, "tags": tags }));
        }
        writeln!(self.out, "{}", tags.iter().cloned().collect::<Vec<_>>().join(", "))
    }

    pub fn done(&mut self, obj: &ObjectId) -> io::Result<()> {
        if self.json {
            return self.json(&json!({ "object": obj }));
        }
        writeln!(self.out, "ok {obj}")
    }

    pub fn similarity(&mut self, link: &SimilarityLink) -> io::Result<()> {
        if self.json {
            return self.json(link);
        }
        writeln!(
            self.out,
            "{}\t{}\t{}\t{}",
            link.value, link.endpoints.0, link.endpoints.1, link.metric
        )
    }

    pub fn count(&mut self, what: &str, n: usize) -> io::Result<()> {
        if self.json {
            return self.json(&json!({ what: n }));
        }
        writeln!(self.out, "{n} {what}")
    }

    pub fn clusters(&mut self, clusters: &[BTreeSet<ObjectId>]) -> io::Result<()> {
        if self.json {
            return self.json(clusters);
        }
        for c in clusters {
            let ids: Vec<&str> = c.iter().map(ObjectId::as_str).collect();
            writeln!(self.out, "{}", ids.join(" "))?;
        }
        Ok(())
    }

    pub fn grouping(&mut self, g: &Grouping) -> io::Result<()> {
        if self.json {
            return self.json(g);
        }
        for (key, members) in &g.collections {
            let ids: Vec<&str> = members.iter().map(ObjectId::as_str).collect();
            writeln!(self.out, "{key}\t{}", ids.join(" "))?;
        }
        Ok(())
    }

    pub fn link_id(&mut self, id: &LinkId) -> io::Result<()> {
        if self.json {
            return self.json(&json!({ "link": id }));
        }
        writeln!(self.out, "{id}")
    }

    pub fn ids(&mut self, c: &Catalog, ids: &BTreeSet<ObjectId>) -> io::Result<()> {
        if self.json {
            return self.json(ids);
        }
        for id in ids {
            writeln!(self.out, "{id}\t{}", title(c, id))?;
        }
        Ok(())
    }

    pub fn recommendations(&mut self, c: &Catalog, recs: &[Recommendation]) -> io::Result<()> {
        if self.json {
            return self.json(recs);
        }
        for r in recs {
            writeln!(
                self.out,
                "{:.3}\t{}\t{}\t{}",
                r.score,
                r.shared_tags,
                r.object,
                title(c, &r.object)
            )?;
        }
        Ok(())
    }

    pub fn hits(&mut self, c: &Catalog, hits: &[SearchHit]) -> io::Result<()> {
        if self.json {
            let v: Vec<_> = hits
                .iter()
                .map(|h| json!({ "score": h.score, "object": h.object, "title": title(c, &h.object) }))
                .collect();
            return self.json(&v);
        }
        for h in hits {
            writeln!(self.out, "{}\t{}\t{}", h.score, h.object, title(c, &h.object))?;
        }
        Ok(())
    }

    pub fn access_report(&mut self, c: &Catalog, report: &[(ObjectId, u64)]) -> io::Result<()> {
        if self.json {
            let v: Vec<_> = report
                .iter()
                .map(|(id, n)| json!({ "object": id, "accesses": n }))
                .collect();
            return self.json(&v);
        }
        for (id, n) in report {
            writeln!(self.out, "{n}\t{id}\t{}", title(c, id))?;
        }
        Ok(())
    }

    pub fn events(&mut self, events: &[&EventRecord]) -> io::Result<()> {
        if self.json {
            return self.json(events);
        }
        for e in events {
            let detail: Vec<String> = e.detail.iter().map(|(k, v)| format!("{k}={v}")).collect();
            writeln!(
                self.out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                e.seq,
                e.at.to_rfc3339(),
                e.actor,
                e.action,
                e.target,
                detail.join(" ")
            )?;
        }
        Ok(())
    }

    pub fn resource_loaded(&mut self, c: &Catalog, name: &str) -> io::Result<()> {
        let classes = c.thesaurus(name).map(|t| t.classes().len()).unwrap_or(0);
        if self.json {
            return self.json(&json!({ "resource": name, "classes": classes }));
        }
        writeln!(self.out, "{name}\t{classes} synonym classes")
    }

    pub fn resources(&mut self, c: &Catalog) -> io::Result<()> {
        if self.json {
            let v: Vec<_> = c
                .resources()
                .iter()
                .map(|(name, r)| json!({ "name": name, "classes": r.thesaurus.classes() }))
                .collect();
            return self.json(&v);
        }
        for (name, r) in c.resources() {
            writeln!(self.out, "{name}\t{} synonym classes", r.thesaurus.classes().len())?;
        }
        Ok(())
    }

    pub fn list(&mut self, rows: &[(ObjectId, Attributes)]) -> io::Result<()> {
        if self.json {
            let v: Vec<_> = rows
                .iter()
                .map(|(id, attrs)| json!({ "object": id, "attributes": attrs }))
                .collect();
            return self.json(&v);
        }
        for (id, attrs) in rows {
            let get = |k: &str| attrs.get(k).map(ToString::to_string).unwrap_or_default();
            writeln!(
                self.out,
                "{id}\t{}\t{}\t{}",
                get("title"),
                get("format_class"),
                get("origin")
            )?;
        }
        Ok(())
    }

    pub fn validation(&mut self, report: &ValidationReport) -> io::Result<()> {
        if self.json {
            return self.json(report);
        }
        for v in &report.violations {
            writeln!(self.out, "error: {v}")?;
        }
        for v in &report.advisories {
            writeln!(self.out, "note: {v}")?;
        }
        if report.is_valid() {
            writeln!(self.out, "valid")?;
        }
        Ok(())
    }

    pub fn index_stats(&mut self, s: &IndexStats) -> io::Result<()> {
        if self.json {
            return self.json(s);
        }
        writeln!(
            self.out,
            "{} objects, {} terms, {} postings",
            s.objects, s.terms, s.postings
        )
    }
}
