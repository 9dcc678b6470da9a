//! Usage tracking: an append-only, sequentially numbered event log.
//!
//! Each record is one line of `log.jsonl` with the fields `seq`, `at`,
//! `actor`, `action`, `target` and `detail`. `seq` starts at 1 and has no
//! gaps; it doubles as the catalog's operation clock.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ObjectId;
use crate::store::{Catalog, Txn};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Action {
    Create,
    Update,
    Transform,
    Access,
    Tag,
    Link,
    Search,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::Create => "Create",
            Action::Update => "Update",
            Action::Transform => "Transform",
            Action::Access => "Access",
            Action::Tag => "Tag",
            Action::Link => "Link",
            Action::Search => "Search",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Action::Create,
            Action::Update,
            Action::Transform,
            Action::Access,
            Action::Tag,
            Action::Link,
            Action::Search,
        ]
        .into_iter()
        .find(|a| a.as_str().eq_ignore_ascii_case(s))
        .ok_or_else(|| format!("unknown action `{s}`"))
    }
}

/// What an event is about: an object, or free text such as a query.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Object(ObjectId),
    Query(String),
}

impl Target {
    pub fn object(&self) -> Option<&ObjectId> {
        match self {
            Target::Object(id) => Some(id),
            Target::Query(_) => None,
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Object(id) => write!(f, "{id}"),
            Target::Query(q) => write!(f, "{q:?}"),
        }
    }
}

pub type Detail = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub seq: u64,
    pub at: DateTime<Utc>,
    pub actor: String,
    pub action: Action,
    pub target: Target,
    #[serde(default)]
    pub detail: Detail,
}

/// An event waiting for its sequence number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PendingEvent {
    pub actor: String,
    pub action: Action,
    pub target: Target,
    pub detail: Detail,
}

/// Detail keys with meaning for replay.
pub mod detail {
    pub const OP: &str = "op";
    pub const NODE: &str = "node";
    pub const STRATEGY: &str = "strategy";
    pub const N_VERSIONS: &str = "n_versions";
    pub const N_REPRESENTATIONS: &str = "n_representations";
}

/// Object/version/representation counts rebuilt from the log alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReplayCounts {
    pub objects: u64,
    pub versions: u64,
    pub representations: u64,
}

/// Replays `Create`, `Update` and `Transform` events.
///
/// `Create` sets an object's counts from its detail (1 version, 0
/// representations by default). `Update` with the `new-version` strategy adds
/// a version; `Update` with `op=put` resets the counts from its detail.
/// `Transform` adds a representation.
pub fn replay(events: &[EventRecord]) -> ReplayCounts {
    let mut per_object: BTreeMap<&ObjectId, (u64, u64)> = BTreeMap::new();
    let count = |e: &EventRecord, key: &str, default: u64| {
        e.detail
            .get(key)
            .and_then(|v| v.parse().ok())
            .unwrap_or(default)
    };
    for e in events {
        let Target::Object(obj) = &e.target else {
            continue;
        };
        match e.action {
            Action::Create => {
                per_object.insert(
                    obj,
                    (
                        count(e, detail::N_VERSIONS, 1),
                        count(e, detail::N_REPRESENTATIONS, 0),
                    ),
                );
            }
            Action::Update if e.detail.get(detail::OP).map(String::as_str) == Some("put") => {
                per_object.insert(
                    obj,
                    (
                        count(e, detail::N_VERSIONS, 1),
                        count(e, detail::N_REPRESENTATIONS, 0),
                    ),
                );
            }
            Action::Update
                if e.detail.get(detail::STRATEGY).map(String::as_str) == Some("new-version") =>
            {
                if let Some(c) = per_object.get_mut(obj) {
                    c.0 += 1;
                }
            }
            Action::Transform => {
                if let Some(c) = per_object.get_mut(obj) {
                    c.1 += 1;
                }
            }
            _ => {}
        }
    }
    ReplayCounts {
        objects: per_object.len() as u64,
        versions: per_object.values().map(|c| c.0).sum(),
        representations: per_object.values().map(|c| c.1).sum(),
    }
}

impl Catalog {
    /// Appends one event and returns its sequence number. The record is on
    /// disk before this returns.
    pub fn record_event(
        &mut self,
        actor: &str,
        action: Action,
        target: Target,
        detail: Detail,
    ) -> Result<u64> {
        if actor.trim().is_empty() {
            return Err(Error::InvalidArgument("actor must not be empty".into()));
        }
        let mut txn = Txn::default();
        txn.event(PendingEvent {
            actor: actor.to_owned(),
            action,
            target,
            detail,
        });
        let seqs = self.apply(txn)?;
        Ok(seqs[0])
    }

    pub fn events(&self) -> &[EventRecord] {
        self.log_records()
    }

    /// All events whose target is `obj`, ascending by seq.
    pub fn events_for(&self, obj: &ObjectId) -> Vec<&EventRecord> {
        self.events()
            .iter()
            .filter(|e| e.target.object() == Some(obj))
            .collect()
    }

    /// Objects ranked by number of `Access` events at or after `since`,
    /// ties broken by object id.
    pub fn access_report(
        &self,
        top_k: usize,
        since: Option<DateTime<Utc>>,
    ) -> Result<Vec<(ObjectId, u64)>> {
        if top_k == 0 {
            return Err(Error::InvalidArgument("top_k must be at least 1".into()));
        }
        let mut counts: BTreeMap<&ObjectId, u64> = BTreeMap::new();
        for e in self.events() {
            if e.action != Action::Access || since.is_some_and(|s| e.at < s) {
                continue;
            }
            if let Some(obj) = e.target.object() {
                *counts.entry(obj).or_default() += 1;
            }
        }
        let mut ranked: Vec<(ObjectId, u64)> =
            counts.into_iter().map(|(o, c)| (o.clone(), c)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(top_k);
        Ok(ranked)
    }

    /// Counts recomputed from the log.
    pub fn replay_counts(&self) -> ReplayCounts {
        replay(self.events())
    }

    /// Counts taken from the current hypernodes.
    pub fn live_counts(&self) -> ReplayCounts {
        let mut c = ReplayCounts::default();
        for h in self.objects() {
            let agg = h.recount();
            c.objects += 1;
            c.versions += agg.n_versions as u64;
            c.representations += agg.n_representations as u64;
        }
        c
    }

    /// Distinct objects mentioned as event targets.
    pub fn logged_objects(&self) -> BTreeSet<&ObjectId> {
        self.events().iter().filter_map(|e| e.target.object()).collect()
    }
}
