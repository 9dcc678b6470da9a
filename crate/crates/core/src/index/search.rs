use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{InvertedIndex, Tokenizer};
use crate::error::{Error, Result};
use crate::model::ObjectId;
use crate::semantic::Thesaurus;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    AllTerms,
    #[default]
    AnyTerm,
}

impl FromStr for SearchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" | "all-terms" => Ok(SearchMode::AllTerms),
            "any" | "any-term" => Ok(SearchMode::AnyTerm),
            other => Err(format!("unknown search mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchHit {
    pub object: ObjectId,
    /// Number of distinct (expanded) query terms the object matched.
    pub score: usize,
}

/// Keyword search over the index.
///
/// Each query term forms a group: the term alone, or the term plus its
/// synonyms when a thesaurus is given. `AnyTerm` keeps objects matching any
/// group, `AllTerms` keeps objects matching every group. Hits are ranked by
/// score (descending), then object id.
pub fn search_index(
    index: &InvertedIndex,
    tokenizer: &Tokenizer,
    query: &str,
    mode: SearchMode,
    thesaurus: Option<&Thesaurus>,
) -> Result<Vec<SearchHit>> {
    let query_terms: BTreeSet<String> = tokenizer.tokenize(query).into_iter().collect();
    if query_terms.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let groups: Vec<BTreeSet<String>> = query_terms
        .iter()
        .map(|t| match thesaurus {
            Some(th) => th.expand([t.as_str()]),
            None => BTreeSet::from([t.clone()]),
        })
        .collect();
    let expanded: BTreeSet<&String> = groups.iter().flatten().collect();

    let mut matched: BTreeMap<&ObjectId, BTreeSet<&String>> = BTreeMap::new();
    for term in &expanded {
        for obj in index.objects_for(term) {
            matched.entry(obj).or_default().insert(term);
        }
    }

    let mut hits: Vec<SearchHit> = matched
        .into_iter()
        .filter(|(_, terms)| match mode {
            SearchMode::AnyTerm => true,
            SearchMode::AllTerms => groups
                .iter()
                .all(|g| g.iter().any(|t| terms.contains(t))),
        })
        .map(|(obj, terms)| SearchHit {
            object: obj.clone(),
            score: terms.len(),
        })
        .collect();
    hits.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.object.cmp(&b.object)));
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::tokenize;

    fn corpus(docs: &[(&str, &str)]) -> InvertedIndex {
        let mut idx = InvertedIndex::new();
        for (id, text) in docs {
            idx.replace_object(
                &ObjectId::new(*id),
                tokenize(text).into_iter().map(|t| (t, None)).collect(),
            );
        }
        idx
    }

    fn ids(hits: &[SearchHit]) -> Vec<&str> {
        hits.iter().map(|h| h.object.as_str()).collect()
    }

    #[test]
    fn any_and_all_modes() {
        let idx = corpus(&[("A", "data lake metadata"), ("B", "metadata model")]);
        let tk = Tokenizer::default();
        let any = search_index(&idx, &tk, "metadata", SearchMode::AnyTerm, None).unwrap();
        assert_eq!(ids(&any), vec!["A", "B"]);
        let all = search_index(&idx, &tk, "lake metadata", SearchMode::AllTerms, None).unwrap();
        assert_eq!(ids(&all), vec!["A"]);
        let ranked = search_index(&idx, &tk, "model metadata lake", SearchMode::AnyTerm, None)
            .unwrap();
        assert_eq!(ranked[0].score, 2);
        assert_eq!(ranked[1].score, 2);
    }

    #[test]
    fn expansion_reaches_synonyms() {
        let idx = corpus(&[("A", "car"), ("B", "bicycle")]);
        let th = Thesaurus::parse("vehicles", "car, automobile\n").unwrap();
        let tk = Tokenizer::default();
        let plain = search_index(&idx, &tk, "automobile", SearchMode::AnyTerm, None).unwrap();
        assert!(plain.is_empty());
        for mode in [SearchMode::AnyTerm, SearchMode::AllTerms] {
            let hits = search_index(&idx, &tk, "automobile", mode, Some(&th)).unwrap();
            assert_eq!(ids(&hits), vec!["A"]);
        }
    }

    #[test]
    fn empty_query_is_rejected() {
        let idx = InvertedIndex::new();
        let err = search_index(&idx, &Tokenizer::default(), " ?! ", SearchMode::AnyTerm, None);
        assert!(matches!(err, Err(Error::EmptyQuery)));
    }
}
