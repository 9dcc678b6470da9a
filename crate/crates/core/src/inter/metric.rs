use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::index::tokenize;
use crate::ingest::{schema_from_bytes, DetectedFormat};

/// Raw bytes of one node together with its format label.
#[derive(Debug, Clone, Copy)]
pub struct Content<'a> {
    pub format: &'a str,
    pub bytes: &'a [u8],
}

/// A symmetric similarity in `[0, 1]` between two contents.
pub trait SimilarityMetric: Send + Sync {
    fn name(&self) -> &str;
    fn applicable_formats(&self) -> &[&'static str];
    fn compute(&self, a: Content<'_>, b: Content<'_>) -> Result<f64>;

    fn applies_to(&self, format: &str) -> bool {
        self.applicable_formats().contains(&format)
    }
}

/// `|a ∩ b| / |a ∪ b|`; two empty sets give 0.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Word-set Jaccard over the default tokenizer.
pub fn token_jaccard(a: &str, b: &str) -> f64 {
    let a: BTreeSet<String> = tokenize(a).into_iter().collect();
    let b: BTreeSet<String> = tokenize(b).into_iter().collect();
    jaccard(&a, &b)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TokenJaccard;

impl SimilarityMetric for TokenJaccard {
    fn name(&self) -> &str {
        "token-jaccard"
    }

    fn applicable_formats(&self) -> &[&'static str] {
        &["text"]
    }

    fn compute(&self, a: Content<'_>, b: Content<'_>) -> Result<f64> {
        Ok(token_jaccard(
            &String::from_utf8_lossy(a.bytes),
            &String::from_utf8_lossy(b.bytes),
        ))
    }
}

/// Jaccard over the schema path sets of structured documents.
#[derive(Debug, Clone, Copy, Default)]
pub struct SchemaOverlap;

impl SchemaOverlap {
    fn paths(c: Content<'_>) -> Result<BTreeSet<String>> {
        let format: DetectedFormat = c
            .format
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("unknown format `{}`", c.format)))?;
        let summary = schema_from_bytes(c.bytes, format, c.format)?;
        Ok(summary.schema_paths().into_iter().map(str::to_owned).collect())
    }
}

impl SimilarityMetric for SchemaOverlap {
    fn name(&self) -> &str {
        "schema-overlap"
    }

    fn applicable_formats(&self) -> &[&'static str] {
        &["csv", "json", "xml"]
    }

    fn compute(&self, a: Content<'_>, b: Content<'_>) -> Result<f64> {
        Ok(jaccard(&Self::paths(a)?, &Self::paths(b)?))
    }
}

/// Metrics addressable by name.
#[derive(Clone, Default)]
pub struct MetricRegistry {
    metrics: BTreeMap<String, Arc<dyn SimilarityMetric>>,
}

impl fmt::Debug for MetricRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.metrics.keys()).finish()
    }
}

impl MetricRegistry {
    pub fn with_builtins() -> Self {
        let mut r = Self::default();
        r.register(Arc::new(TokenJaccard));
        r.register(Arc::new(SchemaOverlap));
        r
    }

    /// Adds or replaces a metric under its own name.
    pub fn register(&mut self, metric: Arc<dyn SimilarityMetric>) {
        self.metrics.insert(metric.name().to_owned(), metric);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn SimilarityMetric>> {
        self.metrics
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownMetric(name.to_owned()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.metrics.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_jaccard_examples() {
        assert_eq!(token_jaccard("the cat sat", "the dog sat"), 0.5);
        assert_eq!(token_jaccard("same words", "words same"), 1.0);
        assert_eq!(token_jaccard("", ""), 0.0);
        assert_eq!(token_jaccard("a", ""), 0.0);
    }

    #[test]
    fn schema_overlap_compares_paths() {
        let m = SchemaOverlap;
        let a = Content { format: "json", bytes: br#"{"a":1,"b":2}"# };
        let b = Content { format: "json", bytes: br#"{"a":"x","c":true}"# };
        assert!((m.compute(a, b).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(m.compute(a, a).unwrap(), 1.0);
    }

    #[test]
    fn registry_lookup() {
        let r = MetricRegistry::with_builtins();
        assert_eq!(r.names().collect::<Vec<_>>(), vec!["schema-overlap", "token-jaccard"]);
        assert!(matches!(r.get("cosine"), Err(Error::UnknownMetric(_))));
    }
}
