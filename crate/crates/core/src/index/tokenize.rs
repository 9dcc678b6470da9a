use std::collections::BTreeSet;

/// Lowercases, splits on runs of non-alphanumeric characters and drops
/// stopwords (exact matches after lowercasing).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tokenizer {
    stopwords: BTreeSet<String>,
}

impl Tokenizer {
    pub fn new<I, S>(stopwords: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            stopwords: stopwords
                .into_iter()
                .map(|s| s.as_ref().trim().to_lowercase())
                .filter(|s| !s.is_empty())
                .collect(),
        }
    }

    pub fn stopwords(&self) -> &BTreeSet<String> {
        &self.stopwords
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .filter(|t| !self.stopwords.contains(t))
            .collect()
    }
}

/// Tokenizes with an empty stopword list.
pub fn tokenize(text: &str) -> Vec<String> {
    Tokenizer::default().tokenize(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_and_lowercases() {
        assert_eq!(tokenize("Data-Lake metadata!"), vec!["data", "lake", "metadata"]);
        assert!(tokenize("").is_empty());
        assert!(tokenize(" -- ,, ").is_empty());
        assert_eq!(tokenize("Émile's café"), vec!["émile", "s", "café"]);
        assert_eq!(tokenize("a1b2 c3"), vec!["a1b2", "c3"]);
    }

    #[test]
    fn stopwords_are_exact_matches() {
        let t = Tokenizer::new(["The", "of"]);
        assert_eq!(t.tokenize("The theory of THE lake"), vec!["theory", "lake"]);
    }

    #[test]
    fn deterministic() {
        let text = "Repeat: same input, same OUTPUT.";
        assert_eq!(tokenize(text), tokenize(text));
    }
}
