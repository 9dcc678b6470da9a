use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::ParseError;

/// Synonym classes plus an optional broader-term relation.
///
/// Text format, one entry per line:
///
/// ```text
/// # comment
/// car, automobile, motorcar
/// sedan > car
/// ```
///
/// Terms are trimmed and lowercased. A term may belong to at most one class,
/// may have at most one broader term, and the broader relation is acyclic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Thesaurus {
    name: String,
    classes: Vec<BTreeSet<String>>,
    broader: BTreeMap<String, String>,
    class_of: BTreeMap<String, usize>,
}

impl Thesaurus {
    pub fn parse(name: &str, text: &str) -> Result<Self, ParseError> {
        let mut th = Thesaurus {
            name: name.to_owned(),
            classes: Vec::new(),
            broader: BTreeMap::new(),
            class_of: BTreeMap::new(),
        };
        let mut broader_lines: BTreeMap<String, u64> = BTreeMap::new();
        let err = |line: usize, col: usize, msg: String| {
            ParseError::new(name, msg).at_line(line as u64 + 1, col as u64 + 1)
        };

        for (lineno, raw) in text.lines().enumerate() {
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if let Some(gt) = raw.find('>') {
                let narrow = raw[..gt].trim().to_lowercase();
                let broad = raw[gt + 1..].trim().to_lowercase();
                if narrow.is_empty() || broad.is_empty() || broad.contains('>') {
                    return Err(err(lineno, gt, "expected `term > broader`".into()));
                }
                if narrow.contains(',') || broad.contains(',') {
                    return Err(err(lineno, gt, "broader-term lines hold exactly two terms".into()));
                }
                if narrow == broad {
                    return Err(err(lineno, gt, format!("`{narrow}` is broader than itself")));
                }
                if th.broader.insert(narrow.clone(), broad).is_some() {
                    return Err(err(lineno, 0, format!("`{narrow}` has two broader terms")));
                }
                broader_lines.insert(narrow, lineno as u64 + 1);
                continue;
            }

            let mut class = BTreeSet::new();
            let mut col = 0usize;
            for piece in raw.split(',') {
                let lead = piece.len() - piece.trim_start().len();
                let term = piece.trim().to_lowercase();
                if term.is_empty() {
                    return Err(err(lineno, raw[..col].chars().count(), "empty term".into()));
                }
                if th.class_of.contains_key(&term) {
                    let c = raw[..col + lead].chars().count();
                    return Err(err(lineno, c, format!("term `{term}` in two classes")));
                }
                class.insert(term);
                col += piece.len() + 1;
            }
            let idx = th.classes.len();
            for term in &class {
                th.class_of.insert(term.clone(), idx);
            }
            th.classes.push(class);
        }

        // Walk each broader chain; revisiting a term means a cycle.
        for start in th.broader.keys() {
            let mut seen = BTreeSet::from([start.as_str()]);
            let mut current = start.as_str();
            while let Some(next) = th.broader.get(current) {
                if !seen.insert(next.as_str()) {
                    let line = broader_lines.get(start).copied().unwrap_or(0);
                    return Err(ParseError::new(
                        name,
                        format!("broader-term cycle through `{start}`"),
                    )
                    .at_line(line, 1));
                }
                current = next;
            }
        }
        Ok(th)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn classes(&self) -> &[BTreeSet<String>] {
        &self.classes
    }

    pub fn broader_terms(&self) -> &BTreeMap<String, String> {
        &self.broader
    }

    pub fn broader(&self, term: &str) -> Option<&str> {
        self.broader.get(&term.trim().to_lowercase()).map(String::as_str)
    }

    /// The synonym class holding `term`, if any.
    pub fn class_of(&self, term: &str) -> Option<&BTreeSet<String>> {
        self.class_of
            .get(&term.trim().to_lowercase())
            .map(|&i| &self.classes[i])
    }

    /// Lexicographically smallest member of the term's class, or the
    /// normalized term itself when it has no class.
    pub fn canonical(&self, term: &str) -> String {
        let norm = term.trim().to_lowercase();
        match self.class_of(&norm).and_then(|c| c.first()) {
            Some(first) => first.clone(),
            None => norm,
        }
    }

    /// Input terms plus every synonym of each of them.
    pub fn expand<'a, I>(&self, terms: I) -> BTreeSet<String>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut out = BTreeSet::new();
        for term in terms {
            let norm = term.trim().to_lowercase();
            if let Some(class) = self.class_of(&norm) {
                out.extend(class.iter().cloned());
            }
            out.insert(norm);
        }
        out
    }

    /// Canonical text rendering (classes first, then broader pairs).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for class in &self.classes {
            let terms: Vec<&str> = class.iter().map(String::as_str).collect();
            let _ = writeln!(out, "{}", terms.join(", "));
        }
        for (narrow, broad) in &self.broader {
            let _ = writeln!(out, "{narrow} > {broad}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_classes_and_broader_terms() {
        let th = Thesaurus::parse(
            "t",
            "# vehicles\nCar, Automobile\n\nbike, bicycle\nsedan > car\n",
        )
        .unwrap();
        assert_eq!(th.classes().len(), 2);
        assert_eq!(th.canonical("car"), "automobile");
        assert_eq!(th.canonical("  CAR "), "automobile");
        assert_eq!(th.canonical("zebra"), "zebra");
        assert_eq!(th.broader("sedan"), Some("car"));
        let reparsed = Thesaurus::parse("t", &th.to_text()).unwrap();
        assert_eq!(reparsed.classes(), th.classes());
    }

    #[test]
    fn expansion_is_monotone_and_idempotent() {
        let th = Thesaurus::parse("t", "car, automobile\n").unwrap();
        let once = th.expand(["car"]);
        assert_eq!(once, BTreeSet::from(["car".to_string(), "automobile".to_string()]));
        let twice = th.expand(once.iter().map(String::as_str));
        assert_eq!(once, twice);
        assert_eq!(th.expand(["zebra"]), BTreeSet::from(["zebra".to_string()]));
    }

    #[test]
    fn overlapping_classes_are_rejected() {
        let err = Thesaurus::parse("t", "car, automobile\nvan,  car\n").unwrap_err();
        assert_eq!(err.line, Some(2));
        assert_eq!(err.column, Some(7));
        assert!(err.message.contains("term `car` in two classes"), "{err}");
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(Thesaurus::parse("t", "a,,b\n").is_err());
        assert!(Thesaurus::parse("t", "a > \n").is_err());
        assert!(Thesaurus::parse("t", "a > b\nb > a\n").is_err());
        assert!(Thesaurus::parse("t", "a > b\na > c\n").is_err());
        assert!(Thesaurus::parse("t", "a > b > c\n").is_err());
    }
}
