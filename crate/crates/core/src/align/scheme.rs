use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsonl;
use crate::repr::TokenOccurrence;

/// Bundled Penn Treebank to coarse POS mapping.
pub const DEFAULT_COARSE_POS: &str = include_str!("../../data/coarse_pos.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    Occurrence,
    Type,
}

impl std::str::FromStr for Granularity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "occurrence" | "occ" | "token" => Ok(Granularity::Occurrence),
            "type" => Ok(Granularity::Type),
            other => Err(Error::Config(format!("unknown granularity {other:?}"))),
        }
    }
}

/// Tags resolved per occurrence: `tags[occ_id]` is the occurrence's tag set.
/// Type-level schemes are expanded through each occurrence's token type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagScheme {
    name: String,
    granularity: Granularity,
    tags: Vec<BTreeSet<String>>,
}

impl TagScheme {
    pub fn new(name: impl Into<String>, granularity: Granularity, tags: Vec<BTreeSet<String>>) -> Result<Self> {
        let name = name.into();
        if tags.iter().flatten().any(String::is_empty) {
            return Err(Error::Invalid(format!("scheme {name} contains an empty tag")));
        }
        Ok(Self {
            name,
            granularity,
            tags,
        })
    }

    /// Expands a type-level lexicon over `occurrences`.
    pub fn from_type_lexicon(
        name: impl Into<String>,
        lexicon: &HashMap<String, BTreeSet<String>>,
        occurrences: &[TokenOccurrence],
    ) -> Result<Self> {
        let tags = occurrences
            .iter()
            .map(|o| lexicon.get(&o.token_type).cloned().unwrap_or_default())
            .collect();
        Self::new(name, Granularity::Type, tags)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn tags_of(&self, occ: usize) -> &BTreeSet<String> {
        &self.tags[occ]
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OccurrenceLine {
    ById {
        occ_id: usize,
        tags: Vec<String>,
    },
    ByPosition {
        sentence_id: usize,
        position: usize,
        tags: Vec<String>,
    },
}

#[derive(Deserialize)]
struct TypeLine {
    token: String,
    tags: Vec<String>,
}

/// Loads an external scheme file.
///
/// Occurrence files address rows by `occ_id` (which must exist) or by
/// `(sentence_id, position)`; positional rows for tokens outside the selected
/// occurrence set are skipped, since taggers usually label every corpus
/// token. Repeated rows for one occurrence or type accumulate their tags.
pub fn load_scheme(
    path: &Path,
    name: &str,
    granularity: Granularity,
    occurrences: &[TokenOccurrence],
) -> Result<TagScheme> {
    let check_tags = |line: usize, tags: &[String]| -> Result<()> {
        if tags.iter().any(|t| t.trim().is_empty()) {
            return Err(Error::parse(path, line, "empty tag"));
        }
        Ok(())
    };
    match granularity {
        Granularity::Occurrence => {
            let by_pos: HashMap<(usize, usize), usize> = occurrences
                .iter()
                .map(|o| ((o.sentence_id, o.position), o.occ_id))
                .collect();
            let mut tags = vec![BTreeSet::new(); occurrences.len()];
            for (line, row) in jsonl::read::<OccurrenceLine>(path)? {
                let (occ, row_tags) = match row {
                    OccurrenceLine::ById { occ_id, tags } => {
                        if occ_id >= occurrences.len() {
                            return Err(Error::parse(path, line, format!("unknown occ_id {occ_id}")));
                        }
                        (occ_id, tags)
                    }
                    OccurrenceLine::ByPosition {
                        sentence_id,
                        position,
                        tags,
                    } => match by_pos.get(&(sentence_id, position)) {
                        Some(&occ) => (occ, tags),
                        None => continue,
                    },
                };
                check_tags(line, &row_tags)?;
                tags[occ].extend(row_tags);
            }
            TagScheme::new(name, granularity, tags)
        }
        Granularity::Type => {
            let mut lexicon: HashMap<String, BTreeSet<String>> = HashMap::new();
            for (line, row) in jsonl::read::<TypeLine>(path)? {
                check_tags(line, &row.tags)?;
                lexicon.entry(row.token).or_default().extend(row.tags);
            }
            TagScheme::from_type_lexicon(name, &lexicon, occurrences)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Fallback {
    Keep,
    Constant(String),
}

/// Fine-to-coarse tag mapping with exact and prefix (`NN*`) rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagMapping {
    exact: BTreeMap<String, String>,
    /// (prefix, coarse), longest prefix first
    prefixes: Vec<(String, String)>,
    fallback: Fallback,
}

impl TagMapping {
    pub fn identity() -> Self {
        Self {
            exact: BTreeMap::new(),
            prefixes: Vec::new(),
            fallback: Fallback::Keep,
        }
    }

    pub fn default_pos() -> Self {
        Self::parse(DEFAULT_COARSE_POS).expect("bundled mapping parses")
    }

    /// Parses `PATTERN COARSE` lines; unmatched tags map to `OTHER`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut exact = BTreeMap::new();
        let mut prefixes = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let l = line.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = l.split_whitespace().collect();
            let [pattern, coarse] = fields[..] else {
                return Err(Error::Config(format!("mapping line {}: expected `PATTERN COARSE`", i + 1)));
            };
            match pattern.strip_suffix('*') {
                Some(p) => prefixes.push((p.to_string(), coarse.to_string())),
                None => {
                    exact.insert(pattern.to_string(), coarse.to_string());
                }
            }
        }
        prefixes.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        Ok(Self {
            exact,
            prefixes,
            fallback: Fallback::Constant("OTHER".into()),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn map<'a>(&'a self, tag: &'a str) -> &'a str {
        if let Some(c) = self.exact.get(tag) {
            return c;
        }
        if let Some((_, c)) = self.prefixes.iter().find(|(p, _)| tag.starts_with(p.as_str())) {
            return c;
        }
        match &self.fallback {
            Fallback::Keep => tag,
            Fallback::Constant(c) => c,
        }
    }
}

/// Replaces every tag by its coarse image. Keeps the scheme name; use
/// [`TagScheme::renamed`] to distinguish it.
pub fn coarsen_scheme(scheme: &TagScheme, mapping: &TagMapping) -> TagScheme {
    let tags = scheme
        .tags
        .iter()
        .map(|set| set.iter().map(|t| mapping.map(t).to_string()).collect())
        .collect();
    TagScheme {
        name: scheme.name.clone(),
        granularity: scheme.granularity,
        tags,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn occs(tokens: &[&str]) -> Vec<TokenOccurrence> {
        tokens
            .iter()
            .enumerate()
            .map(|(i, t)| TokenOccurrence {
                occ_id: i,
                sentence_id: i / 2,
                position: i % 2,
                token_type: t.to_string(),
            })
            .collect()
    }

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn occurrence_file_by_id_and_position() {
        let o = occs(&["dog", "runs", "cat", "sleeps"]);
        let f = file(
            "{\"occ_id\":0,\"tags\":[\"NN\"]}\n{\"sentence_id\":1,\"position\":1,\"tags\":[\"VBZ\"]}\n{\"sentence_id\":9,\"position\":0,\"tags\":[\"NN\"]}\n",
        );
        let s = load_scheme(f.path(), "POS", Granularity::Occurrence, &o).unwrap();
        assert!(s.tags_of(0).contains("NN"));
        assert!(s.tags_of(3).contains("VBZ"));
        assert!(s.tags_of(1).is_empty());
    }

    #[test]
    fn type_lexicon_tags_every_occurrence() {
        let o = occs(&["salmon", "swim", "salmon", "trout"]);
        let f = file("{\"token\":\"salmon\",\"tags\":[\"noun.animal\"]}\n");
        let s = load_scheme(f.path(), "WordNet", Granularity::Type, &o).unwrap();
        assert!(s.tags_of(0).contains("noun.animal") && s.tags_of(2).contains("noun.animal"));
        assert!(s.tags_of(3).is_empty());
    }

    #[test]
    fn unknown_occ_and_empty_tag_fail() {
        let o = occs(&["a", "b"]);
        let f = file("{\"occ_id\":1000000000,\"tags\":[\"NN\"]}\n");
        assert!(load_scheme(f.path(), "POS", Granularity::Occurrence, &o)
            .unwrap_err()
            .to_string()
            .contains("unknown occ_id"));
        let g = file("{\"occ_id\":0,\"tags\":[\"\"]}\n");
        assert!(load_scheme(g.path(), "POS", Granularity::Occurrence, &o).is_err());
    }

    #[test]
    fn default_pos_mapping() {
        let m = TagMapping::default_pos();
        assert_eq!(m.map("NN"), "NOUN");
        assert_eq!(m.map("NNS"), "NOUN");
        assert_eq!(m.map("VBD"), "VERB");
        assert_eq!(m.map("PRP$"), "PRON");
        assert_eq!(m.map("WDT"), "PRON");
        assert_eq!(m.map("TO"), "ADP");
        assert_eq!(m.map("CD"), "NUM");
        assert_eq!(m.map("UH"), "OTHER");
        let coarse: BTreeSet<&str> = ["NN", "VB", "JJ", "RB", "PRP", "IN", "DT", "CD", "UH"]
            .iter()
            .map(|t| m.map(t))
            .collect();
        assert_eq!(coarse.len(), 9);
    }

    #[test]
    fn identity_mapping_is_noop() {
        let o = occs(&["a", "b"]);
        let s = TagScheme::new(
            "POS",
            Granularity::Occurrence,
            vec![BTreeSet::from(["NN".to_string()]), BTreeSet::from(["XYZ".to_string()])],
        )
        .unwrap();
        assert_eq!(o.len(), s.len());
        assert_eq!(coarsen_scheme(&s, &TagMapping::identity()), s);
    }
}
