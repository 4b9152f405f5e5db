//! Hierarchical concept labels such as `SEM:entertainment:sport:football`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Facet {
    Lex,
    Morph,
    Pos,
    Sem,
    Syn,
}

impl Facet {
    pub const ALL: [Facet; 5] = [Facet::Lex, Facet::Morph, Facet::Pos, Facet::Sem, Facet::Syn];

    pub fn as_str(self) -> &'static str {
        match self {
            Facet::Lex => "LEX",
            Facet::Morph => "MORPH",
            Facet::Pos => "POS",
            Facet::Sem => "SEM",
            Facet::Syn => "SYN",
        }
    }

    /// Accepts the canonical roots and their spelled-out forms, any case.
    fn parse(s: &str) -> Option<Facet> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lex" | "lexical" => Some(Facet::Lex),
            "morph" | "morphology" | "morphological" => Some(Facet::Morph),
            "pos" => Some(Facet::Pos),
            "sem" | "semantic" | "semantics" => Some(Facet::Sem),
            "syn" | "syntax" | "syntactic" => Some(Facet::Syn),
            _ => None,
        }
    }
}

impl fmt::Display for Facet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A facet root plus at least one lowercase path segment.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConceptLabel {
    facet: Facet,
    path: Vec<String>,
}

impl ConceptLabel {
    pub fn new<S: AsRef<str>>(facet: Facet, path: &[S]) -> Result<Self> {
        let text = || {
            std::iter::once(facet.as_str())
                .chain(path.iter().map(|s| s.as_ref()))
                .collect::<Vec<_>>()
                .join(":")
        };
        if path.is_empty() {
            return Err(Error::Label {
                text: text(),
                reason: "label needs at least one segment after the facet".into(),
            });
        }
        let mut segments = Vec::with_capacity(path.len());
        for raw in path {
            let seg = normalize_segment(raw.as_ref());
            if seg.is_empty() {
                return Err(Error::Label {
                    text: text(),
                    reason: "empty segment".into(),
                });
            }
            if let Some(bad) = seg
                .chars()
                .find(|c| !(c.is_ascii_lowercase() || c.is_ascii_digit() || *c == '_' || *c == '-'))
            {
                return Err(Error::Label {
                    text: text(),
                    reason: format!("illegal character {bad:?}"),
                });
            }
            segments.push(seg);
        }
        Ok(Self { facet, path: segments })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut parts = text.split(':');
        let head = parts.next().unwrap_or_default();
        let facet = Facet::parse(head).ok_or_else(|| Error::Label {
            text: text.to_string(),
            reason: format!("unknown facet {:?}", head.trim()),
        })?;
        let rest: Vec<&str> = parts.collect();
        Self::new(facet, &rest).map_err(|e| match e {
            Error::Label { reason, .. } => Error::Label {
                text: text.to_string(),
                reason,
            },
            other => other,
        })
    }

    pub fn facet(&self) -> Facet {
        self.facet
    }

    pub fn path(&self) -> &[String] {
        &self.path
    }

    /// Number of path segments below the facet.
    pub fn depth(&self) -> usize {
        self.path.len()
    }

    /// All strict prefixes that are still labels, shortest first.
    pub fn ancestors(&self) -> Vec<ConceptLabel> {
        (1..self.path.len())
            .map(|d| ConceptLabel {
                facet: self.facet,
                path: self.path[..d].to_vec(),
            })
            .collect()
    }

    pub fn coarsen(&self, depth: usize) -> Result<ConceptLabel> {
        if depth < 1 {
            return Err(Error::Invalid(format!("coarsening depth must be >= 1, got {depth}")));
        }
        Ok(ConceptLabel {
            facet: self.facet,
            path: self.path[..depth.min(self.path.len())].to_vec(),
        })
    }

    pub fn is_ancestor_of(&self, other: &ConceptLabel) -> bool {
        self.facet == other.facet
            && self.path.len() < other.path.len()
            && other.path.starts_with(&self.path)
    }
}

fn normalize_segment(raw: &str) -> String {
    raw.trim()
        .chars()
        .map(|c| if c.is_whitespace() { '_' } else { c })
        .collect::<String>()
        .to_lowercase()
}

impl fmt::Display for ConceptLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.facet.as_str())?;
        for seg in &self.path {
            write!(f, ":{seg}")?;
        }
        Ok(())
    }
}

impl FromStr for ConceptLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConceptLabel::parse(s)
    }
}

impl Serialize for ConceptLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ConceptLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        ConceptLabel::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// The accumulated label vocabulary with per-label usage counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelSet {
    labels: BTreeSet<ConceptLabel>,
    usage: BTreeMap<ConceptLabel, u64>,
}

impl LabelSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a label without counting a use. Returns true if it was new.
    pub fn insert(&mut self, label: ConceptLabel) -> bool {
        self.labels.insert(label)
    }

    /// Adds the label if needed and counts one use of it.
    pub fn record_use(&mut self, label: &ConceptLabel) {
        self.labels.insert(label.clone());
        *self.usage.entry(label.clone()).or_insert(0) += 1;
    }

    pub fn contains(&self, label: &ConceptLabel) -> bool {
        self.labels.contains(label)
    }

    pub fn usage(&self, label: &ConceptLabel) -> u64 {
        self.usage.get(label).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Labels in canonical sorted order.
    pub fn iter(&self) -> impl Iterator<Item = &ConceptLabel> {
        self.labels.iter()
    }

    pub fn sorted_strings(&self) -> Vec<String> {
        let mut v: Vec<String> = self.labels.iter().map(ToString::to_string).collect();
        v.sort();
        v
    }

    /// One label per line; blank lines and `#` comments are skipped.
    pub fn parse_lines(text: &str) -> Result<Self> {
        let mut set = Self::new();
        for line in text.lines() {
            let l = line.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            set.insert(ConceptLabel::parse(l)?);
        }
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_lines(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for l in self.sorted_strings() {
            out.push_str(&l);
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

impl FromIterator<ConceptLabel> for LabelSet {
    fn from_iter<I: IntoIterator<Item = ConceptLabel>>(iter: I) -> Self {
        let mut s = Self::new();
        for l in iter {
            s.insert(l);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn l(s: &str) -> ConceptLabel {
        ConceptLabel::parse(s).unwrap()
    }

    #[test]
    fn parses_hierarchical_labels() {
        let hockey = l("SEM:entertainment:sport:ice_hockey");
        assert_eq!((hockey.facet(), hockey.depth()), (Facet::Sem, 3));
        let first = l("SYN:position:first_word");
        assert_eq!((first.facet(), first.depth()), (Facet::Syn, 2));
        assert_eq!(l("POS:proper-noun").to_string(), "POS:proper-noun");
    }

    #[test]
    fn normalizes_notation() {
        assert_eq!(l("semantic:Entertainment:ice hockey").to_string(), "SEM:entertainment:ice_hockey");
        assert_eq!(l("syntax:position:firstword").facet(), Facet::Syn);
    }

    #[test]
    fn rejects_bad_labels() {
        let unknown = ConceptLabel::parse("FOO:bar").unwrap_err().to_string();
        assert!(unknown.contains("unknown facet"), "{unknown}");
        assert!(ConceptLabel::parse("SEM").is_err());
        assert!(ConceptLabel::parse("SEM::x").unwrap_err().to_string().contains("empty segment"));
        assert!(ConceptLabel::parse("SEM:a.b").unwrap_err().to_string().contains("illegal"));
        assert!(ConceptLabel::parse("sem time").is_err());
    }

    #[test]
    fn ancestors() {
        assert_eq!(l("SEM:a:b:c").ancestors(), vec![l("SEM:a"), l("SEM:a:b")]);
        assert!(l("SEM:a").ancestors().is_empty());
        assert_eq!(l("LEX:case:title_case").ancestors(), vec![l("LEX:case")]);
    }

    #[test]
    fn coarsening() {
        assert_eq!(l("SEM:a:b:c").coarsen(2).unwrap(), l("SEM:a:b"));
        assert_eq!(l("SEM:a").coarsen(5).unwrap(), l("SEM:a"));
        assert_eq!(l("SEM:named_entity:person:last_name").coarsen(1).unwrap(), l("SEM:named_entity"));
        assert!(l("SEM:a").coarsen(0).is_err());
    }

    #[test]
    fn label_set_counts_and_file() {
        let mut set = LabelSet::new();
        set.record_use(&l("SEM:time"));
        set.record_use(&l("SEM:time"));
        assert!(!set.insert(l("SEM:time")));
        assert_eq!(set.usage(&l("SEM:time")), 2);
        set.insert(l("LEX:dots"));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("labels.txt");
        set.write(&p).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "LEX:dots\nSEM:time\n");
        assert_eq!(LabelSet::load(&p).unwrap().sorted_strings(), set.sorted_strings());
    }

    fn arb_label() -> impl Strategy<Value = ConceptLabel> {
        (
            prop::sample::select(Facet::ALL.to_vec()),
            prop::collection::vec("[a-z0-9_-]{1,8}", 1..5),
        )
            .prop_map(|(f, p)| ConceptLabel::new(f, &p).unwrap())
    }

    proptest! {
        #[test]
        fn parse_format_identity(label in arb_label()) {
            let text = label.to_string();
            prop_assert_eq!(ConceptLabel::parse(&text).unwrap(), label.clone());
            prop_assert_eq!(ConceptLabel::parse(&text).unwrap().to_string(), text);
        }

        #[test]
        fn ancestor_chain(label in arb_label()) {
            let anc = label.ancestors();
            prop_assert_eq!(anc.len(), label.depth() - 1);
            for w in anc.windows(2) {
                prop_assert!(w[0].is_ancestor_of(&w[1]));
            }
            if let Some(last) = anc.last() {
                prop_assert!(last.is_ancestor_of(&label));
            }
        }

        #[test]
        fn insertion_order_independent(mut labels in prop::collection::vec(arb_label(), 0..20)) {
            let forward: LabelSet = labels.iter().cloned().collect();
            labels.reverse();
            let mut backward: LabelSet = labels.iter().cloned().collect();
            for l in &labels {
                backward.insert(l.clone());
            }
            prop_assert_eq!(forward, backward);
        }
    }
}
