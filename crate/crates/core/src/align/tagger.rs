use std::collections::BTreeSet;

use super::{Granularity, NgramRange, TagScheme};
use crate::error::{Error, Result};
use crate::repr::{Corpus, TokenOccurrence};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Casing {
    Title,
    Upper,
    Lower,
    Mixed,
    Other,
}

impl Casing {
    pub fn as_str(self) -> &'static str {
        match self {
            Casing::Title => "title",
            Casing::Upper => "upper",
            Casing::Lower => "lower",
            Casing::Mixed => "mixed",
            Casing::Other => "other",
        }
    }
}

/// Only cased letters count; digits, punctuation and uncased scripts are
/// ignored.
pub fn casing_of(token: &str) -> Casing {
    let letters: Vec<char> = token.chars().filter(|c| c.is_uppercase() || c.is_lowercase()).collect();
    if letters.is_empty() {
        return Casing::Other;
    }
    let first_is_upper = token.chars().next().is_some_and(char::is_uppercase);
    if first_is_upper && letters[1..].iter().all(|c| c.is_lowercase()) {
        return Casing::Title;
    }
    if letters.len() >= 2 && letters.iter().all(|c| c.is_uppercase()) {
        return Casing::Upper;
    }
    if letters.iter().all(|c| c.is_lowercase()) {
        return Casing::Lower;
    }
    Casing::Mixed
}

pub fn tag_casing(occurrences: &[TokenOccurrence]) -> TagScheme {
    let tags = occurrences
        .iter()
        .map(|o| BTreeSet::from([casing_of(&o.token_type).as_str().to_string()]))
        .collect();
    TagScheme::new("Casing", Granularity::Occurrence, tags).expect("casing tags are non-empty")
}

/// `first_word` at position 0, `last_word` at the final position.
pub fn tag_position(occurrences: &[TokenOccurrence], corpus: &Corpus) -> Result<TagScheme> {
    let mut tags = Vec::with_capacity(occurrences.len());
    for o in occurrences {
        let len = corpus
            .sentence(o.sentence_id)
            .map(|s| s.tokens.len())
            .ok_or_else(|| Error::Invalid(format!("occurrence {} references unknown sentence {}", o.occ_id, o.sentence_id)))?;
        if o.position >= len {
            return Err(Error::Invalid(format!(
                "occurrence {} position {} outside sentence of length {len}",
                o.occ_id, o.position
            )));
        }
        let mut set = BTreeSet::new();
        if o.position == 0 {
            set.insert("first_word".to_string());
        }
        if o.position + 1 == len {
            set.insert("last_word".to_string());
        }
        tags.push(set);
    }
    TagScheme::new("Position", Granularity::Occurrence, tags)
}

/// Prefix and suffix lists, stored lowercase.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AffixLists {
    prefixes: Vec<String>,
    suffixes: Vec<String>,
}

impl AffixLists {
    pub fn new<S: AsRef<str>>(prefixes: &[S], suffixes: &[S]) -> Result<Self> {
        let clean = |list: &[S]| -> Result<Vec<String>> {
            list.iter()
                .map(|a| {
                    let a = a.as_ref().trim().to_lowercase();
                    if a.chars().count() < 2 {
                        Err(Error::Config(format!("affix {a:?} must have at least 2 characters")))
                    } else {
                        Ok(a)
                    }
                })
                .collect()
        };
        Ok(Self {
            prefixes: clean(prefixes)?,
            suffixes: clean(suffixes)?,
        })
    }

    /// A small English default: common derivational and inflectional affixes.
    pub fn english() -> Self {
        Self::new(
            &["un", "in", "re", "dis", "anti", "non", "pre", "over", "mis"],
            &["est", "ly", "ing", "ed", "ion", "ties", "ness", "ment", "able", "er"],
        )
        .expect("bundled affixes are valid")
    }
}

/// Case-insensitive `prefix:X` / `suffix:X` tags; an occurrence may carry
/// several.
pub fn tag_affix(occurrences: &[TokenOccurrence], affixes: &AffixLists) -> TagScheme {
    let tags = occurrences
        .iter()
        .map(|o| {
            let lower = o.token_type.to_lowercase();
            let mut set = BTreeSet::new();
            for p in affixes.prefixes.iter().filter(|p| lower.starts_with(p.as_str())) {
                set.insert(format!("prefix:{p}"));
            }
            for s in affixes.suffixes.iter().filter(|s| lower.ends_with(s.as_str())) {
                set.insert(format!("suffix:{s}"));
            }
            set
        })
        .collect();
    TagScheme::new("Affix", Granularity::Occurrence, tags).expect("affix tags are non-empty")
}

/// Tags every occurrence with all character n-grams of its type in `range`.
pub fn tag_ngrams(occurrences: &[TokenOccurrence], range: NgramRange) -> TagScheme {
    let tags = occurrences
        .iter()
        .map(|o| range.ngrams(&o.token_type).into_iter().map(str::to_string).collect())
        .collect();
    TagScheme::new("Ngram", Granularity::Type, tags).expect("ngrams are non-empty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repr::CorpusSentence;

    fn occ(token: &str) -> TokenOccurrence {
        TokenOccurrence {
            occ_id: 0,
            sentence_id: 0,
            position: 0,
            token_type: token.to_string(),
        }
    }

    #[test]
    fn casing_classes() {
        assert_eq!(casing_of("Germany"), Casing::Title);
        assert_eq!(casing_of("NATO"), Casing::Upper);
        assert_eq!(casing_of("iPhone"), Casing::Mixed);
        assert_eq!(casing_of("running"), Casing::Lower);
        assert_eq!(casing_of("1984"), Casing::Other);
        assert_eq!(casing_of("A"), Casing::Title);
        assert_eq!(casing_of("U.S."), Casing::Upper);
        assert_eq!(casing_of("McDonald"), Casing::Mixed);
        assert!(tag_casing(&[occ("NATO")]).tags_of(0).contains("upper"));
    }

    #[test]
    fn positions() {
        let corpus = Corpus::new(vec![
            CorpusSentence { sentence_id: 0, text: String::new(), tokens: vec!["a".into(), "b".into(), "c".into(), "d".into()] },
            CorpusSentence { sentence_id: 1, text: String::new(), tokens: vec!["x".into(), "y".into(), "z".into()] },
        ])
        .unwrap();
        let mk = |s, p| TokenOccurrence { occ_id: 0, sentence_id: s, position: p, token_type: "t".into() };
        let s = tag_position(&[mk(0, 0), mk(0, 3), mk(1, 1)], &corpus).unwrap();
        assert_eq!(s.tags_of(0), &BTreeSet::from(["first_word".to_string()]));
        assert_eq!(s.tags_of(1), &BTreeSet::from(["last_word".to_string()]));
        assert!(s.tags_of(2).is_empty());
        assert!(tag_position(&[mk(1, 3)], &corpus).is_err());
    }

    #[test]
    fn affixes() {
        let lists = AffixLists::new(&["un", "anti"], &["est", "ly"]).unwrap();
        let s = tag_affix(&[occ("strongest"), occ("unhappy"), occ("cat"), occ("UNLIKELY")], &lists);
        assert_eq!(s.tags_of(0), &BTreeSet::from(["suffix:est".to_string()]));
        assert_eq!(s.tags_of(1), &BTreeSet::from(["prefix:un".to_string()]));
        assert!(s.tags_of(2).is_empty());
        assert_eq!(
            s.tags_of(3),
            &BTreeSet::from(["prefix:un".to_string(), "suffix:ly".to_string()])
        );
        assert!(AffixLists::new(&["u"], &[]).is_err());
    }
}
